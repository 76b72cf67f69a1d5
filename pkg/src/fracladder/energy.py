"""Truncated energy, its gradient, the coercivity lower bound and bump test functions.

    E(u) = 1/2 u'Au + mu/2 u'Mu - h sum_i G_k(u_i)

with M the consistent mass matrix and the nonlinear term lumped at the nodes.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .grid import interpolate
from .operator import assemble_mass


@dataclass(frozen=True, eq=False)
class EnergyModel:
    stiffness: object
    mass: object
    mu: float
    gk: object
    C1: float

    @property
    def grid(self):
        return self.stiffness.grid

    @property
    def h(self):
        return self.stiffness.grid.h


def embedding_constant(stiffness):
    """Smallest C with sqrt(h sum u_i^2) <= C ||u||_X on nodal vectors.

    Equals 1/sqrt(lambda_min(A, hI)); the lumped L2 norm is the one that
    bounds the lumped nonlinear term, which makes ``lower_bound`` rigorous.
    """
    cached = stiffness.metadata.get("_lambda_min")
    if cached is None:
        cached = float(np.linalg.eigvalsh(stiffness.matrix)[0])
        stiffness.metadata["_lambda_min"] = cached
    return float(np.sqrt(stiffness.grid.h / cached))


def build_model(stiffness, gk, mu=None, mass=None):
    mu = gk.mu if mu is None else float(mu)
    if mu < 0:
        raise InvalidArgumentError(f"shift mu must be nonnegative, got {mu}")
    mass = mass or assemble_mass(stiffness.grid, lumped=False)
    return EnergyModel(stiffness, mass, mu, gk, embedding_constant(stiffness))


def energy(model, u):
    u = np.asarray(u, dtype=float)
    Au = model.stiffness.matrix @ u
    quad = 0.5 * float(u @ Au)
    if model.mu:
        quad += 0.5 * model.mu * float(u @ (model.mass.matrix @ u))
    if model.gk is None:
        return quad
    return quad - model.h * float(np.sum(model.gk.G(u)))


def gradient(model, u):
    u = np.asarray(u, dtype=float)
    grad = model.stiffness.matrix @ u
    if model.mu:
        grad = grad + model.mu * (model.mass.matrix @ u)
    if model.gk is not None:
        grad = grad - model.h * model.gk.g(u)
    return grad


def energy_and_gradient(model, u):
    """Both values sharing one stiffness product."""
    u = np.asarray(u, dtype=float)
    Au = model.stiffness.matrix @ u
    e = 0.5 * float(u @ Au)
    grad = Au
    if model.mu:
        Mu = model.mass.matrix @ u
        e += 0.5 * model.mu * float(u @ Mu)
        grad = grad + model.mu * Mu
    if model.gk is not None:
        e -= model.h * float(np.sum(model.gk.G(u)))
        grad = grad - model.h * model.gk.g(u)
    return e, grad


def lower_bound(model):
    """-1/2 (C1 sup|g_k| |Omega|^(1/2))^2, a bound valid for every u >= 0."""
    if model.gk is None:
        return 0.0
    sup = model.gk.sup_abs()
    return -0.5 * (model.C1 * sup * np.sqrt(model.grid.measure)) ** 2


@dataclass(frozen=True)
class BumpSpec:
    """Plateau of height ``zeta`` on |x - c| <= R with linear ramps to 0 at 2R."""

    R: float
    zeta: float = 1.0
    center: float = 0.0


def bump_profile(bump, x):
    r = np.abs(np.asarray(x, dtype=float) - bump.center)
    return bump.zeta * np.clip((2.0 * bump.R - r) / bump.R, 0.0, 1.0)


def build_bump(grid, bump):
    if not bump.R > 0:
        raise InvalidArgumentError(f"bump radius must be positive, got {bump.R!r}")
    if 2.0 * bump.R > grid.half_width - abs(bump.center) + 1e-14 * grid.half_width:
        raise InvalidArgumentError(
            f"bump support [{bump.center - 2 * bump.R}, {bump.center + 2 * bump.R}] "
            f"leaves the domain (-{grid.half_width}, {grid.half_width})"
        )
    return interpolate(grid, lambda x: float(bump_profile(bump, x)))


def bump_energy_constant(stiffness, R, center=0.0):
    """z'Az for the unit-height bump; z_zeta'Az_zeta = zeta^2 times this."""
    z = build_bump(stiffness.grid, BumpSpec(R, 1.0, center))
    return stiffness.quad(z)
