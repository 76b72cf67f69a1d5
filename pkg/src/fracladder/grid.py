"""Uniform grids on the interval (-L, L) with implicit zero extension."""
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, InvalidArgumentError


@dataclass(frozen=True)
class Grid:
    """Interior nodes x_i = -L + i*h, i = 1..n, with h = 2L/(n+1).

    A nodal vector of length ``n_interior`` stands for the continuous
    piecewise-linear function that vanishes at +-L and outside the interval.
    """

    half_width: float
    n_interior: int

    @property
    def h(self):
        return 2.0 * self.half_width / (self.n_interior + 1)

    @property
    def nodes(self):
        return -self.half_width + self.h * np.arange(1, self.n_interior + 1)

    @property
    def n_elements(self):
        return self.n_interior + 1

    @property
    def measure(self):
        return 2.0 * self.half_width

    def check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_interior,):
            raise InvalidArgumentError(
                f"nodal vector has shape {u.shape}, grid expects ({self.n_interior},)"
            )
        return u

    def evaluate(self, u, x):
        """Value of the piecewise-linear function of ``u`` at positions ``x``."""
        u = self.check(u)
        full = np.concatenate(([0.0], u, [0.0]))
        xs = np.concatenate(([-self.half_width], self.nodes, [self.half_width]))
        return np.interp(x, xs, full, left=0.0, right=0.0)


def build_grid(L, n_interior):
    if not (np.isfinite(L) and L > 0):
        raise InvalidArgumentError(f"half width must be positive, got {L!r}")
    if int(n_interior) != n_interior or n_interior < 3:
        raise InvalidArgumentError(f"need at least 3 interior nodes, got {n_interior!r}")
    return Grid(float(L), int(n_interior))


def interpolate(grid, fn):
    x = grid.nodes
    values = np.array([fn(xi) for xi in x], dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = bad[0]
        raise EvaluationError(f"non-finite value {values[i]!r} at node {i + 1} (x={x[i]!r})")
    return values


def linf_norm(u):
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u))) if u.size else 0.0
