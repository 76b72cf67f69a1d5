"""Box-constrained minimization of the truncated energy.

Spectral projected gradient (Barzilai-Borwein steps with a Grippo-Lampariello-
Lucidi nonmonotone line search) over the box 0 <= u_i <= eta, run from several
starts. The nonmonotone reference value never exceeds the start energy, so
every accepted iterate has energy at most that of its start.
"""
from dataclasses import dataclass, field

import numpy as np

from .energy import BumpSpec, build_bump, energy, energy_and_gradient, gradient
from .errors import InvalidArgumentError, NonConvergenceError
from .grid import linf_norm
from .nonlinearity import oscillation_peaks


@dataclass(frozen=True)
class BoxConstraint:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgumentError(f"box upper bound must be positive, got {self.eta!r}")


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 50_000
    random_starts: int = 2
    rng_seed: int = 0
    memory: int = 10
    bump_starts: int = 3
    bump_radii: tuple = (0.25, 0.5)  # as fractions of L
    sep_factor: float = 1e-4
    tie_tol: float = 1e-12


@dataclass
class SolutionRecord:
    u: np.ndarray
    energy: float
    pg_norm: float
    linf: float
    xnorm: float
    eta: float
    iterations: int
    start_label: str
    converged: bool
    start_energy: float
    min_energy_seen: float
    evaluations: int
    delta_ok: bool = None
    delta_margin: float = None
    residual: float = None

    def summary(self):
        return {
            "energy": self.energy,
            "pg_norm": self.pg_norm,
            "linf": self.linf,
            "xnorm": self.xnorm,
            "eta": self.eta,
            "iterations": self.iterations,
            "start": self.start_label,
            "converged": self.converged,
            "residual": self.residual,
            "delta_ok": self.delta_ok,
            "delta_margin": self.delta_margin,
        }


def project(u, box):
    eta = box.eta if isinstance(box, BoxConstraint) else float(box)
    return np.clip(np.asarray(u, dtype=float), 0.0, eta)


def projected_gradient_norm(u, grad, eta):
    return float(np.linalg.norm(u - np.clip(u - grad, 0.0, eta)))


def residual_norm(model, record_or_u, eta=None):
    """Gradient on free nodes plus sign violations at active bounds."""
    if isinstance(record_or_u, SolutionRecord):
        u, eta = record_or_u.u, record_or_u.eta
    else:
        u = np.asarray(record_or_u, dtype=float)
    grad = gradient(model, u)
    free = (u > 0) & (u < eta)
    r = np.where(free, grad, 0.0)
    r = r + np.where(u <= 0, np.minimum(grad, 0.0), 0.0)
    r = r + np.where(u >= eta, np.maximum(grad, 0.0), 0.0)
    return float(np.linalg.norm(r))


def _spg(model, x, eta, tol, max_iter, memory):
    gamma, amin, amax = 1e-4, 1e-12, 1e12
    f, g = energy_and_gradient(model, x)
    f_start = f_min = f
    evals = 1
    history = [f]
    pg = projected_gradient_norm(x, g, eta)
    alpha = 1.0 / max(np.max(np.abs(x - np.clip(x - g, 0.0, eta))), 1e-300)
    alpha = min(max(alpha, amin), amax)
    it = 0
    while pg > tol and it < max_iter:
        it += 1
        d = np.clip(x - alpha * g, 0.0, eta) - x
        gd = float(g @ d)
        if gd >= 0:
            break  # no descent direction left at working precision
        f_ref = max(history[-memory:])
        lam = 1.0
        while True:
            x_new = x + lam * d
            f_new, g_new = energy_and_gradient(model, x_new)
            evals += 1
            f_min = min(f_min, f_new)
            if f_new <= f_ref + gamma * lam * gd:
                break
            denom = 2.0 * (f_new - f - lam * gd)
            lam_q = -gd * lam * lam / denom if denom > 0 else 0.5 * lam
            lam = min(max(lam_q, 0.1 * lam), 0.5 * lam)
            if lam < 1e-20:
                break
        if lam < 1e-20:
            break
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        alpha = min(max(float(s @ s) / sy, amin), amax) if sy > 0 else amax
        x, f, g = x_new, f_new, g_new
        history.append(f)
        pg = projected_gradient_norm(x, g, eta)
    return x, f, pg, it, f_start, f_min, evals


def minimize_in_box(model, box, starts, opts=SolverOptions()):
    """Run SPG from every start and return the best converged record.

    ``starts`` is a list of vectors or of ``(label, vector)`` pairs.
    Raises NonConvergenceError (carrying the best partial record) when no
    start converges.
    """
    if not starts:
        raise InvalidArgumentError("need at least one start")
    eta = box.eta
    tol = opts.tol * np.sqrt(model.grid.n_interior)
    records = []
    for i, item in enumerate(starts):
        label, u0 = item if isinstance(item, tuple) else (f"start{i:03d}", item)
        x0 = project(model.grid.check(u0), box)
        x, f, pg, it, f0, fmin, evals = _spg(model, x0, eta, tol, opts.max_iter, opts.memory)
        rec = SolutionRecord(
            u=x, energy=f, pg_norm=pg, linf=linf_norm(x),
            xnorm=model.stiffness.seminorm(x), eta=eta, iterations=it,
            start_label=label, converged=pg <= tol, start_energy=f0,
            min_energy_seen=fmin, evaluations=evals,
        )
        rec.residual = residual_norm(model, rec)
        records.append(rec)
    return select_best(records, opts)


def _rank(records, tie_tol):
    best = min(r.energy for r in records)
    near = [r for r in records if r.energy <= best + tie_tol * max(1.0, abs(best))]
    return min(near, key=lambda r: (r.linf, r.start_label))


def select_best(records, opts=SolverOptions()):
    converged = [r for r in records if r.converged]
    if not converged:
        best = _rank(records, opts.tie_tol)
        raise NonConvergenceError(
            f"no start converged within {opts.max_iter} iterations "
            f"(best projected-gradient norm {min(r.pg_norm for r in records):.3e})",
            best=best,
        )
    chosen = _rank(converged, opts.tie_tol)
    chosen.min_energy_seen = min(r.min_energy_seen for r in records)
    return chosen


def check_box_membership(record, delta, tol=0.0):
    if not delta < record.eta:
        raise InvalidArgumentError(f"delta {delta!r} must be below the box bound {record.eta!r}")
    margin = float(delta - np.max(record.u, initial=0.0))
    return margin >= -tol, margin


@dataclass
class Grouping:
    groups: list
    representatives: list = field(default_factory=list)

    @property
    def count(self):
        return len(self.groups)


def distinctness(records, sep):
    """Greedy grouping by L-infinity distance below ``sep``."""
    if not sep > 0:
        raise InvalidArgumentError("separation must be positive")
    groups = []
    for i, r in enumerate(records):
        for grp in groups:
            if any(np.max(np.abs(r.u - records[j].u), initial=0.0) < sep for j in grp):
                grp.append(i)
                break
        else:
            groups.append([i])
    reps = [min(grp, key=lambda j: (records[j].energy, j)) for grp in groups]
    return Grouping(groups, reps)


def bump_candidates(model, eta, composite, radii):
    """Exact energies of plateau bumps at every oscillation peak below eta.

    Uses that the nodal bump of height zeta is zeta times the unit bump, so
    the quadratic part is one number per radius. Sorted by energy.
    """
    grid = model.grid
    L = grid.half_width
    heights = np.asarray(oscillation_peaks(composite, eta))
    out = []
    for frac in radii:
        z1 = build_bump(grid, BumpSpec(frac * L, 1.0))
        quad = float(z1 @ (model.stiffness.matrix @ z1))
        if model.mu:
            quad += model.mu * float(z1 @ (model.mass.matrix @ z1))
        support = z1[z1 > 0]
        for chunk in np.array_split(heights, max(1, heights.size // 256)):
            vals = model.gk.G(chunk[:, None] * support[None, :]).sum(axis=1)
            for zeta, gsum in zip(chunk, vals):
                e = 0.5 * quad * zeta * zeta - grid.h * float(gsum)
                out.append((e, f"bump_R{frac:g}L_h{zeta:.12g}", frac, float(zeta)))
    out.sort(key=lambda c: (c[0], c[1]))
    return out


def build_starts(model, box, composite, opts=SolverOptions()):
    """Zero vector, plateau bumps with the lowest energies among heights at
    oscillation peaks below eta, and uniform random feasible vectors.

    Returns ``(starts, certificate)`` where the certificate is
    ``(label, vector, energy)`` of the best bump; its energy is recomputed
    from the assembled vector so it matches the solver's start energy.
    """
    grid = model.grid
    L = grid.half_width
    starts = [("zero", np.zeros(grid.n_interior))]
    cands = bump_candidates(model, box.eta, composite, opts.bump_radii)
    cert = None
    for k, (_, label, frac, zeta) in enumerate(cands[: opts.bump_starts]):
        z = build_bump(grid, BumpSpec(frac * L, zeta))
        starts.append((label, z))
        if k == 0:
            cert = (label, z, energy(model, z))
    rng = np.random.default_rng(opts.rng_seed)
    for i in range(opts.random_starts):
        starts.append((f"random{i:02d}", rng.uniform(0.0, box.eta, grid.n_interior)))
    return starts, cert
