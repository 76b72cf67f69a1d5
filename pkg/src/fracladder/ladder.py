"""Ladder pipelines: one truncated minimization per sign-negativity rung,
followed by the ordering, negativity, box and norm checks, the lambda-window
estimate and lambda sweeps."""
from dataclasses import dataclass, field

import numpy as np

from .energy import build_model, bump_energy_constant, energy, lower_bound
from .errors import InvalidArgumentError, InvalidStateError
from .nonlinearity import scan_sign_ladder, truncate
from .operator import assemble_stiffness
from .solver import (
    BoxConstraint,
    SolverOptions,
    build_starts,
    check_box_membership,
    distinctness,
    minimize_in_box,
)


@dataclass(frozen=True)
class HarnessOptions:
    K: int = 3
    search_range: tuple = (5e-4, 1.0)
    samples_per_decade: int = 20_000
    min_ratio: float = 1.0
    box_tol_factor: float = 1e-10
    lower_bound_slack: float = 1e-9
    bump_radius_fraction: float = 0.25
    solver: SolverOptions = field(default_factory=SolverOptions)


@dataclass
class LadderResult:
    direction: str
    s: float
    grid: object
    composite: object
    ladder: object
    records: list
    certificates: list
    certificate_labels: list
    lower_bounds: list
    verdicts: dict
    C_meas: float
    distinct_count: int
    stiffness: object = None

    @property
    def energies(self):
        return [r.energy for r in self.records]

    def summary_rows(self):
        rows = []
        for k, (r, (d, e)) in enumerate(zip(self.records, self.ladder.pairs), start=1):
            rows.append({
                "k": k, "delta": d, "eta": e, "energy": r.energy, "linf": r.linf,
                "xnorm": r.xnorm, "residual": r.residual, "pg_norm": r.pg_norm,
                "certificate": self.certificates[k - 1], "box_ok": bool(r.delta_ok),
                "start": r.start_label, "converged": r.converged,
            })
        return rows

    def to_dict(self):
        return {
            "direction": self.direction,
            "s": self.s,
            "grid": {"L": self.grid.half_width, "n_interior": self.grid.n_interior, "h": self.grid.h},
            "composite": self.composite.describe(),
            "ladder": [list(p) for p in self.ladder.pairs],
            "rungs": self.summary_rows(),
            "lower_bounds": self.lower_bounds,
            "verdicts": self.verdicts,
            "C_meas": self.C_meas,
            "distinct_count": self.distinct_count,
        }


def _strict(values, increasing):
    pairs = zip(values[:-1], values[1:])
    return all((b > a) if increasing else (b < a) for a, b in pairs)


def solve_rung(stiffness, composite, delta, eta, opts, extra_starts=()):
    """Minimize the truncated energy over [0, eta]; returns the record, the
    bump certificate ``(label, vector, energy)`` and the lower bound."""
    model = build_model(stiffness, truncate(composite, eta))
    box = BoxConstraint(eta)
    starts, cert = build_starts(model, box, composite, opts)
    starts = starts + list(extra_starts)
    rec = minimize_in_box(model, box, starts, opts)
    rec.delta_ok, rec.delta_margin = check_box_membership(rec, delta, 0.0)
    return rec, cert, lower_bound(model), model


def run_ladder(composite, grid, s, opts=HarnessOptions(), stiffness=None, ladder=None):
    direction = composite.direction
    stiffness = stiffness or assemble_stiffness(grid, s)
    if ladder is None:
        ladder = scan_sign_ladder(composite, direction, opts.search_range, opts.K,
                                  opts.samples_per_decade, min_ratio=opts.min_ratio)
    records, certs, labels, bounds = [], [], [], []
    for d, e in ladder.pairs:
        rec, cert, lb, _ = solve_rung(stiffness, composite, d, e, opts.solver)
        records.append(rec)
        labels.append(cert[0] if cert else None)
        certs.append(cert[2] if cert else 0.0)
        bounds.append(lb)
    for rec, (d, e) in zip(records, ladder.pairs):
        rec.delta_ok = bool(np.max(rec.u, initial=0.0) <= d + opts.box_tol_factor * e)
    etas = ladder.etas
    sep = opts.solver.sep_factor * min(etas)
    grouping = distinctness(records, sep)
    energies = [r.energy for r in records]
    linf = [r.linf for r in records]
    xnorm = [r.xnorm for r in records]
    verdicts = {
        "converged": all(r.converged for r in records),
        "negative_energy": all(E < 0 for E in energies),
        "certificate": all(r.energy <= c for r, c in zip(records, certs)),
        "box_membership": all(r.delta_ok for r in records),
        "distinct": grouping.count == len(records),
        "lower_bound": all(r.min_energy_seen >= lb - opts.lower_bound_slack
                           for r, lb in zip(records, bounds)),
        "ladder_nested": ladder.nested(),
    }
    if direction == "origin":
        verdicts["energy_increasing"] = _strict(energies, True)
        verdicts["linf_decreasing"] = _strict(linf, False)
        verdicts["xnorm_decreasing"] = _strict(xnorm, False)
    else:
        verdicts["energy_decreasing"] = _strict(energies, False)
        verdicts["linf_increasing"] = _strict(linf, True)
        verdicts["linf_above_previous_delta"] = all(
            records[i].linf > ladder.pairs[i - 1][0] for i in range(1, len(records)))
    R = opts.bump_radius_fraction * grid.half_width
    return LadderResult(
        direction, float(s), grid, composite, ladder, records, certs, labels, bounds,
        verdicts, bump_energy_constant(stiffness, R), grouping.count, stiffness,
    )


def run_origin_ladder(composite, grid, s, opts=HarnessOptions(), stiffness=None):
    if composite.direction != "origin":
        raise InvalidArgumentError("origin ladder needs an origin construction")
    return run_ladder(composite, grid, s, opts, stiffness)


def run_infinity_ladder(composite, grid, s, opts=HarnessOptions(), stiffness=None):
    if composite.direction != "infinity":
        raise InvalidArgumentError("infinity ladder needs an infinity construction")
    return run_ladder(composite, grid, s, opts, stiffness)


# --- lambda window ------------------------------------------------------------------

@dataclass
class WindowEstimate:
    p: float
    theta: list
    alpha: list
    beta: list
    rung_lambdas: list
    lambda_tilde: list
    certificate: str

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def separators(energies, direction):
    """Midpoints between consecutive energies plus one half-gap beyond each
    end, kept below 0. Origin: theta_1 < E_1 < theta_2 < ... < theta_{K+1} < 0;
    infinity: theta_{K+1} < E_K < ... < E_1 < theta_1 < 0."""
    E = np.asarray(energies, dtype=float)
    if E.size == 0:
        return []
    order = E if direction == "origin" else E[::-1]
    if not (np.all(np.diff(order) > 0) and order[-1] < 0):
        raise InvalidStateError("energies are not strictly ordered below zero")
    if order.size == 1:
        half_lo = half_hi = 0.5 * abs(order[0])
    else:
        half_lo = 0.5 * (order[1] - order[0])
        half_hi = 0.5 * (order[-1] - order[-2])
    mids = 0.5 * (order[1:] + order[:-1])
    top = min(order[-1] + half_hi, 0.5 * order[-1])
    theta = np.concatenate(([order[0] - half_lo], mids, [top]))
    return [float(v) for v in (theta if direction == "origin" else theta[::-1])]


def rung_lambdas(composite, ladder, p, samples=2001):
    """Largest |lambda| keeping |lambda| t^p + g(t) <= 0 on each rung."""
    base = composite.with_lambda(0.0) if composite.lam else composite
    out = []
    for d, e in ladder.pairs:
        ts = np.linspace(d, e, samples)
        vals = -np.asarray(base.g(ts)) / ts ** p
        out.append(float(vals.min()))
    return out


def estimate_lambda_window(result, p, ladder_lambdas=None, certificate="minimizer"):
    """Perturbation radii alpha_k, beta_k and lambda~_k from a lambda = 0 run.

    ``certificate`` selects the test function in the upper bound: the
    lambda = 0 minimizer itself ("minimizer") or the bump start ("bump").
    Denominators: h sum u^p (origin), delta^(p+1) (infinity).
    """
    if not p > 0:
        raise InvalidArgumentError("p must be positive")
    direction = result.direction
    E = result.energies
    theta = separators(E, direction)
    if ladder_lambdas is None:
        ladder_lambdas = rung_lambdas(result.composite, result.ladder, p)
    h = result.grid.h
    alpha, beta = [], []
    for k, rec in enumerate(result.records):
        z_energy = rec.energy if certificate == "minimizer" else result.certificates[k]
        if direction == "origin":
            above, below = theta[k + 1], theta[k]
            den = h * float(np.sum(rec.u ** p))
        else:
            above, below = theta[k], theta[k + 1]
            den = result.ladder.pairs[k][0] ** (p + 1.0)
        alpha.append(float((p + 1.0) * (above - z_energy) / den))
        beta.append(float((p + 1.0) * (rec.energy - below) / den))
    tilde = []
    for k in range(len(alpha)):
        tilde.append(float(min(ladder_lambdas[: k + 1] + alpha[: k + 1] + beta[: k + 1])))
    return WindowEstimate(float(p), [float(t) for t in theta], alpha, beta,
                          list(ladder_lambdas), tilde, certificate)


# --- lambda sweep -------------------------------------------------------------------

@dataclass
class SweepRow:
    lam: float
    distinct_count: int
    ordering_ok: bool
    energies: list
    error: str = None
    min_energy_seen: float = None
    lower_bound: float = None


@dataclass
class SweepResult:
    rows: list
    K: int
    window: object = None

    def as_dict(self):
        return {
            "K": self.K,
            "rows": [r.__dict__ for r in self.rows],
            "window": self.window.as_dict() if self.window else None,
        }


def _ordering(stiffness, composite, ladder, records):
    """Energies of all rung solutions in the functional of the widest box
    (rung 1 for origin, rung K for infinity) must be strictly ordered below 0."""
    etas = ladder.etas
    eta = max(etas)
    model = build_model(stiffness, truncate(composite, eta))
    vals = [energy(model, r.u) for r in records]
    if ladder.direction == "origin":
        ok = _strict(vals, True)
    else:
        ok = _strict(vals, False)
    return ok and all(v < 0 for v in vals), vals


def lambda_sweep(base_result, lambdas, opts=HarnessOptions()):
    """Re-solve every rung of a lambda = 0 ladder for each lambda.

    The rungs are kept fixed (as in the perturbation argument), the lambda
    = 0 solution of each rung is added as a warm start, and per-lambda
    failures are recorded instead of raised.
    """
    stiffness = base_result.stiffness
    rows = []
    for lam in lambdas:
        lam = float(lam)
        try:
            comp = base_result.composite.with_lambda(lam)
            records, seen_ok = [], True
            min_seen, lb_min = np.inf, np.inf
            for (d, e), prev in zip(base_result.ladder.pairs, base_result.records):
                rec, _, lb, _ = solve_rung(stiffness, comp, d, e, opts.solver,
                                           extra_starts=[("lambda0", prev.u)])
                records.append(rec)
                min_seen = min(min_seen, rec.min_energy_seen)
                lb_min = min(lb_min, lb)
                seen_ok &= rec.min_energy_seen >= lb - opts.lower_bound_slack
            sep = opts.solver.sep_factor * min(base_result.ladder.etas)
            nontrivial = [r for r in records if r.linf > 0]
            count = distinctness(nontrivial, sep).count if nontrivial else 0
            ok, vals = _ordering(stiffness, comp, base_result.ladder, records)
            rows.append(SweepRow(lam, count, bool(ok and seen_ok), vals,
                                 min_energy_seen=float(min_seen), lower_bound=float(lb_min)))
        except Exception as exc:  # recorded, the sweep continues
            rows.append(SweepRow(lam, 0, False, [], error=f"{type(exc).__name__}: {exc}"))
    return SweepResult(rows, len(base_result.records))


# --- norm claims --------------------------------------------------------------------

def verify_norm_claims(result, direction=None):
    """Finite-depth witnesses of the norm claims.

    Origin: smallest shift sigma such that ||u_{i+sigma}||_X < 1/i and
    ||u_{i+sigma}||_inf < 1/i for i = 1..K-sigma. Infinity: rungs k_i are
    picked greedily with delta_{k_i} >= i, then ||u_{k_i}||_inf > i - 1 and
    ||u_{k_i}||_inf > delta_{k_{i-1}} are checked.
    """
    direction = direction or result.direction
    recs = result.records
    if direction == "origin":
        for shift in range(len(recs)):
            checks = []
            for i in range(1, len(recs) - shift + 1):
                r = recs[i - 1 + shift]
                checks.append({"i": i, "k": i + shift, "xnorm": r.xnorm, "linf": r.linf,
                               "ok": r.xnorm < 1.0 / i and r.linf < 1.0 / i})
            if all(c["ok"] for c in checks):
                return {"direction": direction, "holds": True, "shift": shift, "checks": checks}
        return {"direction": direction, "holds": False, "shift": None, "checks": []}
    deltas = result.ladder.deltas
    picked, checks = [], []
    k = 0
    i = 1
    while k < len(recs):
        if deltas[k] >= i:
            picked.append(k)
            lin = recs[k].linf
            ok = lin > i - 1
            if len(picked) > 1:
                ok = ok and lin > deltas[picked[-2]]
            checks.append({"i": i, "k": k + 1, "linf": lin, "delta": deltas[k], "ok": bool(ok)})
            i += 1
        k += 1
    holds = bool(checks) and all(c["ok"] for c in checks)
    return {"direction": direction, "holds": holds, "selected": [p + 1 for p in picked], "checks": checks}
