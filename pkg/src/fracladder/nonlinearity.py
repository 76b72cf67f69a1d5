"""Oscillatory nonlinearities, their antiderivatives, composites and truncations.

Two analytic families are provided,

    origin:   f(t) = t^alpha (a + sin(t^-beta))
    infinity: f(t) = t^alpha (a + sin(t^beta))

plus a tabulated family read from a two-column CSV. Every f vanishes for
t <= 0.

Antiderivatives split f into the power part a t^alpha (integrated exactly)
and the oscillatory part t^alpha sin(phase(t)). The latter is integrated over
a fixed panelization whose panels span at most a quarter oscillation period,
built lazily and cached per family, so repeated evaluations are consistent.
For the origin family the infinitely many oscillations below a cutoff t0 are
summed through the asymptotic expansion of int_W^inf w^-g e^(iw) dw.
"""
import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidArgumentError, LadderExhaustedError, QuadratureError

FAMILIES = ("origin", "infinity", "custom")
CONSTRUCTIONS = (
    "origin_linear",
    "origin_power",
    "infinity_linear",
    "infinity_power",
    "concave_convex",
    "perturbed",
)
DIRECTION = {
    "origin_linear": "origin",
    "origin_power": "origin",
    "infinity_linear": "infinity",
    "infinity_power": "infinity",
}

_GX, _GW = np.polynomial.legendre.leggauss(20)
_GX_LO, _GW_LO = np.polynomial.legendre.leggauss(10)


def _pos(t):
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, t, 0.0)


class PanelAntiderivative:
    """Cumulative integral of a smooth oscillatory integrand on fixed panels.

    ``step(t)`` proposes the next panel width at ``t``; each panel is checked
    by comparing 10- and 20-point Gauss-Legendre and split when they differ.
    Panels are appended on demand and never changed afterwards.
    """

    def __init__(self, integrand, start, value_at_start, step, rtol=1e-13, max_panels=2_000_000):
        self.integrand = integrand
        self.step = step
        self.rtol = rtol
        self.max_panels = max_panels
        self.edges = [float(start)]
        self.cum = [float(value_at_start)]

    @property
    def start(self):
        return self.edges[0]

    def _gauss(self, lo, hi, x, w):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        vals = self.integrand(mid + half * x)
        return half * float(np.dot(w, vals)), half * float(np.dot(w, np.abs(vals)))

    def _panel(self, lo, hi, depth=0):
        fine, mag = self._gauss(lo, hi, _GX, _GW)
        coarse, _ = self._gauss(lo, hi, _GX_LO, _GW_LO)
        if abs(fine - coarse) <= self.rtol * mag + 1e-300 or depth >= 30:
            return [(hi, fine)]
        m = 0.5 * (lo + hi)
        return self._panel(lo, m, depth + 1) + self._panel(m, hi, depth + 1)

    def extend(self, t_max):
        edges, cum = self.edges, self.cum
        while edges[-1] < t_max:
            if len(edges) > self.max_panels:
                raise QuadratureError(
                    f"antiderivative panel budget ({self.max_panels}) exhausted at "
                    f"t={edges[-1]!r} while extending to {t_max!r}"
                )
            lo = edges[-1]
            hi = lo + self.step(lo)
            for edge, piece in self._panel(lo, hi):
                edges.append(edge)
                cum.append(cum[-1] + piece)

    def __call__(self, t):
        """Integral from ``start`` plus the start value; ``t >= start``."""
        t = np.asarray(t, dtype=float)
        if t.size == 0:
            return t.copy()
        self.extend(float(t.max()))
        edges = np.asarray(self.edges)
        cum = np.asarray(self.cum)
        j = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(edges) - 1)
        lo = edges[j]
        half = 0.5 * (t - lo)
        pts = (lo + half)[..., None] + half[..., None] * _GX
        return cum[j] + half * (self.integrand(pts) @ _GW)


class OriginFamily:
    def __init__(self, alpha, beta, a):
        self.alpha, self.beta, self.a = float(alpha), float(beta), float(a)
        self.gamma = (self.alpha + 1.0) / self.beta + 1.0
        self.w0 = max(200.0, 20.0 * self.gamma)
        self.t0 = self.w0 ** (-1.0 / self.beta)
        # number of asymptotic terms that reach double precision at w0
        coef, k = 1.0, 0
        while abs(coef) > 1e-18 and k < 200:
            coef *= (self.gamma + k) / self.w0
            k += 1
        self.n_terms = k
        beta = self.beta
        self._osc = PanelAntiderivative(
            self._osc_integrand,
            self.t0,
            float(self._osc_series(np.array(self.t0))),
            lambda t: min(0.5 * math.pi * t ** (beta + 1.0) / beta, 0.25 * t),
        )

    def _osc_integrand(self, t):
        return t ** self.alpha * np.sin(t ** (-self.beta))

    def _osc_series(self, t):
        W = t ** (-self.beta)
        total = np.zeros_like(W, dtype=complex)
        term = np.ones_like(W, dtype=complex)
        for k in range(self.n_terms):
            total += term
            term = term * (-1j) * (self.gamma + k) / W
        val = 1j * np.exp(1j * W) * W ** (-self.gamma) * total
        return val.imag / self.beta

    def f(self, t):
        t = np.asarray(t, dtype=float)
        tp = _pos(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = tp ** self.alpha * (self.a + np.sin(np.where(tp > 0, tp, 1.0) ** (-self.beta)))
        return np.where(t > 0, val, 0.0)

    def F(self, t):
        t = np.asarray(t, dtype=float)
        tp = _pos(t)
        out = self.a * tp ** (self.alpha + 1.0) / (self.alpha + 1.0)
        osc = np.zeros_like(tp)
        small = (tp > 0) & (tp <= self.t0)
        if np.any(small):
            osc[small] = self._osc_series(tp[small])
        big = tp > self.t0
        if np.any(big):
            osc[big] = self._osc(tp[big])
        return out + osc

    def describe(self):
        return {"family": "origin", "alpha": self.alpha, "beta": self.beta, "a": self.a}


class InfinityFamily:
    def __init__(self, alpha, beta, a):
        self.alpha, self.beta, self.a = float(alpha), float(beta), float(a)
        beta = self.beta
        self._osc = PanelAntiderivative(
            self._osc_integrand,
            0.0,
            0.0,
            lambda t: min(0.5 * math.pi / (beta * max(t, 1e-300) ** (beta - 1.0)), max(0.25 * t, 1e-3))
            if beta != 1.0 else min(0.5 * math.pi, max(0.25 * t, 1e-3)),
        )

    def _osc_integrand(self, t):
        return t ** self.alpha * np.sin(t ** self.beta)

    def f(self, t):
        t = np.asarray(t, dtype=float)
        tp = _pos(t)
        return np.where(t > 0, tp ** self.alpha * (self.a + np.sin(tp ** self.beta)), 0.0)

    def F(self, t):
        tp = _pos(t)
        return self.a * tp ** (self.alpha + 1.0) / (self.alpha + 1.0) + self._osc(tp)

    def describe(self):
        return {"family": "infinity", "alpha": self.alpha, "beta": self.beta, "a": self.a}


class TableFamily:
    """Piecewise-linear interpolation of samples (t_j, f_j); zero for t <= 0."""

    def __init__(self, ts, fs, source=None):
        ts = np.asarray(ts, dtype=float)
        fs = np.asarray(fs, dtype=float)
        if ts.ndim != 1 or ts.shape != fs.shape or ts.size < 1:
            raise InvalidArgumentError("table needs matching one-dimensional t and f columns")
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(fs))):
            raise InvalidArgumentError("table contains non-finite entries")
        if np.any(np.diff(ts) <= 0):
            raise InvalidArgumentError("table abscissae must be strictly increasing")
        self.source = source
        self.ts, self.fs = ts, fs
        keep = ts > 0
        xs = np.concatenate(([0.0], ts[keep]))
        ys = np.concatenate(([float(np.interp(0.0, ts, fs))], fs[keep]))
        self._xs, self._ys = xs, ys
        self._cum = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(xs) * (ys[1:] + ys[:-1]))))

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, np.interp(t, self.ts, self.fs), 0.0)

    def F(self, t):
        tp = _pos(t)
        xs, ys, cum = self._xs, self._ys, self._cum
        j = np.clip(np.searchsorted(xs, tp, side="right") - 1, 0, xs.size - 1)
        x0, y0 = xs[j], ys[j]
        y1 = np.interp(tp, xs, ys)
        return cum[j] + 0.5 * (tp - x0) * (y0 + y1)

    def describe(self):
        return {"family": "custom", "table": self.source}


def load_table(path):
    ts, fs = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read table {path}: {exc}") from exc
    with fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not ts:
                    continue  # header line
                raise InvalidArgumentError(f"bad table row {row!r} in {path}")
            ts.append(t)
            fs.append(v)
    return TableFamily(ts, fs, source=str(path))


@dataclass(frozen=True)
class NonlinearitySpec:
    """Base family plus the coefficients of a composite right-hand side."""

    family: str = "origin"
    alpha: float = 0.5
    beta: float = 1.0
    a: float = 0.5
    table: str = None
    lam: float = 0.0
    p: float = 1.0
    mu_lin: float = 0.0
    q: float = 2.0
    mu_q: float = 0.0
    eps: float = 0.0
    second: "NonlinearitySpec" = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        for name in ("alpha", "beta", "a", "lam", "p", "mu_lin", "q", "mu_q", "eps"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.p <= 0 or self.q <= 0:
            raise InvalidArgumentError("exponents p and q must be positive")
        if self.family == "custom" and not self.table:
            raise InvalidArgumentError("custom family needs a table path")

    def hypothesis_gate(self):
        """Parameter conditions under which the analytic families satisfy the
        oscillation hypotheses; returns a list of violated conditions."""
        bad = []
        if self.family == "origin":
            if not (0 < self.alpha < 1 < self.alpha + self.beta):
                bad.append("0 < alpha < 1 < alpha + beta")
        elif self.family == "infinity":
            if not self.alpha > 1:
                bad.append("alpha > 1")
            if not abs(self.alpha - self.beta) < 1:
                bad.append("|alpha - beta| < 1")
        if self.family != "custom" and not (0 < self.a < 1):
            bad.append("0 < a < 1")
        return bad


_FAMILY_CACHE = {}


def base_family(spec):
    """Family object for ``spec``; cached so the panel tables are shared."""
    key = (spec.family, spec.alpha, spec.beta, spec.a, spec.table)
    fam = _FAMILY_CACHE.get(key)
    if fam is None:
        if spec.family == "origin":
            fam = OriginFamily(spec.alpha, spec.beta, spec.a)
        elif spec.family == "infinity":
            fam = InfinityFamily(spec.alpha, spec.beta, spec.a)
        else:
            fam = load_table(spec.table)
        _FAMILY_CACHE[key] = fam
    return fam


def eval_f(spec, t):
    out = base_family(spec).f(t)
    return float(out) if np.ndim(out) == 0 else out


def eval_F(spec, t):
    if np.any(np.asarray(t) < 0):
        raise InvalidArgumentError("antiderivative is defined for t >= 0")
    out = base_family(spec).F(t)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class Composite:
    """g(t) = lam t^p + mu_q t^q + lin t + f(t) + eps f2(t) for t > 0, else 0,
    together with the shift ``mu`` moved to the operator side."""

    base: object
    mu: float
    lam: float = 0.0
    p: float = 1.0
    lin: float = 0.0
    mu_q: float = 0.0
    q: float = 2.0
    eps: float = 0.0
    second: object = None
    construction: str = "custom"
    direction: str = "origin"

    def g(self, t):
        t = np.asarray(t, dtype=float)
        tp = _pos(t)
        val = self.base.f(tp) + self.lin * tp
        if self.lam:
            val = val + self.lam * tp ** self.p
        if self.mu_q:
            val = val + self.mu_q * tp ** self.q
        if self.eps and self.second is not None:
            val = val + self.eps * self.second.f(tp)
        return np.where(t > 0, val, 0.0)

    def G(self, t):
        t = np.asarray(t, dtype=float)
        tp = _pos(t)
        val = self.base.F(tp) + 0.5 * self.lin * tp * tp
        if self.lam:
            val = val + self.lam * tp ** (self.p + 1.0) / (self.p + 1.0)
        if self.mu_q:
            val = val + self.mu_q * tp ** (self.q + 1.0) / (self.q + 1.0)
        if self.eps and self.second is not None:
            val = val + self.eps * self.second.F(tp)
        return np.where(t > 0, val, 0.0)

    __call__ = g

    def with_lambda(self, lam):
        shift = self.mu
        if self.construction in ("origin_linear", "infinity_linear"):
            shift = self.lin - lam
            if shift <= 0:
                raise InvalidArgumentError(f"shift mu = {self.lin} - lambda must be positive")
            return replace(self, lam=0.0, mu=shift)
        return replace(self, lam=float(lam))

    def describe(self):
        return {
            "base": self.base.describe(),
            "construction": self.construction,
            "direction": self.direction,
            "mu": self.mu,
            "lambda": self.lam,
            "p": self.p,
            "linear": self.lin,
            "mu_q": self.mu_q,
            "q": self.q,
            "eps": self.eps,
        }


def compose_g(spec, construction, direction=None):
    """Composite right-hand side and operator shift for one of the standard
    reductions of (-Delta)^s u = lambda u^p + f(u) to
    (-Delta)^s u + mu u = g(u).

    ``spec.mu_lin`` is the coefficient of the added linear term.
    """
    if construction not in CONSTRUCTIONS:
        raise InvalidArgumentError(f"unknown construction {construction!r}; expected one of {CONSTRUCTIONS}")
    base = base_family(spec)
    lin = float(spec.mu_lin)
    direction = direction or DIRECTION.get(construction) or (
        "infinity" if spec.family == "infinity" else "origin")
    common = dict(base=base, lin=lin, construction=construction, direction=direction)
    if construction in ("origin_linear", "infinity_linear"):
        mu = lin - spec.lam
        if mu <= 0:
            raise InvalidArgumentError(
                f"need lambda < linear coefficient so that mu = {lin} - {spec.lam} > 0"
            )
        return Composite(mu=mu, **common)
    if lin <= 0:
        raise InvalidArgumentError(f"linear coefficient must be positive, got {lin}")
    if construction in ("origin_power", "infinity_power"):
        return Composite(mu=lin, lam=spec.lam, p=spec.p, **common)
    if construction == "concave_convex":
        return Composite(mu=lin, lam=spec.lam, p=spec.p, mu_q=spec.mu_q, q=spec.q, **common)
    second = base_family(spec.second) if spec.second is not None else None
    if spec.eps and second is None:
        raise InvalidArgumentError("perturbed construction with eps != 0 needs a second spec")
    return Composite(mu=lin, eps=spec.eps, second=second, lam=spec.lam, p=spec.p, **common)


@dataclass(frozen=True, eq=False)
class TruncatedG:
    """g_k(t) = g(min(eta, t)) for t > 0 and 0 otherwise."""

    base: Composite
    eta: float

    @property
    def mu(self):
        return self.base.mu

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, self.base.g(np.minimum(t, self.eta)), 0.0)

    def G(self, t):
        t = np.asarray(t, dtype=float)
        inner = self.base.G(np.clip(t, 0.0, self.eta))
        over = np.maximum(t - self.eta, 0.0)
        if np.any(over > 0):
            inner = inner + float(self.base.g(self.eta)) * over
        return np.where(t > 0, inner, 0.0)

    __call__ = g

    def sup_abs(self, samples=20_001):
        ts = np.linspace(0.0, self.eta, samples)
        return float(np.max(np.abs(self.base.g(ts))))


def truncate(g, eta):
    if not (eta > 0 and math.isfinite(eta)):
        raise InvalidArgumentError(f"truncation level must be positive, got {eta!r}")
    if isinstance(g, TruncatedG):
        return TruncatedG(g.base, min(g.eta, float(eta)))
    return TruncatedG(g, float(eta))


# --- sign ladder ------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationLadder:
    direction: str
    pairs: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.pairs)

    @property
    def deltas(self):
        return [d for d, _ in self.pairs]

    @property
    def etas(self):
        return [e for _, e in self.pairs]

    def nested(self):
        ps = self.pairs
        if self.direction == "origin":
            return all(0 < d < e for d, e in ps) and all(
                ps[k + 1][1] < ps[k][0] for k in range(len(ps) - 1))
        return all(0 < d < e for d, e in ps) and all(
            ps[k][1] < ps[k + 1][0] for k in range(len(ps) - 1))


def negativity_intervals(g, search_range, samples_per_decade=20_000):
    """Maximal closed sub-intervals of ``search_range`` where g <= 0, located
    by a log-spaced sign scan and refined by bisection; intervals touching
    either end of the range are discarded since they may continue beyond it."""
    lo, hi = map(float, search_range)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise InvalidArgumentError(f"search range must satisfy 0 < lo < hi, got {search_range!r}")
    count = max(int(math.ceil(math.log10(hi / lo) * samples_per_decade)), 16) + 1
    ts = np.geomspace(lo, hi, count)
    neg = np.asarray(g(ts)) <= 0
    change = np.flatnonzero(neg[1:] != neg[:-1])
    gf = lambda t: float(g(np.array(t)))
    out = []
    start = None
    for i in change:
        root = brentq(gf, ts[i], ts[i + 1], xtol=1e-15 * ts[i], rtol=4 * np.finfo(float).eps)
        if not neg[i]:
            start = root
        elif start is not None:
            out.append((start, root))
            start = None
    return out


def _select(found, direction, K, min_ratio):
    """Pick K intervals: deepest first for the origin direction, highest
    first for infinity, skipping intervals closer than ``min_ratio``."""
    order = found if direction == "origin" else found[::-1]
    chosen = []
    for iv in order:
        if chosen:
            prev = chosen[-1]
            # origin walks upward from 0, infinity walks downward
            gap = iv[0] / prev[1] if direction == "origin" else prev[0] / iv[1]
            if gap < min_ratio:
                continue
        chosen.append(iv)
        if len(chosen) == K:
            break
    return chosen


def scan_sign_ladder(g, direction, search_range, K, samples_per_decade=20_000,
                     margin=0.01, certify_samples=1000, min_ratio=1.0):
    """Ladder of K negativity intervals of g inside ``search_range``.

    Origin: the K intervals closest to 0, indexed so that eta_k decreases.
    Infinity: the K largest, indexed so that delta_k increases. With
    ``min_ratio > 1`` consecutive rungs are additionally separated by at
    least that factor (lower end of the upper rung over upper end of the
    lower rung). Each interval is shrunk inward by ``margin`` of its width
    and certified by sampling.
    """
    if K < 1:
        raise InvalidArgumentError("ladder depth K must be at least 1")
    if direction not in ("origin", "infinity"):
        raise InvalidArgumentError(f"direction must be 'origin' or 'infinity', got {direction!r}")
    if not min_ratio >= 1.0:
        raise InvalidArgumentError("min_ratio must be >= 1")
    found = negativity_intervals(g, search_range, samples_per_decade)
    chosen = _select(found, direction, K, min_ratio)
    if len(chosen) < K:
        raise LadderExhaustedError(len(chosen), K)
    chosen = chosen[::-1]
    pairs = []
    for left, right in chosen:
        w = right - left
        d, e = left + margin * w, right - margin * w
        probe = np.linspace(d, e, certify_samples)
        if np.any(np.asarray(g(probe)) > 0):
            raise QuadratureError(f"negativity certificate failed on [{d!r}, {e!r}]")
        pairs.append((float(d), float(e)))
    ladder = TruncationLadder(direction, tuple(pairs))
    if not ladder.nested():
        raise InvalidArgumentError(f"ladder violates nesting order: {pairs}")
    return ladder


def oscillation_count(g, lo, hi):
    """Number of oscillations of the base family on [lo, hi] (table: samples)."""
    base = getattr(g, "base", g)
    base = getattr(base, "base", base)
    if isinstance(base, OriginFamily):
        return (lo ** -base.beta - hi ** -base.beta) / (2.0 * math.pi)
    if isinstance(base, InfinityFamily):
        return (hi ** base.beta - lo ** base.beta) / (2.0 * math.pi)
    if isinstance(base, TableFamily):
        return float(np.count_nonzero((base.ts >= lo) & (base.ts <= hi)))
    return 0.0


def oscillation_peaks(g, eta, lower=None, per_oscillation=24, max_samples=400_000):
    """Local maxima of G(t)/t^2 on [lower, eta] (default lower = eta/10),
    sampled finely enough to resolve every oscillation, plus eta itself.
    These are the plateau heights at which a bump gains the most from the
    nonlinearity relative to its quadratic cost."""
    lower = eta / 10.0 if lower is None else lower
    count = int(min(max(2000, per_oscillation * oscillation_count(g, lower, eta)), max_samples))
    ts = np.geomspace(lower, eta, count)
    r = np.asarray(g.G(ts)) / ts ** 2
    idx = np.flatnonzero((r[1:-1] >= r[:-2]) & (r[1:-1] > r[2:])) + 1
    return [float(t) for t in ts[idx]] + [float(eta)]


# --- diagnostics ------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisReport:
    scales: tuple
    F_over_t2_max: float
    F_over_t2_min: float
    f_over_t_max: float
    f_over_t_min: float
    witnesses: tuple
    growth_witnessed: bool
    negativity_witnessed: bool
    gate_violations: tuple
    note: str = "finite-sample diagnostics; limits are not certified"

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def validate_hypotheses(spec, scales, refine=200):
    """Finite-sample proxies of the growth and sign hypotheses.

    Around each scale t a short window [t/2, t] is searched (``refine``
    samples) for the extremes of F/t^2 and f/t; points with f < 0 are
    recorded as witnesses.
    """
    scales = [float(t) for t in scales]
    if not scales or any(t <= 0 for t in scales):
        raise InvalidArgumentError("scales must be positive")
    fam = base_family(spec)
    Fmax, Fmin, fmax, fmin = -np.inf, np.inf, -np.inf, np.inf
    witnesses = []
    per_scale_F = []
    for t in scales:
        ts = np.linspace(0.5 * t, t, refine)
        fr = np.asarray(fam.f(ts)) / ts
        Fr = np.asarray(fam.F(ts)) / ts ** 2
        per_scale_F.append(float(Fr.max()))
        Fmax, Fmin = max(Fmax, Fr.max()), min(Fmin, Fr.min())
        fmax, fmin = max(fmax, fr.max()), min(fmin, fr.min())
        i = int(np.argmin(fr))
        if fr[i] < 0:
            witnesses.append(float(ts[i]))
    growth = len(per_scale_F) > 1 and per_scale_F[-1] > per_scale_F[0] and Fmax > 0
    return HypothesisReport(
        tuple(scales), float(Fmax), float(Fmin), float(fmax), float(fmin), tuple(witnesses),
        bool(growth), bool(witnesses), tuple(spec.hypothesis_gate()),
    )


def default_linear_coefficient(spec, lower, scales):
    """Midpoint of (lower, -l) where l is the finite-sample minimum of f/t."""
    report = validate_hypotheses(spec, scales)
    upper = -report.f_over_t_min
    if not upper > lower:
        raise InvalidArgumentError(
            f"cannot place a linear coefficient in ({lower}, {upper}): no negativity of f/t"
        )
    return 0.5 * (lower + upper)
