"""Property checks shared by the ``verify`` command and the test-suite."""
import numpy as np

from .energy import BumpSpec, build_bump, build_model, bump_energy_constant, energy, gradient, lower_bound
from .grid import build_grid, interpolate, linf_norm
from .ladder import run_ladder
from .nonlinearity import Composite, TableFamily, compose_g, NonlinearitySpec, scan_sign_ladder, truncate
from .operator import StiffnessForm, assemble_mass, assemble_stiffness, check_sign_inequality, oracle_gagliardo
from .solver import BoxConstraint, SolverOptions, minimize_in_box, project


# --- test vectors and problems ----------------------------------------------------

def probe_vectors(grid, count=5, seed=0):
    """Hat, plateau bump and ``count`` random smooth (sine series) vectors."""
    x = grid.nodes
    L = grid.half_width
    hat = np.maximum(0.0, 1.0 - np.abs(x) / (0.5 * L))
    bump = build_bump(grid, BumpSpec(0.25 * L, 1.0))
    rng = np.random.default_rng(seed)
    out = [("hat", hat), ("bump", bump)]
    for i in range(count):
        coef = rng.normal(size=6) / np.arange(1, 7) ** 2
        v = sum(c * np.sin(k * np.pi * (x + L) / (2 * L)) for k, c in enumerate(coef, start=1))
        out.append((f"smooth{i}", v))
    return out


def toy_problem(kind="table", s=0.4):
    """Three-node problem on (-1, 1) with mu = 0.2 and box [0, 1].

    ``linear``: g(t) = -t (minimizer 0); ``table``: g(t) = 4 sin(2 pi t) + 2t
    tabulated on [0, 1], which has an interior minimizer.
    """
    grid = build_grid(1.0, 3)
    stiff = assemble_stiffness(grid, s)
    ts = np.linspace(0.0, 1.0, 401)
    fs = -ts if kind == "linear" else 4.0 * np.sin(2 * np.pi * ts) + 2.0 * ts
    comp = Composite(base=TableFamily(ts, fs), mu=0.2)
    return build_model(stiff, truncate(comp, 1.0)), 1.0


def batch_energy(model, U):
    """Energies of the rows of ``U``."""
    Q = model.stiffness.matrix + model.mu * model.mass.matrix
    quad = 0.5 * np.einsum("mi,ij,mj->m", U, Q, U)
    return quad - model.h * model.gk.G(U).sum(axis=1)


def box_grid_search(model, eta, coarse=0.01, fine=0.001, radius=0.02, keep=8):
    """Brute-force minimum over the box on a grid: full scan at ``coarse``
    spacing, then full scans at ``fine`` spacing around the ``keep`` best
    coarse points."""
    n = model.grid.n_interior
    axis = np.linspace(0.0, eta, int(round(eta / coarse)) + 1)
    mesh = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    E = np.concatenate([batch_energy(model, chunk) for chunk in np.array_split(mesh, max(1, mesh.shape[0] // 50_000))])
    best_idx = np.argsort(E, kind="stable")[:keep]
    best_u, best_e = None, np.inf
    steps = int(round(radius / fine))
    offs = np.arange(-steps, steps + 1) * fine
    local = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), axis=-1).reshape(-1, n)
    for i in best_idx:
        cand = np.clip(mesh[i] + local, 0.0, eta)
        Ec = batch_energy(model, cand)
        j = int(np.argmin(Ec))
        if Ec[j] < best_e:
            best_e, best_u = float(Ec[j]), cand[j]
    return best_u, best_e


def fd_gradient_errors(model, eta, pairs=100, eps=1e-5, seed=0):
    """Relative errors between extrapolated central differences of the energy and the
    analytic directional derivative on random pairs (u, v), u in [0, 0.9 eta]."""
    rng = np.random.default_rng(seed)
    n = model.grid.n_interior
    errs = []
    for _ in range(pairs):
        u = rng.uniform(0.05 * eta, 0.9 * eta, n)
        v = rng.normal(size=n)
        v /= np.linalg.norm(v)
        step = eps * eta
        d1 = (energy(model, u + step * v) - energy(model, u - step * v)) / (2 * step)
        d2 = (energy(model, u + 0.5 * step * v) - energy(model, u - 0.5 * step * v)) / step
        fd = (4.0 * d2 - d1) / 3.0  # Richardson: cancels the step^2 term
        an = float(gradient(model, u) @ v)
        errs.append(abs(fd - an) / max(abs(an), 1e-300))
    return errs


def fd_configurations(n=65, s=0.4):
    """Three (model, eta) setups: origin, infinity and tabulated nonlinearity."""
    grid = build_grid(1.0, n)
    stiff = assemble_stiffness(grid, s)
    origin = compose_g(NonlinearitySpec("origin", 0.5, 1.0, 0.5, mu_lin=0.1), "origin_power")
    infinity = compose_g(NonlinearitySpec("infinity", 2.0, 1.5, 0.5, mu_lin=0.1), "infinity_power")
    ts = np.linspace(0.0, 2.0, 301)
    table = Composite(base=TableFamily(ts, np.sin(5 * ts) * ts), mu=0.3)
    return [
        ("origin", build_model(stiff, truncate(origin, 0.05)), 0.05),
        ("infinity", build_model(stiff, truncate(infinity, 12.0)), 12.0),
        ("table", build_model(stiff, truncate(table, 1.5)), 1.5),
    ]


def antiderivative_error(g, lo, hi, panels=2000, order=20):
    """Max |(G(t_j) - G(lo)) - integral of g over [lo, t_j]| over panel ends,
    relative to max |G - G(lo)|; the integrals use composite Gauss-Legendre."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    ref = np.concatenate(([0.0], np.cumsum(half * (g.g(nodes) @ w))))
    got = g.G(edges) - g.G(lo)
    return float(np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-300))


# --- the suite ----------------------------------------------------------------------

def _entry(ok, **detail):
    return {"ok": bool(ok), **{k: _plain(v) for k, v in detail.items()}}


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def run_verify(cfg, corrupt_stiffness=False):
    """Run every property check for a configuration; returns name -> entry."""
    out = {}
    grid = cfg.grid()
    s = float(cfg.data["s"])
    vcfg = cfg.data["verify"]
    rng = np.random.default_rng(cfg.data["solver"]["rng_seed"])

    # grid
    u = rng.normal(size=grid.n_interior)
    out["grid.linf_homogeneity"] = _entry(all(
        np.isclose(linf_norm(c * u), abs(c) * linf_norm(u), rtol=1e-15, atol=0) for c in (-3.0, 0.5, 7.0)))
    vals = interpolate(grid, lambda x: 1.0 - abs(x))
    out["grid.interpolate_max"] = _entry(linf_norm(vals) == float(np.max(np.abs(1.0 - np.abs(grid.nodes)))))

    # operator
    stiff = assemble_stiffness(grid, s)
    if corrupt_stiffness:
        A = stiff.matrix.copy()
        A[0, 1] += 1e-3 * abs(A[0, 1]) + 1e-6
        stiff = StiffnessForm(stiff.s, A, grid, dict(stiff.metadata))
    A = stiff.matrix
    out["operator.stiffness_symmetric"] = _entry(np.array_equal(A, A.T), max_asymmetry=float(np.max(np.abs(A - A.T))))
    eig = float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])
    out["operator.stiffness_positive_definite"] = _entry(eig > 1e-12 * np.linalg.norm(A, 2), min_eigenvalue=eig)
    M = assemble_mass(grid).matrix
    Ml = assemble_mass(grid, lumped=True).matrix
    out["operator.mass_symmetric"] = _entry(np.array_equal(M, M.T) and np.array_equal(Ml, Ml.T))
    out["operator.mass_positive_definite"] = _entry(np.linalg.eigvalsh(M)[0] > 0 and np.all(np.diag(Ml) > 0))
    out["operator.lumped_row_sums"] = _entry(np.allclose(Ml.sum(axis=1), grid.h, rtol=1e-15, atol=0))
    w = rng.normal(size=grid.n_interior)
    ratio = stiff.quad(2 * w) / stiff.quad(w)
    out["operator.quadratic_homogeneity"] = _entry(abs(ratio - 4.0) <= 1e-12, ratio=ratio)
    worst = 0.0
    for n_small in (33, 65):
        g_small = build_grid(grid.half_width, n_small)
        st_small = assemble_stiffness(g_small, s)
        for _, v in probe_vectors(g_small):
            ref = oracle_gagliardo(g_small, v, s, vcfg["oracle_refinement"])
            worst = max(worst, abs(st_small.quad(v) - ref) / ref)
    out["operator.oracle_equivalence"] = _entry(worst <= vcfg["oracle_tolerance"], worst_relative_error=worst)
    sign_ok = True
    for i in range(20):
        v = rng.normal(size=grid.n_interior)
        sign_ok &= check_sign_inequality(v, vcfg["sign_pairs"], rng).holds
    small = rng.normal(size=17)
    sign_ok &= check_sign_inequality(small, 17 * 17).holds
    out["operator.sign_inequality"] = _entry(sign_ok)

    # nonlinearity
    comp = cfg.composite()
    ts = np.concatenate((-np.geomspace(1e-6, 10, 50), [0.0]))
    out["nonlinearity.zero_extension"] = _entry(
        np.all(comp.g(ts) == 0) and np.all(comp.G(ts) == 0) and np.all(truncate(comp, 1.0).g(ts) == 0))
    opts = cfg.harness_options()
    ladder = scan_sign_ladder(comp, cfg.direction, opts.search_range, opts.K,
                              opts.samples_per_decade, min_ratio=opts.min_ratio)
    out["nonlinearity.ladder_nesting"] = _entry(ladder.nested(), pairs=[list(p) for p in ladder.pairs])
    cert_ok = all(np.all(comp.g(np.linspace(d, e, 1000)) <= 0) for d, e in ladder.pairs)
    out["nonlinearity.negativity_certificate"] = _entry(cert_ok)
    eta = ladder.etas[0]
    probe = np.linspace(0.0, 2.0 * eta, 4001)
    t1, t2 = truncate(comp, eta), truncate(truncate(comp, eta), 1.5 * eta)
    out["nonlinearity.truncation_idempotence"] = _entry(np.array_equal(t1.g(probe), t2.g(probe)))
    rel = antiderivative_error(comp, 0.1 * eta, eta)
    out["nonlinearity.antiderivative_consistency"] = _entry(rel <= 1e-8, worst_relative_error=rel)

    # energy
    model = build_model(stiff, truncate(comp, eta))
    out["energy.zero"] = _entry(energy(model, np.zeros(grid.n_interior)) == 0.0)
    errs = []
    for _, m, e in fd_configurations(s=s):
        errs += fd_gradient_errors(m, e, vcfg["fd_pairs"], seed=int(rng.integers(1 << 31)))
    out["energy.gradient_fd"] = _entry(max(errs) <= 1e-6, worst_relative_error=max(errs))
    direction = np.abs(rng.normal(size=grid.n_interior))
    scaled = [energy(model, c * direction) for c in (1e3, 2e3, 4e3)]
    out["energy.coercivity"] = _entry(scaled[0] > 0 and scaled[0] < scaled[1] < scaled[2])
    lb = lower_bound(model)
    samples = [energy(model, rng.uniform(0, eta, grid.n_interior)) for _ in range(50)]
    out["energy.lower_bound_containment"] = _entry(min(samples) >= lb - 1e-9, lower_bound=lb, minimum=min(samples))
    z1 = build_bump(grid, BumpSpec(0.25 * grid.half_width, 1.0))
    C = stiff.quad(z1)
    ratios = [stiff.quad(build_bump(grid, BumpSpec(0.25 * grid.half_width, z))) / z ** 2 for z in (0.1, 0.01, 0.001)]
    out["energy.bump_homogeneity"] = _entry(
        C > 0 and max(abs(r - C) for r in ratios) <= 1e-12 * C, C_meas=C)

    # solver
    toy_err = 0.0
    for kind in ("linear", "table"):
        tm, teta = toy_problem(kind, s)
        rec = minimize_in_box(tm, BoxConstraint(teta), [
            ("zero", np.zeros(3)), ("mid", np.full(3, 0.5)), ("top", np.ones(3))], SolverOptions(tol=1e-12))
        ref_u, _ = box_grid_search(tm, teta)
        toy_err = max(toy_err, float(np.max(np.abs(rec.u - ref_u))))
    out["solver.toy_oracle"] = _entry(toy_err <= 2e-3, max_node_error=toy_err)
    sopts = cfg.solver_options()
    starts = [("random", rng.uniform(-eta, 2 * eta, grid.n_interior)), ("zero", np.zeros(grid.n_interior))]
    rec = minimize_in_box(model, BoxConstraint(eta), starts, sopts)
    start_energies = [energy(model, project(u0, BoxConstraint(eta))) for _, u0 in starts]
    out["solver.feasibility"] = _entry(np.all(rec.u >= 0) and np.all(rec.u <= eta))
    out["solver.descent"] = _entry(rec.energy <= min(start_energies))
    out["solver.lower_bound"] = _entry(rec.min_energy_seen >= lb - 1e-9)

    # harness
    first = run_ladder(comp, grid, s, opts, stiffness=stiff, ladder=ladder)
    second = run_ladder(comp, grid, s, opts, stiffness=stiff, ladder=ladder)
    out["ladder.verdicts"] = _entry(all(first.verdicts.values()), verdicts=first.verdicts)
    out["ladder.determinism"] = _entry(first.summary_rows() == second.summary_rows())
    return out
