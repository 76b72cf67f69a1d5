"""Command-line entry point: assemble-check, ladder, sweep and verify.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""
import argparse
import os
import sys

import numpy as np

from .config import RunConfig, load_config
from .errors import (
    AssemblyError,
    ConfigError,
    EvaluationError,
    InvalidArgumentError,
    InvalidStateError,
    LadderExhaustedError,
    NonConvergenceError,
    QuadratureError,
)
from .ladder import estimate_lambda_window, lambda_sweep, run_ladder, verify_norm_claims
from .operator import assemble_mass, assemble_stiffness, oracle_gagliardo, write_matrix_csv
from .reporting import atomic_write_text, write_csv, write_json
from .verify import run_verify, probe_vectors

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERICAL_ERRORS = (AssemblyError, QuadratureError, LadderExhaustedError, NonConvergenceError,
                    EvaluationError, InvalidStateError)

SUMMARY_HEADER = ["k", "delta", "eta", "energy", "linf", "xnorm", "residual", "pg_norm",
                  "certificate", "converged", "box_ok", "negative"]


def _load(args):
    cfg = load_config(args.config) if args.config else RunConfig.from_dict({})
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = args.out or cfg.data["output"]["dir"]
    os.makedirs(out, exist_ok=True)
    atomic_write_text(os.path.join(out, "config_used.yaml"), cfg.to_yaml())
    return cfg, out


def _report(lines, failed):
    for line in lines:
        print(line)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_assemble_check(cfg, out, dump_stiffness=False):
    grid = cfg.grid()
    s = float(cfg.data["s"])
    vcfg = cfg.data["verify"]
    stiff = assemble_stiffness(grid, s)
    A = stiff.matrix
    M = assemble_mass(grid).matrix
    min_eig = float(np.linalg.eigvalsh(A)[0])
    rel = {}
    for name, v in probe_vectors(grid):
        ref = oracle_gagliardo(grid, v, s, vcfg["oracle_refinement"])
        rel[name] = abs(stiff.quad(v) - ref) / ref
    checks = {
        "stiffness_symmetric": bool(np.array_equal(A, A.T)),
        "stiffness_positive_definite": min_eig > 0,
        "mass_symmetric": bool(np.array_equal(M, M.T)),
        "mass_positive_definite": bool(np.linalg.eigvalsh(M)[0] > 0),
        "oracle_equivalence": max(rel.values()) <= vcfg["oracle_tolerance"],
    }
    if dump_stiffness or cfg.data["output"]["dump_stiffness"]:
        write_matrix_csv(os.path.join(out, "stiffness.csv"), A)
    write_json(os.path.join(out, "assemble_check.json"), {
        "checks": checks, "min_eigenvalue": min_eig, "oracle_relative_errors": rel,
        "metadata": {k: v for k, v in stiff.metadata.items() if not k.startswith("_")},
    })
    failed = [k for k, ok in checks.items() if not ok]
    return _report([f"assemble-check: {k} {'ok' if ok else 'FAILED'}" for k, ok in checks.items()], failed)


def write_ladder_artifacts(result, out, prefix=""):
    x = np.concatenate(([-result.grid.half_width], result.grid.nodes, [result.grid.half_width]))
    for k, rec in enumerate(result.records, start=1):
        u = np.concatenate(([0.0], rec.u, [0.0]))
        write_csv(os.path.join(out, f"{prefix}solution_k{k}.csv"), ["x", "u"],
                  [(float(a), float(b)) for a, b in zip(x, u)])
    rows = []
    for r in result.summary_rows():
        rows.append([r["k"], r["delta"], r["eta"], r["energy"], r["linf"], r["xnorm"], r["residual"],
                     r["pg_norm"], r["certificate"], r["converged"], r["box_ok"], r["energy"] < 0])
    write_csv(os.path.join(out, f"{prefix}summary.csv"), SUMMARY_HEADER, rows)


def cmd_ladder(cfg, out, dump_stiffness=False):
    grid = cfg.grid()
    s = float(cfg.data["s"])
    stiff = assemble_stiffness(grid, s)
    if dump_stiffness or cfg.data["output"]["dump_stiffness"]:
        write_matrix_csv(os.path.join(out, "stiffness.csv"), stiff.matrix)
    result = run_ladder(cfg.composite(), grid, s, cfg.harness_options(), stiffness=stiff)
    claims = verify_norm_claims(result)
    write_ladder_artifacts(result, out)
    payload = result.to_dict()
    payload["norm_claims"] = claims
    write_json(os.path.join(out, "result.json"), payload)
    failed = [k for k, ok in result.verdicts.items() if not ok]
    lines = [f"ladder ({result.direction}): E = " + ", ".join(f"{e:.6e}" for e in result.energies)]
    lines += [f"  {k}: {'ok' if ok else 'FAILED'}" for k, ok in result.verdicts.items()]
    lines.append(f"  norm claims: {'hold' if claims['holds'] else 'not witnessed'}")
    return _report(lines, failed)


def parse_lambda_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--lambda-list must be comma-separated reals: {exc}") from exc


def cmd_sweep(cfg, out, lambdas=None):
    grid = cfg.grid()
    s = float(cfg.data["s"])
    opts = cfg.harness_options()
    base_comp = cfg.composite()
    if base_comp.lam:
        base_comp = base_comp.with_lambda(0.0)
    base = run_ladder(base_comp, grid, s, opts)
    window = estimate_lambda_window(base, cfg.window_p, certificate=cfg.data["window"]["certificate"])
    lam_tilde = window.lambda_tilde[-1]
    if lambdas is None:
        lambdas = cfg.data["window"]["lambdas"]
    if lambdas is None:
        lambdas = [0.0] + [sgn * c * lam_tilde for c in (0.5, 1.0) for sgn in (1.0, -1.0)]
    sweep = lambda_sweep(base, lambdas, opts)
    sweep.window = window
    rows, failed = [], []
    for row in sweep.rows:
        inside = lam_tilde > 0 and abs(row.lam) <= lam_tilde
        rows.append([row.lam, row.distinct_count, row.ordering_ok, inside])
        if inside and (row.distinct_count < sweep.K or not row.ordering_ok):
            failed.append(row.lam)
    write_csv(os.path.join(out, "sweep.csv"), ["lambda", "distinct_count", "ordering_ok", "in_window"], rows)
    write_json(os.path.join(out, "window.json"), window.as_dict())
    write_json(os.path.join(out, "sweep.json"), sweep.as_dict())
    lines = ["window: lambda_tilde = " + ", ".join(f"{v:.6e}" for v in window.lambda_tilde)]
    for r, row in zip(rows, sweep.rows):
        flag = "" if r[3] else " (outside window)"
        err = f" error={row.error}" if row.error else ""
        lines.append(f"  lambda={r[0]:.6e} count={r[1]} ordering={'ok' if r[2] else 'FAILED'}{flag}{err}")
    if lam_tilde <= 0:
        lines.append("  window estimate is not positive")
        failed.append("window")
    return _report(lines, failed)


def cmd_verify(cfg, out, corrupt_stiffness=False):
    results = run_verify(cfg, corrupt_stiffness=corrupt_stiffness)
    write_json(os.path.join(out, "verify.json"), results)
    failed = [k for k, v in results.items() if not v["ok"]]
    lines = [f"verify: {k} {'ok' if v['ok'] else 'FAILED'}" for k, v in results.items()]
    if failed:
        lines.append("failed: " + ", ".join(failed))
    return _report(lines, failed)


def build_parser():
    parser = argparse.ArgumentParser(prog="fracladder", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("assemble-check", "ladder", "sweep", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration (defaults if omitted)")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--seed", type=int, help="override solver.rng_seed")
        if name in ("assemble-check", "ladder"):
            p.add_argument("--dump-stiffness", action="store_true", help="write the stiffness matrix CSV")
        if name == "sweep":
            p.add_argument("--lambda-list", help="comma-separated lambda values")
        if name == "verify":
            p.add_argument("--corrupt-stiffness", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg, out = _load(args)
        if args.command == "assemble-check":
            return cmd_assemble_check(cfg, out, args.dump_stiffness)
        if args.command == "ladder":
            return cmd_ladder(cfg, out, args.dump_stiffness)
        if args.command == "sweep":
            lams = parse_lambda_list(args.lambda_list) if args.lambda_list else None
            return cmd_sweep(cfg, out, lams)
        return cmd_verify(cfg, out, args.corrupt_stiffness)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidArgumentError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
