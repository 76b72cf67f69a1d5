import json

import numpy as np
import pytest

from fracladder.errors import InvalidArgumentError, InvalidStateError
from fracladder.ladder import (
    estimate_lambda_window,
    lambda_sweep,
    rung_lambdas,
    run_infinity_ladder,
    run_origin_ladder,
    separators,
    verify_norm_claims,
)
from fracladder.grid import build_grid

# energies of the default origin and infinity ladders (n=257, s=0.4)
ORIGIN_ENERGIES = [-1.3498527515e-05, -8.266120126e-06, -4.991884726e-06]
INFINITY_ENERGIES = [-1624.787, -2945.386, -5426.902]


def test_origin_ladder(origin_result):
    r = origin_result
    assert all(r.verdicts.values()), r.verdicts
    np.testing.assert_allclose(r.energies, ORIGIN_ENERGIES, rtol=1e-6)
    assert r.distinct_count == 3
    for rec, (d, e) in zip(r.records, r.ladder.pairs):
        assert rec.converged and rec.u.max() <= d + 1e-10 * e
    claims = verify_norm_claims(r)
    assert claims["holds"] and claims["shift"] == 0


def test_infinity_ladder(infinity_result):
    r = infinity_result
    assert all(r.verdicts.values()), r.verdicts
    np.testing.assert_allclose(r.energies, INFINITY_ENERGIES, rtol=1e-5)
    claims = verify_norm_claims(r)
    assert claims["holds"] and claims["selected"] == [1, 2, 3]


def test_result_is_json_serializable(origin_result):
    from fracladder.reporting import _jsonable

    payload = json.dumps(_jsonable(origin_result.to_dict()), sort_keys=True)
    data = json.loads(payload)
    assert data["direction"] == "origin" and len(data["rungs"]) == 3
    assert set(data["verdicts"]) >= {"converged", "energy_increasing", "linf_decreasing"}


def test_direction_mismatch(origin_cfg, infinity_cfg):
    grid = build_grid(1.0, 9)
    with pytest.raises(InvalidArgumentError):
        run_infinity_ladder(origin_cfg.composite(), grid, 0.4)
    with pytest.raises(InvalidArgumentError):
        run_origin_ladder(infinity_cfg.composite(), grid, 0.4)


def test_separators():
    assert separators([-3.0, -2.0, -1.0], "origin") == [-3.5, -2.5, -1.5, -0.5]
    assert separators([-1.0, -2.0, -4.0], "infinity") == [-0.5, -1.5, -3.0, -5.0]
    with pytest.raises(InvalidStateError):
        separators([-1.0, -2.0], "origin")
    with pytest.raises(InvalidStateError):
        separators([-2.0, 1.0], "origin")


def test_window_positive_and_ordered(origin_result, infinity_result):
    for result in (origin_result, infinity_result):
        w = estimate_lambda_window(result, 0.5)
        assert all(v > 0 for v in w.lambda_tilde)
        assert all(b <= a for a, b in zip(w.lambda_tilde, w.lambda_tilde[1:]))
        assert len(w.theta) == 4
        assert w.rung_lambdas == rung_lambdas(result.composite, result.ladder, 0.5)
    with pytest.raises(InvalidArgumentError):
        estimate_lambda_window(origin_result, 0.0)


def test_bump_certificate_window(origin_result):
    w = estimate_lambda_window(origin_result, 0.5, certificate="bump")
    assert w.certificate == "bump" and len(w.alpha) == 3


def test_sweep_at_zero_reproduces_ladder(origin_result):
    sweep = lambda_sweep(origin_result, [0.0])
    row = sweep.rows[0]
    assert row.error is None and row.distinct_count == 3 and row.ordering_ok
    # energies are re-evaluated in the widest-box functional; solutions coincide
    assert row.min_energy_seen >= row.lower_bound


def test_sweep_records_errors(origin_cfg, grid257, stiff257):
    from fracladder.config import RunConfig
    from fracladder.ladder import run_ladder

    cfg = RunConfig.from_dict({"construction": {"name": "origin_linear", "linear": 0.1}})
    base = run_ladder(cfg.composite(), grid257, 0.4, cfg.harness_options(), stiffness=stiff257)
    sweep = lambda_sweep(base, [0.5])
    assert sweep.rows[0].error.startswith("InvalidArgumentError")
    assert sweep.rows[0].distinct_count == 0
    assert json.dumps(sweep.as_dict())
