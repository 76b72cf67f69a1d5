import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracladder.energy import build_model, energy
from fracladder.errors import InvalidArgumentError, NonConvergenceError
from fracladder.grid import build_grid
from fracladder.nonlinearity import NonlinearitySpec, compose_g, truncate
from fracladder.operator import assemble_stiffness
from fracladder.solver import (
    BoxConstraint,
    SolverOptions,
    build_starts,
    check_box_membership,
    distinctness,
    minimize_in_box,
    project,
    residual_norm,
)
from fracladder.verify import box_grid_search, toy_problem

ORIGIN = NonlinearitySpec("origin", 0.5, 1.0, 0.5, mu_lin=0.1)


@pytest.fixture(scope="module")
def model33():
    stiff = assemble_stiffness(build_grid(1.0, 33), 0.4)
    comp = compose_g(ORIGIN, "origin_power")
    return build_model(stiff, truncate(comp, 0.01)), comp


def test_box_constraint_validates():
    with pytest.raises(InvalidArgumentError):
        BoxConstraint(0.0)


def test_project():
    np.testing.assert_array_equal(project([-1.0, 0.5, 3.0], BoxConstraint(1.0)), [0.0, 0.5, 1.0])


@pytest.mark.parametrize("kind", ["linear", "table"])
def test_toy_matches_grid_search(kind):
    model, eta = toy_problem(kind)
    rec = minimize_in_box(model, BoxConstraint(eta), [("zero", np.zeros(3)), ("mid", np.full(3, 0.5))],
                          SolverOptions(tol=1e-12))
    ref_u, ref_e = box_grid_search(model, eta)
    assert np.max(np.abs(rec.u - ref_u)) <= 2e-3
    assert rec.energy <= ref_e + 1e-12
    if kind == "table":
        assert np.all(rec.u > 0.3) and rec.energy < -1.0
    else:
        np.testing.assert_array_equal(rec.u, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_feasible_and_descending(seed):
    model, comp = _model()
    rng = np.random.default_rng(seed)
    start = rng.uniform(-0.02, 0.03, 33)
    box = BoxConstraint(0.01)
    rec = minimize_in_box(model, box, [start], SolverOptions(max_iter=3000))
    assert np.all(rec.u >= 0) and np.all(rec.u <= 0.01)
    assert rec.energy <= energy(model, project(start, box))
    assert rec.min_energy_seen <= rec.energy


_CACHE = {}


def _model():
    if "m" not in _CACHE:
        stiff = assemble_stiffness(build_grid(1.0, 33), 0.4)
        comp = compose_g(ORIGIN, "origin_power")
        _CACHE["m"] = (build_model(stiff, truncate(comp, 0.01)), comp)
    return _CACHE["m"]


def test_converged_record_has_small_residual(model33):
    model, comp = model33
    box = BoxConstraint(0.01)
    starts, cert = build_starts(model, box, comp)
    rec = minimize_in_box(model, box, starts)
    assert rec.converged and rec.residual <= 1e-6
    assert rec.energy <= cert[2]
    assert residual_norm(model, rec) == rec.residual
    assert cert[2] == energy(model, cert[1])


def test_nonconvergence_carries_best(model33):
    model, _ = model33
    with pytest.raises(NonConvergenceError) as info:
        minimize_in_box(model, BoxConstraint(0.01), [np.full(33, 0.005)], SolverOptions(max_iter=1, tol=1e-30))
    assert info.value.best is not None and info.value.best.iterations == 1


def test_empty_starts_rejected(model33):
    with pytest.raises(InvalidArgumentError):
        minimize_in_box(model33[0], BoxConstraint(0.01), [])


def test_box_membership():
    from fracladder.solver import SolutionRecord

    r = SolutionRecord(np.array([0.0, 0.003, 0.002]), -1.0, 0.0, 0.003, 0.0, 0.01, 0, "x", True, 0.0, -1.0, 1)
    ok, margin = check_box_membership(r, 0.004)
    assert ok and margin == pytest.approx(0.001)
    ok, _ = check_box_membership(r, 0.002)
    assert not ok
    with pytest.raises(InvalidArgumentError):
        check_box_membership(r, 0.02)


def test_distinctness_groups_close_solutions():
    from fracladder.solver import SolutionRecord

    def rec(u, e):
        return SolutionRecord(np.array(u), e, 0.0, 0.0, 0.0, 1.0, 0, "x", True, 0.0, e, 1)

    recs = [rec([0.0, 1.0], -1.0), rec([0.0, 1.0 + 1e-9], -2.0), rec([0.5, 0.5], -0.5)]
    grouping = distinctness(recs, 1e-6)
    assert grouping.count == 2
    assert grouping.representatives == [1, 2]
    with pytest.raises(InvalidArgumentError):
        distinctness(recs, 0.0)


def test_deterministic_given_seed(model33):
    model, comp = model33
    box = BoxConstraint(0.01)
    runs = []
    for _ in range(2):
        starts, _ = build_starts(model, box, comp, SolverOptions(rng_seed=7))
        runs.append(minimize_in_box(model, box, starts, SolverOptions(rng_seed=7)))
    np.testing.assert_array_equal(runs[0].u, runs[1].u)
    assert runs[0].start_label == runs[1].start_label
