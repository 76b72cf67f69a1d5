import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fracladder import kernels
from fracladder.errors import AssemblyError, InvalidArgumentError
from fracladder.grid import build_grid
from fracladder.operator import (
    QuadratureConfig,
    assemble_mass,
    assemble_stiffness,
    check_sign_inequality,
    oracle_gagliardo,
    write_matrix_csv,
)
from fracladder.verify import probe_vectors

from oracles import exact_pl_gagliardo

# uT A u for the unit hat on n=3, L=1, s=0.25 (closed-form oracle value)
HAT_N3_S025 = 2.0 * (2.0 ** 3.5 - 8.0) / 0.9375 * np.sqrt(0.5)


def test_frozen_hat_value():
    A = assemble_stiffness(build_grid(1.0, 3), 0.25).matrix
    assert A[1, 1] == pytest.approx(HAT_N3_S025, rel=1e-12)
    assert A[1, 1] == pytest.approx(4.998710934416, rel=1e-12)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.4, 0.6, 0.75, 0.9])
@pytest.mark.parametrize("n", [3, 17, 64])
def test_matches_closed_form(n, s):
    grid = build_grid(1.3, n)
    st_ = assemble_stiffness(grid, s)
    rng = np.random.default_rng(n)
    for _ in range(3):
        u = rng.normal(size=n)
        assert st_.quad(u) == pytest.approx(exact_pl_gagliardo(grid, u, s), rel=1e-9)


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_brute_force_oracle_agrees_with_closed_form(s):
    grid = build_grid(1.0, 17)
    for name, u in probe_vectors(grid, count=2):
        ref = exact_pl_gagliardo(grid, u, s)
        assert oracle_gagliardo(grid, u, s, 32) == pytest.approx(ref, rel=2e-3), name


def test_structure(stiff257):
    A = stiff257.matrix
    assert np.array_equal(A, A.T)
    n = A.shape[0]
    # translation invariance of the kernel on a uniform grid
    for d in (0, 1, 5, 100):
        diag = np.diagonal(A, d)
        np.testing.assert_allclose(diag, diag[0], rtol=1e-12)
    off = A - np.diag(np.diag(A))
    assert np.all(off <= 0)
    assert np.all(A.sum(axis=1) > 0)
    assert np.linalg.eigvalsh(A)[0] > 0
    assert n == 257


def test_metadata_records_rules_and_backend(stiff257):
    meta = stiff257.metadata
    assert meta["backend"] == kernels.BACKEND
    assert "far_rule" in meta and "orders" in meta


@pytest.mark.parametrize("s", [0.0, 1.0, 1.5, -0.2, float("nan")])
def test_rejects_order(s):
    with pytest.raises(InvalidArgumentError):
        assemble_stiffness(build_grid(1.0, 5), s)


def test_quadrature_failure_names_offset():
    with pytest.raises(AssemblyError, match="offset"):
        assemble_stiffness(build_grid(1.0, 9), 0.4, QuadratureConfig(rtol=1e-18, max_order=32))


def test_mass_matrices():
    grid = build_grid(2.0, 9)
    M = assemble_mass(grid)
    Ml = assemble_mass(grid, lumped=True)
    assert not M.lumped and Ml.lumped
    assert np.array_equal(M.matrix, M.matrix.T)
    assert np.linalg.eigvalsh(M.matrix)[0] > 0
    np.testing.assert_array_equal(Ml.matrix.sum(axis=1), grid.h)
    # consistent mass integrates the square of the interpolant exactly
    u = np.ones(9)
    exact = 8 * grid.h + 2 * grid.h / 3
    assert u @ M.matrix @ u == pytest.approx(exact, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(arrays(float, 17, elements=st.floats(-10, 10)), st.floats(-5, 5))
def test_quadratic_homogeneity(u, c):
    st_ = assemble_stiffness(build_grid(1.0, 17), 0.4)
    assert st_.quad(c * u) == pytest.approx(c * c * st_.quad(u), rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(1, 40), elements=st.floats(-1e3, 1e3)))
def test_sign_inequality_property(u):
    report = check_sign_inequality(u, sample_pairs=u.size ** 2)
    assert report.holds
    assert report.n_pairs == u.size ** 2


def test_write_matrix_csv_round_trip(tmp_path):
    A = assemble_stiffness(build_grid(1.0, 7), 0.3).matrix
    path = tmp_path / "A.csv"
    write_matrix_csv(path, A)
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=","), A)
