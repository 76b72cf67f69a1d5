import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracladder.energy import (
    BumpSpec,
    build_bump,
    build_model,
    bump_energy_constant,
    embedding_constant,
    energy,
    energy_and_gradient,
    gradient,
    lower_bound,
)
from fracladder.errors import InvalidArgumentError
from fracladder.grid import build_grid
from fracladder.nonlinearity import NonlinearitySpec, compose_g, truncate
from fracladder.operator import assemble_mass, assemble_stiffness
from fracladder.verify import fd_configurations, fd_gradient_errors

ORIGIN = NonlinearitySpec("origin", 0.5, 1.0, 0.5, mu_lin=0.1)


@pytest.fixture(scope="module")
def small():
    grid = build_grid(1.0, 33)
    stiff = assemble_stiffness(grid, 0.4)
    return build_model(stiff, truncate(compose_g(ORIGIN, "origin_power"), 0.05))


def test_energy_of_zero_is_zero(small):
    assert energy(small, np.zeros(33)) == 0.0


def test_quadratic_model_without_nonlinearity():
    from fracladder.energy import EnergyModel

    stiff = assemble_stiffness(build_grid(1.0, 9), 0.3)
    model = EnergyModel(stiff, assemble_mass(stiff.grid), 0.0, None, embedding_constant(stiff))
    u = np.linspace(0.1, 0.9, 9)
    assert energy(model, u) == pytest.approx(0.5 * stiff.quad(u), rel=1e-15)
    assert lower_bound(model) == 0.0


def test_energy_formula(small):
    u = np.linspace(0.0, 0.04, 33)
    A, M = small.stiffness.matrix, small.mass.matrix
    expected = 0.5 * u @ A @ u + 0.05 * u @ M @ u - small.h * np.sum(small.gk.G(u))
    assert energy(small, u) == pytest.approx(expected, rel=1e-13)
    e, g = energy_and_gradient(small, u)
    assert e == energy(small, u)
    np.testing.assert_array_equal(g, gradient(small, u))


def test_gradient_matches_finite_differences():
    for name, model, eta in fd_configurations(n=33):
        assert max(fd_gradient_errors(model, eta, pairs=10)) <= 1e-6, name


def test_rejects_negative_shift(small):
    with pytest.raises(InvalidArgumentError):
        build_model(small.stiffness, small.gk, mu=-1.0)


def test_embedding_constant_is_sharp(small):
    C1 = embedding_constant(small.stiffness)
    w, V = np.linalg.eigh(small.stiffness.matrix)
    u = V[:, 0]
    assert np.sqrt(small.h * u @ u) == pytest.approx(C1 * small.stiffness.seminorm(u), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_lower_bound_contains_random_energies(seed):
    model = _cached_model()
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, rng.choice([0.01, 0.05, 1.0]), model.grid.n_interior)
    assert energy(model, u) >= lower_bound(model)


_MODEL = {}


def _cached_model():
    if "m" not in _MODEL:
        stiff = assemble_stiffness(build_grid(1.0, 33), 0.4)
        _MODEL["m"] = build_model(stiff, truncate(compose_g(ORIGIN, "origin_power"), 0.05))
    return _MODEL["m"]


def test_coercive_along_rays(small):
    v = np.abs(np.sin(np.linspace(0, 3, 33))) + 0.1
    vals = [energy(small, c * v) for c in (10.0, 100.0, 1000.0)]
    assert 0 < vals[0] < vals[1] < vals[2]


def test_bump_shape_and_homogeneity(stiff257):
    grid = stiff257.grid
    z = build_bump(grid, BumpSpec(0.25, 2.0))
    assert z.max() == 2.0
    assert np.all(z[np.abs(grid.nodes) >= 0.5] == 0)
    C = bump_energy_constant(stiff257, 0.25)
    for zeta in (0.1, 0.01, 0.001):
        zz = build_bump(grid, BumpSpec(0.25, zeta))
        assert stiff257.quad(zz) / zeta ** 2 == pytest.approx(C, rel=1e-12)


def test_bump_support_check():
    grid = build_grid(1.0, 33)
    with pytest.raises(InvalidArgumentError, match="leaves the domain"):
        build_bump(grid, BumpSpec(0.6))
    with pytest.raises(InvalidArgumentError):
        build_bump(grid, BumpSpec(0.0))
    build_bump(grid, BumpSpec(0.5))


def test_consistent_mass_is_default(small):
    np.testing.assert_array_equal(small.mass.matrix, assemble_mass(small.grid).matrix)
