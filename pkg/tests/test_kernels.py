import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fracladder.kernels import BACKEND, get_backend

py = get_backend("python")
try:
    cy = get_backend("cython")
except ImportError:
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def test_backend_name():
    assert BACKEND in ("python", "cython")
    with pytest.raises(ValueError):
        get_backend("fortran")


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.data())
def test_scatter_parity(n, data):
    ne = n + 1
    local = data.draw(arrays(float, (ne, 4, 4), elements=st.floats(-5, 5)))
    local = np.ascontiguousarray(local)
    np.testing.assert_allclose(cy.scatter_pairs(local, n), py.scatter_pairs(local, n), rtol=1e-13, atol=1e-12)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(arrays(float, st.integers(1, 200), elements=st.floats(-5, 5)), st.floats(0.05, 0.95),
       st.integers(0, 10))
def test_offset_sum_parity(v, s, band):
    np.testing.assert_allclose(cy.offset_sum(v, s, band), py.offset_sum(v, s, band), rtol=1e-12, atol=1e-12)


def test_offset_sum_small_case():
    v = np.array([0.0, 1.0, 3.0])
    # only |p - q| = 2 survives band 1: 2 * (3 - 0)^2 * 2^(-1.8)
    assert py.offset_sum(v, 0.4, 1) == pytest.approx(18.0 * 2.0 ** -1.8, rel=1e-15)


def test_fallback_assembly_matches_compiled():
    from fracladder import _kernels_py
    from fracladder.grid import build_grid
    from fracladder.operator import assemble_stiffness
    import fracladder.kernels as k

    grid = build_grid(1.0, 33)
    A = assemble_stiffness(grid, 0.4).matrix
    saved = k.scatter_pairs
    try:
        k.scatter_pairs = _kernels_py.scatter_pairs
        B = assemble_stiffness(grid, 0.4).matrix
    finally:
        k.scatter_pairs = saved
    np.testing.assert_allclose(A, B, rtol=1e-13, atol=0)


def test_env_var_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, FRACLADDER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import fracladder.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
