import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conicpinch import _kernels_py, kernels

compiled = pytest.importorskip("conicpinch._kernels")

fields = arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(2, 12)),
                elements=st.floats(-3, 3, allow_nan=False, width=64))


def test_backend_selected():
    assert kernels.BACKEND == "compiled"


def test_laplacian_of_quadratic_is_exact():
    x = np.arange(9.0) * 0.25
    X, Y = np.meshgrid(x, x)
    lap = kernels.laplacian5(X ** 2 + 3 * Y ** 2, 0.25)
    assert np.all(np.isnan(lap[0])) and np.all(np.isnan(lap[:, -1]))
    assert np.allclose(lap[1:-1, 1:-1], 8.0, atol=1e-12)


def test_disk_area_fraction():
    n = 201
    x = np.linspace(-1.2, 1.2, n)
    X, Y = np.meshgrid(x, x)
    frac, segs = kernels.level_set_cells(-(X ** 2 + Y ** 2), -1.0)
    h = x[1] - x[0]
    assert frac.sum() * h * h == pytest.approx(np.pi, rel=1e-3)
    L = np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1]).sum() * h
    assert L == pytest.approx(2 * np.pi, rel=1e-3)


def test_saddle_disambiguation():
    f = np.array([[1.0, 0.0], [0.0, 1.0]])
    fr_hi, s_hi = kernels.level_set_cells(f + np.array([[0, 0], [0, 0]]), 0.5)
    fr_lo, _ = kernels.level_set_cells(f, 0.6)
    assert s_hi.shape == (2, 4)
    assert 0 < fr_lo[0, 0] < fr_hi[0, 0] + 1e-12


@settings(max_examples=100)
@given(fields, st.floats(0.01, 2.0))
def test_laplacian_backends_identical(h, spacing):
    a = _kernels_py.laplacian5(h, spacing)
    b = compiled.laplacian5(np.ascontiguousarray(h), spacing)
    assert np.array_equal(a, b, equal_nan=True)


@settings(max_examples=100)
@given(fields, st.floats(-3, 3))
def test_level_set_backends_identical(f, level):
    fa, sa = _kernels_py.level_set_cells(f, level)
    fb, sb = compiled.level_set_cells(np.ascontiguousarray(f), level)
    assert np.array_equal(fa, fb)
    assert np.array_equal(sa, sb)


@given(fields, st.floats(-3, 3))
def test_area_fraction_bounds(f, level):
    frac, _ = kernels.level_set_cells(f, level)
    assert np.all(frac >= -1e-15) and np.all(frac <= 1 + 1e-15)


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, CONICPINCH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from conicpinch import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
