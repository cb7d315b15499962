import os
import subprocess
import sys

import numpy as np
import pytest

from qgscat import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def random_segments(rng, n):
    return rng.uniform(0.01, 0.8, n), rng.uniform(-6, 6, n)


@needs_numba
def test_numba_matches_numpy_pointwise():
    rng = np.random.default_rng(0)
    for _ in range(50):
        w, q = random_segments(rng, rng.integers(0, 6))
        k = rng.uniform(0.05, 10)
        a = _kernels.transfer_product_numpy(w, q, k)
        b = _kernels.transfer_product_numba(w, q, k)
        assert np.abs(a - b).max() <= 1e-13 * max(1.0, np.abs(a).max())


@needs_numba
def test_numba_matches_numpy_grid():
    rng = np.random.default_rng(1)
    w, q = random_segments(rng, 4)
    ks = np.concatenate([np.linspace(0.01, 12, 301), np.sqrt(np.abs(q[:1]))])
    a = _kernels.transfer_grid_numpy(w, q, ks)
    b = _kernels.transfer_grid_numba(w, q, ks)
    assert a.shape == b.shape == (ks.size, 2, 2)
    assert np.abs(a - b).max() <= 1e-12 * max(1.0, np.abs(a).max())


def test_grid_matches_pointwise_numpy():
    rng = np.random.default_rng(2)
    w, q = random_segments(rng, 3)
    ks = np.linspace(0.1, 5, 23)
    grid = _kernels.transfer_grid_numpy(w, q, ks)
    for k, M in zip(ks, grid):
        assert np.allclose(M, _kernels.transfer_product_numpy(w, q, k), atol=1e-14)


def test_series_branch_agrees_with_closed_form_at_cutoff():
    # just either side of the series cutoff the two formulas must agree
    w = 1.0
    for x in (0.99 * _kernels.SERIES_CUTOFF, 1.01 * _kernels.SERIES_CUTOFF):
        c, s, d = _kernels._segment_entries_py(x * x, w)
        assert abs(c - np.cos(x)) < 1e-15
        assert abs(s - np.sin(x) / x) < 1e-15
        assert abs(d + x * np.sin(x)) < 1e-15


def test_empty_product_is_identity():
    assert np.array_equal(_kernels.transfer_product_numpy(np.empty(0), np.empty(0), 1.0), np.eye(2))


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if expected == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    env = dict(os.environ, QGSCAT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from qgscat import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
