"""Hot inner loops for piecewise-constant transfer matrices.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical semantics.  The jitted path is used by default; set
``QGSCAT_DISABLE_NUMBA=1`` in the environment (before import) to force the
numpy path.  Both paths are always importable so the benchmark and the test
suite can compare them directly.
"""

import os

import numpy as np

# Below this |kappa * width| the trigonometric entries are replaced by their
# Taylor series to avoid cancellation in sin(x)/x.
SERIES_CUTOFF = 1e-4

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("QGSCAT_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def _segment_entries_py(kappa2, width):
    # cos(kappa w), sin(kappa w)/kappa, -kappa sin(kappa w) for real kappa^2 of either sign
    z = kappa2 * width * width
    if abs(z) < SERIES_CUTOFF * SERIES_CUTOFF:
        c = 1.0 - z / 2.0 + z * z / 24.0
        s = width * (1.0 - z / 6.0 + z * z / 120.0)
        return c, s, -kappa2 * s
    if kappa2 > 0.0:
        kap = np.sqrt(kappa2)
        c = np.cos(kap * width)
        sn = np.sin(kap * width)
        return c, sn / kap, -kap * sn
    kap = np.sqrt(-kappa2)
    c = np.cosh(kap * width)
    sh = np.sinh(kap * width)
    return c, sh / kap, kap * sh


def _transfer_product_py(widths, values, k):
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    k2 = k * k
    for j in range(widths.shape[0]):
        c, s, d = _segment_entries_py(k2 - values[j], widths[j])
        # left-multiply: later segments act after earlier ones
        n00 = c * m00 + s * m10
        n01 = c * m01 + s * m11
        n10 = d * m00 + c * m10
        n11 = d * m01 + c * m11
        m00, m01, m10, m11 = n00, n01, n10, n11
    out = np.empty((2, 2))
    out[0, 0] = m00
    out[0, 1] = m01
    out[1, 0] = m10
    out[1, 1] = m11
    return out


def transfer_product_numpy(widths, values, k):
    """Transfer matrix of consecutive constant segments at momentum ``k``."""
    return _transfer_product_py(np.asarray(widths, float), np.asarray(values, float), float(k))


def transfer_grid_numpy(widths, values, ks):
    """Vectorised over a k-grid; returns an array of shape ``(len(ks), 2, 2)``."""
    widths = np.asarray(widths, float)
    values = np.asarray(values, float)
    ks = np.asarray(ks, float)
    out = np.zeros((ks.size, 2, 2))
    out[:, 0, 0] = 1.0
    out[:, 1, 1] = 1.0
    for w, q in zip(widths, values):
        kappa2 = ks * ks - q
        z = kappa2 * w * w
        small = np.abs(z) < SERIES_CUTOFF * SERIES_CUTOFF
        pos = (kappa2 > 0) & ~small
        neg = (kappa2 <= 0) & ~small
        c = np.empty_like(ks)
        s = np.empty_like(ks)
        d = np.empty_like(ks)
        c[small] = 1.0 - z[small] / 2.0 + z[small] ** 2 / 24.0
        s[small] = w * (1.0 - z[small] / 6.0 + z[small] ** 2 / 120.0)
        d[small] = -kappa2[small] * s[small]
        kap = np.sqrt(kappa2[pos])
        c[pos] = np.cos(kap * w)
        s[pos] = np.sin(kap * w) / kap
        d[pos] = -kap * np.sin(kap * w)
        kap = np.sqrt(-kappa2[neg])
        c[neg] = np.cosh(kap * w)
        s[neg] = np.sinh(kap * w) / kap
        d[neg] = kap * np.sinh(kap * w)
        seg = np.empty_like(out)
        seg[:, 0, 0] = c
        seg[:, 0, 1] = s
        seg[:, 1, 0] = d
        seg[:, 1, 1] = c
        out = seg @ out
    return out


if HAVE_NUMBA:
    _segment_entries_nb = njit(cache=True)(_segment_entries_py)

    @njit(cache=True)
    def _transfer_product_nb(widths, values, k):
        m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
        k2 = k * k
        for j in range(widths.shape[0]):
            c, s, d = _segment_entries_nb(k2 - values[j], widths[j])
            n00 = c * m00 + s * m10
            n01 = c * m01 + s * m11
            n10 = d * m00 + c * m10
            n11 = d * m01 + c * m11
            m00, m01, m10, m11 = n00, n01, n10, n11
        out = np.empty((2, 2))
        out[0, 0] = m00
        out[0, 1] = m01
        out[1, 0] = m10
        out[1, 1] = m11
        return out

    @njit(cache=True)
    def _transfer_grid_nb(widths, values, ks):
        out = np.empty((ks.shape[0], 2, 2))
        for i in range(ks.shape[0]):
            out[i] = _transfer_product_nb(widths, values, ks[i])
        return out

    def transfer_product_numba(widths, values, k):
        return _transfer_product_nb(np.ascontiguousarray(widths, dtype=np.float64),
                                    np.ascontiguousarray(values, dtype=np.float64), float(k))

    def transfer_grid_numba(widths, values, ks):
        return _transfer_grid_nb(np.ascontiguousarray(widths, dtype=np.float64),
                                 np.ascontiguousarray(values, dtype=np.float64),
                                 np.ascontiguousarray(ks, dtype=np.float64))


if USE_NUMBA:
    transfer_product = transfer_product_numba
    transfer_grid = transfer_grid_numba
else:
    transfer_product = transfer_product_numpy
    transfer_grid = transfer_grid_numpy


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
