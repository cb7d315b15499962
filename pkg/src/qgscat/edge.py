"""One-dimensional solution data for ``-psi'' + q psi = k^2 psi``.

All quantities are for real nonzero momentum ``k``.  For piecewise-constant
real potentials the transfer matrices are real.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .graph import PiecewisePotential


class BoundaryData(NamedTuple):
    """Value and derivative (with respect to increasing ``x``) at a point."""

    value: complex
    derivative: complex


def check_momentum(k: float) -> float:
    k = float(k)
    if not np.isfinite(k) or k == 0.0:
        raise ValueError(f"momentum must be real and nonzero, got {k}")
    return k


def transfer_matrix(potential: PiecewisePotential, k: float, x0: float, x1: float) -> np.ndarray:
    """Map ``(psi(x0), psi'(x0))`` to ``(psi(x1), psi'(x1))``.

    The potential is taken as zero beyond its support, so ``x1`` may exceed
    ``potential.support_end``.
    """
    if not 0.0 <= x0 <= x1:
        raise ValueError(f"need 0 <= x0 <= x1, got x0={x0}, x1={x1}")
    if x0 == x1:
        return np.eye(2)
    seg = potential.restrict(x0, x1)
    return _kernels.transfer_product(seg.widths(), seg.values(), k)


def transfer_matrices(potential: PiecewisePotential, ks, x0: float, x1: float) -> np.ndarray:
    """:func:`transfer_matrix` over an array of momenta, shape ``(len(ks), 2, 2)``."""
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    seg = potential.restrict(x0, x1)
    return _kernels.transfer_grid(seg.widths(), seg.values(), ks)


def standard_solutions_at(potential: PiecewisePotential, k: float, a: float):
    """``(theta(a), theta'(a), phi(a), phi'(a))`` for data ``(1, 0)`` and ``(0, 1)`` at 0."""
    M = transfer_matrix(potential, k, 0.0, a)
    return M[0, 0], M[1, 0], M[0, 1], M[1, 1]


def jost_boundary_data(potential: PiecewisePotential, k: float, sign: int) -> BoundaryData:
    """Jost solution ``f_+`` (``sign=+1``) or ``f_-`` (``sign=-1``) at the ray origin.

    Beyond the support ``s`` the solution is exactly ``exp(sign*i*k*x)``; its
    data at ``s`` is carried back to 0 with the inverse transfer matrix.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    s = potential.support_end
    e = np.exp(sign * 1j * k * s)
    val, der = e, sign * 1j * k * e
    if s == 0.0:
        return BoundaryData(complex(val), complex(der))
    M = transfer_matrix(potential, k, 0.0, s)
    # det M = 1, so the inverse is the adjugate
    v0 = M[1, 1] * val - M[0, 1] * der
    d0 = -M[1, 0] * val + M[0, 0] * der
    return BoundaryData(complex(v0), complex(d0))


def jost_pair(potential: PiecewisePotential, k: float) -> tuple[BoundaryData, BoundaryData]:
    return jost_boundary_data(potential, k, 1), jost_boundary_data(potential, k, -1)


def asymptotic_form_eval(k: float, phi: Sequence[BoundaryData], psi: Sequence[BoundaryData],
                         normalized: bool = True) -> complex:
    """Wronskian form summed over rays, ``sum conj(phi) psi' - conj(phi') psi``.

    With ``normalized`` the sum is divided by ``k``.
    """
    if len(phi) != len(psi):
        raise ValueError("phi and psi must carry data for the same number of rays")
    total = 0j
    for a, b in zip(phi, psi):
        total += np.conj(a.value) * b.derivative - np.conj(a.derivative) * b.value
    if normalized:
        total /= check_momentum(k)
    return complex(total)
