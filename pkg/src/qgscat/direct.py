"""Scattering matrix and interior kernel from a direct solve on the whole graph.

Unknowns are the ray amplitudes plus two coefficients per edge, the solution
on edge ``e`` being ``c_theta * theta_e + c_phi * phi_e`` with standard
solutions based at the edge's ``x = 0`` end.  Each vertex contributes the
rows ``A_v psi_v + B_v psi'_v = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .edge import check_momentum, jost_pair, transfer_matrix
from .graph import MetricGraph, VertexConditions, require_valid
from .symplectic import Subspace, canonical_coordinates, column_basis

SINGULAR_RTOL = 1e-12
KERNEL_RTOL = 1e-8
UNITARITY_TOL = 1e-9


class DegenerateError(ArithmeticError):
    """The boundary-value system is singular at this momentum."""

    def __init__(self, k, sigma_min, sigma_max):
        self.k = k
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        super().__init__(f"degenerate at this k (k={k:.17g}): smallest singular value "
                         f"{sigma_min:.3e} vs largest {sigma_max:.3e}")


class ConsistencyError(RuntimeError):
    """A computed scattering matrix failed its unitarity check."""


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    """``S(k)``; row ``i`` holds the outgoing amplitudes for a unit ``f-`` on ray ``i``."""

    k: float
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def unitarity_residual(self) -> float:
        S = self.entries
        return float(np.abs(S.conj().T @ S - np.eye(self.n)).max())

    def symmetry_residual(self) -> float:
        return float(np.abs(self.entries - self.entries.T).max())

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def _end_rows(graph: MetricGraph, k: float):
    """Per-end linear maps from edge coefficients to (value, inward derivative).

    Returns ``edge_data[j] = ((th, th', ph, ph') at a_j)`` and the Jost data
    of every ray.
    """
    edge_data = []
    for e in graph.edges:
        M = transfer_matrix(e.potential, k, 0.0, e.length)
        edge_data.append(M)
    jost = [jost_pair(r.potential, k) for r in graph.rays]
    return edge_data, jost


def _assemble(graph: MetricGraph, conditions: VertexConditions, k: float):
    """Blocks of the homogeneous system.

    Columns: ``f+`` amplitude per ray, ``f-`` amplitude per ray, then
    ``(c_theta, c_phi)`` per edge.  Returns ``(M_plus, M_minus, M_edge)``.
    """
    n, p = graph.n, graph.p
    edge_data, jost = _end_rows(graph, k)
    rows = sum(graph.degrees())
    Mp = np.zeros((rows, n), dtype=complex)
    Mm = np.zeros((rows, n), dtype=complex)
    Me = np.zeros((rows, 2 * p), dtype=complex)
    r0 = 0
    for v, ends in enumerate(graph.ends()):
        A, B = conditions.A[v], conditions.B[v]
        d = len(ends)
        for col, end in enumerate(ends):
            a, b = A[:, col], B[:, col]
            if end.kind == "ray":
                fp, fm = jost[end.index]
                Mp[r0:r0 + d, end.index] += a * fp.value + b * fp.derivative
                Mm[r0:r0 + d, end.index] += a * fm.value + b * fm.derivative
            else:
                j = 2 * end.index
                if end.side == 0:
                    Me[r0:r0 + d, j] += a
                    Me[r0:r0 + d, j + 1] += b
                else:
                    T = edge_data[end.index]
                    # value = c_t T00 + c_p T01, inward derivative = -(c_t T10 + c_p T11)
                    Me[r0:r0 + d, j] += a * T[0, 0] - b * T[1, 0]
                    Me[r0:r0 + d, j + 1] += a * T[0, 1] - b * T[1, 1]
        r0 += d
    return Mp, Mm, Me


def scattering_solution(graph: MetricGraph, conditions: VertexConditions, k: float,
                        check: bool = True) -> tuple[ScatteringMatrix, np.ndarray]:
    """Scattering matrix plus the edge coefficients of every scattering wave.

    ``coeffs[i, e] = (c_theta, c_phi)`` on edge ``e`` for the wave incoming on ray ``i``.
    """
    k = check_momentum(k)
    if check:
        require_valid(graph, conditions)
    n = graph.n
    Mp, Mm, Me = _assemble(graph, conditions, k)
    M = np.hstack([Mp, Me])
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] < SINGULAR_RTOL * sv[0]:
        raise DegenerateError(k, sv[-1], sv[0])
    # one factorisation, n right-hand sides (one per incoming ray)
    X = sla.lu_solve(sla.lu_factor(M), -Mm)
    S = ScatteringMatrix(k, np.ascontiguousarray(X[:n].T))
    res = S.unitarity_residual()
    if res > UNITARITY_TOL:
        raise ConsistencyError(f"direct scattering matrix not unitary at k={k}: residual {res:.3e}")
    return S, X[n:].T.reshape(n, graph.p, 2)


def scattering_direct(graph: MetricGraph, conditions: VertexConditions, k: float,
                      check: bool = True) -> ScatteringMatrix:
    """Solve the vertex conditions with the scattering-wave ansatz on every ray."""
    return scattering_solution(graph, conditions, k, check)[0]


def interior_kernel(graph: MetricGraph, conditions: VertexConditions, k: float,
                    rtol: float = KERNEL_RTOL) -> tuple[int, np.ndarray, float]:
    """Solutions vanishing identically on every ray.

    Returns ``(dimension, basis, sigma_ratio)``: the basis has one column of
    edge coefficients ``(c_theta, c_phi)`` per kernel vector and
    ``sigma_ratio`` is the smallest singular value relative to the largest
    (the residual used to decide).
    """
    k = check_momentum(k)
    if graph.p == 0:
        return 0, np.zeros((0, 0), dtype=complex), 1.0
    _, _, Me = _assemble(graph, conditions, k)
    _, sv, Vh = np.linalg.svd(Me)
    smax = sv[0] if sv.size else 0.0
    if smax == 0.0:
        return Me.shape[1], np.eye(Me.shape[1], dtype=complex), 0.0
    full = np.zeros(Me.shape[1])
    full[: sv.size] = sv
    ratio = full / smax
    dim = int(np.sum(ratio < rtol))
    basis = Vh[Me.shape[1] - dim:].conj().T
    return dim, basis, float(ratio.min())


def ray_lagrange_plane(graph: MetricGraph, conditions: VertexConditions, k: float) -> Subspace:
    """Generalised eigenspace restricted to the rays, in ``pi/q`` coordinates.

    Computed from the kernel of the full homogeneous system with free
    ``f+``/``f-`` amplitudes on every ray; solutions confined to the compact
    part project to zero and drop out.
    """
    k = check_momentum(k)
    n = graph.n
    Mp, Mm, Me = _assemble(graph, conditions, k)
    M = np.hstack([Mp, Mm, Me])
    _, sv, Vh = np.linalg.svd(M)
    rank = int(np.sum(sv > SINGULAR_RTOL * 1e2 * sv[0]))
    K = Vh[rank:].conj().T
    rays = canonical_coordinates(K[:n], K[n:2 * n])
    B = column_basis(rays, rtol=1e-8)
    return Subspace(B)
