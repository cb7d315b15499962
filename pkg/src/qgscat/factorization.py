"""Scattering matrix of a linked graph from the scattering matrices of its parts.

Two graphs ``G1`` (``m1`` rays) and ``G2`` (``m2`` rays) are joined along
``p`` ray pairs.  Rays of the direct sum are arranged in the block layout

    [G1 linked (p), G2 linked (p), G2 free (n2), G1 free (n1)]

with the linked rays in link order and the free rays in their original
order.  The result of a composition is indexed by the free rays in this
order, ``G2`` first.

The composition itself goes through the blocks of
``h = g(S_m) g(T_m)^H``: with ``A = (S T^H + I)/2`` and
``B = i (S T^H - I)/2`` the composed matrix is

    S_n = A_n - i B_n - B_{n,2p} B_{2p}^{-1} (A_{2p,n} - i B_{2p,n}).

``B_{2p}`` is singular exactly when there is a solution living on the
linking edges only, i.e. an eigenvalue embedded in the continuous spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .direct import ScatteringMatrix, interior_kernel, scattering_direct
from .graph import LinkSpec, MetricGraph, VertexConditions, star_decomposition
from .symplectic import (HermitianForm, Subspace, check_unitary, lagrange_from_unitary,
                         project_lagrange, quotient_space, unitary_from_lagrange)

REFUSE_RTOL = 1e-10
CONSISTENCY_TOL = 1e-10


class ConditionAError(ArithmeticError):
    """``B_{2p}`` is (numerically) singular: possible embedded eigenvalue."""

    def __init__(self, sigma_min, sigma_max, k=None):
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        self.k = k
        at = "" if k is None else f" at k={k:.17g}"
        super().__init__(f"ConditionA: possible embedded eigenvalue{at} "
                         f"(sigma_min(B_2p)={sigma_min:.3e}, sigma_max={sigma_max:.3e})")


@dataclass(frozen=True)
class BlockLayout:
    """Index bookkeeping for linking ``pairs = [(ray of G1, ray of G2), ...]``."""

    m1: int
    m2: int
    pairs: tuple[tuple[int, int], ...] = ()
    free1: tuple[int, ...] = field(init=False)
    free2: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        l1 = [a for a, _ in pairs]
        l2 = [b for _, b in pairs]
        if len(set(l1)) != len(l1) or len(set(l2)) != len(l2):
            raise ValueError("each ray may be linked at most once")
        if any(not 0 <= a < self.m1 for a in l1) or any(not 0 <= b < self.m2 for b in l2):
            raise ValueError("link refers to a nonexistent ray")
        object.__setattr__(self, "free1", tuple(i for i in range(self.m1) if i not in l1))
        object.__setattr__(self, "free2", tuple(i for i in range(self.m2) if i not in l2))

    @classmethod
    def leading(cls, m1: int, m2: int, p: int) -> BlockLayout:
        """The first ``p`` rays of each graph are linked, in order."""
        return cls(m1, m2, tuple((j, j) for j in range(p)))

    @property
    def p(self) -> int:
        return len(self.pairs)

    @property
    def n1(self) -> int:
        return self.m1 - self.p

    @property
    def n2(self) -> int:
        return self.m2 - self.p

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def m(self) -> int:
        return self.m1 + self.m2

    @property
    def index_N(self) -> list[int]:
        return list(range(2 * self.p))

    @property
    def index_N_perp(self) -> list[int]:
        return list(range(self.m)) + list(range(2 * self.p + self.m, 2 * self.m))

    def order(self) -> list[tuple[int, int]]:
        """``(graph, ray)`` for each layout position."""
        return ([(0, a) for a, _ in self.pairs] + [(1, b) for _, b in self.pairs]
                + [(1, i) for i in self.free2] + [(0, i) for i in self.free1])

    def free_rays(self) -> list[tuple[int, int]]:
        """``(graph, ray)`` for each row of the composed matrix."""
        return self.order()[2 * self.p:]

    def _perm(self, which: int) -> list[int]:
        if which == 0:
            return [a for a, _ in self.pairs] + list(self.free1)
        return [b for _, b in self.pairs] + list(self.free2)


def _as_matrix(S) -> np.ndarray:
    return np.asarray(getattr(S, "entries", S), dtype=complex)


def assemble_block_S(S1, S2, layout: BlockLayout) -> np.ndarray:
    """Direct sum of ``S1`` and ``S2`` arranged in the block layout."""
    S1, S2 = _as_matrix(S1), _as_matrix(S2)
    if S1.shape != (layout.m1, layout.m1) or S2.shape != (layout.m2, layout.m2):
        raise ValueError(f"expected {layout.m1}x{layout.m1} and {layout.m2}x{layout.m2} "
                         f"matrices, got {S1.shape} and {S2.shape}")
    p, n2 = layout.p, layout.n2
    P1 = S1[np.ix_(layout._perm(0), layout._perm(0))]
    P2 = S2[np.ix_(layout._perm(1), layout._perm(1))]
    pos1 = list(range(p)) + list(range(2 * p + n2, layout.m))
    pos2 = list(range(p, 2 * p + n2))
    Sm = np.zeros((layout.m, layout.m), dtype=complex)
    Sm[np.ix_(pos1, pos1)] = P1
    Sm[np.ix_(pos2, pos2)] = P2
    return Sm


def assemble_T(p: int, n: int, zeta) -> np.ndarray:
    """Scattering matrix of the matching subspace: ``[[0, Z], [Z, 0]] (+) I_n``."""
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    if zeta.size != p:
        raise ValueError(f"expected {p} phases, got {zeta.size}")
    if np.any(np.abs(np.abs(zeta) - 1.0) > 1e-12):
        raise ValueError("link phases must have unit modulus")
    T = np.eye(2 * p + n, dtype=complex)
    Z = np.diag(zeta)
    T[:2 * p, :2 * p] = np.block([[np.zeros((p, p)), Z], [Z, np.zeros((p, p))]])
    return T


def h_blocks(Sm, Tm) -> tuple[np.ndarray, np.ndarray]:
    """``A = (S T^H + I)/2`` and ``B = i (S T^H - I)/2``, so that ``h = [[A, B], [-B, A]]``."""
    Sm, Tm = _as_matrix(Sm), _as_matrix(Tm)
    if Sm.shape != Tm.shape:
        raise ValueError("S_m and T_m must have the same shape")
    X = Sm @ Tm.conj().T
    eye = np.eye(X.shape[0])
    return 0.5 * (X + eye), 0.5j * (X - eye)


def _reduce(A: np.ndarray, B: np.ndarray, p: int, k=None, diagnostics: dict | None = None):
    """Eliminate the ``2p`` linked coordinates from the ``h`` blocks."""
    P = 2 * p
    An, Bn = A[P:, P:], B[P:, P:]
    if P == 0:
        return An - 1j * Bn
    B2p = B[:P, :P]
    sv = np.linalg.svd(B2p, compute_uv=False)
    if diagnostics is not None:
        diagnostics["sigma_min"] = float(sv[-1])
        diagnostics["sigma_max"] = float(sv[0])
        diagnostics["cond"] = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if sv[-1] < REFUSE_RTOL * sv[0]:
        raise ConditionAError(float(sv[-1]), float(sv[0]), k)
    # rho = -B_{n,2p} B_{2p}^{-1}, via a solve with B_{2p}^T
    rho = -sla.solve(B2p.T, B[P:, :P].T).T
    return An - 1j * Bn + rho @ (A[:P, P:] - 1j * B[:P, P:])


def b2p_sigma(Sm, zeta) -> tuple[float, float]:
    """Smallest and largest singular value of ``B_{2p}`` for a block-arranged ``S_m``."""
    Sm = _as_matrix(Sm)
    p = len(zeta)
    T = assemble_T(p, Sm.shape[0] - 2 * p, zeta)
    _, B = h_blocks(Sm, T)
    sv = np.linalg.svd(B[:2 * p, :2 * p], compute_uv=False)
    return float(sv[-1]), float(sv[0])


def compose_closed_form(S1, S2, layout: BlockLayout, zeta) -> np.ndarray:
    """Explicit formula in terms of the sub-blocks of ``S1`` and ``S2``."""
    S1, S2 = _as_matrix(S1), _as_matrix(S2)
    p = layout.p
    P1 = S1[np.ix_(layout._perm(0), layout._perm(0))]
    P2 = S2[np.ix_(layout._perm(1), layout._perm(1))]
    n1, n2 = layout.n1, layout.n2
    diag = sla.block_diag(P2[p:, p:], P1[p:, p:])
    if p == 0:
        return diag.astype(complex)
    Z = np.diag(np.asarray(zeta, dtype=complex))
    left = sla.block_diag(P2[p:, :p], P1[p:, :p])
    middle = np.block([[Z, -P1[:p, :p]], [-P2[:p, :p], Z]])
    right = np.block([[np.zeros((p, n2)), P1[:p, p:]], [P2[:p, p:], np.zeros((p, n1))]])
    return diag + left @ sla.solve(middle, right)


def compose(S1, S2, layout: BlockLayout, zeta, k=None, diagnostics: dict | None = None) -> np.ndarray:
    """Scattering matrix of ``G1`` and ``G2`` linked according to ``layout``.

    The block-algebra result is cross-checked against the closed form; rows
    and columns follow :meth:`BlockLayout.free_rays`.
    """
    S1, S2 = _as_matrix(S1), _as_matrix(S2)
    check_unitary(S1)
    check_unitary(S2)
    Sm = assemble_block_S(S1, S2, layout)
    Tm = assemble_T(layout.p, layout.n, zeta)
    A, B = h_blocks(Sm, Tm)
    diag = {} if diagnostics is None else diagnostics
    Sn = _reduce(A, B, layout.p, k, diag)
    alt = compose_closed_form(S1, S2, layout, zeta)
    gap = float(np.abs(Sn - alt).max()) if Sn.size else 0.0
    diag["closed_form_gap"] = gap
    tol = CONSISTENCY_TOL * max(1.0, diag.get("cond", 1.0))
    if gap > tol:
        raise ArithmeticError(f"block and closed-form compositions disagree by {gap:.3e}")
    return Sn


def link_internal(S, pairs: Sequence[tuple[int, int]], zeta, k=None,
                  diagnostics: dict | None = None) -> tuple[np.ndarray, list[int]]:
    """Join pairs of rays of a single graph (closing cycles, self-loops).

    Returns the reduced matrix and the original indices of its rows.
    """
    S = _as_matrix(S)
    m = S.shape[0]
    first = [a for a, _ in pairs]
    second = [b for _, b in pairs]
    linked = first + second
    if len(set(linked)) != len(linked):
        raise ValueError("each ray may be linked at most once")
    free = [i for i in range(m) if i not in linked]
    order = linked + free
    Sm = S[np.ix_(order, order)]
    T = assemble_T(len(pairs), len(free), zeta)
    A, B = h_blocks(Sm, T)
    return _reduce(A, B, len(pairs), k, diagnostics), free


def compose_many(matrices: Sequence, links: LinkSpec, k: float, order: Sequence[int] | None = None,
                 diagnostics: list | None = None) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Fold pairwise compositions over several graphs.

    ``links`` refer to rays as ``(graph index, ray index)``.  Graphs are
    absorbed in ``order`` (default: as given); a link whose two ends already
    belong to the accumulated graph is closed with :func:`link_internal`.
    Returns the composed matrix and the ``(graph, ray)`` label of each row.
    One diagnostics dict per linking step is appended to ``diagnostics``.
    """
    steps = [] if diagnostics is None else diagnostics
    mats = [_as_matrix(S) for S in matrices]
    if not mats:
        raise ValueError("nothing to compose")
    order = list(range(len(mats))) if order is None else list(order)
    if sorted(order) != list(range(len(mats))):
        raise ValueError("order must be a permutation of the graph indices")
    pending = list(links.links)

    def close_internal(S, labels, members):
        nonlocal pending
        inner = [ln for ln in pending if ln.first[0] in members and ln.second[0] in members]
        if not inner:
            return S, labels
        pending = [ln for ln in pending if ln not in inner]
        pos = {lab: i for i, lab in enumerate(labels)}
        pairs = [(pos[ln.first], pos[ln.second]) for ln in inner]
        zeta = np.exp(-1j * k * np.array([ln.length for ln in inner]))
        steps.append({})
        S, free = link_internal(S, pairs, zeta, k, steps[-1])
        return S, [labels[i] for i in free]

    g0 = order[0]
    S, labels = mats[g0], [(g0, r) for r in range(mats[g0].shape[0])]
    members = {g0}
    S, labels = close_internal(S, labels, members)
    for g in order[1:]:
        Sg, lab_g = mats[g], [(g, r) for r in range(mats[g].shape[0])]
        Sg, lab_g = close_internal(Sg, lab_g, {g})
        pos, pos_g = {lab: i for i, lab in enumerate(labels)}, {lab: i for i, lab in enumerate(lab_g)}
        pairs, lengths = [], []
        for ln in list(pending):
            if ln.first in pos and ln.second in pos_g:
                pairs.append((pos[ln.first], pos_g[ln.second]))
            elif ln.second in pos and ln.first in pos_g:
                pairs.append((pos[ln.second], pos_g[ln.first]))
            else:
                continue
            lengths.append(ln.length)
            pending.remove(ln)
        layout = BlockLayout(S.shape[0], Sg.shape[0], tuple(pairs))
        zeta = np.exp(-1j * k * np.array(lengths, dtype=float))
        steps.append({})
        S = compose(S, Sg, layout, zeta, k, steps[-1])
        both = [labels, lab_g]
        labels = [both[which][i] for which, i in layout.free_rays()]
        members.add(g)
        S, labels = close_internal(S, labels, members)
    if pending:
        raise ValueError(f"links refer to rays that were never absorbed: {pending}")
    return S, labels


def link_all(matrices: Sequence, links: LinkSpec, k: float) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """All links at once on the direct sum of every graph (no folding)."""
    mats = [_as_matrix(S) for S in matrices]
    labels = [(g, r) for g, S in enumerate(mats) for r in range(S.shape[0])]
    total = sla.block_diag(*mats).astype(complex)
    pos = {lab: i for i, lab in enumerate(labels)}
    pairs = [(pos[ln.first], pos[ln.second]) for ln in links.links]
    S, free = link_internal(total, pairs, links.zetas(k), k)
    return S, [labels[i] for i in free]


def _star_matrices(stars, k):
    return [scattering_direct(s.graph, s.conditions, k, check=False).entries for s in stars]


def _to_graph_order(S: np.ndarray, labels, stars) -> np.ndarray:
    rows = [stars[g].origin[r].index for g, r in labels]
    inv = np.argsort(rows)
    return S[np.ix_(inv, inv)]


def compose_graph(graph: MetricGraph, conditions: VertexConditions, k: float,
                  order: Sequence[int] | None = None, cuts=None, decomposition=None,
                  diagnostics: list | None = None) -> ScatteringMatrix:
    """``S(k)`` of ``graph`` by star decomposition and pairwise folding, in ray order."""
    stars, links = decomposition or star_decomposition(graph, conditions, cuts)
    S, labels = compose_many(_star_matrices(stars, k), links, k, order, diagnostics)
    return ScatteringMatrix(float(k), _to_graph_order(S, labels, stars))


def compose_lagrange(S1, S2, layout: BlockLayout, zeta) -> np.ndarray:
    """Composition through the geometry: project ``L_m cap N^perp`` into ``N^perp / N``.

    ``L_m`` comes from ``S_m`` and ``N`` from the first ``2p`` scattering waves
    of ``T_m``.  The free-ray canonical vectors represent the quotient, so the
    projected plane is read back as a unitary matrix directly.
    """
    Sm = assemble_block_S(S1, S2, layout)
    p, n, m = layout.p, layout.n, layout.m
    form = HermitianForm.canonical(m)
    L = lagrange_from_unitary(Sm)
    if p == 0:
        return unitary_from_lagrange(L)
    Tm = assemble_T(p, n, zeta)
    N = Subspace(lagrange_from_unitary(Tm).basis[:, :2 * p])
    free = list(range(2 * p, m)) + list(range(m + 2 * p, 2 * m))
    Q = quotient_space(form, N, complement=np.eye(2 * m)[:, free])
    P, _ = project_lagrange(form, L, N, Q)
    return unitary_from_lagrange(P)


# -- embedded eigenvalues ---------------------------------------------------------

@dataclass(frozen=True)
class EmbeddedEigenvalue:
    k: float
    sigma_min: float
    kernel_dim: int
    kernel_residual: float


def b2p_profile(graph: MetricGraph, conditions: VertexConditions, ks, decomposition=None) -> np.ndarray:
    """Relative ``sigma_min(B_2p)`` over ``ks`` for the one-star-per-vertex decomposition."""
    stars, links = decomposition or star_decomposition(graph, conditions)
    out = np.empty(len(ks))
    for i, k in enumerate(ks):
        out[i] = _b2p_relative(stars, links, float(k))
    return out


def _b2p_relative(stars, links: LinkSpec, k: float) -> float:
    if links.p == 0:
        return 1.0
    mats = _star_matrices(stars, k)
    labels = [(g, r) for g, S in enumerate(mats) for r in range(S.shape[0])]
    pos = {lab: i for i, lab in enumerate(labels)}
    first = [pos[ln.first] for ln in links.links]
    second = [pos[ln.second] for ln in links.links]
    free = [i for i in range(len(labels)) if i not in first and i not in second]
    order = first + second + free
    total = sla.block_diag(*mats)[np.ix_(order, order)]
    smin, smax = b2p_sigma(total, links.zetas(k))
    return smin / smax


def embedded_eigenvalue_scan(graph: MetricGraph, conditions: VertexConditions, k_grid,
                             threshold: float = 1e-4, xtol: float = 1e-10,
                             cuts: dict[int, float] | None = None) -> list[EmbeddedEigenvalue]:
    """Candidate embedded eigenvalues ``k*`` where ``B_2p`` loses rank.

    Every interior local minimum of ``sigma_min/sigma_max`` on the grid is
    refined by golden-section search; refined minima below ``threshold`` are
    reported together with the direct interior-kernel check at ``k*``.
    """
    ks = np.asarray(k_grid, dtype=float)
    decomposition = star_decomposition(graph, conditions, cuts)
    stars, links = decomposition
    if links.p == 0 or ks.size < 3:
        return []
    prof = b2p_profile(graph, conditions, ks, decomposition)
    found = []
    for i in range(1, ks.size - 1):
        if not (prof[i] <= prof[i - 1] and prof[i] <= prof[i + 1]):
            continue
        if prof[i] == prof[i - 1] and i > 1 and prof[i - 1] <= prof[i - 2]:
            continue
        lo, hi = ks[i - 1], ks[i + 1]
        res = minimize_scalar(lambda k: _b2p_relative(stars, links, k), bracket=(lo, ks[i], hi),
                              method="golden", options={"xtol": xtol / max(abs(ks[i]), 1.0)})
        kstar = float(res.x)
        if not lo <= kstar <= hi or res.fun >= threshold:
            continue
        dim, _, resid = interior_kernel(graph, conditions, kstar)
        found.append(EmbeddedEigenvalue(kstar, float(res.fun), dim, resid))
    return found
