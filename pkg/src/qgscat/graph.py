"""Non-compact metric graphs, piecewise-constant potentials and vertex conditions.

Ordering conventions used everywhere in the package:

* rays are numbered ``0..n-1`` and edges ``0..p-1`` in the order given;
* an edge ``(u, v, a)`` carries the coordinate ``x in [0, a]`` running from
  ``u`` (``x = 0``) to ``v`` (``x = a``); a ray runs from its anchor outwards;
* the *ends* meeting at a vertex are listed rays first (in ray order), then
  edge ends (in edge order, the ``x = 0`` end of an edge before its ``x = a``
  end, which only matters for self-loops).  Row/column ``j`` of a vertex's
  condition matrices refers to end ``j`` of this list;
* derivatives in vertex conditions are *inward*: ``+psi'(0)`` at ``x = 0`` and
  ``-psi'(a)`` at ``x = a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class GraphError(ValueError):
    """Raised for structurally invalid graph input."""


class DecompositionError(GraphError):
    """A potential crosses the point where an edge would be cut."""


@dataclass(frozen=True)
class PiecewisePotential:
    """Piecewise-constant real potential starting at ``x = 0``.

    ``segments`` is a sequence of ``(width, value)`` pairs laid end to end; the
    potential vanishes identically beyond :attr:`support_end`.
    """

    segments: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "segments",
                           tuple((float(w), float(q)) for w, q in self.segments))

    @classmethod
    def zero(cls) -> PiecewisePotential:
        return cls(())

    @classmethod
    def constant(cls, width: float, value: float) -> PiecewisePotential:
        return cls(((width, value),))

    @property
    def support_end(self) -> float:
        return float(sum(w for w, _ in self.segments))

    @property
    def is_zero(self) -> bool:
        return all(q == 0.0 for _, q in self.segments)

    def widths(self) -> np.ndarray:
        return np.array([w for w, _ in self.segments], dtype=float)

    def values(self) -> np.ndarray:
        return np.array([q for _, q in self.segments], dtype=float)

    def restrict(self, x0: float, x1: float) -> PiecewisePotential:
        """Segments covering ``[x0, x1]``, re-based so that ``x0`` maps to 0.

        The zero tail beyond the support is included explicitly when
        ``x1 > support_end`` so that the widths always sum to ``x1 - x0``.
        """
        out = []
        start = 0.0
        for w, q in self.segments + ((np.inf, 0.0),):
            stop = start + w
            lo, hi = max(start, x0), min(stop, x1)
            if hi > lo:
                out.append((hi - lo, q))
            start = stop
            if start >= x1:
                break
        return PiecewisePotential(tuple(out))

    def reversed_on(self, length: float) -> PiecewisePotential:
        """The potential on ``[0, length]`` read from the far end, ``x -> length - x``."""
        segs = self.restrict(0.0, length).segments
        return PiecewisePotential(tuple(reversed(segs))).trimmed()

    def trimmed(self) -> PiecewisePotential:
        """Drop trailing zero-valued segments."""
        segs = list(self.segments)
        while segs and segs[-1][1] == 0.0:
            segs.pop()
        return PiecewisePotential(tuple(segs))

    def nonzero_support(self) -> list[tuple[float, float]]:
        """Closed intervals on which the potential is nonzero."""
        out = []
        start = 0.0
        for w, q in self.segments:
            if q != 0.0:
                out.append((start, start + w))
            start += w
        return out


ZERO = PiecewisePotential.zero()


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: float
    potential: PiecewisePotential = ZERO


@dataclass(frozen=True)
class Ray:
    vertex: int
    potential: PiecewisePotential = ZERO


class End(NamedTuple):
    """One end of a ray or edge meeting a vertex.

    ``kind`` is ``"ray"`` or ``"edge"``; ``side`` is 0 for ``x = 0`` and 1 for
    the ``x = a`` end of an edge (always 0 for rays).
    """

    kind: str
    index: int
    side: int = 0


@dataclass(frozen=True)
class MetricGraph:
    vertex_count: int
    edges: tuple[Edge, ...] = ()
    rays: tuple[Ray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "rays", tuple(self.rays))

    @property
    def n(self) -> int:
        return len(self.rays)

    @property
    def p(self) -> int:
        return len(self.edges)

    def ends(self) -> list[list[End]]:
        """Ends at each vertex in the package-wide canonical order."""
        out: list[list[End]] = [[] for _ in range(self.vertex_count)]
        for i, r in enumerate(self.rays):
            if 0 <= r.vertex < self.vertex_count:
                out[r.vertex].append(End("ray", i))
        for j, e in enumerate(self.edges):
            if 0 <= e.u < self.vertex_count:
                out[e.u].append(End("edge", j, 0))
            if 0 <= e.v < self.vertex_count:
                out[e.v].append(End("edge", j, 1))
        return out

    def degrees(self) -> list[int]:
        return [len(x) for x in self.ends()]

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for e in self.edges:
            if 0 <= e.u < self.vertex_count and 0 <= e.v < self.vertex_count:
                adj[e.u].add(e.v)
                adj[e.v].add(e.u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.vertex_count


@dataclass(frozen=True)
class VertexConditions:
    """Separated conditions ``A_v psi_v + B_v psi'_v = 0`` at every vertex."""

    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(np.atleast_2d(np.asarray(a, dtype=complex)) for a in self.A))
        object.__setattr__(self, "B", tuple(np.atleast_2d(np.asarray(b, dtype=complex)) for b in self.B))
        if len(self.A) != len(self.B):
            raise GraphError("A and B must list the same number of vertices")

    def __len__(self):
        return len(self.A)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(np.all(np.abs(a.imag) <= tol) and np.all(np.abs(b.imag) <= tol)
                   for a, b in zip(self.A, self.B))

    @classmethod
    def from_unitaries(cls, unitaries) -> VertexConditions:
        """Build ``(A, B)`` from per-vertex unitaries via ``A = U - I``, ``B = i(U + I)``."""
        As, Bs = [], []
        for U in unitaries:
            A, B = unitary_to_ab(U)
            As.append(A)
            Bs.append(B)
        return cls(tuple(As), tuple(Bs))


def unitary_to_ab(U):
    """Condition pair for the unitary parametrisation ``(U - I) psi + i (U + I) psi' = 0``."""
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    d = U.shape[0]
    if U.shape != (d, d) or not np.allclose(U.conj().T @ U, np.eye(d), atol=1e-10):
        raise GraphError("vertex parameter must be a unitary matrix")
    eye = np.eye(d)
    return U - eye, 1j * (U + eye)


def kirchhoff_conditions(graph: MetricGraph) -> VertexConditions:
    """Continuity of values plus vanishing sum of inward derivatives at every vertex."""
    As, Bs = [], []
    for d in graph.degrees():
        A = np.zeros((d, d))
        B = np.zeros((d, d))
        for r in range(d - 1):
            A[r, r] = 1.0
            A[r, r + 1] = -1.0
        if d:
            B[d - 1, :] = 1.0
        As.append(A)
        Bs.append(B)
    return VertexConditions(tuple(As), tuple(Bs))


def dirichlet_conditions(graph: MetricGraph) -> VertexConditions:
    degs = graph.degrees()
    return VertexConditions(tuple(np.eye(d) for d in degs), tuple(np.zeros((d, d)) for d in degs))


def validate(graph: MetricGraph, conditions: VertexConditions | None = None,
             tol: float = 1e-10) -> list[str]:
    """Every invariant violation of ``graph`` (and ``conditions``); empty when valid."""
    problems = []
    if graph.vertex_count < 1:
        problems.append("graph: vertex_count must be positive")
    if graph.n < 1:
        problems.append("graph: at least one ray is required (non-compact graph)")

    def check_potential(where, pot):
        for s, (w, q) in enumerate(pot.segments):
            if not (np.isfinite(w) and w > 0):
                problems.append(f"{where}.potential[{s}]: nonpositive width {w}")
            if not np.isfinite(q):
                problems.append(f"{where}.potential[{s}]: non-finite value {q}")

    for j, e in enumerate(graph.edges):
        where = f"edges[{j}]"
        for name, v in (("u", e.u), ("v", e.v)):
            if not 0 <= v < graph.vertex_count:
                problems.append(f"{where}.{name}: unknown vertex {v}")
        if not (np.isfinite(e.length) and e.length > 0):
            problems.append(f"{where}: nonpositive length {e.length}")
        check_potential(where, e.potential)
        if e.potential.support_end > e.length * (1 + 1e-12):
            problems.append(f"{where}.potential: extends beyond edge length {e.length}")
    for i, r in enumerate(graph.rays):
        if not 0 <= r.vertex < graph.vertex_count:
            problems.append(f"rays[{i}].vertex: unknown vertex {r.vertex}")
        check_potential(f"rays[{i}]", r.potential)
    if graph.vertex_count >= 1 and not graph.is_connected():
        problems.append("graph: not connected")

    if conditions is None:
        return problems
    degs = graph.degrees()
    if len(conditions) != graph.vertex_count:
        problems.append(f"conditions: expected {graph.vertex_count} vertices, got {len(conditions)}")
        return problems
    for v, (A, B, d) in enumerate(zip(conditions.A, conditions.B, degs)):
        where = f"conditions[{v}]"
        if A.shape != (d, d) or B.shape != (d, d):
            problems.append(f"{where}: A and B must be {d}x{d} (vertex degree), got {A.shape} and {B.shape}")
            continue
        if d == 0:
            continue
        AB = np.hstack([A, B])
        sv = np.linalg.svd(AB, compute_uv=False)
        if np.sum(sv > tol * max(sv[0], 1.0)) != d:
            problems.append(f"{where}: rank [A|B] must equal degree {d}")
        M = A @ B.conj().T
        scale = max(1.0, np.abs(A).max() * np.abs(B).max())
        if np.abs(M - M.conj().T).max() > tol * scale * d:
            problems.append(f"{where}: A B^H is not hermitian (conditions not self-adjoint)")
    return problems


def require_valid(graph: MetricGraph, conditions: VertexConditions | None = None):
    problems = validate(graph, conditions)
    if problems:
        raise GraphError("; ".join(problems))


# -- star decomposition -----------------------------------------------------------

@dataclass(frozen=True)
class StarGraph:
    """One vertex with rays; ``origin[j]`` records where local ray ``j`` came from."""

    vertex: int
    graph: MetricGraph
    conditions: VertexConditions
    origin: tuple[End, ...]


@dataclass(frozen=True)
class Link:
    """Join ray ``first = (graph, ray)`` to ray ``second`` into an edge of ``length``."""

    first: tuple[int, int]
    second: tuple[int, int]
    length: float


@dataclass(frozen=True)
class LinkSpec:
    links: tuple[Link, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        for ln in self.links:
            if not ln.length > 0:
                raise GraphError(f"link length must be positive, got {ln.length}")
        used = [ln.first for ln in self.links] + [ln.second for ln in self.links]
        if len(set(used)) != len(used):
            raise GraphError("a ray appears in more than one link")

    @classmethod
    def between(cls, pairs, lengths) -> LinkSpec:
        """Links from rays of graph 0 to rays of graph 1, ``pairs = [(r', r''), ...]``."""
        return cls(tuple(Link((0, a), (1, b), float(L)) for (a, b), L in zip(pairs, lengths, strict=True)))

    @property
    def p(self) -> int:
        return len(self.links)

    def zetas(self, k: float) -> np.ndarray:
        return np.exp(-1j * k * np.array([ln.length for ln in self.links], dtype=float))


def _split_edge_potential(j: int, e: Edge, cut: float):
    for lo, hi in e.potential.nonzero_support():
        if lo < cut < hi:
            raise DecompositionError(
                f"edges[{j}]: potential support [{lo}, {hi}] crosses the cut point {cut}")
    left = e.potential.restrict(0.0, cut).trimmed()
    right = e.potential.reversed_on(e.length).restrict(0.0, e.length - cut).trimmed()
    return left, right


def star_decomposition(graph: MetricGraph, conditions: VertexConditions,
                       cuts: dict[int, float] | None = None) -> tuple[list[StarGraph], LinkSpec]:
    """Split ``graph`` into one star per vertex and the links that rebuild it.

    Each edge is cut at its midpoint unless ``cuts`` maps its index to another
    position in ``(0, length)``.  The two halves become truncated rays of the
    stars at the edge's endpoints; the returned links rejoin them with the full
    edge length.
    """
    require_valid(graph, conditions)
    cuts = cuts or {}
    halves = {}
    for j, e in enumerate(graph.edges):
        cut = float(cuts.get(j, e.length / 2.0))
        if not 0.0 < cut < e.length:
            raise DecompositionError(f"edges[{j}]: cut point {cut} outside (0, {e.length})")
        halves[j] = _split_edge_potential(j, e, cut)

    stars = []
    where: dict[End, tuple[int, int]] = {}
    for v, ends in enumerate(graph.ends()):
        rays = []
        for local, end in enumerate(ends):
            if end.kind == "ray":
                pot = graph.rays[end.index].potential
            else:
                pot = halves[end.index][end.side]
            rays.append(Ray(0, pot))
            where[end] = (v, local)
        star = MetricGraph(1, (), tuple(rays))
        conds = VertexConditions((conditions.A[v],), (conditions.B[v],))
        stars.append(StarGraph(v, star, conds, tuple(ends)))

    links = [Link(where[End("edge", j, 0)], where[End("edge", j, 1)], e.length)
             for j, e in enumerate(graph.edges)]
    return stars, LinkSpec(tuple(links))
