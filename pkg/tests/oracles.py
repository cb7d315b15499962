"""Independent reference computations and random instance generators for the tests.

Nothing here calls into the transfer-matrix kernels: the ODE oracle integrates
``psi'' = (q - k^2) psi`` directly with classical fixed-step RK4.
"""

import numpy as np
from scipy.stats import ortho_group, unitary_group

from qgscat.graph import Edge, MetricGraph, PiecewisePotential, Ray, VertexConditions, unitary_to_ab


def rk4_transfer(potential, k, x0, x1, rel_step=1e-4):
    """Transfer matrix by RK4 with step <= rel_step * (x1 - x0), aligned to segment breaks."""
    L = x1 - x0
    if L == 0:
        return np.eye(2)
    hmax = rel_step * L
    breaks = [0.0]
    for w, _ in potential.segments:
        breaks.append(breaks[-1] + w)
    pts = sorted({x0, x1, *[b for b in breaks if x0 < b < x1]})
    Y = np.eye(2)
    for a, b in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (a + b)
        q = 0.0
        start = 0.0
        for w, val in potential.segments:
            if start <= mid < start + w:
                q = val
            start += w
        c = q - k * k
        nsteps = int(np.ceil((b - a) / hmax))
        h = (b - a) / nsteps
        F = np.array([[0.0, 1.0], [c, 0.0]])
        for _ in range(nsteps):
            k1 = F @ Y
            k2 = F @ (Y + 0.5 * h * k1)
            k3 = F @ (Y + 0.5 * h * k2)
            k4 = F @ (Y + h * k3)
            Y = Y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Y


def random_potential(rng, max_segments=4, width=(0.05, 0.6), value=(-4.0, 4.0)):
    n = rng.integers(1, max_segments + 1)
    return PiecewisePotential(tuple((rng.uniform(*width), rng.uniform(*value)) for _ in range(n)))


def random_unitary(rng, m):
    if m == 1:
        return np.array([[np.exp(1j * rng.uniform(0, 2 * np.pi))]])
    return unitary_group.rvs(m, random_state=rng)


def random_real_ab(rng, d):
    """Random real self-adjoint pair: Robin-type (H, I) or (I, H) with H symmetric, mixed by an orthogonal Q."""
    H = rng.normal(size=(d, d))
    H = H + H.T
    if rng.random() < 0.5:
        A, B = H, np.eye(d)
    else:
        A, B = np.eye(d), H
    Q = ortho_group.rvs(d, random_state=rng) if d > 1 else np.array([[rng.choice([-1.0, 1.0])]])
    return Q @ A, Q @ B


def kirchhoff_ab(d):
    A = np.zeros((d, d))
    B = np.zeros((d, d))
    for r in range(d - 1):
        A[r, r], A[r, r + 1] = 1.0, -1.0
    B[d - 1] = 1.0
    return A, B


def random_graph(rng, max_vertices=5, max_edges=6, max_rays=6, loops=True):
    """Connected graph with a spanning tree plus extra (possibly parallel or loop) edges."""
    nv = int(rng.integers(1, max_vertices + 1))
    edges = []
    for v in range(1, nv):
        edges.append((int(rng.integers(0, v)), v))
    extra = int(rng.integers(0, max_edges - len(edges) + 1))
    for _ in range(extra):
        u, v = (int(x) for x in rng.integers(0, nv, size=2))
        if u == v and not loops:
            continue
        edges.append((u, v))
    nr = int(rng.integers(1, max_rays + 1))
    rays = [Ray(int(rng.integers(0, nv))) for _ in range(nr)]
    return MetricGraph(nv, tuple(Edge(u, v, float(rng.uniform(0.3, 2.0))) for u, v in edges), tuple(rays))


def random_conditions(graph, rng, kinds=("kirchhoff", "dirichlet", "real")):
    As, Bs = [], []
    for d in graph.degrees():
        kind = kinds[rng.integers(0, len(kinds))]
        if kind == "kirchhoff":
            A, B = kirchhoff_ab(d)
        elif kind == "dirichlet":
            A, B = np.eye(d), np.zeros((d, d))
        elif kind == "real":
            A, B = random_real_ab(rng, d)
        elif kind == "unitary":
            A, B = unitary_to_ab(random_unitary(rng, d))
        else:
            raise ValueError(kind)
        As.append(A)
        Bs.append(B)
    return VertexConditions(tuple(As), tuple(Bs))


def random_isotropic(rng, m, q):
    """``q`` random combinations of a random Lagrange plane's basis (isotropic, canonical form)."""
    from qgscat.symplectic import lagrange_from_unitary

    L = lagrange_from_unitary(random_unitary(rng, m)).basis
    C = rng.normal(size=(m, q)) + 1j * rng.normal(size=(m, q))
    return L @ C


def ring_graph(a=1.0):
    return MetricGraph(2, (Edge(0, 1, a), Edge(0, 1, a)), (Ray(0), Ray(1)))


def y_graph():
    return MetricGraph(1, (), (Ray(0), Ray(0), Ray(0)))


def ring_closed_form(k, a=1.0):
    z = np.exp(-1j * k * a)
    gamma = 9 * z - np.conj(z)
    d = 3 * (np.conj(z) - z)
    return np.array([[d, 8], [8, d]]) / gamma


Y_MATRIX = np.array([[-1, 2, 2], [2, -1, 2], [2, 2, -1]]) / 3.0
