"""Finite-dimensional hermitian symplectic linear algebra.

Vectors of ``C^{2m}`` are coordinate columns with respect to a basis in which
the form is ``<x, y> = x^H J y``.  For the canonical form ``J`` has blocks
``[[0, I], [-I, 0]]``; in the scattering setting the first ``m`` coordinates
are the ``pi``-type and the last ``m`` the ``q``-type basis vectors built from
Jost solutions, ``pi = (f+ + f-)/2`` and ``q = (f+ - f-)/(2i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

RANK_RTOL = 1e-10
ISOTROPY_ATOL = 1e-9
UNITARY_ATOL = 1e-9


class SymplecticError(ValueError):
    pass


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def null_space(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of ``ker M``; the threshold is relative to the largest singular value."""
    M = np.atleast_2d(M)
    rows, cols = M.shape
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, sv, Vh = np.linalg.svd(M)
    rank = int(np.sum(sv > rtol * sv[0])) if sv.size and sv[0] > 0 else 0
    return Vh[rank:].conj().T


def column_basis(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column span of ``M``."""
    if M.shape[1] == 0:
        return M
    U, sv, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(sv > rtol * sv[0])) if sv[0] > 0 else 0
    return U[:, :rank]


@dataclass(frozen=True, eq=False)
class HermitianForm:
    matrix: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.matrix, dtype=complex)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] % 2:
            raise SymplecticError(f"form matrix must be square of even size, got {J.shape}")
        scale = max(1.0, np.abs(J).max())
        if np.abs(J + J.conj().T).max() > 1e-12 * scale:
            raise SymplecticError("form matrix must be anti-hermitian")
        if numerical_rank(J) != J.shape[0]:
            raise SymplecticError("form matrix must be nonsingular")
        object.__setattr__(self, "matrix", J)

    @classmethod
    def canonical(cls, m: int) -> HermitianForm:
        z, i = np.zeros((m, m)), np.eye(m)
        return cls(np.block([[z, i], [-i, z]]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.dim // 2

    def __call__(self, phi, psi) -> complex:
        return form_eval(self, phi, psi)

    def gram(self, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
        Y = X if Y is None else Y
        return X.conj().T @ self.matrix @ Y


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span of a full-rank ``2m x d`` basis matrix."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[1] == 0 or B.shape[1] > B.shape[0]:
            raise SymplecticError(f"basis must be 2m x d with 0 < d <= 2m, got {B.shape}")
        if numerical_rank(B) != B.shape[1]:
            raise SymplecticError("basis columns are linearly dependent")
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors: np.ndarray) -> Subspace | None:
        """Span of possibly dependent columns; ``None`` for the zero subspace."""
        B = column_basis(np.asarray(vectors, dtype=complex))
        return cls(B) if B.shape[1] else None

    @classmethod
    def coordinate(cls, dim: int, indices) -> Subspace:
        return cls(np.eye(dim)[:, list(indices)])

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, other: Subspace) -> bool:
        return numerical_rank(np.hstack([self.basis, other.basis])) == self.dim

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ambient_dim == other.ambient_dim and self.dim == other.dim
                and self.contains(other))

    __hash__ = None


def _check_dim(form: HermitianForm, *vectors):
    for v in vectors:
        if np.shape(v)[0] != form.dim:
            raise SymplecticError(f"dimension mismatch: form has dim {form.dim}, vector has {np.shape(v)[0]}")


def form_eval(form: HermitianForm, phi, psi) -> complex:
    phi = np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if phi.ndim != 1 or psi.ndim != 1:
        raise SymplecticError("form_eval takes vectors")
    _check_dim(form, phi, psi)
    return complex(phi.conj() @ form.matrix @ psi)


def _normalized_gram(form: HermitianForm, W: Subspace) -> np.ndarray:
    B = W.basis / np.linalg.norm(W.basis, axis=0)
    return form.gram(B)


def is_isotropic(form: HermitianForm, W: Subspace, atol: float = ISOTROPY_ATOL) -> bool:
    _check_dim(form, W.basis)
    return bool(np.abs(_normalized_gram(form, W)).max() <= atol)


def is_lagrange(form: HermitianForm, W: Subspace, atol: float = ISOTROPY_ATOL) -> bool:
    return W.dim == form.m and is_isotropic(form, W, atol)


def orthogonal_complement(form: HermitianForm, N: Subspace | None) -> Subspace | None:
    """``{v : <n, v> = 0 for all n in N}``; ``None`` stands for the zero subspace."""
    if N is None:
        return Subspace(np.eye(form.dim, dtype=complex))
    _check_dim(form, N.basis)
    K = null_space(N.basis.conj().T @ form.matrix)
    return Subspace(K) if K.shape[1] else None


@dataclass(frozen=True, eq=False)
class Quotient:
    """``N^perp / N`` represented on a complement ``V`` of ``N`` inside ``N^perp``.

    Every ``v`` in ``N^perp`` decomposes uniquely as ``N a + V b``; the
    projection returns ``b`` and the reduced form is ``V^H J V``.
    """

    form: HermitianForm
    N: Subspace | None
    complement: np.ndarray
    reduced_form: HermitianForm

    @property
    def dim(self) -> int:
        return self.complement.shape[1]

    def project(self, vectors, atol: float = 1e-8) -> np.ndarray:
        """Quotient coordinates of vectors (columns) lying in ``N^perp``."""
        X = np.asarray(vectors, dtype=complex)
        single = X.ndim == 1
        X = X[:, None] if single else X
        _check_dim(self.form, X)
        if self.N is None:
            coeffs = np.linalg.lstsq(self.complement, X, rcond=None)[0]
            residual = self.complement @ coeffs - X
        else:
            q = self.N.dim
            full = np.hstack([self.N.basis, self.complement])
            c = np.linalg.lstsq(full, X, rcond=None)[0]
            coeffs = c[q:]
            residual = full @ c - X
        scale = max(1.0, np.abs(X).max(initial=0.0))
        if np.abs(residual).max(initial=0.0) > atol * scale:
            raise SymplecticError("vector does not lie in the orthogonal complement of N")
        return coeffs[:, 0] if single else coeffs


def quotient_space(form: HermitianForm, N: Subspace | None, complement=None) -> Quotient:
    """Reduce the space by an isotropic subspace ``N``.

    ``complement`` may fix the representatives of ``N^perp / N`` (columns in
    ``N^perp`` spanning a complement of ``N``); by default the euclidean
    orthogonal complement of ``N`` inside ``N^perp`` is used.
    """
    if N is not None and not is_isotropic(form, N):
        raise SymplecticError("quotient requires an isotropic subspace")
    perp = orthogonal_complement(form, N)
    if complement is None:
        if N is None:
            V = np.eye(form.dim, dtype=complex)
        else:
            # part of N^perp euclidean-orthogonal to N
            P = perp.basis
            K = null_space(N.basis.conj().T @ P)
            V = column_basis(P @ K)
    else:
        V = np.asarray(complement, dtype=complex)
        q = 0 if N is None else N.dim
        if V.shape != (form.dim, form.dim - 2 * q):
            raise SymplecticError(f"complement must have shape {(form.dim, form.dim - 2 * q)}")
        if numerical_rank(np.hstack([perp.basis, V])) != perp.dim:
            raise SymplecticError("complement columns must lie in N^perp")
        if N is not None and numerical_rank(np.hstack([N.basis, V])) != N.dim + V.shape[1]:
            raise SymplecticError("complement must be independent of N")
    J = V.conj().T @ form.matrix @ V
    J = 0.5 * (J - J.conj().T)
    return Quotient(form, N, V, HermitianForm(J))


def intersect(A: Subspace, B: Subspace) -> Subspace | None:
    """``A cap B`` via the kernel of ``[A, -B]``."""
    K = null_space(np.hstack([A.basis, -B.basis]))
    if K.shape[1] == 0:
        return None
    return Subspace.span(A.basis @ K[:A.dim])


def project_lagrange(form: HermitianForm, L: Subspace, N: Subspace | None,
                     quotient: Quotient | None = None) -> tuple[Subspace, Quotient]:
    """Project ``L cap N^perp`` into ``N^perp / N``.

    Returns the image (in quotient coordinates) together with the quotient it
    lives in.  For ``L`` Lagrange and ``N`` isotropic the image is Lagrange.
    """
    if not is_lagrange(form, L):
        raise SymplecticError("L must be a Lagrange plane")
    quotient = quotient or quotient_space(form, N)
    if N is None:
        return Subspace(quotient.project(L.basis)), quotient
    # L cap N^perp = {L c : N^H J L c = 0}
    K = null_space(N.basis.conj().T @ form.matrix @ L.basis)
    image = quotient.project(L.basis @ K)
    P = Subspace.span(image)
    if P is None:
        raise SymplecticError("projection is the zero subspace")
    return P, quotient


@dataclass(frozen=True, eq=False)
class CanonicalBasisChange:
    """The transformation ``g(S)`` taking the canonical basis to scattering waves."""

    unitary: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.unitary, dtype=complex)
        check_unitary(S)
        object.__setattr__(self, "unitary", S)

    @property
    def m(self) -> int:
        return self.unitary.shape[0]

    @property
    def g(self) -> np.ndarray:
        S = self.unitary
        eye = np.eye(self.m)
        return 0.5 * np.block([[S + eye, 1j * (S - eye)], [-1j * (S - eye), S + eye]])


def check_unitary(S: np.ndarray, atol: float = UNITARY_ATOL) -> None:
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise SymplecticError(f"expected a square matrix, got shape {S.shape}")
    if np.abs(S.conj().T @ S - np.eye(S.shape[0])).max() > atol:
        raise SymplecticError("matrix is not unitary")


def lagrange_from_unitary(S) -> Subspace:
    """Span of the first ``m`` rows of ``g(S)`` as coordinate columns."""
    g = CanonicalBasisChange(S).g
    return Subspace(g[: g.shape[0] // 2].T)


def jost_coordinates(basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``pi/q`` coordinates into ``f+`` and ``f-`` coefficient blocks."""
    m = basis.shape[0] // 2
    a, b = basis[:m], basis[m:]
    return 0.5 * (a - 1j * b), 0.5 * (a + 1j * b)


def canonical_coordinates(plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    """Inverse of :func:`jost_coordinates`: ``f+ = pi + i q``, ``f- = pi - i q``."""
    return np.vstack([plus + minus, 1j * (plus - minus)])


def unitary_from_lagrange(L: Subspace, cond_max: float = 1e10) -> np.ndarray:
    """The unique unitary ``S`` with ``lagrange_from_unitary(S)`` spanning ``L``.

    The basis is brought to the distinguished form in which the ``f-``
    coefficients are the identity.  This needs the ``f-`` block to be
    invertible; for exact Lagrange planes it always is, so a singular block
    signals an input that is only approximately Lagrange and is reported.
    """
    form = HermitianForm.canonical(L.ambient_dim // 2)
    if not is_lagrange(form, L):
        raise SymplecticError("L is not a Lagrange plane for the canonical form")
    # with an orthonormal basis the f- block of an exact Lagrange plane is an
    # isometry up to a factor, so its conditioning measures the input's defect
    Q, _ = np.linalg.qr(L.basis)
    plus, minus = jost_coordinates(Q)
    sv = np.linalg.svd(minus, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > cond_max:
        raise SymplecticError(
            f"Lagrange plane has no distinguished basis (f- block singular, sigma_min={sv[-1]:.3e})")
    # S = (plus minus^-1)^T
    S = sla.solve(minus.T, plus.T)
    check_unitary(S, atol=1e-8)
    return S
