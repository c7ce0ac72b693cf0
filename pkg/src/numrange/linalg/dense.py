"""Dense complex linear algebra on numpy arrays.

Matrices are plain ``complex128`` ndarrays; ``as_matrix`` is the single
entry point that validates shape and finiteness.  A *frame* is an ``n x k``
array with orthonormal columns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NoConvergence, NonFinite, NotHermitian, RankDeficient
from . import _kernels
from .rng import RngState, batch_complex_normals


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Copy ``a`` into a 2-D complex128 array, rejecting NaN/Inf."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has non-finite entries")
    return m


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def fro_norm(a) -> float:
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues, and optionally eigenvectors as the columns of ``vectors``.

    Hermitian results carry real ascending ``values`` and orthonormal
    vectors; general results carry complex values sorted by (re, im).
    """

    values: np.ndarray
    vectors: np.ndarray | None = None
    hermitian: bool = False


# -- orthonormalisation -------------------------------------------------------

def _gram_schmidt(g: np.ndarray, tol: float):
    """Modified Gram-Schmidt with one re-orthogonalisation pass.

    ``g`` has shape (..., n, k).  Returns the frames and a boolean mask of the
    batch entries whose columns were numerically dependent.
    """
    g = np.array(g, dtype=np.complex128)
    k = g.shape[-1]
    bad = np.zeros(g.shape[:-2], dtype=bool)
    for j in range(k):
        col = g[..., :, j]
        orig = np.linalg.norm(col, axis=-1)
        for _ in range(2):
            for i in range(j):
                qi = g[..., :, i]
                col = col - qi * np.sum(np.conj(qi) * col, axis=-1)[..., None]
        res = np.linalg.norm(col, axis=-1)
        dep = res <= tol * orig
        bad |= dep
        safe = np.where(dep, 1.0, res)
        g[..., :, j] = col / safe[..., None]
    return g, bad


def qr_orthonormalize(vectors, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal frame spanning the columns of ``vectors``.

    Columns are processed left to right, so the implied triangular factor has
    a real positive diagonal.  Raises ``RankDeficient`` when a column's
    residual after projection is at most ``tol`` times its original norm.
    """
    v = as_matrix(vectors)
    n, k = v.shape
    if k > n:
        raise RankDeficient(f"{k} columns cannot be independent in dimension {n}")
    q, bad = _gram_schmidt(v, tol)
    if bad:
        raise RankDeficient("input columns are numerically dependent")
    return q


# -- eigensolvers -------------------------------------------------------------

def hermitian_eigs(h, *, tol: float = _kernels.JACOBI_TOL,
                   max_sweeps: int = _kernels.JACOBI_MAX_SWEEPS,
                   herm_tol: float = 1e-12) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a Hermitian matrix.

    Stops once the off-diagonal Frobenius mass is at most ``tol * ||H||_F``;
    raises ``NoConvergence`` after ``max_sweeps`` sweeps.
    """
    h = as_matrix(h, square=True)
    scale = fro_norm(h)
    if np.max(np.abs(h - adjoint(h)), initial=0.0) > herm_tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v, sweeps, status = _kernels.jacobi_hermitian(h, tol, max_sweeps)
    if status:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps", values=w)
    return EigenDecomposition(w, v, hermitian=True)


def hermitian_eigs_batch(hs, *, tol=_kernels.JACOBI_TOL, max_sweeps=_kernels.JACOBI_MAX_SWEEPS):
    """Jacobi on a stack (m, n, n) of Hermitian matrices; no symmetry check."""
    hs = np.ascontiguousarray(hs, dtype=np.complex128)
    w, v, status = _kernels.jacobi_hermitian_batch(hs, tol, max_sweeps)
    if status.any():
        raise NoConvergence(f"Jacobi did not converge for {int(status.sum())} matrices")
    return w, v


def sort_complex(values: np.ndarray, vectors: np.ndarray | None = None):
    """Sort each row of ``values`` by (re, im); permute eigenvector columns to match."""
    values = np.asarray(values)
    order = np.lexsort((values.imag, values.real), axis=-1)
    vals = np.take_along_axis(values, order, axis=-1)
    if vectors is None:
        return vals, None
    vecs = np.take_along_axis(vectors, order[..., None, :], axis=-1)
    return vals, vecs


def eigs_batch(ms, *, vectors: bool = False,
               deflate_tol: float = _kernels.QR_DEFLATE_TOL,
               iter_factor: int = _kernels.QR_ITER_FACTOR):
    """Eigenvalues of a stack (m, k, k); rows sorted by (re, im)."""
    ms = np.ascontiguousarray(ms, dtype=np.complex128)
    if ms.ndim != 3 or ms.shape[1] != ms.shape[2]:
        raise DimensionMismatch(f"expected a stack of square matrices, got {ms.shape}")
    vals, vecs, status = _kernels.eig_batch(ms, vectors, deflate_tol, iter_factor)
    if status.any():
        raise NoConvergence(f"QR iteration hit its cap on {int(status.sum())} matrices",
                            values=vals, converged=status == 0)
    return sort_complex(vals, vecs if vectors else None)


def general_eigs(m, *, vectors: bool = False,
                 deflate_tol: float = _kernels.QR_DEFLATE_TOL,
                 iter_factor: int = _kernels.QR_ITER_FACTOR) -> EigenDecomposition:
    """Eigenvalues of a general complex matrix by Hessenberg + shifted QR.

    Values come back with algebraic multiplicity, sorted by (re, im).  The
    iteration is capped at ``iter_factor * k`` QR sweeps in total; on failure
    ``NoConvergence`` carries the partial diagonal and a converged mask.
    """
    m = as_matrix(m, square=True)
    k = m.shape[0]
    if k == 1:
        return EigenDecomposition(m[0].copy(), np.ones((1, 1), complex) if vectors else None)
    t, z, _, hi, status = _kernels.schur(m, vectors, deflate_tol, iter_factor)
    diag = np.diag(t).copy()
    if status:
        converged = np.arange(k) > hi
        raise NoConvergence(f"QR iteration did not converge within {iter_factor * k} iterations",
                            values=diag, converged=converged)
    vecs = z @ _kernels.triangular_eigvecs(t) if vectors else None
    vals, vecs = sort_complex(diag, vecs)
    return EigenDecomposition(vals, vecs)


def schur_decomposition(m):
    """Return ``(T, Z)`` with ``m = Z T Z*``, T upper triangular, Z unitary."""
    m = as_matrix(m, square=True)
    t, z, _, _, status = _kernels.schur(m, True, _kernels.QR_DEFLATE_TOL, _kernels.QR_ITER_FACTOR)
    if status:
        raise NoConvergence("QR iteration did not converge", values=np.diag(t).copy())
    return t, z


def operator_norm(a) -> float:
    """Largest singular value, via the top eigenvalue of ``A* A``."""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    g = adjoint(a) @ a
    g = 0.5 * (g + adjoint(g))
    w = hermitian_eigs(g).values
    return float(np.sqrt(max(w[-1], 0.0)))


# -- random sampling ----------------------------------------------------------

def complex_gaussian(rows: int, cols: int, rng: RngState) -> np.ndarray:
    """Standard complex Gaussian matrix, entries drawn row-major."""
    return rng.complex_normals(rows * cols).reshape(rows, cols)


def haar_unit_vector(n: int, rng: RngState) -> np.ndarray:
    if n < 1:
        raise ValueError("dimension must be positive")
    x = complex_gaussian(n, 1, rng)
    return x / np.linalg.norm(x)


HAAR_RETRIES = 8


def haar_frame(n: int, k: int, rng: RngState) -> np.ndarray:
    """Haar-distributed n x k frame: Gram-Schmidt of a complex Gaussian matrix.

    Gram-Schmidt leaves R with a positive real diagonal, which is the phase
    convention that makes the law of the frame unitarily invariant.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    for _ in range(HAAR_RETRIES):
        try:
            return qr_orthonormalize(complex_gaussian(n, k, rng))
        except RankDeficient:
            continue
    raise RankDeficient(f"no full-rank Gaussian draw in {HAAR_RETRIES} attempts")


def haar_frames(n: int, k: int, seed: int, streams) -> np.ndarray:
    """Stack of frames where entry ``i`` equals ``haar_frame(n, k, RngState(seed, streams[i]))``."""
    streams = np.asarray(streams, dtype=np.int64).ravel()
    g = batch_complex_normals(seed, streams, n * k).reshape(-1, n, k)
    q, bad = _gram_schmidt(g, 1e-10)
    for i in np.flatnonzero(bad):
        q[i] = haar_frame(n, k, RngState(seed, int(streams[i])))
    return q


def haar_unitary(n: int, rng: RngState) -> np.ndarray:
    return haar_frame(n, n, rng)


def random_hermitian(n: int, rng: RngState) -> np.ndarray:
    g = complex_gaussian(n, n, rng)
    return 0.5 * (g + adjoint(g))


def random_normal(n: int, rng: RngState) -> np.ndarray:
    """Q diag(lambda) Q* with Haar Q and complex Gaussian eigenvalues."""
    q = haar_unitary(n, rng)
    lam = rng.complex_normals(n)
    return (q * lam) @ adjoint(q)
