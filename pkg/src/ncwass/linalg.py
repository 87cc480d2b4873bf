"""Dense complex matrix kernel.

All vectorization in this package is row-major: ``vec(C)[i*m + j] = C[i, j]``,
which fixes the identity ``kron(A, B) @ vec(C) == vec(A @ C @ B.T)``.
"""

from typing import Callable, NamedTuple, Tuple

import numpy as np

HERM_TOL = 1e-10
MAX_DIM = 64


class LinalgError(ValueError):
    pass


class HermEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise LinalgError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def is_hermitian(a, tol: float = HERM_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return np.linalg.norm(a - dagger(a)) <= tol * (1.0 + np.linalg.norm(a))


def hermitize(a, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``(a + a*)/2`` after checking `a` is Hermitian up to `tol`
    relative to its Frobenius norm."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise LinalgError(f"matrix is not square: {a.shape}")
    if not is_hermitian(a, tol):
        raise LinalgError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + dagger(a))


def herm_eig(a, tol: float = HERM_TOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Examples
    --------
    >>> herm_eig(np.diag([2.0, 1.0])).eigenvalues
    array([1., 2.])
    """
    w, v = np.linalg.eigh(hermitize(a, tol))
    return HermEig(w, v)


def mat_func(a, f: Callable[[np.ndarray], np.ndarray], tol: float = HERM_TOL) -> np.ndarray:
    """Apply the scalar function `f` to a Hermitian matrix through its spectrum.

    `f` receives the real eigenvalue array and may return complex values.
    A non-finite value of `f` on the spectrum raises ``LinalgError``.
    """
    w, v = herm_eig(a, tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(w), dtype=complex)
    if fw.shape != w.shape or not np.all(np.isfinite(fw)):
        raise LinalgError("function is not defined on the spectrum")
    return (v * fw) @ dagger(v)


def sqrtm_psd(a) -> np.ndarray:
    w, v = herm_eig(a)
    if w[0] < -HERM_TOL * (1.0 + np.abs(w).max()):
        raise LinalgError("matrix is not positive semidefinite")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def logm_pd(a) -> np.ndarray:
    w, v = herm_eig(a)
    if w[0] <= 0:
        raise LinalgError("logarithm needs a strictly positive spectrum")
    return (v * np.log(w)) @ dagger(v)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(x, side: str, dims: Tuple[int, int]) -> np.ndarray:
    """Trace out one factor of a matrix on ``C^n (x) C^m``.

    ``side="second"`` traces out the second factor and returns an n x n
    matrix; ``side="first"`` traces out the first and returns m x m.
    """
    n, m = dims
    x = as_matrix(x)
    if x.shape != (n * m, n * m):
        raise LinalgError(f"shape {x.shape} does not match dims {dims}")
    x4 = x.reshape(n, m, n, m)
    if side == "second":
        return np.einsum("ajbj->ab", x4)
    if side == "first":
        return np.einsum("iaib->ab", x4)
    raise LinalgError(f"side must be 'first' or 'second', got {side!r}")


def vec(c) -> np.ndarray:
    return as_matrix(c).reshape(-1)


def unvec(v, dims: Tuple[int, int]) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != dims[0] * dims[1]:
        raise LinalgError(f"vector of length {v.size} cannot be reshaped to {dims}")
    return v.reshape(dims)


def psd_project(a, tol: float = HERM_TOL) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm (eigenvalue clipping)."""
    w, v = herm_eig(a, tol)
    return (v * np.clip(w, 0.0, None)) @ dagger(v)


def matrix_unit(n: int, i: int, j: int, m: int = None) -> np.ndarray:
    e = np.zeros((n, n if m is None else m), dtype=complex)
    e[i, j] = 1.0
    return e


def null_space(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of a real or complex matrix."""
    a = np.atleast_2d(a)
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=a.dtype)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > rtol * max(scale, 1.0)))
    return dagger(vh[rank:]) if np.iscomplexobj(vh) else vh[rank:].T
