"""Faithful states on full matrix algebras and their modular structure.

The algebra M_n is represented on C^n (x) C^n in standard form: a in M_n acts
as ``a (x) 1``, the commutant as ``1 (x) b.T``, and the standard vector of a
state with density zeta is ``vec(zeta^{1/2})``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import dagger

FAITHFUL_EPS = 1e-10
STATE_TOL = 1e-10


class StateError(ValueError):
    """The input is not a density matrix."""


class NotFaithful(StateError):
    pass


@dataclass(frozen=True, eq=False)
class FaithfulState:
    """Full-rank density matrix with cached logarithm and square root.

    Build with :func:`make_state`; the constructor does no validation.
    """

    density: np.ndarray
    log_density: np.ndarray = field(repr=False)
    sqrt_density: np.ndarray = field(repr=False)
    inv_sqrt_density: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    def expectation(self, a) -> complex:
        return expectation(self, a)

    def is_diagonal(self, tol: float = 1e-12) -> bool:
        d = self.density
        return np.abs(d - np.diag(np.diag(d))).max() <= tol

    def __repr__(self):
        return f"FaithfulState(dim={self.dim}, spectrum={np.round(np.linalg.eigvalsh(self.density), 6)})"


def make_state(density) -> FaithfulState:
    """Validate a density matrix and return the corresponding faithful state.

    Raises
    ------
    StateError
        If `density` is not Hermitian, not square or not of unit trace.
    NotFaithful
        If its smallest eigenvalue is below ``FAITHFUL_EPS``.
    """
    try:
        d = linalg.hermitize(density)
    except linalg.LinalgError as exc:
        raise StateError(str(exc)) from exc
    if d.shape[0] > linalg.MAX_DIM:
        raise StateError(f"dimension {d.shape[0]} exceeds {linalg.MAX_DIM}")
    tr = np.trace(d).real
    if abs(tr - 1.0) > STATE_TOL:
        raise StateError(f"trace is {tr!r}, expected 1")
    w, v = np.linalg.eigh(d)
    if w[0] < FAITHFUL_EPS:
        raise NotFaithful(f"smallest eigenvalue {w[0]:.3g} is below {FAITHFUL_EPS}")
    return FaithfulState(
        density=d,
        log_density=(v * np.log(w)) @ dagger(v),
        sqrt_density=(v * np.sqrt(w)) @ dagger(v),
        inv_sqrt_density=(v / np.sqrt(w)) @ dagger(v),
    )


def diag_state(*probs) -> FaithfulState:
    """Diagonal state, e.g. ``diag_state(p, 1 - p)``."""
    return make_state(np.diag(np.asarray(probs, dtype=float)))


def tracial_state(n: int) -> FaithfulState:
    return make_state(np.eye(n) / n)


def product_state(a: FaithfulState, b: FaithfulState) -> FaithfulState:
    return make_state(linalg.kron(a.density, b.density))


def _check_dim(s: FaithfulState, a: np.ndarray):
    if a.shape != (s.dim, s.dim):
        raise linalg.LinalgError(f"operator of shape {a.shape} on a {s.dim}-dim state")


def expectation(s: FaithfulState, a) -> complex:
    a = linalg.as_matrix(a)
    _check_dim(s, a)
    return complex(np.trace(s.density @ a))


def modular_unitary(s: FaithfulState, t: float) -> np.ndarray:
    """zeta^{it}."""
    w, v = np.linalg.eigh(s.density)
    return (v * np.exp(1j * t * np.log(w))) @ dagger(v)


def modular_apply(s: FaithfulState, t: float, a) -> np.ndarray:
    """Modular flow ``zeta^{it} a zeta^{-it}``."""
    a = linalg.as_matrix(a)
    _check_dim(s, a)
    u = modular_unitary(s, t)
    return u @ a @ dagger(u)


def modular_generator(s: FaithfulState) -> np.ndarray:
    """Superoperator matrix of ``a -> [log zeta, a]`` acting on row-major vec(a).

    ``expm(1j * t * G) @ vec(a) == vec(modular_apply(s, t, a))``.
    """
    return commutator_superop(s.log_density)


def commutator_superop(h) -> np.ndarray:
    """Matrix of ``a -> h a - a h`` on row-major vectorized operators."""
    h = linalg.as_matrix(h)
    one = np.eye(h.shape[0])
    return np.kron(h, one) - np.kron(one, h.T)


def kms_inner(s: FaithfulState, a, b) -> complex:
    """KMS pairing ``Tr(zeta^{1/2} a* zeta^{1/2} b)``."""
    a, b = linalg.as_matrix(a), linalg.as_matrix(b)
    _check_dim(s, a)
    _check_dim(s, b)
    r = s.sqrt_density
    return complex(np.trace(r @ dagger(a) @ r @ b))


def standard_vector(s: FaithfulState) -> np.ndarray:
    return linalg.vec(s.sqrt_density)


def left_action(a) -> np.ndarray:
    """``a (x) 1`` on C^n (x) C^n."""
    a = linalg.as_matrix(a)
    return np.kron(a, np.eye(a.shape[0]))


def right_action(b) -> np.ndarray:
    """Commutant copy ``1 (x) b.T``."""
    b = linalg.as_matrix(b)
    return np.kron(np.eye(b.shape[0]), b.T)
