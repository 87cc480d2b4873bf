"""Linear maps between matrix algebras in Choi form.

The Choi matrix of ``E: M_n -> M_m`` is ``C = sum_ij e_ij (x) E(e_ij)``, an
(n*m) x (n*m) matrix. Reshaped to ``(n, m, n, m)`` it reads
``C[i, a, j, b] = E(e_ij)[a, b]``.
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import scipy.linalg

from . import linalg
from .linalg import dagger
from .qstate import FaithfulState, expectation, left_action, right_action, standard_vector

CP_TOL = 1e-9
UNITAL_TOL = 1e-9
INTERTWINE_TOL = 1e-9


class ChannelError(ValueError):
    pass


class IntertwiningError(ChannelError):
    """``target o E != source`` beyond tolerance."""


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Arbitrary linear map ``M_{dim_in} -> M_{dim_out}`` stored by its Choi matrix."""

    dim_in: int
    dim_out: int
    choi: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.choi, dtype=complex)
        size = self.dim_in * self.dim_out
        if c.shape != (size, size):
            raise ChannelError(f"Choi matrix shape {c.shape} does not match {self.dim_in}->{self.dim_out}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "choi", c)

    @property
    def choi4(self) -> np.ndarray:
        return self.choi.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)

    @property
    def superop(self) -> np.ndarray:
        """Matrix S with ``vec(E(a)) = S @ vec(a)`` (row-major vec)."""
        n, m = self.dim_in, self.dim_out
        return self.choi4.transpose(1, 3, 0, 2).reshape(m * m, n * n)

    def __call__(self, a) -> np.ndarray:
        return apply(self, a)

    def __repr__(self):
        return f"{type(self).__name__}({self.dim_in}->{self.dim_out})"


class UcpMap(LinearMap):
    """Unital completely positive map.

    Construction checks complete positivity (Choi eigenvalues >= -CP_TOL)
    and unitality; small negative eigenvalues are clipped.
    """

    def __init__(self, dim_in: int, dim_out: int, choi, tol: float = CP_TOL):
        c = np.asarray(choi, dtype=complex)
        if not linalg.is_hermitian(c, max(tol, linalg.HERM_TOL)):
            raise ChannelError("Choi matrix is not Hermitian: map is not completely positive")
        c = 0.5 * (c + dagger(c))
        w, v = np.linalg.eigh(c)
        if w[0] < -tol:
            raise ChannelError(f"map is not completely positive (Choi eigenvalue {w[0]:.3g})")
        if w[0] < 0:
            c = (v * np.clip(w, 0.0, None)) @ dagger(v)
        super().__init__(dim_in, dim_out, c)
        err = np.abs(apply(self, np.eye(dim_in)) - np.eye(dim_out)).max()
        if err > max(tol, UNITAL_TOL):
            raise ChannelError(f"map is not unital (error {err:.3g})")


def as_ucp(e: LinearMap, tol: float = CP_TOL) -> UcpMap:
    if isinstance(e, UcpMap):
        return e
    return UcpMap(e.dim_in, e.dim_out, e.choi, tol=tol)


def choi_from_superop(s: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    n, m = dim_in, dim_out
    return np.asarray(s).reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)


def from_superop(s, dim_in: int, dim_out: int, ucp: bool = True, tol: float = CP_TOL) -> LinearMap:
    c = choi_from_superop(s, dim_in, dim_out)
    return UcpMap(dim_in, dim_out, c, tol=tol) if ucp else LinearMap(dim_in, dim_out, c)


def from_function(f: Callable[[np.ndarray], np.ndarray], dim_in: int, dim_out: int, ucp: bool = True) -> LinearMap:
    """Choi matrix of a linear map given as a Python callable."""
    n, m = dim_in, dim_out
    c4 = np.zeros((n, m, n, m), dtype=complex)
    for i in range(n):
        for j in range(n):
            c4[i, :, j, :] = f(linalg.matrix_unit(n, i, j))
    c = c4.reshape(n * m, n * m)
    return UcpMap(n, m, c) if ucp else LinearMap(n, m, c)


def apply(e: LinearMap, a) -> np.ndarray:
    a = linalg.as_matrix(a)
    if a.shape != (e.dim_in, e.dim_in):
        raise linalg.LinalgError(f"operator of shape {a.shape} for a map on M_{e.dim_in}")
    return np.einsum("ij,iajb->ab", a, e.choi4)


def compose(f: LinearMap, g: LinearMap) -> LinearMap:
    """``f o g`` (apply g first)."""
    if g.dim_out != f.dim_in:
        raise ChannelError(f"cannot compose {f!r} after {g!r}")
    s = f.superop @ g.superop
    ucp = isinstance(f, UcpMap) and isinstance(g, UcpMap)
    return from_superop(s, g.dim_in, f.dim_out, ucp=ucp)


def hs_adjoint(e: LinearMap) -> LinearMap:
    """Adjoint for the trace pairing: ``Tr(E(a)* x) == Tr(a* E_adj(x))``."""
    return from_superop(dagger(e.superop), e.dim_out, e.dim_in, ucp=False)


def identity_channel(n: int) -> UcpMap:
    return from_superop(np.eye(n * n), n, n)


def unitary_channel(u) -> UcpMap:
    """``a -> u a u*``."""
    u = linalg.as_matrix(u)
    return from_superop(np.kron(u, np.conj(u)), u.shape[0], u.shape[0])


def hamiltonian_channel(h, t: float) -> UcpMap:
    """``a -> e^{iht} a e^{-iht}``."""
    h = linalg.hermitize(h)
    return unitary_channel(scipy.linalg.expm(1j * t * h))


def state_collapse(source: FaithfulState, dim_out: int = None) -> UcpMap:
    """``a -> mu(a) 1``, the channel of the product coupling."""
    m = source.dim if dim_out is None else dim_out
    s = np.outer(linalg.vec(np.eye(m)), linalg.vec(source.density.T))
    return from_superop(s, source.dim, m)


def map_distance(f: LinearMap, g: LinearMap) -> float:
    if (f.dim_in, f.dim_out) != (g.dim_in, g.dim_out):
        raise ChannelError("maps act between different algebras")
    return float(np.abs(f.choi - g.choi).max())


def intertwining_error(e: LinearMap, source: FaithfulState, target: FaithfulState) -> float:
    """max over matrix units of ``|nu(E(e_ij)) - mu(e_ij)|``."""
    # nu(E(e_ij)) = sum_ab C[i,a,j,b] eta[b,a]
    lhs = np.einsum("iajb,ba->ij", e.choi4, target.density)
    return float(np.abs(lhs - source.density.T).max())


@dataclass(frozen=True, eq=False)
class IntertwinedPair:
    """A u.c.p. map with states satisfying ``target o map == source``."""

    map: UcpMap
    source: FaithfulState
    target: FaithfulState
    tol: float = INTERTWINE_TOL

    def __post_init__(self):
        e = self.map
        if (e.dim_in, e.dim_out) != (self.source.dim, self.target.dim):
            raise ChannelError("state dimensions do not match the map")
        err = intertwining_error(e, self.source, self.target)
        if err > self.tol:
            raise IntertwiningError(f"target o E differs from source by {err:.3g}")


def kms_dual_map(e: LinearMap, source: FaithfulState, target: FaithfulState, ucp: bool = True,
                 tol: float = CP_TOL) -> LinearMap:
    """KMS-dual ``b -> zeta^{-1/2} E_adj(eta^{1/2} b eta^{1/2}) zeta^{-1/2}``.

    No intertwining check; see :func:`kms_dual` for the checked version.
    Unitality of the dual is the intertwining of `e`, so `tol` bounds both.
    """
    z = source.inv_sqrt_density
    h = target.sqrt_density
    s = np.kron(z, z.T) @ dagger(e.superop) @ np.kron(h, h.T)
    return from_superop(s, e.dim_out, e.dim_in, ucp=ucp, tol=tol)


def kms_dual(p: IntertwinedPair) -> IntertwinedPair:
    """KMS-dual of an intertwined pair; source and target swap roles."""
    tol = max(p.tol, CP_TOL)
    return IntertwinedPair(kms_dual_map(p.map, p.source, p.target, tol=tol), p.target, p.source, tol)


def verify_dual_relation(p: IntertwinedPair, dual: LinearMap = None) -> float:
    """Residual of the defining dual relation in the matrix standard form.

    Compares ``<L_mu, (a (x) Es(b).T) L_mu>`` with ``<L_nu, (E(a) (x) b.T) L_nu>``
    over all matrix units a, b, where Es is the KMS-dual (or `dual` if given).
    """
    e = p.map
    es = kms_dual_map(e, p.source, p.target) if dual is None else dual
    lm, ln = standard_vector(p.source), standard_vector(p.target)
    n, m = e.dim_in, e.dim_out
    worst = 0.0
    for i in range(n):
        for j in range(n):
            a = linalg.matrix_unit(n, i, j)
            left_a = left_action(a)
            right_ea = left_action(apply(e, a))
            for k in range(m):
                for l in range(m):
                    b = linalg.matrix_unit(m, k, l)
                    lhs = np.vdot(lm, left_a @ right_action(apply(es, b)) @ lm)
                    rhs = np.vdot(ln, right_ea @ right_action(b) @ ln)
                    worst = max(worst, abs(lhs - rhs))
    return float(worst)


def _split(n_r: int, n_s: int, x: np.ndarray) -> np.ndarray:
    return x.reshape(n_r, n_s, n_r, n_s)


def slice_to_second(state_r: FaithfulState, dims: Tuple[int, int]) -> UcpMap:
    """``mu_R (x) id``: R (x) S -> S, ``r (x) s -> mu_R(r) s``."""
    n_r, n_s = dims
    if state_r.dim != n_r:
        raise ChannelError(f"state on M_{state_r.dim} for a reservoir of dimension {n_r}")
    zr = state_r.density

    def f(x):
        return np.einsum("ab,bsat->st", zr, _split(n_r, n_s, x))

    return from_function(f, n_r * n_s, n_s)


def embed_second(dims: Tuple[int, int]) -> UcpMap:
    """``s -> 1_R (x) s``."""
    n_r, n_s = dims
    return from_function(lambda s: np.kron(np.eye(n_r), s), n_s, n_r * n_s)


def cond_expectation_onto_second(state_r: FaithfulState, dims: Tuple[int, int]) -> UcpMap:
    """Conditional expectation ``r (x) s -> mu_R(r) 1_R (x) s`` onto 1 (x) S."""
    return compose(embed_second(dims), slice_to_second(state_r, dims))


def reduce_channel(alpha: LinearMap, state_r: FaithfulState) -> LinearMap:
    """Reduced map ``P_S o alpha o iota`` on the second tensor factor."""
    n_r = state_r.dim
    if alpha.dim_in != alpha.dim_out or alpha.dim_in % n_r:
        raise ChannelError(f"cannot reduce a map on M_{alpha.dim_in} over a {n_r}-dim reservoir")
    dims = (n_r, alpha.dim_in // n_r)
    return compose(slice_to_second(state_r, dims), compose(alpha, embed_second(dims)))


def preserves_state(e: LinearMap, state: FaithfulState, tol: float = INTERTWINE_TOL) -> bool:
    return intertwining_error(e, state, state) <= tol


def kadison_gap(e: LinearMap, target: FaithfulState, a) -> float:
    """``nu(E(a*a)) - nu(E(a)*E(a))``; nonnegative for u.c.p. maps."""
    ea = apply(e, a)
    return float((expectation(target, apply(e, dagger(a) @ a)) - expectation(target, dagger(ea) @ ea)).real)


def covariance_residual(e: LinearMap, alpha: LinearMap, beta: LinearMap) -> float:
    """max-entry norm of ``E o alpha - beta o E`` (as superoperators)."""
    return float(np.abs(e.superop @ alpha.superop - beta.superop @ e.superop).max())
