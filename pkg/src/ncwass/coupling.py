"""Transport plans (couplings) and their correspondence with u.c.p. maps.

A plan from mu to nu is a state on M_n (x) M_m; its density kappa satisfies
``Tr(kappa (a (x) c)) = Tr(eta^{1/2} E(a) eta^{1/2} c.T)``, so the first
marginal is zeta and the second is ``eta.T`` (the second slot carries the
transposed commutant copy).
"""

from dataclasses import dataclass

import numpy as np

from . import channel, linalg
from .channel import IntertwinedPair, UcpMap
from .linalg import dagger
from .qstate import FaithfulState, make_state

PLAN_TOL = 1e-9


class InvalidCoupling(ValueError):
    pass


class StateMismatch(ValueError):
    pass


class BalanceViolated(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TransportPlan:
    pair: IntertwinedPair
    kappa: np.ndarray

    @property
    def channel(self) -> UcpMap:
        return self.pair.map

    @property
    def source(self) -> FaithfulState:
        return self.pair.source

    @property
    def target(self) -> FaithfulState:
        return self.pair.target

    def marginals(self):
        dims = (self.source.dim, self.target.dim)
        return (linalg.partial_trace(self.kappa, "second", dims),
                linalg.partial_trace(self.kappa, "first", dims))

    def __repr__(self):
        return f"TransportPlan({self.source.dim}->{self.target.dim})"


def kappa_from_choi(choi, target: FaithfulState) -> np.ndarray:
    """Closed form ``kappa = ((1 (x) eta^{1/2}) C (1 (x) eta^{1/2})).T``."""
    c = np.asarray(choi)
    n = c.shape[0] // target.dim
    g = np.kron(np.eye(n), target.sqrt_density)
    return (g @ c @ g).T


def choi_from_kappa(kappa, target: FaithfulState) -> np.ndarray:
    k = np.asarray(kappa)
    n = k.shape[0] // target.dim
    g = np.kron(np.eye(n), target.inv_sqrt_density)
    return g @ k.T @ g


def from_channel(p: IntertwinedPair) -> TransportPlan:
    """Plan with density ``(E_adj (x) id)(L_nu L_nu*)``."""
    e, nu = p.map, p.target
    n, m = e.dim_in, e.dim_out
    lam = linalg.vec(nu.sqrt_density)
    rho4 = np.outer(lam, np.conj(lam)).reshape(m, m, m, m)
    adj = dagger(e.superop).reshape(n, n, m, m)
    kappa = np.einsum("ijab,acbd->icjd", adj, rho4).reshape(n * m, n * m)
    return TransportPlan(p, 0.5 * (kappa + dagger(kappa)))


def to_density(plan: TransportPlan) -> np.ndarray:
    return plan.kappa


def channel_from_density(kappa, target: FaithfulState, dim_in: int) -> channel.LinearMap:
    """Recover E from kappa: ``E(a) = eta^{-1/2} Y(a) eta^{-1/2}`` where
    ``Tr(Y(a) c.T) == Tr(kappa (a (x) c))``. No validation."""
    n, m = dim_in, target.dim
    k4 = np.asarray(kappa, dtype=complex).reshape(n, m, n, m)
    z = target.inv_sqrt_density

    def f(a):
        y = np.einsum("ijkl,ki->lj", k4, a)
        return z @ y @ z

    return channel.from_function(f, n, m, ucp=False)


def check_density(kappa, source: FaithfulState, target: FaithfulState, tol: float = PLAN_TOL):
    n, m = source.dim, target.dim
    k = linalg.as_matrix(kappa)
    if k.shape != (n * m, n * m):
        raise InvalidCoupling(f"density of shape {k.shape} for states of dimensions {n}, {m}")
    if not linalg.is_hermitian(k, tol):
        raise InvalidCoupling("density is not Hermitian")
    lo = np.linalg.eigvalsh(0.5 * (k + dagger(k)))[0]
    if lo < -tol:
        raise InvalidCoupling(f"density is not positive (eigenvalue {lo:.3g})")
    err1 = np.abs(linalg.partial_trace(k, "second", (n, m)) - source.density).max()
    err2 = np.abs(linalg.partial_trace(k, "first", (n, m)) - target.density.T).max()
    if max(err1, err2) > tol:
        raise InvalidCoupling(f"marginals off by {max(err1, err2):.3g}")


def from_density(kappa, source: FaithfulState, target: FaithfulState, tol: float = PLAN_TOL) -> TransportPlan:
    check_density(kappa, source, target, tol)
    e = channel_from_density(kappa, target, source.dim)
    try:
        ucp = channel.as_ucp(e, tol=tol)
        pair = IntertwinedPair(ucp, source, target, tol=tol)
    except channel.ChannelError as exc:
        raise InvalidCoupling(str(exc)) from exc
    k = linalg.as_matrix(kappa)
    return TransportPlan(pair, 0.5 * (k + dagger(k)))


def from_map(e: channel.LinearMap, source: FaithfulState, target: FaithfulState, tol: float = PLAN_TOL) -> TransportPlan:
    return from_channel(IntertwinedPair(channel.as_ucp(e, tol), source, target, tol))


def identity_plan(state: FaithfulState) -> TransportPlan:
    """delta_mu: the plan of the identity channel."""
    return from_channel(IntertwinedPair(channel.identity_channel(state.dim), state, state))


def product_plan(source: FaithfulState, target: FaithfulState) -> TransportPlan:
    """The product coupling, whose channel is ``a -> mu(a) 1``."""
    return from_channel(IntertwinedPair(channel.state_collapse(source, target.dim), source, target))


def _same_state(a: FaithfulState, b: FaithfulState, tol: float) -> bool:
    return a.dim == b.dim and np.abs(a.density - b.density).max() <= tol


def compose(w: TransportPlan, p: TransportPlan, tol: float = PLAN_TOL) -> TransportPlan:
    """Plan mu -> xi with channel ``E_p o E_w``."""
    if not _same_state(w.target, p.source, tol):
        raise StateMismatch("target of the first plan is not the source of the second")
    e = channel.compose(p.channel, w.channel)
    return from_channel(IntertwinedPair(channel.as_ucp(e), w.source, p.target, max(tol, w.pair.tol)))


def kms_reverse(w: TransportPlan) -> TransportPlan:
    return from_channel(channel.kms_dual(w.pair))


def _factor_state(state: FaithfulState, state_r: FaithfulState, tol: float) -> FaithfulState:
    n_r = state_r.dim
    if state.dim % n_r:
        raise StateMismatch(f"{state.dim}-dim state does not factor over a {n_r}-dim reservoir")
    dims = (n_r, state.dim // n_r)
    zr = linalg.partial_trace(state.density, "second", dims)
    zs = linalg.partial_trace(state.density, "first", dims)
    if np.abs(zr - state_r.density).max() > tol or np.abs(np.kron(zr, zs) - state.density).max() > tol:
        raise StateMismatch("state is not the product of the given reservoir state and a system state")
    return make_state(zs)


def reduce_plan(w: TransportPlan, state_r: FaithfulState, state_k: FaithfulState,
                tol: float = 1e-9) -> TransportPlan:
    """Reduced plan with channel ``P_L o E_w o iota`` between second-factor states.

    Raises ``BalanceViolated`` unless ``E_w o P^{mu_R} == P^{nu_K} o E_w``.
    """
    mu_s = _factor_state(w.source, state_r, tol)
    nu_l = _factor_state(w.target, state_k, tol)
    p_src = channel.cond_expectation_onto_second(state_r, (state_r.dim, mu_s.dim))
    p_tgt = channel.cond_expectation_onto_second(state_k, (state_k.dim, nu_l.dim))
    res = channel.covariance_residual(w.channel, p_src, p_tgt)
    if res > tol:
        raise BalanceViolated(f"conditional-expectation balance fails (residual {res:.3g})")
    e_r = channel.compose(channel.slice_to_second(state_k, (state_k.dim, nu_l.dim)),
                          channel.compose(w.channel, channel.embed_second((state_r.dim, mu_s.dim))))
    return from_map(e_r, mu_s, nu_l, tol=tol)
