"""Quadratic transport cost of a plan.

For ``k = (k_1, ..., k_n)`` the cost of a plan with channel E from mu to nu is

    I_k = sum_l mu(k_l* k_l) + nu(k_l* k_l) - nu(E(k_l)* k_l) - nu(k_l* E(k_l)).

It is affine in the Choi matrix of E, which is what the solver uses.
"""

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from . import linalg
from .channel import apply
from .coupling import TransportPlan
from .linalg import dagger
from .qstate import FaithfulState, expectation


class MomentError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CostSpec:
    k: Tuple[np.ndarray, ...]
    star_closed: bool = field(init=False)
    generating: bool = field(init=False)

    def __post_init__(self):
        ks = tuple(linalg.as_matrix(x) for x in self.k)
        if not ks:
            raise ValueError("cost needs at least one operator")
        n = ks[0].shape[0]
        if any(x.shape != (n, n) for x in ks):
            raise ValueError("cost operators must be square and of equal size")
        object.__setattr__(self, "k", ks)
        object.__setattr__(self, "star_closed", _star_closed(ks))
        object.__setattr__(self, "generating", generating_check(ks, n))

    @property
    def dim(self) -> int:
        return self.k[0].shape[0]

    def scaled(self, c: float) -> "CostSpec":
        return CostSpec(tuple(c * x for x in self.k))


def _star_closed(ks, tol: float = 1e-12) -> bool:
    def member(x):
        return any(np.abs(x - y).max() <= tol for y in ks)
    return all(member(dagger(x)) for x in ks)


def generating_check(k, dim: int) -> bool:
    """True iff {1, k_l, k_l*} generate M_dim as an algebra.

    Grows the span of words one letter at a time until it stops growing;
    that happens after at most dim**2 steps.
    """
    ks = [linalg.as_matrix(x) for x in (k.k if isinstance(k, CostSpec) else k)]
    letters = ks + [dagger(x) for x in ks]
    target = dim * dim
    basis = np.eye(dim, dtype=complex).reshape(1, -1)
    for _ in range(target):
        words = [(b.reshape(dim, dim) @ x).reshape(-1) for b in basis for x in letters]
        stacked = np.vstack([basis] + words) if words else basis
        _, s, vh = np.linalg.svd(stacked, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
        if rank == basis.shape[0]:
            break
        basis = vh[:rank]
    return basis.shape[0] == target


def transport_cost(plan: TransportPlan, spec: CostSpec) -> float:
    mu, nu, e = plan.source, plan.target, plan.channel
    if spec.dim != mu.dim or spec.dim != nu.dim:
        raise linalg.LinalgError("cost operators do not match the plan's algebra")
    total = 0.0
    for k in spec.k:
        kk = dagger(k) @ k
        ek = apply(e, k)
        total += (expectation(mu, kk) + expectation(nu, kk)
                  - expectation(nu, dagger(ek) @ k) - expectation(nu, dagger(k) @ ek)).real
    return float(total)


def cost_coefficients(spec: CostSpec, mu: FaithfulState, nu: FaithfulState):
    """Return ``(constant, linear)`` with ``I_k = constant + linear @ x``.

    ``x = concat(choi.real.ravel(), choi.imag.ravel())`` for the Choi matrix
    of the plan's channel.
    """
    n = spec.dim
    const = 0.0
    g = np.zeros((n, n, n, n), dtype=complex)
    for k in spec.k:
        kk = dagger(k) @ k
        const += (expectation(mu, kk) + expectation(nu, kk)).real
        # nu(k* E(k)) = sum k[i,j] (eta k*)[b,a] C[i,a,j,b]
        g += np.einsum("ij,ba->iajb", k, nu.density @ dagger(k))
    g = g.reshape(-1)
    # -2 Re(g . c) = -2 (g.re c.re - g.im c.im)
    linear = -2.0 * np.concatenate([g.real, -g.imag])
    return float(const), linear


def product_cost_from_moments(moments: Sequence[Tuple[float, float, complex, complex]], tol: float = 1e-12) -> float:
    """Cost of the product coupling from ``(mu(k*k), nu(k*k), mu(k), nu(k))`` rows.

    With ``E = mu(.)1`` the cross terms are ``nu(k* E(k)) = mu(k) conj(nu(k))``.
    """
    total = 0.0
    for mkk, nkk, mk, nk in moments:
        if mkk < abs(mk) ** 2 - tol or nkk < abs(nk) ** 2 - tol:
            raise MomentError("second moments smaller than squared first moments")
        total += mkk + nkk - 2.0 * (complex(nk) * np.conj(complex(mk))).real
    return float(total)


def moments_of(spec: CostSpec, mu: FaithfulState, nu: FaithfulState):
    rows = []
    for k in spec.k:
        kk = dagger(k) @ k
        rows.append((expectation(mu, kk).real, expectation(nu, kk).real,
                     expectation(mu, k), expectation(nu, k)))
    return rows
