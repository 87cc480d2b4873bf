"""Affine constraints on the Choi matrix of a plan's channel.

The unknown is the Choi matrix C of ``E: M_n -> M_m`` in real coordinates
``x = concat(C.real.ravel(), C.imag.ravel())``. Rows encode Hermiticity of C,
unitality, ``nu o E = mu``, and balance in covariance form
``E o alpha = beta o E`` for every pair of dynamics; the modular variant adds
the same rows for the KMS-duals and for the modular generators
``E o [log zeta, .] = [log eta, .] o E``.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
import scipy.linalg

from . import channel, coupling, linalg
from .qstate import FaithfulState, commutator_superop
from .systems import GenSystem

RANK_TOL = 1e-10
FEASIBLE_TOL = 1e-9
VARIANTS = ("plain", "modular")


class LabelMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    matrix: np.ndarray
    rhs: np.ndarray
    row_labels: Tuple[str, ...]
    dim_in: int
    dim_out: int

    @property
    def n_vars(self) -> int:
        return self.matrix.shape[1]

    def residual(self, x) -> float:
        return float(np.abs(self.matrix @ x - self.rhs).max()) if len(self.rhs) else 0.0

    def provenance(self) -> Dict[str, int]:
        """Row count per generating condition (label prefix before '[')."""
        counts: Dict[str, int] = {}
        for lab in self.row_labels:
            counts[lab] = counts.get(lab, 0) + 1
        return counts


def choi_to_x(choi) -> np.ndarray:
    c = np.asarray(choi, dtype=complex).reshape(-1)
    return np.concatenate([c.real, c.imag])


def x_to_choi(x, size: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    half = x.size // 2
    return (x[:half] + 1j * x[half:]).reshape(size, size)


def _realify(a: np.ndarray, b: np.ndarray):
    """Real form of the complex system ``a c = b``."""
    top = np.hstack([a.real, -a.imag])
    bottom = np.hstack([a.imag, a.real])
    return np.vstack([top, bottom]), np.concatenate([b.real, b.imag])


def _choi_to_superop_perm(n: int, m: int) -> np.ndarray:
    """Permutation P with ``vec(superop) = P @ vec(choi)``."""
    idx = np.arange((n * m) ** 2).reshape(n, m, n, m).transpose(1, 3, 0, 2).reshape(-1)
    p = np.zeros(((n * m) ** 2, (n * m) ** 2))
    p[np.arange(idx.size), idx] = 1.0
    return p


class _Builder:
    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self.blocks: List[np.ndarray] = []
        self.rhs: List[np.ndarray] = []
        self.labels: List[str] = []
        self.perm = _choi_to_superop_perm(n, m)

    def add_real(self, a, b, label):
        self.blocks.append(a)
        self.rhs.append(b)
        self.labels.extend([label] * a.shape[0])

    def add_complex(self, a, b, label):
        self.add_real(*_realify(a, b), label)

    def add_covariance(self, s_alpha, s_beta, label):
        """Rows for ``S_E S_alpha - S_beta S_E = 0``."""
        n2, m2 = self.n ** 2, self.m ** 2
        lhs = np.kron(np.eye(m2), s_alpha.T) - np.kron(s_beta, np.eye(n2))
        self.add_complex(lhs @ self.perm, np.zeros(lhs.shape[0], dtype=complex), label)

    def build(self) -> ConstraintSet:
        return ConstraintSet(np.vstack(self.blocks), np.concatenate(self.rhs), tuple(self.labels), self.n, self.m)


def _hermiticity_rows(b: _Builder):
    size = b.n * b.m
    nn = size * size
    t = np.arange(nn).reshape(size, size).T.reshape(-1)
    pt = np.zeros((nn, nn))
    pt[np.arange(nn), t] = 1.0
    eye = np.eye(nn)
    zero = np.zeros((nn, nn))
    a = np.vstack([np.hstack([eye - pt, zero]), np.hstack([zero, eye + pt])])
    b.add_real(a, np.zeros(2 * nn), "hermiticity")


def _marginal_rows(b: _Builder, mu: FaithfulState, nu: FaithfulState):
    n, m = b.n, b.m
    # unitality: sum_i C[i,a,i,b] = delta_ab
    u = np.einsum("ij,ac,bd->abicjd", np.eye(n), np.eye(m), np.eye(m)).reshape(m * m, -1)
    b.add_complex(u.astype(complex), linalg.vec(np.eye(m)), "unitality")
    # intertwining: sum_ab C[i,a,j,b] eta[b,a] = zeta[j,i]
    w = np.einsum("ik,jl,ba->ijkalb", np.eye(n), np.eye(n), nu.density).reshape(n * n, -1)
    b.add_complex(w, linalg.vec(mu.density.T), "intertwining")


def _pair_entries(a: GenSystem, b: GenSystem):
    if a.labels != b.labels:
        raise LabelMismatch(f"dynamics labels differ: {a.labels} vs {b.labels}")
    for label in a.labels:
        ga, gb = label in a.dynamics.generators, label in b.dynamics.generators
        if ga != gb:
            raise LabelMismatch(f"label {label!r} is a generator in one system only")
        if ga:
            yield label, None, a.dynamics.generators[label], b.dynamics.generators[label]
            continue
        ea, eb = a.dynamics.maps[label], b.dynamics.maps[label]
        if [t for t, _ in ea] != [t for t, _ in eb]:
            raise LabelMismatch(f"label {label!r} has different time tags")
        for (tag, x), (_, y) in zip(ea, eb):
            yield label, tag, x, y


def assemble(a: GenSystem, b: GenSystem, variant: str = "plain") -> ConstraintSet:
    """Affine constraints describing plans from `a` to `b` in balance.

    ``variant="modular"`` adds KMS-dual balance and, when both systems have
    ``include_modular`` set, modular balance.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    mu, nu = a.state, b.state
    bld = _Builder(mu.dim, nu.dim)
    _hermiticity_rows(bld)
    _marginal_rows(bld, mu, nu)
    entries = list(_pair_entries(a, b))
    for label, tag, x, y in entries:
        if tag is None:
            bld.add_covariance(commutator_superop(x), commutator_superop(y), f"balance[{label}]")
        else:
            bld.add_covariance(x.superop, y.superop, f"balance[{label}@{tag}]")
    if variant == "modular":
        for label, tag, x, y in entries:
            if tag is None:
                bld.add_covariance(commutator_superop(-x), commutator_superop(-y), f"kms-balance[{label}]")
            else:
                xs = channel.kms_dual_map(x, mu, mu)
                ys = channel.kms_dual_map(y, nu, nu)
                bld.add_covariance(xs.superop, ys.superop, f"kms-balance[{label}@{tag}]")
        if a.include_modular and b.include_modular:
            bld.add_covariance(commutator_superop(mu.log_density), commutator_superop(nu.log_density), "modular")
    return bld.build()


def _rank(s: np.ndarray, tol: float) -> int:
    if s.size == 0:
        return 0
    return int(np.sum(s > tol * max(s[0], 1.0)))


def reduce_rows(c: ConstraintSet, tol: float = RANK_TOL) -> ConstraintSet:
    """Linearly independent subset of rows with the same row space
    (column-pivoted QR of the transposed matrix)."""
    if c.matrix.shape[0] == 0:
        return c
    _, r, piv = scipy.linalg.qr(c.matrix.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(r))
    rank = int(np.sum(d > tol * max(d[0], 1.0))) if d.size else 0
    keep = np.sort(piv[:rank])
    return ConstraintSet(c.matrix[keep], c.rhs[keep], tuple(c.row_labels[i] for i in keep), c.dim_in, c.dim_out)


def affine_rank(c: ConstraintSet, tol: float = RANK_TOL) -> int:
    aug = np.hstack([c.matrix, c.rhs[:, None]])
    return _rank(np.linalg.svd(aug, compute_uv=False), tol)


def same_feasible_set(c1: ConstraintSet, c2: ConstraintSet, tol: float = RANK_TOL) -> bool:
    """True iff the affine solution sets coincide (equal augmented row spaces)."""
    if c1.n_vars != c2.n_vars:
        raise ValueError("constraint sets have different variable dimensions")
    r1, r2 = affine_rank(c1, tol), affine_rank(c2, tol)
    both = ConstraintSet(np.vstack([c1.matrix, c2.matrix]), np.concatenate([c1.rhs, c2.rhs]),
                         c1.row_labels + c2.row_labels, c1.dim_in, c1.dim_out)
    return r1 == r2 == affine_rank(both, tol)


def affine_solution(c: ConstraintSet, tol: float = RANK_TOL):
    """Particular solution and orthonormal kernel basis (columns) of ``A x = b``."""
    a = c.matrix
    # economy SVD already spans the whole domain when rows >= columns
    u, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < a.shape[1])
    rank = _rank(s, tol)
    x0 = vh[:rank].T @ ((u[:, :rank].T @ c.rhs) / s[:rank])
    return x0, vh[rank:].T


def kappa_pattern(c: ConstraintSet, target: FaithfulState, tol: float = 1e-8) -> np.ndarray:
    """Boolean mask of plan-density entries not forced to zero by `c`."""
    x0, kernel = affine_solution(c)
    size = c.dim_in * c.dim_out
    free = np.zeros((size, size), dtype=bool)
    for x in [x0] + list(kernel.T):
        kap = coupling.kappa_from_choi(x_to_choi(x, size), target)
        free |= np.abs(kap) > tol
    return free


def feasibility_residual(plan: "coupling.TransportPlan", c: ConstraintSet) -> float:
    return c.residual(choi_to_x(plan.channel.choi))


def check(plan: "coupling.TransportPlan", a: GenSystem, b: GenSystem, variant: str = "plain") -> Dict[str, float]:
    """Max residual of ``E o alpha - beta o E`` per condition, over superoperator entries."""
    e = plan.channel
    mu, nu = a.state, b.state
    out: Dict[str, float] = {}
    entries = list(_pair_entries(a, b))
    s_e = e.superop

    def resid(sa, sb):
        return float(np.abs(s_e @ sa - sb @ s_e).max())

    for label, tag, x, y in entries:
        if tag is None:
            out[f"balance[{label}]"] = resid(commutator_superop(x), commutator_superop(y))
        else:
            out[f"balance[{label}@{tag}]"] = channel.covariance_residual(e, x, y)
    if variant == "modular":
        for label, tag, x, y in entries:
            if tag is None:
                out[f"kms-balance[{label}]"] = resid(commutator_superop(-x), commutator_superop(-y))
            else:
                out[f"kms-balance[{label}@{tag}]"] = channel.covariance_residual(
                    e, channel.kms_dual_map(x, mu, mu), channel.kms_dual_map(y, nu, nu))
        if a.include_modular and b.include_modular:
            out["modular"] = resid(commutator_superop(mu.log_density), commutator_superop(nu.log_density))
    return out
