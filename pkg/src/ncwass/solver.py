"""Minimizing the transport cost over balanced plans.

The feasible set is {Choi matrix PSD} intersected with the affine set built
by :mod:`ncwass.balance`; the cost is affine in the Choi matrix. ``solve``
runs ADMM on that splitting, ``oracle_2x2`` is an independent parametric
minimizer for 2x2 instances whose plans are diagonal up to one coherence.
"""

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import balance, channel, coupling, cost, linalg
from .balance import ConstraintSet
from .cost import CostSpec
from .qstate import FaithfulState
from .systems import GenSystem

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200_000
PLAN_TOL = 1e-7


class OracleError(ValueError):
    """The instance is outside the family the 2x2 oracle parametrizes."""


@dataclass(frozen=True, eq=False)
class SdpProblem:
    source: FaithfulState
    target: FaithfulState
    cost_constant: float
    cost_linear: np.ndarray
    constraints: ConstraintSet

    @property
    def size(self) -> int:
        """Side length of the Choi matrix."""
        return self.source.dim * self.target.dim

    def cost_at(self, choi) -> float:
        return float(self.cost_constant + self.cost_linear @ balance.choi_to_x(choi))


@dataclass(frozen=True, eq=False)
class SolveReport:
    optimal_cost: float
    distance: float
    plan: Optional[coupling.TransportPlan]
    primal_residual: float
    dual_residual: float
    constraint_residual: float
    min_eigenvalue: float
    iterations: int
    converged: bool
    seconds: float = 0.0
    provenance: Dict[str, int] = field(default_factory=dict)


def build_problem(a: GenSystem, b: GenSystem, spec: CostSpec, variant: str = "plain") -> SdpProblem:
    if not (spec.dim == a.dim == b.dim):
        raise linalg.LinalgError(f"cost on M_{spec.dim} for systems on M_{a.dim} and M_{b.dim}")
    cons = balance.assemble(a, b, variant)
    const, lin = cost.cost_coefficients(spec, a.state, b.state)
    return SdpProblem(a.state, b.state, const, lin, cons)


def _psd_part(x: np.ndarray, size: int) -> np.ndarray:
    c = balance.x_to_choi(x, size)
    w, v = np.linalg.eigh(0.5 * (c + c.conj().T))
    return balance.choi_to_x((v * np.clip(w, 0.0, None)) @ v.conj().T)


def _plan_from_choi(choi, p: SdpProblem) -> Optional[coupling.TransportPlan]:
    n, m = p.source.dim, p.target.dim
    try:
        e = channel.UcpMap(n, m, choi, tol=PLAN_TOL)
        pair = channel.IntertwinedPair(e, p.source, p.target, tol=PLAN_TOL)
    except channel.ChannelError as exc:
        log.warning("solver iterate is not a valid plan: %s", exc)
        return None
    return coupling.from_channel(pair)


def solve(p: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
          rho: float = 1.0, relax: float = 1.6, check_every: int = 25,
          adapt_every: int = 500) -> SolveReport:
    """ADMM between the affine set and the PSD cone.

    Iterates ``x = P_affine(z - u - c/rho)``, ``z = P_psd(relax x + (1-relax) z + u)``,
    ``u += relax x + (1-relax) z_old - z``. Every `adapt_every` iterations the
    penalty is rescaled by 2 when primal and dual residuals differ by more
    than a factor 10.
    Non-convergence is reported, not raised.
    """
    start = time.perf_counter()
    size = p.size
    x0, kernel = balance.affine_solution(p.constraints)
    c = np.asarray(p.cost_linear, dtype=float)
    scale = max(1.0, float(np.abs(c).max()))
    c = c / scale

    def project(v):
        return x0 + kernel @ (kernel.T @ (v - x0))

    z = _psd_part(x0, size)
    u = np.zeros_like(z)
    x = x0
    r_norm = s_norm = np.inf
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        x = project(z - u - c / rho)
        xh = relax * x + (1.0 - relax) * z
        z_old = z
        z = _psd_part(xh + u, size)
        u = u + xh - z
        if it % check_every == 0 or it == max_iter:
            r_norm = float(np.abs(x - z).max())
            s_norm = float(rho * np.abs(z - z_old).max())
            if r_norm <= tol and s_norm <= tol:
                converged = True
                break
            if it % adapt_every:
                continue
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u /= 2.0
            elif s_norm > 10.0 * r_norm:
                rho /= 2.0
                u *= 2.0
    choi = balance.x_to_choi(x, size)
    choi = 0.5 * (choi + linalg.dagger(choi))
    min_eig = float(np.linalg.eigvalsh(choi)[0])
    value = p.cost_at(choi)
    report = SolveReport(
        optimal_cost=value,
        distance=float(np.sqrt(max(value, 0.0))),
        plan=_plan_from_choi(choi, p),
        primal_residual=r_norm,
        dual_residual=s_norm,
        constraint_residual=p.constraints.residual(balance.choi_to_x(choi)),
        min_eigenvalue=min_eig,
        iterations=it,
        converged=converged,
        seconds=time.perf_counter() - start,
        provenance=p.constraints.provenance(),
    )
    if not converged:
        log.warning("ADMM stopped after %d iterations (primal %.2e, dual %.2e)", it, r_norm, s_norm)
    return report


def wasserstein(a: GenSystem, b: GenSystem, spec: CostSpec, variant: str = "plain", **opts) -> SolveReport:
    """Optimal cost (``I_k``) and distance (its square root) from `a` to `b`.

    ``variant="plain"`` uses balanced plans, ``"modular"`` modular-balanced ones.
    """
    return solve(build_problem(a, b, spec, variant), **opts)


# -- independent 2x2 oracle -------------------------------------------------

_COHERENCE = (0, 3)


def _oracle_family(p: SdpProblem):
    """Affine map ``theta -> x`` for ``kappa = diag(t, z00-t, e00-t, 1-z00-e00+t)`` plus
    a coherence ``w`` at positions (0,3)/(3,0); ``theta = (t, Re w, Im w)``."""
    zeta, eta = p.source.density, p.target.density
    z00, e00 = float(zeta[0, 0].real), float(eta[0, 0].real)

    def kappa(theta):
        t, wr, wi = theta
        k = np.diag([t, z00 - t, e00 - t, 1.0 - z00 - e00 + t]).astype(complex)
        k[0, 3] = wr + 1j * wi
        k[3, 0] = wr - 1j * wi
        return k

    def to_x(theta):
        return balance.choi_to_x(coupling.choi_from_kappa(kappa(theta), p.target))

    base = to_x((0.0, 0.0, 0.0))
    cols = np.column_stack([to_x(np.eye(3)[i]) - base for i in range(3)])
    return kappa, base, cols, (z00, e00)


def oracle_2x2(p: SdpProblem, grid_step: float = 1e-4, refine_tol: float = 1e-10) -> float:
    """Minimal cost for 2x2 instances whose feasible plans are diagonal up to the
    (0,3) coherence.

    Feasible plans are ``t`` (the classical coupling parameter) and ``w`` with
    ``|w|^2 <= kappa_00 kappa_33``; for fixed t the best coherence has modulus
    ``sqrt(kappa_00 kappa_33)``, leaving a convex function of t that is
    minimized on a grid followed by golden-section refinement.
    """
    for st in (p.source, p.target):
        if st.dim != 2 or not st.is_diagonal():
            raise OracleError("oracle needs diagonal states on M_2")
    pattern = balance.kappa_pattern(p.constraints, p.target)
    allowed = np.eye(4, dtype=bool)
    allowed[_COHERENCE] = allowed[_COHERENCE[::-1]] = True
    if np.any(pattern & ~allowed):
        raise OracleError("constraints allow plan entries outside the diagonal and the (0,3) coherence")

    kappa, base, cols, (z00, e00) = _oracle_family(p)
    # restrict the family to the constraint set: (A M) theta = b - A base
    a_red = p.constraints.matrix @ cols
    b_red = p.constraints.rhs - p.constraints.matrix @ base
    u, s, vh = np.linalg.svd(a_red)
    rank = int(np.sum(s > 1e-10 * max(s[0], 1.0))) if s.size else 0
    theta0 = vh[:rank].T @ ((u[:, :rank].T @ b_red) / s[:rank]) if rank else np.zeros(3)
    if np.abs(a_red @ theta0 - b_red).max() > 1e-8:
        raise OracleError("constraint set is infeasible on the oracle family")
    free = vh[rank:].T
    t_free = bool(free.size) and np.abs(free[0]).max() > 1e-9
    if free.size:
        uz, sz, _ = np.linalg.svd(free[1:], full_matrices=False)
        q = uz[:, sz > 1e-9]
    else:
        q = np.zeros((2, 0))
    # the kernel must split into a pure-t part and a pure-coherence part
    if free.shape[1] != int(t_free) + q.shape[1]:
        raise OracleError("constraints couple the classical parameter and the coherence")
    zdirs = q
    w0 = theta0[1:] - q @ (q.T @ theta0[1:])
    if np.abs(w0).max() > 1e-9:
        raise OracleError("constraints pin the coherence at a nonzero value")

    lin = p.cost_linear
    c_t = float(lin @ cols[:, 0])
    g = np.array([lin @ cols[:, 1], lin @ cols[:, 2]])
    g_free = float(np.linalg.norm(q.T @ g)) if zdirs.size else 0.0
    c0 = p.cost_constant + float(lin @ base)

    lo = max(0.0, z00 + e00 - 1.0)
    hi = min(z00, e00)
    if not t_free:
        lo = hi = float(theta0[0])
        if not (max(0.0, z00 + e00 - 1.0) - 1e-9 <= lo <= min(z00, e00) + 1e-9):
            raise OracleError("constraints pin the classical parameter outside its range")

    def f(t):
        r = np.sqrt(max(t, 0.0) * max(1.0 - z00 - e00 + t, 0.0))
        return c0 + c_t * t - r * g_free

    if hi - lo <= 0.0:
        return float(f(lo))
    ts = np.linspace(lo, hi, max(2, int(np.ceil((hi - lo) / grid_step)) + 1))
    vals = np.array([f(t) for t in ts])
    i = int(np.argmin(vals))
    a_, b_ = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    ratio = (np.sqrt(5.0) - 1.0) / 2.0
    c_, d_ = b_ - ratio * (b_ - a_), a_ + ratio * (b_ - a_)
    fc, fd = f(c_), f(d_)
    while b_ - a_ > refine_tol:
        if fc < fd:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - ratio * (b_ - a_)
            fc = f(c_)
        else:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + ratio * (b_ - a_)
            fd = f(d_)
    return float(min(vals[i], f(0.5 * (a_ + b_))))


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    params: Dict[str, float]
    report: Optional[SolveReport]
    error: Optional[str] = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "ok" if self.report.converged else "not_converged"


def _run_point(task, params):
    try:
        return SweepRow(params, task(**params))
    except Exception as exc:  # a failing point must not stop the sweep
        return SweepRow(params, None, f"{type(exc).__name__}: {exc}")


def _run_point_star(args):
    return _run_point(*args)


def grid_points(ranges: Mapping[str, Sequence[float]]) -> List[Dict[str, float]]:
    names = list(ranges)
    return [dict(zip(names, combo)) for combo in itertools.product(*(ranges[n] for n in names))]


def sweep(task: Callable[..., SolveReport], ranges: Mapping[str, Sequence[float]], jobs: int = 1) -> List[SweepRow]:
    """Evaluate ``task(**point)`` on the Cartesian grid of `ranges`.

    Rows come back in grid order (last name varies fastest). With ``jobs > 1``
    points run in worker processes, so `task` must be picklable.
    """
    points = grid_points(ranges)
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_point_star, [(task, pt) for pt in points]))
    return [_run_point(task, pt) for pt in points]
