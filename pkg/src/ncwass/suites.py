"""Randomized property suites run by ``ncwass verify``.

Each suite draws its cases from a seeded generator and reports the worst
violation against its tolerance.
"""

import itertools
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from . import balance, channel, coupling, cost, sampling, solver, systems
from .cost import CostSpec
from .qstate import diag_state, tracial_state


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    worst: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.worst <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.cases} cases, worst {self.worst:.3e} (tol {self.tol:.0e})"


def _dims(rng, lo=2, hi=4):
    return int(rng.integers(lo, hi + 1))


def kms_involution(rng, cases=100) -> SuiteResult:
    """``(E^sigma)^sigma == E`` for random plans."""
    worst = 0.0
    for _ in range(cases):
        n, m = _dims(rng, 1, 4), _dims(rng, 1, 4)
        if n * m > 16:
            m = max(1, 16 // n)
        mu, nu = sampling.random_state(rng, n), sampling.random_state(rng, m)
        pair = sampling.random_plan(rng, mu, nu).pair
        back = channel.kms_dual(channel.kms_dual(pair))
        worst = max(worst, channel.map_distance(back.map, pair.map))
    return SuiteResult("kms-involution", cases, worst, 1e-10)


def dual_relation(rng, cases=100) -> SuiteResult:
    """Standard-form dual relation and ``mu o E^sigma == nu``."""
    worst = 0.0
    for _ in range(cases):
        n, m = _dims(rng, 1, 3), _dims(rng, 1, 3)
        mu, nu = sampling.random_state(rng, n), sampling.random_state(rng, m)
        pair = sampling.random_plan(rng, mu, nu).pair
        dual = channel.kms_dual_map(pair.map, mu, nu)
        worst = max(worst, channel.verify_dual_relation(pair, dual),
                    channel.intertwining_error(dual, nu, mu))
    return SuiteResult("dual-relation", cases, worst, 1e-9)


def angle_pattern(phi: float, theta: float, p: float, q: float, variant: str) -> np.ndarray:
    """Plan-density entries left free by balance of angle systems on M_2
    (source angle `phi`, state ``diag(p, 1-p)``; target `theta`, ``diag(q, 1-q)``).

    Index order 0..3 is (11), (12), (21), (22). An entry pair is forced to
    zero when the corresponding phase inequality holds for the dynamics or,
    in the modular variant, for the modular groups (phases replaced by
    eigenvalue ratios).
    """
    def differ(x, y):
        return abs(x - y) > 1e-9

    a, b = np.exp(1j * phi), np.exp(1j * theta)
    r, s = (1 - p) / p, (1 - q) / q
    mod = variant == "modular"
    zero = {
        ((0, 2), (1, 3)): differ(a, 1) or (mod and differ(r, 1)),
        ((0, 1), (2, 3)): differ(b, 1) or (mod and differ(s, 1)),
        ((0, 3),): differ(a, b) or (mod and differ(r, s)),
        ((1, 2),): differ(a, np.conj(b)) or (mod and differ(r, 1 / s)),
    }
    free = np.ones((4, 4), dtype=bool)
    for entries, forced in zero.items():
        if forced:
            for i, j in entries:
                free[i, j] = free[j, i] = False
    return free


PATTERN_ANGLES = (0.0, np.pi / 3, -np.pi / 3, np.pi / 2, 2 * np.pi)
PATTERN_STATES = (0.25, 0.4, 0.5, 0.6, 0.75)


def balance_pattern(rng=None, cases=None) -> SuiteResult:
    """Numerical plan-density patterns against :func:`angle_pattern` on a grid."""
    grid = list(itertools.product(PATTERN_ANGLES, PATTERN_ANGLES, PATTERN_STATES, PATTERN_STATES))
    if cases is not None and rng is not None and cases < len(grid):
        grid = [grid[i] for i in sorted(rng.choice(len(grid), cases, replace=False))]
    mismatches = 0
    count = 0
    for phi, th, p, q in grid:
        a = systems.unitary_angle_system(phi, diag_state(p, 1 - p))
        b = systems.unitary_angle_system(th, diag_state(q, 1 - q))
        for variant in ("plain", "modular"):
            got = balance.kappa_pattern(balance.assemble(a, b, variant), b.state)
            mismatches += int(not np.array_equal(got, angle_pattern(phi, th, p, q, variant)))
            count += 1
    return SuiteResult("balance-pattern", count, float(mismatches), 0.0)


def _spec(rng, n):
    return sampling.random_cost(rng, n, count=1, star_closed=True)


KINDS = ("bare", "phase", "generic")


def triangle(rng, cases=100, variant_cycle=("plain", "modular")) -> SuiteResult:
    """``d(A,C) <= d(A,B) + d(B,C)`` on sampled triples."""
    worst = -np.inf
    for i in range(cases):
        kind = KINDS[i % len(KINDS)]
        n = 2 if i % 4 else 3
        a, b, c = sampling.system_triple(rng, n, kind)
        spec = _spec(rng, n)
        var = variant_cycle[i % len(variant_cycle)]
        d = [solver.wasserstein(x, y, spec, var).distance for x, y in ((a, b), (b, c), (a, c))]
        worst = max(worst, d[2] - d[0] - d[1])
    return SuiteResult("triangle", cases, max(worst, 0.0), 1e-6)


def symmetry(rng, cases=100) -> SuiteResult:
    """``W_sigma(A,B) == W_sigma(B,A)`` for star-closed costs."""
    worst = 0.0
    for i in range(cases):
        kind = KINDS[i % len(KINDS)]
        n = 2 if i % 4 else 3
        a, b, _ = sampling.system_triple(rng, n, kind)
        spec = _spec(rng, n)
        ab = solver.wasserstein(a, b, spec, "modular").distance
        ba = solver.wasserstein(b, a, spec, "modular").distance
        worst = max(worst, abs(ab - ba))
    return SuiteResult("symmetry", cases, worst, 1e-6)


THETA, PHI, U, V = (1.0, -1.0), (1.0, 2.0), (1.0, 2.0), (0.0, 1.0)


def reduction_inequality(rng, cases=100) -> SuiteResult:
    """``W(A^r, B^r) <= W(A^p, B^p)`` with cost ``1 (x) w`` on the composite."""
    worst = -np.inf
    for i in range(cases):
        st = [sampling.random_state(rng, 2, diagonal=True) for _ in range(4)]
        lam = rng.uniform(0, 1, 2) * (rng.random(2) < 0.7)
        ca = systems.two_qubit_composite(THETA, PHI, U, V, lam[0], st[0], st[1])
        cb = systems.two_qubit_composite(THETA, PHI, U, V, lam[1], st[2], st[3])
        w = _spec(rng, 2)
        k = CostSpec(tuple(np.kron(np.eye(2), x) for x in w.k))
        var = "plain" if i % 2 else "modular"
        small = solver.wasserstein(systems.reduce_system(ca), systems.reduce_system(cb), w, var)
        big = solver.wasserstein(systems.augment(ca), systems.augment(cb), k, var)
        worst = max(worst, small.distance - big.distance)
    return SuiteResult("reduction-inequality", cases, max(worst, 0.0), 1e-6)


def clock_shift(n: int):
    """Clock and shift unitaries on C^n."""
    omega = np.exp(2j * np.pi / n)
    return np.diag(omega ** np.arange(n)), np.roll(np.eye(n), 1, axis=0).astype(complex)


def torus_moments(rng=None, cases=None) -> SuiteResult:
    """Product-coupling cost 8 for ``k = (u, v, u*, v*)`` with trace-zero unitaries,
    from moments and from clock/shift matrices under the tracial state."""
    dev = abs(cost.product_cost_from_moments([(1.0, 1.0, 0.0, 0.0)] * 4) - 8.0)
    count = 1
    for n in (2, 3, 4, 5):
        u, v = clock_shift(n)
        spec = CostSpec((u, v, u.conj().T, v.conj().T))
        tr = tracial_state(n)
        plan = coupling.product_plan(tr, tr)
        dev = max(dev, abs(cost.transport_cost(plan, spec) - 8.0),
                  abs(cost.product_cost_from_moments(cost.moments_of(spec, tr, tr)) - 8.0))
        count += 1
    return SuiteResult("torus-moments", count, dev, 1e-12)


SUITES: Dict[str, Callable] = {
    "kms-involution": kms_involution,
    "dual-relation": dual_relation,
    "balance-pattern": balance_pattern,
    "triangle": triangle,
    "symmetry": symmetry,
    "reduction-inequality": reduction_inequality,
    "torus-moments": torus_moments,
}


def run(name: str, seed: int = 0, cases: int = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    rng = np.random.default_rng(seed)
    fn = SUITES[name]
    return fn(rng) if cases is None else fn(rng, cases)
