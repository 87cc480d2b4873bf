"""One test per acceptance criterion; each records a PASS/FAIL line."""

import itertools
import time

import numpy as np

from ncwass import balance, channel, coupling, cost, sampling, solver, suites, systems
from ncwass.cost import CostSpec
from ncwass.qstate import diag_state, product_state
from ncwass.scenario import reduced_two_qubit, unitary_m2
from conftest import record

P, Q = 0.25, 0.4
THETA = np.pi / 3
SPEC = CostSpec((np.diag([0.0, 1.0]), np.array([[0, 1], [1, 0]])))
W_AB = 2 + Q - P - 2 * np.sqrt(P / Q)
W_BA = 2 + Q - P - 2 * np.sqrt((1 - Q) / (1 - P))
JUMP = 2 + Q - P

R_THETA, R_PHI, R_U, R_V = np.diag([1.0, -1.0]), np.diag([1.0, 2.0]), np.diag([1.0, 2.0]), np.diag([0.0, 1.0])
MU_R, NU_R = diag_state(0.3, 0.7), diag_state(0.6, 0.4)
GRID = systems.DEFAULT_TIME_GRID


def test_criterion_1_asymmetric_values():
    rows, ok = [], True
    for reverse, closed in ((0, W_AB), (1, W_BA)):
        start = time.perf_counter()
        prob = solver.build_problem(*unitary_m2(P, Q, THETA, reverse=reverse), SPEC)
        orc = solver.oracle_2x2(prob)
        rep = solver.solve(prob)
        secs = time.perf_counter() - start
        ok &= abs(orc - closed) < 1e-6 and abs(rep.optimal_cost - orc) < 1e-5 and secs < 5 and rep.converged
        rows.append((orc, rep.optimal_cost, secs))
    ok &= rows[0][1] > rows[1][1]
    detail = (f"W(A,B) oracle {rows[0][0]:.7f} admm {rows[0][1]:.7f} ({rows[0][2]:.2f}s); "
              f"W(B,A) oracle {rows[1][0]:.7f} admm {rows[1][1]:.7f} ({rows[1][2]:.2f}s)")
    assert record("1", ok, detail)


def test_criterion_2_modular_jump():
    worst = 0.0
    for q in np.round(np.arange(0.26, 0.401, 0.01), 10):
        prob = solver.build_problem(*unitary_m2(P, q, THETA), SPEC, "modular")
        target = 2 + q - P
        worst = max(worst, abs(solver.solve(prob).optimal_cost - target), abs(solver.oracle_2x2(prob) - target))
    at_p = solver.wasserstein(*unitary_m2(P, P, THETA), SPEC, "modular").optimal_cost
    ok = worst < 1e-5 and abs(at_p) < 1e-5
    assert record("2", ok, f"max |I - (2+q-p)| over q=0.26..0.40: {worst:.2e}; I at q=p: {at_p:.2e}")


def test_criterion_3_plain_below_modular():
    rng = np.random.default_rng(3)
    pairs = [unitary_m2(P, q, THETA, reverse=r) for q in np.round(np.arange(0.25, 0.401, 0.01), 10) for r in (0, 1)]
    specs = [SPEC] * len(pairs)
    for i in range(50):
        kind = ("generic", "phase", "bare")[i % 3]
        a, b, _ = sampling.system_triple(rng, 2, kind)
        pairs.append((a, b))
        specs.append(sampling.random_cost(rng, 2, count=2))
    worst = -np.inf
    for (a, b), spec in zip(pairs, specs):
        plain = solver.wasserstein(a, b, spec, "plain").distance
        mod = solver.wasserstein(a, b, spec, "modular").distance
        worst = max(worst, plain - mod)
    assert record("3", worst <= 1e-6, f"{len(pairs)} instances, max W - W_sigma = {worst:.2e}")


def test_criterion_4_patterns():
    start = time.perf_counter()
    res = suites.balance_pattern()
    regimes = {
        "all-inequalities plain": [(np.pi / 3, 2 * np.pi / 5), (np.pi / 7, -np.pi / 5), (1.0, 2.5)],
        "equal angles plain": [(np.pi / 3, np.pi / 3), (1.0, 1.0), (2.0, 2.0)],
        "modular": [(np.pi / 3, np.pi / 3), (np.pi / 4, np.pi / 2), (0.0, 1.0)],
    }
    mu, nu = diag_state(P, 1 - P), diag_state(Q, 1 - Q)
    same = True
    for name, angles in regimes.items():
        variant = "modular" if name == "modular" else "plain"
        sets = [balance.assemble(systems.unitary_angle_system(phi, mu), systems.unitary_angle_system(th, nu), variant)
                for phi, th in angles]
        same &= all(balance.same_feasible_set(sets[0], s) for s in sets[1:])
    generic = balance.assemble(systems.unitary_angle_system(np.pi / 3, mu),
                               systems.unitary_angle_system(2 * np.pi / 5, nu))
    equal = balance.assemble(systems.unitary_angle_system(np.pi / 3, mu), systems.unitary_angle_system(np.pi / 3, nu))
    distinct = not balance.same_feasible_set(generic, equal)
    secs = time.perf_counter() - start
    ok = res.passed and same and distinct and secs < 30
    assert record("4", ok, f"{res.cases} pattern checks, {int(res.worst)} mismatches; same_feasible_set within "
                           f"regimes {same}, across regimes distinct {distinct}; {secs:.1f}s")


def test_criterion_5_reduced_two_qubit():
    xi_err = 0.0
    for lam in (0.0, 0.5, 1.0, 2.0):
        h = systems.two_qubit_hamiltonian(R_THETA, R_PHI, R_U, R_V, lam)
        for st in (MU_R, NU_R):
            for t in GRID:
                red = channel.reduce_channel(channel.hamiltonian_channel(h, t), st)
                xi = systems.xi_closed_form(st, R_PHI, R_U, R_V, lam, t)
                s = np.array([[1.0, 2.0 - 1j], [3.0, 4.0]])
                expected = np.array([[s[0, 0], xi * s[0, 1]], [np.conj(xi) * s[1, 0], s[1, 1]]])
                xi_err = max(xi_err, np.abs(red(s) - expected).max())
    plain_dev = mod_dev = 0.0
    for lam1, lam2 in itertools.product((0.0, 0.5, 1.0), repeat=2):
        for reverse in (0, 1):
            a, b = reduced_two_qubit(P, Q, lam1, lam2, reverse=reverse)
            plain = solver.wasserstein(a, b, SPEC, "plain").optimal_cost
            expected = (W_BA if reverse else W_AB) if lam1 == lam2 == 0 else JUMP
            plain_dev = max(plain_dev, abs(plain - expected))
            mod_dev = max(mod_dev, abs(solver.wasserstein(a, b, SPEC, "modular").optimal_cost - JUMP))
    c = systems.two_qubit_composite(R_THETA, R_PHI, R_U, R_V, 1.0, MU_R, diag_state(P, 1 - P))

    def red_at(t):
        return systems.reduce_system(c, time_grid=(t,)).dynamics.maps["evolution"][0][1]

    margin = min(channel.map_distance(red_at(t + s), channel.compose(red_at(t), red_at(s)))
                 for t, s in itertools.product(GRID, GRID))
    ok = xi_err < 1e-10 and plain_dev < 1e-5 and mod_dev < 1e-5 and margin > 1e-3
    assert record("5", ok, f"Xi error {xi_err:.1e}; W plateau/drop dev {plain_dev:.1e}; W_sigma dev {mod_dev:.1e}; "
                           f"semigroup violation margin {margin:.3f}")


def test_criterion_6_torus():
    value = cost.product_cost_from_moments([(1.0, 1.0, 0.0, 0.0)] * 4)
    cross = suites.torus_moments()
    ok = value == 8.0 and cross.passed
    assert record("6", ok, f"moment cost {value}; clock/shift cross-check worst {cross.worst:.1e}")


def _cost_nonnegative(rng, cases=100):
    worst = np.inf
    for _ in range(cases):
        n = int(rng.integers(1, 5))
        mu, nu = sampling.random_state(rng, n), sampling.random_state(rng, n)
        plan = sampling.random_plan(rng, mu, nu)
        worst = min(worst, cost.transport_cost(plan, sampling.random_cost(rng, n, count=2)))
    return suites.SuiteResult("cost-nonnegative", cases, max(-worst, 0.0), 1e-9)


def _reverse_invariance(rng, cases=100):
    worst = 0.0
    for i in range(cases):
        a, b, _ = sampling.system_triple(rng, 2, suites.KINDS[i % 3])
        spec = sampling.random_cost(rng, 2, count=1, star_closed=True)
        plan = solver.wasserstein(a, b, spec, "modular").plan
        worst = max(worst, abs(cost.transport_cost(plan, spec) - cost.transport_cost(coupling.kms_reverse(plan), spec)))
    return suites.SuiteResult("kms-reverse-cost", cases, worst, 1e-9)


def _tensor_channel(f, g):
    n1, n2 = f.dim_in, g.dim_in

    def h(x):
        x4 = x.reshape(n1, n2, n1, n2)
        return sum(np.kron(f(np.eye(n1)[:, [i]] @ np.eye(n1)[[j], :]), g(x4[i, :, j, :]))
                   for i in range(n1) for j in range(n1))

    return channel.from_function(h, n1 * n2, f.dim_out * g.dim_out)


def _reduction_cost_equality(rng, cases=100):
    """``nu(k* E(k)) == nu_S(w* E_r(w))`` for ``k = 1 (x) w``, on plans satisfying
    the conditional-expectation balance: tensor products of plans, and
    optimal plans between augmented composites."""
    worst = 0.0
    for i in range(cases):
        w = sampling.random_hermitian(rng, 2) + 1j * sampling.random_hermitian(rng, 2)
        k = np.kron(np.eye(2), w)
        if i % 2:
            sr, ss, sk, sl = (sampling.random_state(rng, 2) for _ in range(4))
            er, es = sampling.random_plan(rng, sr, sk).channel, sampling.random_plan(rng, ss, sl).channel
            plan = coupling.from_map(_tensor_channel(er, es), product_state(sr, ss), product_state(sk, sl))
        else:
            ca, cb = sampling.random_composite(rng), sampling.random_composite(rng)
            sr, sk = ca.state_r, cb.state_r
            plan = solver.wasserstein(systems.augment(ca), systems.augment(cb), CostSpec((k,)), "plain").plan
        # solver plans satisfy the conditional-expectation balance to solver tolerance
        red = coupling.reduce_plan(plan, sr, sk, tol=1e-7)
        nu, sl = plan.target, red.target
        lhs = np.trace(nu.density @ k.conj().T @ plan.channel(k))
        rhs = np.trace(sl.density @ w.conj().T @ red.channel(w))
        worst = max(worst, abs(lhs - rhs))
    return suites.SuiteResult("reduction-cost-equality", cases, worst, 1e-9)


def _kms_commutation(rng, cases=100):
    worst = 0.0
    for i in range(cases):
        if i % 2:
            c = sampling.random_composite(rng, (2, 2), labels=("a", "b"))
        else:
            st = [sampling.random_state(rng, 2, diagonal=True) for _ in range(2)]
            c = systems.two_qubit_composite(R_THETA, R_PHI, R_U, R_V, rng.uniform(0, 2), st[0], st[1])
        cd = systems.kms_dual_composite(c)
        worst = max(worst,
                    systems.system_distance(systems.kms_dual_system(systems.augment(c)), systems.augment(cd)),
                    systems.system_distance(systems.kms_dual_system(systems.reduce_system(c)),
                                            systems.reduce_system(cd)))
    return suites.SuiteResult("kms-commutation", cases, worst, 1e-9)


def test_criterion_7_property_suites():
    start = time.perf_counter()
    results = [suites.run(name, seed=7, cases=100) for name in
               ("kms-involution", "dual-relation", "triangle", "symmetry", "reduction-inequality")]
    rng = np.random.default_rng(7)
    results += [_cost_nonnegative(rng), _reverse_invariance(rng), _reduction_cost_equality(rng), _kms_commutation(rng)]
    secs = time.perf_counter() - start
    for r in results:
        print("   ", r.line())
    ok = all(r.passed and r.cases >= 100 for r in results) and secs < 120
    failed = [r.name for r in results if not r.passed]
    assert record("7", ok, f"{len(results)} suites x >=100 cases in {secs:.1f}s; failing: {failed or 'none'}")


def test_criterion_8_definiteness_spot_check():
    rng = np.random.default_rng(8)
    zero_when_distinct = 0
    identical_zero = True
    zeros = 0
    for i in range(40):
        kind = ("generic", "phase", "bare")[i % 3]
        a, b, _ = sampling.system_triple(rng, 2, kind)
        spec = CostSpec(SPEC.k) if i % 2 else sampling.random_cost(rng, 2, count=2, star_closed=True)
        if i % 4 == 0:
            b = a
        val = solver.wasserstein(a, b, spec, "modular").optimal_cost
        dist = systems.system_distance(a, b)
        if b is a:
            identical_zero &= abs(val) < 1e-6
        if abs(val) < 1e-6:
            zeros += 1
            zero_when_distinct += dist > 1e-6
    gen = cost.generating_check(SPEC, 2) and SPEC.star_closed and not cost.generating_check((np.diag([1.0, 0.0]),), 2)
    ok = zero_when_distinct == 0 and identical_zero and gen
    assert record("8", ok, f"{zeros} zero values, {zero_when_distinct} between distinct systems; identical pairs "
                           f"give 0: {identical_zero}; generating_check on criterion 1 spec: {gen}")
