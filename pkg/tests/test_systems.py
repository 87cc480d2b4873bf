import numpy as np
import pytest

from ncwass import channel, sampling, systems
from ncwass.qstate import diag_state, product_state
from ncwass.systems import COND_EXP_LABEL

THETA, PHI, U, V = np.diag([1.0, -1.0]), np.diag([1.0, 2.0]), np.diag([1.0, 2.0]), np.diag([0.0, 1.0])
MU_R, NU_R = diag_state(0.3, 0.7), diag_state(0.6, 0.4)


def composite(lam, state_r=MU_R, state_s=None, theta=THETA):
    return systems.two_qubit_composite(theta, PHI, U, V, lam, state_r, state_s or diag_state(0.25, 0.75))


def test_kms_dual_system_automorphisms(rng):
    st = sampling.random_state(rng, 3)
    u = sampling.commuting_unitary(rng, st)
    s = systems.system(st, maps={"alpha": ((1, channel.unitary_channel(u)),)}, generators={"h": st.density})
    dual = systems.kms_dual_system(s)
    assert channel.map_distance(dual.dynamics.maps["alpha"][0][1], channel.unitary_channel(u.conj().T)) < 1e-10
    assert np.abs(dual.dynamics.generators["h"] + st.density).max() < 1e-12


def test_kms_dual_system_symmetric_and_involutive(rng):
    c = sampling.random_composite(rng)
    aug = systems.augment(c)
    dual = systems.kms_dual_system(aug)
    p, pd = aug.dynamics.maps[COND_EXP_LABEL][0][1], dual.dynamics.maps[COND_EXP_LABEL][0][1]
    assert channel.map_distance(p, pd) < 1e-10
    s = sampling.random_system(rng, 3, labels=("a", "b"))
    assert systems.system_distance(systems.kms_dual_system(systems.kms_dual_system(s)), s) < 1e-9


def test_augment(rng):
    c = sampling.random_composite(rng, (2, 3))
    aug = systems.augment(c)
    assert COND_EXP_LABEL in aug.labels
    assert systems.system_distance(aug.strip(COND_EXP_LABEL), c.as_system()) == 0
    p = aug.dynamics.maps[COND_EXP_LABEL][0][1]
    assert channel.preserves_state(p, c.state)
    dual = channel.kms_dual_map(p, c.state, c.state)
    assert channel.map_distance(dual, p) < 1e-10


def test_reduce_system_noninteracting():
    red = systems.reduce_system(composite(0.0))
    for t, e in red.dynamics.maps["evolution"]:
        assert channel.map_distance(e, channel.hamiltonian_channel(PHI, t)) < 1e-12
    assert [t for t, _ in red.dynamics.maps["evolution"]] == list(systems.DEFAULT_TIME_GRID)


def test_reduce_system_preserves_state(rng):
    for lam in (0.0, 0.7):
        c = composite(lam)
        red = systems.reduce_system(c)
        for _, e in red.dynamics.maps["evolution"]:
            assert channel.preserves_state(e, c.state_s)
    c = sampling.random_composite(rng, (2, 2))
    red = systems.reduce_system(c)
    assert channel.preserves_state(red.dynamics.maps["alpha"][0][1], c.state_s)
    with pytest.raises(systems.InvalidSystem):
        systems.reduce_system(c, time_grid=())


def test_reduced_kms_dual_is_time_reversal():
    c = composite(1.0)
    grid = (1.0, 1.4, 2.0)
    fwd = systems.reduce_system(c, time_grid=grid)
    back = systems.reduce_system(c, time_grid=tuple(-t for t in grid))
    for (_, e), (_, f) in zip(fwd.dynamics.maps["evolution"], back.dynamics.maps["evolution"]):
        assert channel.map_distance(channel.kms_dual_map(e, c.state_s, c.state_s), f) < 1e-10


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
def test_two_qubit_composite(lam):
    c = composite(lam)
    h = c.evolution.generators["evolution"]
    expected = [THETA[i, i] + PHI[j, j] + lam * U[i, i] * V[j, j] for i in range(2) for j in range(2)]
    assert np.abs(np.diag(h) - expected).max() < 1e-12
    for _, e in c.evolution.sampled("evolution", systems.DEFAULT_TIME_GRID):
        assert channel.intertwining_error(e, c.state, c.state) < 1e-10
    if lam == 0:
        t = 0.9
        e = channel.hamiltonian_channel(h, t)
        local = channel.unitary_channel(np.kron(np.diag(np.exp(1j * t * np.diag(THETA))),
                                                np.diag(np.exp(1j * t * np.diag(PHI)))))
        assert channel.map_distance(e, local) < 1e-12


def test_two_qubit_rejects():
    with pytest.raises(systems.InvalidSystem):
        systems.two_qubit_composite(np.ones((2, 2)), PHI, U, V, 1.0, MU_R, MU_R)
    with pytest.raises(systems.InvalidSystem):
        systems.two_qubit_composite(THETA, PHI, U, V, -1.0, MU_R, MU_R)


def test_xi_examples():
    for t in (0.3, 1.0, 2.5):
        xi = systems.xi_closed_form(MU_R, PHI, U, V, 0.0, t)
        assert abs(xi - np.exp(1j * (PHI[0, 0] - PHI[1, 1]) * t)) < 1e-12
    assert abs(systems.xi_closed_form(MU_R, PHI, U, V, 0.8, 0.0) - 1) < 1e-12


def test_xi_matches_reduction():
    worst = 0.0
    for lam in (0.0, 0.3, 1.0):
        red = systems.reduce_system(composite(lam), time_grid=np.linspace(0.1, 5, 25))
        for t, e in red.dynamics.maps["evolution"]:
            xi = systems.xi_closed_form(MU_R, PHI, U, V, lam, t)
            worst = max(worst, abs(e(np.array([[0, 1], [0, 0]]))[0, 1] - xi))
    assert worst < 1e-10


def test_reduced_dynamics_ignores_theta_and_system_state():
    a = systems.reduce_system(composite(0.8))
    b = systems.reduce_system(composite(0.8, state_s=diag_state(0.9, 0.1), theta=np.diag([5.0, 2.0])))
    for (_, e), (_, f) in zip(a.dynamics.maps["evolution"], b.dynamics.maps["evolution"]):
        assert channel.map_distance(e, f) < 1e-12
    c = systems.reduce_system(composite(0.8, state_r=NU_R))
    assert channel.map_distance(a.dynamics.maps["evolution"][0][1], c.dynamics.maps["evolution"][0][1]) > 1e-3


def test_reduced_semigroup_violation():
    def red(lam, t):
        return systems.reduce_system(composite(lam), time_grid=(t,)).dynamics.maps["evolution"][0][1]

    t, s = 1.0, np.sqrt(2)
    for lam, expect_group in ((0.0, True), (1.0, False)):
        gap = channel.map_distance(red(lam, t + s), channel.compose(red(lam, t), red(lam, s)))
        assert (gap < 1e-12) if expect_group else (gap > 1e-3)
    # no interaction effect when v is scalar
    vv = np.diag([1.0, 1.0])
    c = systems.two_qubit_composite(THETA, PHI, U, vv, 1.0, MU_R, diag_state(0.25, 0.75))

    def red2(t):
        return systems.reduce_system(c, time_grid=(t,)).dynamics.maps["evolution"][0][1]

    assert channel.map_distance(red2(t + s), channel.compose(red2(t), red2(s))) < 1e-12


def test_unitary_angle_system():
    st = diag_state(0.25, 0.75)
    s0 = systems.unitary_angle_system(0.0, st)
    assert channel.map_distance(s0.dynamics.maps["alpha"][0][1], channel.identity_channel(2)) < 1e-12
    th = np.pi / 3
    s = systems.unitary_angle_system(th, st)
    alpha = s.dynamics.maps["alpha"][0][1]
    assert channel.preserves_state(alpha, st)
    e12 = np.array([[0, 1], [0, 0]])
    assert np.abs(alpha(e12) - np.exp(-1j * th) * e12).max() < 1e-12
    with pytest.raises(systems.InvalidSystem):
        systems.unitary_angle_system(th, sampling.random_state(np.random.default_rng(0), 2))


def test_system_rejects_nonpreserving_map(rng):
    st = diag_state(0.25, 0.75)
    x = channel.unitary_channel(np.array([[0, 1], [1, 0]]))
    with pytest.raises(systems.InvalidSystem):
        systems.system(st, maps={"a": ((1, x),)})
    with pytest.raises(systems.InvalidSystem):
        systems.system(st, generators={"h": np.array([[0, 1], [1, 0]])})


@pytest.mark.parametrize("kind", ["generated", "sampled"])
def test_augment_reduce_commute_with_kms_dual(rng, kind):
    if kind == "generated":
        c = systems.two_qubit_composite(THETA, PHI, U, V, 0.6, MU_R, diag_state(0.25, 0.75))
    else:
        c = sampling.random_composite(rng, (2, 2), labels=("a", "b"))
    cd = systems.kms_dual_composite(c)
    lhs = systems.kms_dual_system(systems.augment(c))
    assert systems.system_distance(lhs, systems.augment(cd)) < 1e-9
    lhs = systems.kms_dual_system(systems.reduce_system(c))
    assert systems.system_distance(lhs, systems.reduce_system(cd)) < 1e-9
