"""Which plan-density entries survive the balance constraints, by regime."""

import numpy as np

from ncwass import balance, systems
from ncwass.qstate import diag_state
from ncwass.suites import angle_pattern


def show(phi, theta, p, q, variant):
    a = systems.unitary_angle_system(phi, diag_state(p, 1 - p))
    b = systems.unitary_angle_system(theta, diag_state(q, 1 - q))
    free = balance.kappa_pattern(balance.assemble(a, b, variant), b.state)
    agree = np.array_equal(free, angle_pattern(phi, theta, p, q, variant))
    print(f"phi={phi:5.3f} theta={theta:5.3f} p={p} q={q} {variant:8} predicted={agree}")
    for row in free:
        print("   ", " ".join("*" if x else "." for x in row))


show(np.pi / 3, 2 * np.pi / 5, 0.25, 0.4, "plain")   # everything off-diagonal forced to 0
show(np.pi / 3, np.pi / 3, 0.25, 0.4, "plain")       # equal angles free the corner coherence
show(np.pi / 3, np.pi / 3, 0.25, 0.4, "modular")     # different states remove it again
show(0.0, 0.0, 0.5, 0.5, "modular")                  # trivial dynamics, tracial states
show(np.pi / 3, -np.pi / 3, 0.25, 0.75, "modular")   # conjugate angles, reciprocal ratios
