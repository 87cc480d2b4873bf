"""The modular distance jumps from 0 at q=p to about 2 for q slightly above p."""

import numpy as np

from ncwass import CostSpec, solver
from ncwass.scenario import unitary_m2

p, theta = 0.25, np.pi / 3
spec = CostSpec((np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])))

print(f"{'q':>6} {'W (plain)':>12} {'W_sigma':>12} {'2+q-p':>8}")
for q in [0.25, 0.2501, 0.26, 0.3, 0.35, 0.4]:
    a, b = unitary_m2(p, q, theta)
    plain = solver.wasserstein(a, b, spec, "plain").optimal_cost
    mod = solver.wasserstein(a, b, spec, "modular").optimal_cost
    print(f"{q:6.4f} {plain:12.8f} {mod:12.8f} {2 + q - p:8.4f}")
# The plain value is continuous in q; the modular one is not, because the
# modular rows force the plan diagonal as soon as the two states differ.
