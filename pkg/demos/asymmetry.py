"""Angle systems on M_2: the plain distance is asymmetric, the modular one is not."""

import numpy as np

from ncwass import CostSpec, solver
from ncwass.scenario import unitary_m2

p, q, theta = 0.25, 0.4, np.pi / 3
spec = CostSpec((np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])))

print(f"p={p} q={q} theta=pi/3, cost k=(e22, sigma_x); values are optimal I_k")
print(f"{'pair':8} {'variant':8} {'ADMM':>12} {'oracle':>12} {'closed form':>12}")
closed = {
    ("A->B", "plain"): 2 + q - p - 2 * np.sqrt(p / q),
    ("B->A", "plain"): 2 + q - p - 2 * np.sqrt((1 - q) / (1 - p)),
    ("A->B", "modular"): 2 + q - p,
    ("B->A", "modular"): 2 + q - p,
}
for (name, variant), value in closed.items():
    a, b = unitary_m2(p, q, theta, reverse=name == "B->A")
    prob = solver.build_problem(a, b, spec, variant)
    rep = solver.solve(prob)
    print(f"{name:8} {variant:8} {rep.optimal_cost:12.8f} {solver.oracle_2x2(prob):12.8f} {value:12.8f}")

# the optimal plan for A->B keeps a coherence between |11> and |22>
rep = solver.wasserstein(*unitary_m2(p, q, theta), spec)
print("\noptimal plan density for A->B (rounded):")
print(np.round(rep.plan.kappa.real, 4))
