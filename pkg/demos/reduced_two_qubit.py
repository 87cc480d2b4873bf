"""Reduced dynamics of a qubit coupled to a reservoir qubit.

The reduced maps are not a group once the interaction is on, and the
plain distance between reduced systems collapses to a plateau.
"""

import itertools

import numpy as np

from ncwass import CostSpec, channel, solver, systems
from ncwass.qstate import diag_state
from ncwass.scenario import reduced_two_qubit

theta, phi, u, v = np.diag([1.0, -1.0]), np.diag([1.0, 2.0]), np.diag([1.0, 2.0]), np.diag([0.0, 1.0])
mu_r = diag_state(0.3, 0.7)
spec = CostSpec((np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])))

print("coherence factor Xi at t=1 vs the reduced map's (1,2) entry")
for lam in (0.0, 0.5, 1.0):
    h = systems.two_qubit_hamiltonian(theta, phi, u, v, lam)
    red = channel.reduce_channel(channel.hamiltonian_channel(h, 1.0), mu_r)
    entry = red(np.array([[0, 1], [0, 0]]))[0, 1]
    print(f"  lambda={lam}: Xi={systems.xi_closed_form(mu_r, phi, u, v, lam, 1.0):.6f}  entry={entry:.6f}")

print("\nsemigroup defect |a(t+s) - a(t) a(s)| at t=1, s=sqrt(2)")
for lam in (0.0, 1.0):
    c = systems.two_qubit_composite(theta, phi, u, v, lam, mu_r, diag_state(0.25, 0.75))
    maps = [systems.reduce_system(c, time_grid=(t,)).dynamics.maps["evolution"][0][1] for t in (1.0, np.sqrt(2), 1.0 + np.sqrt(2))]
    print(f"  lambda={lam}: {channel.map_distance(maps[2], channel.compose(maps[0], maps[1])):.4f}")

print("\noptimal I_k between reduced systems (p=0.25, q=0.4)")
print(f"{'lam1':>5} {'lam2':>5} {'W(A,B)':>10} {'W(B,A)':>10} {'W_sigma':>10}")
for lam1, lam2 in itertools.product((0.0, 0.5, 1.0), repeat=2):
    ab = solver.wasserstein(*reduced_two_qubit(0.25, 0.4, lam1, lam2), spec).optimal_cost
    ba = solver.wasserstein(*reduced_two_qubit(0.25, 0.4, lam1, lam2, reverse=1), spec).optimal_cost
    ws = solver.wasserstein(*reduced_two_qubit(0.25, 0.4, lam1, lam2), spec, "modular").optimal_cost
    print(f"{lam1:5.1f} {lam2:5.1f} {ab:10.6f} {ba:10.6f} {ws:10.6f}")
