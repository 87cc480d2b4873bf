"""Random states, dynamics and plans for property checks.

Everything takes a ``numpy.random.Generator`` so runs are reproducible.
"""

from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from . import channel, coupling, linalg
from .channel import UcpMap
from .cost import CostSpec
from .qstate import FaithfulState, make_state
from .systems import CompositeSystem, DynamicsFamily, GenSystem


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.eye(1, dtype=complex)


def random_state(rng: np.random.Generator, n: int, diagonal: bool = False, floor: float = 0.05) -> FaithfulState:
    """Faithful state with every eigenvalue at least `floor`."""
    w = floor + (1.0 - n * floor) * rng.dirichlet(np.ones(n))
    if diagonal:
        return make_state(np.diag(w))
    v = random_unitary(rng, n)
    return make_state((v * w) @ linalg.dagger(v))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (x + linalg.dagger(x))


def commuting_unitary(rng: np.random.Generator, state: FaithfulState) -> np.ndarray:
    """Unitary diagonal in the eigenbasis of the density."""
    v = linalg.herm_eig(state.density).eigenvectors
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, state.dim))
    return (v * phases) @ linalg.dagger(v)


def preserving_map(rng: np.random.Generator, state: FaithfulState, mix: float = None) -> UcpMap:
    """``t Ad(U) + (1-t) state(.) 1`` with U commuting with the density."""
    t = rng.uniform(0.3, 1.0) if mix is None else mix
    u = channel.unitary_channel(commuting_unitary(rng, state))
    c = channel.state_collapse(state)
    return UcpMap(state.dim, state.dim, t * u.choi + (1.0 - t) * c.choi)


def random_system(rng: np.random.Generator, n: int, labels: Sequence[str] = ("alpha",), diagonal: bool = False,
                  include_modular: bool = True) -> GenSystem:
    st = random_state(rng, n, diagonal)
    maps = {lab: ((1, preserving_map(rng, st)),) for lab in labels}
    return GenSystem(st, DynamicsFamily(maps), include_modular)


def random_plan(rng: np.random.Generator, source: FaithfulState, target: FaithfulState,
                strength: float = 0.9) -> coupling.TransportPlan:
    """Product coupling plus a random Hermitian perturbation with zero marginals,
    scaled to keep the density positive."""
    n, m = source.dim, target.dim
    dims = (n, m)
    h = random_hermitian(rng, n * m)
    h1 = linalg.partial_trace(h, "second", dims)
    h2 = linalg.partial_trace(h, "first", dims)
    h0 = h - np.kron(h1, np.eye(m)) / m - np.kron(np.eye(n), h2) / n + np.trace(h) * np.eye(n * m) / (n * m)
    base = np.kron(source.density, target.density.T)
    lo = np.linalg.eigvalsh(base)[0]
    spread = np.abs(np.linalg.eigvalsh(h0)).max()
    eps = strength * lo / spread if spread > 1e-12 else 0.0
    return coupling.from_density(base + eps * h0, source, target)


def random_cost(rng: np.random.Generator, n: int, count: int = 2, star_closed: bool = False) -> CostSpec:
    ks = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(count)]
    if star_closed:
        ks = ks + [linalg.dagger(k) for k in ks]
    return CostSpec(tuple(ks))


def random_composite(rng: np.random.Generator, dims=(2, 2), labels: Sequence[str] = ("alpha",)) -> CompositeSystem:
    """Composite with product state and one state-preserving map per label."""
    sr, ss = random_state(rng, dims[0]), random_state(rng, dims[1])
    joint = make_state(np.kron(sr.density, ss.density))
    maps = {lab: ((1, preserving_map(rng, joint)),) for lab in labels}
    return CompositeSystem(tuple(dims), sr, ss, DynamicsFamily(maps))


def bare_system(rng: np.random.Generator, n: int, diagonal: bool = False) -> GenSystem:
    """System without dynamics beyond (for the modular variant) its modular group."""
    return GenSystem(random_state(rng, n, diagonal))


def phase_system(rng: np.random.Generator, phases, diagonal_state: FaithfulState = None) -> GenSystem:
    """Diagonal state with dynamics ``Ad(diag(e^{i phases}))``; systems built
    from the same phases share a nontrivial set of balanced plans."""
    phases = np.asarray(phases, dtype=float)
    st = diagonal_state or random_state(rng, phases.size, diagonal=True)
    u = channel.unitary_channel(np.diag(np.exp(1j * phases)))
    return GenSystem(st, DynamicsFamily({"alpha": ((1, u),)}))


def system_triple(rng: np.random.Generator, n: int, kind: str):
    """Three systems on M_n with matching labels, of the given kind."""
    if kind == "generic":
        return tuple(random_system(rng, n) for _ in range(3))
    if kind == "bare":
        return tuple(bare_system(rng, n) for _ in range(3))
    if kind == "phase":
        phases = rng.uniform(0, 2 * np.pi, n)
        return tuple(phase_system(rng, phases) for _ in range(3))
    raise ValueError(f"unknown system kind {kind!r}")
