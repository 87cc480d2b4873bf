"""Generalized systems: a faithful state plus labelled families of dynamics.

A family entry is either a finite list of ``(tag, map)`` samples or a
Hermitian generator h, standing for the whole group ``t -> Ad(e^{iht})``.
Integer-generated automorphism dynamics only need the map at tag 1, since
balance for a map implies balance for its powers (and inverses).
"""

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import channel, linalg
from .channel import UcpMap
from .qstate import FaithfulState, product_state

DEFAULT_TIME_GRID = (1.0, float(np.sqrt(2.0)), float(np.pi / 2))
COND_EXP_LABEL = "cond_exp"
PRESERVE_TOL = 1e-9


class InvalidSystem(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DynamicsFamily:
    maps: Mapping[str, Tuple[Tuple[object, UcpMap], ...]] = field(default_factory=dict)
    generators: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        both = set(self.maps) & set(self.generators)
        if both:
            raise InvalidSystem(f"labels given both as maps and as generators: {sorted(both)}")
        maps = {k: tuple((tag, channel.as_ucp(e)) for tag, e in v) for k, v in self.maps.items()}
        gens = {k: linalg.hermitize(h) for k, h in self.generators.items()}
        object.__setattr__(self, "maps", MappingProxyType(maps))
        object.__setattr__(self, "generators", MappingProxyType(gens))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(sorted(set(self.maps) | set(self.generators)))

    def with_maps(self, label: str, entries) -> "DynamicsFamily":
        maps = dict(self.maps)
        maps[label] = tuple(entries)
        gens = {k: v for k, v in self.generators.items() if k != label}
        return DynamicsFamily(maps, gens)

    def without(self, label: str) -> "DynamicsFamily":
        return DynamicsFamily({k: v for k, v in self.maps.items() if k != label},
                              {k: v for k, v in self.generators.items() if k != label})

    def sampled(self, label: str, times: Sequence[float]) -> Tuple[Tuple[float, UcpMap], ...]:
        """Maps of a label; generator labels are evaluated at `times`."""
        if label in self.maps:
            return self.maps[label]
        h = self.generators[label]
        return tuple((t, channel.hamiltonian_channel(h, t)) for t in times)


def _check_preserves(dyn: DynamicsFamily, state: FaithfulState, tol: float):
    for label, entries in dyn.maps.items():
        for tag, e in entries:
            if e.dim_in != state.dim or e.dim_out != state.dim:
                raise InvalidSystem(f"map {label}@{tag} does not act on M_{state.dim}")
            err = channel.intertwining_error(e, state, state)
            if err > tol:
                raise InvalidSystem(f"map {label}@{tag} does not preserve the state (error {err:.3g})")
    for label, h in dyn.generators.items():
        if h.shape != (state.dim, state.dim):
            raise InvalidSystem(f"generator {label} does not act on M_{state.dim}")
        err = np.abs(h @ state.density - state.density @ h).max()
        if err > tol * max(1.0, np.abs(h).max()):
            raise InvalidSystem(f"generator {label} does not commute with the density (error {err:.3g})")


@dataclass(frozen=True, eq=False)
class GenSystem:
    state: FaithfulState
    dynamics: DynamicsFamily = field(default_factory=DynamicsFamily)
    include_modular: bool = True

    def __post_init__(self):
        _check_preserves(self.dynamics, self.state, PRESERVE_TOL)

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def labels(self):
        return self.dynamics.labels

    def strip(self, label: str) -> "GenSystem":
        return replace(self, dynamics=self.dynamics.without(label))


def system(state: FaithfulState, maps: Optional[Dict] = None, generators: Optional[Dict] = None,
           include_modular: bool = True) -> GenSystem:
    return GenSystem(state, DynamicsFamily(maps or {}, generators or {}), include_modular)


def kms_dual_system(s: GenSystem) -> GenSystem:
    """Replace every map by its KMS-dual w.r.t. the system's state.

    Generator groups preserve the state, so they are automorphism groups and
    their KMS-duals are the inverse groups (generator -h).
    """
    st = s.state
    maps = {label: tuple((tag, channel.kms_dual_map(e, st, st)) for tag, e in entries)
            for label, entries in s.dynamics.maps.items()}
    gens = {label: -h for label, h in s.dynamics.generators.items()}
    return replace(s, dynamics=DynamicsFamily(maps, gens))


def system_distance(a: GenSystem, b: GenSystem, times: Sequence[float] = DEFAULT_TIME_GRID) -> float:
    """Max Choi-entry difference between two systems with the same labels and tags."""
    if a.labels != b.labels:
        raise InvalidSystem("systems have different labels")
    worst = float(np.abs(a.state.density - b.state.density).max())
    for label in a.labels:
        ea, eb = a.dynamics.sampled(label, times), b.dynamics.sampled(label, times)
        if [t for t, _ in ea] != [t for t, _ in eb]:
            raise InvalidSystem(f"label {label} has different tags")
        for (_, x), (_, y) in zip(ea, eb):
            worst = max(worst, channel.map_distance(x, y))
    return worst


@dataclass(frozen=True, eq=False)
class CompositeSystem:
    """Reservoir R and system S with an evolution preserving ``mu_R (x) mu_S``."""

    dims: Tuple[int, int]
    state_r: FaithfulState
    state_s: FaithfulState
    evolution: DynamicsFamily
    time_grid: Tuple[float, ...] = DEFAULT_TIME_GRID

    def __post_init__(self):
        if (self.state_r.dim, self.state_s.dim) != tuple(self.dims):
            raise InvalidSystem("state dimensions do not match dims")
        _check_preserves(self.evolution, self.state, PRESERVE_TOL)

    @property
    def state(self) -> FaithfulState:
        return product_state(self.state_r, self.state_s)

    def as_system(self, include_modular: bool = True) -> GenSystem:
        return GenSystem(self.state, self.evolution, include_modular)


def augment(c: CompositeSystem, include_modular: bool = True) -> GenSystem:
    """Composite system with the conditional expectation onto 1 (x) S added
    as a one-point dynamics under ``COND_EXP_LABEL``."""
    p = channel.cond_expectation_onto_second(c.state_r, c.dims)
    dyn = c.evolution.with_maps(COND_EXP_LABEL, [(0, p)])
    return GenSystem(c.state, dyn, include_modular)


def reduce_system(c: CompositeSystem, time_grid: Optional[Sequence[float]] = None,
                  include_modular: bool = True) -> GenSystem:
    """Reduced system on S: every evolution map ``alpha_t`` becomes
    ``P_S o alpha_t o iota``. Generator labels are sampled on `time_grid`
    (the composite's own grid by default); sampled labels keep their tags."""
    grid = tuple(c.time_grid if time_grid is None else time_grid)
    if not grid:
        raise InvalidSystem("empty time grid")
    maps = {}
    for label in c.evolution.labels:
        maps[label] = tuple((t, channel.as_ucp(channel.reduce_channel(e, c.state_r)))
                            for t, e in c.evolution.sampled(label, grid))
    return GenSystem(c.state_s, DynamicsFamily(maps), include_modular)


def _real_diag(x, name: str) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 1:
        x = np.diag(x)
    if x.shape != (2, 2) or np.abs(x - np.diag(np.diag(x))).max() > 0 or np.abs(np.imag(x)).max() > 0:
        raise InvalidSystem(f"{name} must be a real diagonal 2x2 matrix")
    return np.real(np.diag(x)).astype(float)


def two_qubit_hamiltonian(theta, phi, u, v, lam: float) -> np.ndarray:
    """``Theta (x) 1 + 1 (x) Phi + lam u (x) v`` for diagonal 2x2 inputs."""
    th, ph, uu, vv = (_real_diag(x, n) for x, n in ((theta, "Theta"), (phi, "Phi"), (u, "u"), (v, "v")))
    if lam < 0:
        raise InvalidSystem("interaction strength must be nonnegative")
    h = np.add.outer(th, ph) + lam * np.outer(uu, vv)
    return np.diag(h.reshape(-1)).astype(complex)


def two_qubit_composite(theta, phi, u, v, lam: float, state_r: FaithfulState, state_s: FaithfulState,
                        time_grid: Sequence[float] = DEFAULT_TIME_GRID) -> CompositeSystem:
    """Two-qubit composite with evolution ``Ad(e^{iht})`` stored at generator level."""
    if not (state_r.is_diagonal() and state_s.is_diagonal()):
        raise InvalidSystem("reservoir and system states must be diagonal")
    h = two_qubit_hamiltonian(theta, phi, u, v, lam)
    return CompositeSystem((2, 2), state_r, state_s, DynamicsFamily({}, {"evolution": h}), tuple(time_grid))


def xi_closed_form(state_r: FaithfulState, phi, u, v, lam: float, t: float) -> complex:
    """Coherence factor of the reduced two-qubit evolution at time t."""
    d = np.real(np.diag(state_r.density))
    ph, uu, vv = _real_diag(phi, "Phi"), _real_diag(u, "u"), _real_diag(v, "v")
    dv = vv[0] - vv[1]
    return complex((d[0] * np.exp(1j * lam * uu[0] * dv * t) + d[1] * np.exp(1j * lam * uu[1] * dv * t))
                   * np.exp(1j * (ph[0] - ph[1]) * t))


def angle_unitary(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * theta)])


def unitary_angle_system(theta: float, state: FaithfulState, include_modular: bool = True) -> GenSystem:
    """System on M_2 whose dynamics is generated by ``a -> U a U*``, ``U = diag(1, e^{i theta})``."""
    if state.dim != 2 or not state.is_diagonal():
        raise InvalidSystem("unitary angle systems need a diagonal 2x2 state")
    alpha = channel.unitary_channel(angle_unitary(theta))
    return GenSystem(state, DynamicsFamily({"alpha": ((1, alpha),)}), include_modular)



def kms_dual_composite(c: CompositeSystem) -> CompositeSystem:
    """Composite whose evolution maps are the KMS-duals w.r.t. the product state."""
    st = c.state
    maps = {label: tuple((tag, channel.kms_dual_map(e, st, st)) for tag, e in entries)
            for label, entries in c.evolution.maps.items()}
    gens = {label: -h for label, h in c.evolution.generators.items()}
    return replace(c, evolution=DynamicsFamily(maps, gens))
