"""JSON scenario documents: systems, cost, task, solver options, sweep ranges.

Matrices are nested lists whose entries are numbers or ``[re, im]`` pairs.
A system is either

    {"state": M, "dynamics": {label: D, ...}, "include_modular": true}
    {"composite": {"reservoir": M, "system": M, "evolution": {label: D, ...},
                   "time_grid": [...]}}

with each dynamics entry D one of ``{"unitary_angle": theta}``,
``{"hamiltonian": H}`` (whole group), ``{"hamiltonian": H, "times": [...]}``
(sampled), ``{"choi": C}`` or ``{"choi": [C, ...], "tags": [...]}``,
``{"modular": true}`` (the state's own modular group), and
``{"two_qubit": {"theta": .., "phi": .., "u": .., "v": .., "lambda": ..}}``
for composites. Sweeps name a template builder instead of fixed systems.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import channel, linalg, qstate, systems
from .cost import CostSpec
from .systems import CompositeSystem, DynamicsFamily, GenSystem

TASKS = ("dist", "sweep", "verify", "reduce")
SCENARIO_DIR = Path(__file__).with_name("scenarios")


class ScenarioError(ValueError):
    """Validation failure, tagged with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Scenario:
    id: str
    task: str
    variant: str = "plain"
    systems: Dict[str, Any] = field(default_factory=dict)
    pair: Tuple[str, str] = ("A", "B")
    cost: Optional[CostSpec] = None
    solver: Dict[str, Any] = field(default_factory=dict)
    template: Optional[Dict[str, Any]] = None
    ranges: Dict[str, List[float]] = field(default_factory=dict)
    suites: Tuple[str, ...] = ()
    cases: Optional[int] = None


def parse_matrix(obj, path: str) -> np.ndarray:
    if isinstance(obj, (int, float)):
        return np.array([[complex(obj)]])
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ScenarioError(path, "expected a nested list of rows")
    rows = []
    for i, row in enumerate(obj):
        vals = []
        for j, e in enumerate(row):
            if isinstance(e, bool):
                raise ScenarioError(f"{path}[{i}][{j}]", "boolean is not a matrix entry")
            if isinstance(e, (int, float)):
                vals.append(complex(e))
            elif isinstance(e, list) and len(e) == 2 and all(isinstance(x, (int, float)) for x in e):
                vals.append(complex(e[0], e[1]))
            else:
                raise ScenarioError(f"{path}[{i}][{j}]", "entry must be a number or an [re, im] pair")
        rows.append(vals)
    if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
        raise ScenarioError(path, "matrix must be square")
    return np.array(rows, dtype=complex)


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def parse_state(obj, path: str) -> qstate.FaithfulState:
    try:
        return qstate.make_state(parse_matrix(obj, path))
    except (qstate.StateError, linalg.LinalgError) as exc:
        raise ScenarioError(path, str(exc)) from None


def _number(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ScenarioError(path, "expected a number")
    return float(obj)


def _numbers(obj, path: str) -> List[float]:
    if not isinstance(obj, list):
        raise ScenarioError(path, "expected a list of numbers")
    return [_number(x, f"{path}[{i}]") for i, x in enumerate(obj)]


def _dynamics(spec: Mapping, state: qstate.FaithfulState, path: str, dims=None):
    """Return ('maps', entries) or ('generator', h) for one label."""
    if not isinstance(spec, dict) or len(spec) == 0:
        raise ScenarioError(path, "dynamics entry must be a non-empty object")
    n = state.dim
    try:
        if "unitary_angle" in spec:
            if n != 2:
                raise ScenarioError(path, "unitary_angle dynamics needs a 2x2 state")
            theta = _number(spec["unitary_angle"], f"{path}.unitary_angle")
            return "maps", ((1, channel.unitary_channel(systems.angle_unitary(theta))),)
        if "hamiltonian" in spec:
            h = parse_matrix(spec["hamiltonian"], f"{path}.hamiltonian")
            if h.shape != (n, n):
                raise ScenarioError(f"{path}.hamiltonian", f"expected a {n}x{n} matrix")
            if not linalg.is_hermitian(h):
                raise ScenarioError(f"{path}.hamiltonian", "matrix is not Hermitian")
            if "times" in spec:
                ts = _numbers(spec["times"], f"{path}.times")
                return "maps", tuple((t, channel.hamiltonian_channel(h, t)) for t in ts)
            return "generator", h
        if "choi" in spec:
            raw = spec["choi"]
            many = isinstance(raw, list) and raw and isinstance(raw[0], list) and raw[0] \
                and isinstance(raw[0][0], list) and raw[0][0] and isinstance(raw[0][0][0], list)
            mats = raw if many else [raw]
            tags = spec.get("tags", list(range(1, len(mats) + 1)))
            if len(tags) != len(mats):
                raise ScenarioError(f"{path}.tags", "one tag per Choi matrix required")
            out = []
            for i, (m, tag) in enumerate(zip(mats, tags)):
                c = parse_matrix(m, f"{path}.choi[{i}]")
                if c.shape != (n * n, n * n):
                    raise ScenarioError(f"{path}.choi[{i}]", f"expected a {n * n}x{n * n} Choi matrix")
                out.append((tag, channel.UcpMap(n, n, c)))
            return "maps", tuple(out)
        if spec.get("modular") is True:
            return "generator", state.log_density
        if "two_qubit" in spec:
            if dims != (2, 2):
                raise ScenarioError(path, "two_qubit evolution needs a 2x2 reservoir and a 2x2 system")
            tq = spec["two_qubit"]
            args = {}
            for key in ("theta", "phi", "u", "v"):
                if key not in tq:
                    raise ScenarioError(f"{path}.two_qubit", f"missing field {key!r}")
                args[key] = np.real(np.diag(parse_matrix(tq[key], f"{path}.two_qubit.{key}")))
            lam = _number(tq.get("lambda", 0.0), f"{path}.two_qubit.lambda")
            return "generator", systems.two_qubit_hamiltonian(args["theta"], args["phi"], args["u"], args["v"], lam)
    except channel.ChannelError as exc:
        raise ScenarioError(path, str(exc)) from None
    except systems.InvalidSystem as exc:
        raise ScenarioError(path, str(exc)) from None
    raise ScenarioError(path, f"unknown dynamics kind {sorted(spec)}")


def _family(obj, state, path, dims=None) -> DynamicsFamily:
    if obj is None:
        return DynamicsFamily()
    if not isinstance(obj, dict):
        raise ScenarioError(path, "dynamics must be an object keyed by label")
    maps, gens = {}, {}
    for label, spec in obj.items():
        kind, val = _dynamics(spec, state, f"{path}.{label}", dims)
        (maps if kind == "maps" else gens)[label] = val
    return DynamicsFamily(maps, gens)


def parse_system(obj, path: str):
    if not isinstance(obj, dict):
        raise ScenarioError(path, "system must be an object")
    try:
        if "composite" in obj:
            c = obj["composite"]
            sr = parse_state(c.get("reservoir"), f"{path}.composite.reservoir")
            ss = parse_state(c.get("system"), f"{path}.composite.system")
            dims = (sr.dim, ss.dim)
            joint = qstate.product_state(sr, ss)
            evo = _family(c.get("evolution"), joint, f"{path}.composite.evolution", dims)
            grid = tuple(_numbers(c["time_grid"], f"{path}.composite.time_grid")) if "time_grid" in c \
                else systems.DEFAULT_TIME_GRID
            return CompositeSystem(dims, sr, ss, evo, grid)
        if "state" not in obj:
            raise ScenarioError(path, "missing field 'state'")
        st = parse_state(obj["state"], f"{path}.state")
        fam = _family(obj.get("dynamics"), st, f"{path}.dynamics")
        return GenSystem(st, fam, bool(obj.get("include_modular", True)))
    except systems.InvalidSystem as exc:
        raise ScenarioError(path, str(exc)) from None


def parse_cost(obj, path: str = "cost") -> CostSpec:
    if not isinstance(obj, list) or not obj:
        raise ScenarioError(path, "cost must be a non-empty list of matrices")
    ks = tuple(parse_matrix(k, f"{path}[{i}]") for i, k in enumerate(obj))
    try:
        return CostSpec(ks)
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _ranges(obj, path: str) -> Dict[str, List[float]]:
    if not isinstance(obj, dict):
        raise ScenarioError(path, "ranges must be an object keyed by parameter")
    out = {}
    for name, r in obj.items():
        if isinstance(r, list):
            out[name] = _numbers(r, f"{path}.{name}")
        elif isinstance(r, dict) and {"start", "stop", "num"} <= set(r):
            num = r["num"]
            if isinstance(num, bool) or not isinstance(num, int) or num < 0:
                raise ScenarioError(f"{path}.{name}.num", "expected a nonnegative integer")
            out[name] = [round(float(x), 12) for x in np.linspace(_number(r["start"], f"{path}.{name}.start"),
                                                      _number(r["stop"], f"{path}.{name}.stop"), num)]
        else:
            raise ScenarioError(f"{path}.{name}", "expected a list or {start, stop, num}")
    return out


def from_dict(doc: Mapping) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    task = doc.get("task", "dist")
    if task not in TASKS:
        raise ScenarioError("task", f"must be one of {TASKS}")
    variant = doc.get("variant", "plain")
    if variant not in ("plain", "modular"):
        raise ScenarioError("variant", "must be 'plain' or 'modular'")
    sc = Scenario(id=str(doc.get("id", "scenario")), task=task, variant=variant)
    sysdocs = doc.get("systems", {})
    if not isinstance(sysdocs, dict):
        raise ScenarioError("systems", "must be an object keyed by name")
    sc.systems = {name: parse_system(s, f"systems.{name}") for name, s in sysdocs.items()}
    if "cost" in doc:
        sc.cost = parse_cost(doc["cost"])
    solver_opts = doc.get("solver", {})
    if not isinstance(solver_opts, dict) or not set(solver_opts) <= {"tol", "max_iter", "rho"}:
        raise ScenarioError("solver", "allowed options are tol, max_iter, rho")
    sc.solver = dict(solver_opts)
    if task in ("dist", "reduce"):
        pair = doc.get("pair", ["A", "B"])
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ScenarioError("pair", "expected two system names")
        for i, name in enumerate(pair):
            if name not in sc.systems:
                raise ScenarioError(f"pair[{i}]", f"unknown system {name!r}")
        sc.pair = (pair[0], pair[1])
        if sc.cost is None:
            raise ScenarioError("cost", "missing")
        a, b = (sc.systems[n] for n in sc.pair)
        if task == "reduce" and not all(isinstance(x, CompositeSystem) for x in (a, b)):
            raise ScenarioError("pair", "reduce needs two composite systems")
        dim_a = a.dims[1] if task == "reduce" else a.state.dim
        dim_b = b.dims[1] if task == "reduce" else b.state.dim
        if not (dim_a == dim_b == sc.cost.dim):
            raise ScenarioError("cost", f"cost acts on M_{sc.cost.dim}, systems on M_{dim_a} and M_{dim_b}")
    if task == "sweep":
        tpl = doc.get("template")
        if not isinstance(tpl, dict) or tpl.get("builder") not in TEMPLATES:
            raise ScenarioError("template.builder", f"must be one of {sorted(TEMPLATES)}")
        params = tpl.get("params", {})
        if not isinstance(params, dict):
            raise ScenarioError("template.params", "expected an object")
        sc.template = {"builder": tpl["builder"], "params": params}
        sc.ranges = _ranges(doc.get("ranges", {}), "ranges")
    if task == "verify":
        suites = doc.get("suites", [])
        if isinstance(suites, str):
            suites = [suites]
        sc.suites = tuple(suites)
        if "cases" in doc:
            sc.cases = int(doc["cases"])
    return sc


def load(path) -> Scenario:
    p = Path(path)
    if not p.exists() and (SCENARIO_DIR / p).exists():
        p = SCENARIO_DIR / p
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise ScenarioError("<file>", f"no such scenario {str(path)!r}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON: {exc}") from None
    return from_dict(doc)


def bundled() -> List[Path]:
    return sorted(SCENARIO_DIR.glob("*.json"))


# -- sweep templates -----------------------------------------------------------

CRITERION_COST = (np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))


def _diag2(p: float) -> qstate.FaithfulState:
    return qstate.diag_state(p, 1.0 - p)


def unitary_m2(p: float, q: float, theta: float, phi: Optional[float] = None, reverse: float = 0.0):
    """Angle systems on M_2: source ``(alpha_phi, diag(p, 1-p))``, target
    ``(alpha_theta, diag(q, 1-q))``; ``reverse=1`` swaps the roles."""
    a = systems.unitary_angle_system(theta if phi is None else phi, _diag2(p))
    b = systems.unitary_angle_system(theta, _diag2(q))
    return (b, a) if reverse else (a, b)


def reduced_two_qubit(p: float, q: float, lam1: float, lam2: float, r_mu: float = 0.3, r_nu: float = 0.6,
                      theta: Sequence[float] = (1.0, -1.0), phi: Sequence[float] = (1.0, 2.0),
                      u: Sequence[float] = (1.0, 2.0), v: Sequence[float] = (0.0, 1.0),
                      time_grid: Sequence[float] = systems.DEFAULT_TIME_GRID, reverse: float = 0.0):
    """Reduced systems of two-qubit composites with interaction strengths
    `lam1` (source) and `lam2` (target); reservoir states ``diag(r, 1-r)``."""
    ca = systems.two_qubit_composite(theta, phi, u, v, lam1, _diag2(r_mu), _diag2(p), time_grid)
    cb = systems.two_qubit_composite(theta, phi, u, v, lam2, _diag2(r_nu), _diag2(q), time_grid)
    a, b = systems.reduce_system(ca), systems.reduce_system(cb)
    return (b, a) if reverse else (a, b)


TEMPLATES = {"unitary_m2": unitary_m2, "reduced_two_qubit": reduced_two_qubit}
