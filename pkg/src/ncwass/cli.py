"""Command line front end.

    ncwass dist SCENARIO [--variant plain|modular] [--tol T] [--max-iter N] [--out FILE]
    ncwass sweep SCENARIO [--jobs J] [--out FILE.csv]
    ncwass verify SUITE|SCENARIO ... [--seed S] [--cases N]
    ncwass reduce SCENARIO

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 solver did not converge. ``NCW_LOG`` sets the log level (default WARNING).
"""

import argparse
import csv
import functools
import io
import json
import logging
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import scenario as sc_mod
from . import solver, suites, systems
from .cost import CostSpec
from .scenario import Scenario, ScenarioError

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
CSV_TAIL = ["variant", "optimal_cost", "distance", "primal_residual", "dual_residual",
            "constraint_residual", "iterations", "status"]

log = logging.getLogger("ncwass")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _solver_opts(sc: Scenario, args) -> dict:
    opts = dict(sc.solver)
    if args.tol is not None:
        opts["tol"] = args.tol
    if args.max_iter is not None:
        opts["max_iter"] = args.max_iter
    return opts


def _variant(sc: Scenario, args) -> str:
    return args.variant or sc.variant


def _report_dict(r: solver.SolveReport) -> dict:
    return {
        "optimal_cost": r.optimal_cost,
        "distance": r.distance,
        "primal_residual": r.primal_residual,
        "dual_residual": r.dual_residual,
        "constraint_residual": r.constraint_residual,
        "min_eigenvalue": r.min_eigenvalue,
        "iterations": r.iterations,
        "converged": r.converged,
    }


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _as_system(x):
    return x.as_system() if isinstance(x, systems.CompositeSystem) else x


def run_dist(sc: Scenario, args) -> int:
    a, b = (_as_system(sc.systems[n]) for n in sc.pair)
    variant = _variant(sc, args)
    try:
        rep = solver.wasserstein(a, b, sc.cost, variant, **_solver_opts(sc, args))
    except (ValueError, KeyError) as exc:
        raise ScenarioError("systems", str(exc)) from None
    doc = {"scenario": sc.id, "pair": list(sc.pair), "variant": variant, **_report_dict(rep),
           "constraint_rows": rep.provenance}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK if rep.converged else EXIT_SOLVER


def _sweep_point(builder: str, base: dict, cost: Optional[CostSpec], variant: str, opts: dict, **point):
    params = {**base, **point}
    a, b = sc_mod.TEMPLATES[builder](**params)
    spec = cost or CostSpec(sc_mod.CRITERION_COST)
    return solver.wasserstein(a, b, spec, variant, **opts)


def sweep_csv(sc: Scenario, variant: str, opts: dict, jobs: int = 1):
    """CSV text and per-row statuses, in grid order."""
    task = functools.partial(_sweep_point, sc.template["builder"], sc.template["params"], sc.cost, variant, opts)
    rows = solver.sweep(task, sc.ranges, jobs=jobs) if all(sc.ranges.values()) and sc.ranges else []
    names = list(sc.ranges)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario"] + names + CSV_TAIL)
    for row in rows:
        r = row.report
        vals = [r.optimal_cost, r.distance, r.primal_residual, r.dual_residual, r.constraint_residual,
                r.iterations] if r is not None else [None] * 6
        w.writerow([sc.id] + [_fmt(row.params[n]) for n in names] + [variant] + [_fmt(v) for v in vals]
                   + [row.status if row.error is None else f"error: {row.error}"])
    return buf.getvalue(), [row.status for row in rows]


def run_sweep(sc: Scenario, args) -> int:
    variant = _variant(sc, args)
    text, statuses = sweep_csv(sc, variant, _solver_opts(sc, args), jobs=args.jobs)
    _emit(text, args.out)
    if "not_converged" in statuses:
        return EXIT_SOLVER
    return EXIT_INPUT if "error" in statuses else EXIT_OK


def run_reduce(sc: Scenario, args) -> int:
    ca, cb = (sc.systems[n] for n in sc.pair)
    variant = _variant(sc, args)
    opts = _solver_opts(sc, args)
    w = sc.cost
    k = CostSpec(tuple(np.kron(np.eye(ca.dims[0]), x) for x in w.k))
    reduced = solver.wasserstein(systems.reduce_system(ca), systems.reduce_system(cb), w, variant, **opts)
    augmented = solver.wasserstein(systems.augment(ca), systems.augment(cb), k, variant, **opts)
    doc = {"scenario": sc.id, "variant": variant, "reduced": _report_dict(reduced),
           "augmented": _report_dict(augmented),
           "inequality_holds": reduced.distance <= augmented.distance + 1e-6}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if not (reduced.converged and augmented.converged):
        return EXIT_SOLVER
    return EXIT_OK if doc["inequality_holds"] else EXIT_VERIFY


def run_verify(names: Sequence[str], args) -> int:
    requested: List[str] = []
    cases = args.cases
    for name in names:
        if name in suites.SUITES or name == "all":
            requested.extend(suites.SUITES if name == "all" else [name])
            continue
        sc = sc_mod.load(name)
        if sc.task != "verify":
            raise ScenarioError("task", "verify needs a suite name or a verify scenario")
        for s in sc.suites:
            if s not in suites.SUITES:
                raise ScenarioError("suites", f"unknown suite {s!r}")
        requested.extend(sc.suites)
        cases = cases if cases is not None else sc.cases
    lines, ok = [], True
    for name in requested:
        res = suites.run(name, seed=args.seed, cases=cases)
        lines.append(res.line())
        ok &= res.passed
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncwass", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--variant", choices=("plain", "modular"), default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)

    for name in ("dist", "sweep", "reduce"):
        p = sub.add_parser(name)
        p.add_argument("scenario")
        common(p)
    p = sub.add_parser("verify")
    p.add_argument("targets", nargs="+", help=f"suite names ({', '.join(suites.SUITES)}, all) or scenario files")
    p.add_argument("--cases", type=int, default=None)
    common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("NCW_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return run_verify(args.targets, args)
        sc = sc_mod.load(args.scenario)
        if sc.task != args.command:
            raise ScenarioError("task", f"scenario is a {sc.task!r} scenario, not {args.command!r}")
        return {"dist": run_dist, "sweep": run_sweep, "reduce": run_reduce}[args.command](sc, args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
