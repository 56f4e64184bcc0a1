"""Command line front end: solve, sweep, verify, and series subcommands.

Exit codes: 0 success, 2 config error, 3 solver failure (the failing sweep
point is named on stderr), 4 verification failure.

The exact nullspace route always runs and supplies every thermodynamic
column; selecting another method adds that route and its distance from the
exact state.  Output is a versioned CSV (or JSON) with a fixed column set;
identical scenario and seed give byte-identical files.  Density matrices are
emitted on request as JSON with row-major [re, im] entries.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys

import numpy as np

from .errors import ScenarioError, SolverError
from .linalg import frobenius, maximally_mixed
from .scenario import (
    Scenario,
    default_two_qubit_scenario,
    load_scenario,
)
from .solvers import (
    closed_form_refrigerator,
    closed_form_two_qubit,
    evolve_to_steady,
    exact_steady_state,
    fit_refrigerator_coefficients,
    fit_two_qubit_coefficients,
    perturbative_series,
    truncation_error_scan,
)
from .thermo import audit_state
from .verify import run_verification

__all__ = ["entry_point", "main"]

RESULT_COLUMNS = (
    "point", "sweep_parameter", "sweep_value", "kind", "method", "g",
    "E1", "beta1", "T1", "p1", "E2", "beta2", "T2", "p2",
    "E3", "beta3", "T3", "p3", "detuning", "conv_ratio",
    "d", "m", "a1", "a2", "a3", "b12", "b23", "b31", "c",
    "Q1", "Q2", "Q3", "Qg1", "Qg2", "Qg3", "sum_Q", "sum_Qg",
    "entropy_rate", "first_law_ok", "second_law_ok", "verdict",
    "exact_residual", "err_closed_vs_exact", "err_pert_vs_exact",
    "err_evolved_vs_exact",
)
RESULTS_VERSION = "localqme-results v1"
SERIES_VERSION = "localqme-series v1"
FIRST_LAW_LIMIT = 1e-12


def _methods_for(scenario: Scenario, model) -> list:
    if scenario.method == "all":
        methods = ["exact", "perturbative"]
        if model.kind in ("two_qubit", "refrigerator"):
            methods.append("closed_form")
        methods.append("evolve")
        return methods
    if scenario.method == "exact":
        return ["exact"]
    return ["exact", scenario.method]


def _evaluate_point(scenario: Scenario, index: int, sweep_value, model):
    """All solver routes for one parameter point; returns (row, states)."""
    tols = scenario.tolerances
    methods = _methods_for(scenario, model)
    exact = exact_steady_state(model, residual_tol=tols["residual"],
                               degeneracy_tol=tols["degeneracy"])
    min_eig = exact.diagnostics.get("min_eigenvalue", 0.0)
    if min_eig < -tols["positivity"]:
        raise SolverError(f"steady state has negative eigenvalue {min_eig:.3e}")
    states = {"exact": exact.rho}
    errors = {}
    coeffs = None
    conv_ratio = None
    if model.kind == "two_qubit":
        coeffs = fit_two_qubit_coefficients(model, exact.rho)
        conv_ratio = model.g ** 2 * abs(coeffs.x)
    elif model.kind == "refrigerator":
        coeffs = fit_refrigerator_coefficients(model, exact.rho)
        conv_ratio = model.g ** 2 * abs(coeffs.x)
    if "closed_form" in methods:
        closed, _ = (closed_form_two_qubit(model) if model.kind == "two_qubit"
                     else closed_form_refrigerator(model))
        states["closed_form"] = closed.rho
        errors["err_closed_vs_exact"] = frobenius(closed.rho - exact.rho)
    if "perturbative" in methods:
        series = perturbative_series(model, scenario.order)
        approx = series.partial_sum()
        states["perturbative"] = approx
        errors["err_pert_vs_exact"] = frobenius(approx - exact.rho)
        if conv_ratio is None:
            conv_ratio = series.convergence_ratio
    if "evolve" in methods:
        evolved = evolve_to_steady(model, maximally_mixed(model.dim),
                                   dt=scenario.dt, t_max=scenario.t_max,
                                   tol=tols["evolve"])
        states["evolved"] = evolved.rho
        errors["err_evolved_vs_exact"] = frobenius(evolved.rho - exact.rho)
    report = audit_state(model, exact.rho, steady_residual=exact.residual)

    row = {c: None for c in RESULT_COLUMNS}
    row.update(point=index, kind=model.kind, method=scenario.method,
               g=float(model.g))
    if sweep_value is not None:
        row.update(sweep_parameter=scenario.sweep.parameter,
                   sweep_value=float(sweep_value))
    for i, qb in enumerate(model.qubits[:3], start=1):
        row[f"E{i}"] = qb.E
        row[f"beta{i}"] = qb.beta
        row[f"T{i}"] = qb.T
        row[f"p{i}"] = qb.p
    row["detuning"] = model.detuning()
    row["conv_ratio"] = None if conv_ratio is None else float(conv_ratio)
    if coeffs is not None:
        row["d"], row["m"] = coeffs.d, coeffs.m
        row["a1"], row["a2"] = coeffs.a1, coeffs.a2
        if model.kind == "two_qubit":
            row["b12"] = coeffs.b
        else:
            row["a3"] = coeffs.a3
            row["b12"], row["b23"], row["b31"] = coeffs.b12, coeffs.b23, coeffs.b31
            row["c"] = coeffs.c
    for i, value in enumerate(report.currents[:3], start=1):
        row[f"Q{i}"] = value
    for i, value in enumerate(report.exchange[:3], start=1):
        row[f"Qg{i}"] = value
    row["sum_Q"] = float(sum(report.currents))
    row["sum_Qg"] = float(sum(report.exchange))
    row["entropy_rate"] = report.entropy_rate
    row["first_law_ok"] = report.first_law_residual <= FIRST_LAW_LIMIT
    row["second_law_ok"] = report.second_law_ok
    row["verdict"] = report.verdict
    row["exact_residual"] = exact.residual
    row.update(errors)
    return row, states


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(columns, rows, comments) -> str:
    buffer = io.StringIO()
    for line in comments:
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


def _render_json(document) -> str:
    return json.dumps(document, indent=2) + "\n"


def _state_record(point: int, method: str, rho) -> dict:
    entries = [[float(z.real), float(z.imag)] for z in np.asarray(rho).reshape(-1)]
    return {"point": point, "method": method, "dim": int(rho.shape[0]),
            "layout": "row-major", "entries": entries}


def _write_output(args, text: str, filename: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
        return
    os.makedirs(args.output, exist_ok=True)
    path = os.path.join(args.output, filename)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _emit_results(args, scenario: Scenario, rows, states_by_point) -> None:
    if scenario.output_format == "csv":
        text = _render_csv(RESULT_COLUMNS, rows, [RESULTS_VERSION])
        _write_output(args, text, "results.csv")
    else:
        document = {"format": RESULTS_VERSION, "columns": list(RESULT_COLUMNS),
                    "rows": rows}
        _write_output(args, _render_json(document), "results.json")
    if scenario.emit_states:
        records = [_state_record(point, method, rho)
                   for point, states in states_by_point.items()
                   for method, rho in states.items()]
        _write_output(args, _render_json({"format": RESULTS_VERSION,
                                          "states": records}), "states.json")


def _load_scenario(args) -> Scenario:
    if args.config is None:
        scenario = default_two_qubit_scenario()
    else:
        scenario = load_scenario(args.config)
    updates = {}
    if getattr(args, "method", None):
        if args.method not in ("exact", "perturbative", "closed_form",
                               "evolve", "all"):
            raise ScenarioError(f"unknown method {args.method!r}", field="method")
        if args.method == "closed_form" and scenario.kind == "custom":
            raise ScenarioError("closed_form applies only to the built-in kinds",
                                field="method")
        updates["method"] = args.method
    if getattr(args, "order", None) is not None:
        if args.order < 0:
            raise ScenarioError("order must be a non-negative integer",
                                field="order")
        updates["order"] = args.order
    if getattr(args, "fmt", None):
        updates["output_format"] = args.fmt
    if getattr(args, "emit_states", False):
        updates["emit_states"] = True
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "tol", None) is not None:
        if args.tol <= 0.0:
            raise ScenarioError("tolerance must be positive", field="tol")
        updates["tolerances"] = {**scenario.tolerances,
                                 "residual": args.tol, "evolve": args.tol}
    if updates:
        scenario = dataclasses.replace(scenario, **updates)
    if scenario.emit_states and args.output is None:
        raise ScenarioError("emitting states requires --output",
                            field="output.emit_states")
    return scenario


def _agreement_matrix(states: dict) -> str:
    names = list(states)
    width = max(12, max(len(n) for n in names) + 1)
    lines = ["pairwise Frobenius distances between solver states:"]
    lines.append(" " * width + "".join(f"{n:>{width}}" for n in names))
    for a in names:
        cells = "".join(f"{frobenius(states[a] - states[b]):>{width}.3e}"
                        for b in names)
        lines.append(f"{a:>{width}}" + cells)
    return "\n".join(lines)


def _run_points(args, scenario: Scenario, points):
    rows, states_by_point = [], {}
    for index, (value, model) in enumerate(points):
        try:
            row, states = _evaluate_point(scenario, index, value, model)
        except SolverError as exc:
            where = f"point {index}"
            if value is not None:
                where += f" ({scenario.sweep.parameter} = {value:g})"
            print(f"solver failure at {where}: {exc}", file=sys.stderr)
            return 3, rows, states_by_point
        rows.append(row)
        states_by_point[index] = states
    _emit_results(args, scenario, rows, states_by_point)
    return 0, rows, states_by_point


def _cmd_solve(args) -> int:
    scenario = _load_scenario(args)
    if scenario.sweep is not None:
        raise ScenarioError("scenario defines a sweep; use the sweep subcommand",
                            field="sweep")
    model = scenario.build_model()
    code, _, states_by_point = _run_points(args, scenario, [(None, model)])
    if code == 0 and scenario.method == "all":
        matrix = _agreement_matrix(states_by_point[0])
        print(matrix, file=sys.stdout if args.output else sys.stderr)
    return code


def _cmd_sweep(args) -> int:
    scenario = _load_scenario(args)
    if scenario.sweep is None:
        raise ScenarioError("scenario defines no sweep", field="sweep")
    code, _, _ = _run_points(args, scenario, scenario.models())
    return code


def _cmd_series(args) -> int:
    scenario = _load_scenario(args)
    model = scenario.build_model()
    order = scenario.order
    if scenario.sweep is not None and scenario.sweep.parameter == "g":
        g_values = scenario.sweep.values
    else:
        g_values = (0.2, 0.1, 0.05, 0.025)
    series = perturbative_series(model, max(order, 3))
    first, third = series.terms[1], series.terms[3]
    weight = float(np.sum(np.abs(first) ** 2))
    ratio = float(np.real(np.sum(np.conj(first) * third)) / weight)
    ratio_residual = float(np.abs(third - ratio * first).max())
    rows = []
    try:
        for k in range(1, order + 1):
            scan = truncation_error_scan(model, k, g_values)
            for g, err in zip(scan.g_values, scan.errors):
                rows.append({"order": k, "g": g, "error": err,
                             "slope": scan.slope})
    except SolverError as exc:
        print(f"solver failure during series scan: {exc}", file=sys.stderr)
        return 3
    comments = [SERIES_VERSION,
                f"ratio_third_to_first = {ratio!r} "
                f"(max componentwise residual {ratio_residual:.3e})"]
    if series.convergence_ratio is not None and model.g > 0:
        comments.append(
            f"series_ratio_at_g = {series.convergence_ratio!r} (g = {model.g!r})")
    if scenario.output_format == "csv":
        text = _render_csv(("order", "g", "error", "slope"), rows, comments)
        _write_output(args, text, "series.csv")
    else:
        document = {"format": SERIES_VERSION,
                    "ratio_third_to_first": ratio,
                    "ratio_residual": ratio_residual, "rows": rows}
        _write_output(args, _render_json(document), "series.json")
    return 0


def _cmd_verify(args) -> int:
    results = run_verification(seed=args.seed if args.seed is not None else 1234,
                               draws=args.draws)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name}: {result.detail}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if not failed else 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localqme",
        description="Steady states and thermodynamic audits for locally "
                    "dissipated qubit networks")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario YAML file (omit for the "
                                         "built-in two-qubit default)")
    common.add_argument("--output", help="directory for output files "
                                         "(omit to print to stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        help="output format (overrides the scenario)")
    common.add_argument("--seed", type=int, help="random seed override")
    common.add_argument("--tol", type=float,
                        help="residual/convergence tolerance override")
    common.add_argument("--order", type=int,
                        help="series truncation order override")

    solve = sub.add_parser("solve", parents=[common],
                           help="solve a single parameter point")
    solve.add_argument("--method",
                       choices=("exact", "perturbative", "closed_form",
                                "evolve", "all"),
                       help="solver route (overrides the scenario)")
    solve.add_argument("--emit-states", action="store_true", dest="emit_states",
                       help="also write the density matrices (needs --output)")
    solve.set_defaults(func=_cmd_solve)

    sweep = sub.add_parser("sweep", parents=[common],
                           help="run the scenario's parameter sweep")
    sweep.add_argument("--method",
                       choices=("exact", "perturbative", "closed_form",
                                "evolve", "all"),
                       help="solver route (overrides the scenario)")
    sweep.add_argument("--emit-states", action="store_true", dest="emit_states",
                       help="also write the density matrices (needs --output)")
    sweep.set_defaults(func=_cmd_sweep)

    series = sub.add_parser("series", parents=[common],
                            help="dump series terms and truncation errors")
    series.set_defaults(func=_cmd_series)

    verify = sub.add_parser("verify",
                            help="run the cross-solver invariant suite")
    verify.add_argument("--seed", type=int, default=1234)
    verify.add_argument("--draws", type=int, default=1000,
                        help="random draws for the second-law sample")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    raise SystemExit(main(sys.argv[1:]))
