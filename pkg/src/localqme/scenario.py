"""Scenario files: declarative YAML descriptions of a run.

A scenario names a model, the solver method(s) to apply, an optional
one-parameter sweep, and output/tolerance settings.  Schema::

    kind: two_qubit | refrigerator | custom     # required
    qubits:                                      # required, one entry per qubit
      - {E: 1.0, beta: 1.0, p: 0.1}             # exactly one of beta / T
      - {E: 1.0, T: 2.0, p: 0.1}
    g: 0.05                                      # required, >= 0
    method: exact | perturbative | closed_form | evolve | all   # default exact
    order: 6                                     # series order, default 6
    interaction:                                 # custom kind only: matrix rows,
      - [0, 1]                                   # entries numeric or [re, im]
      - [1, 0]
    sweep:                                       # optional
      parameter: g                               # g | qubits[i].(E|beta|T|p)
      values: [0.01, 0.02, 0.05]
    output:                                      # optional
      format: csv | json                         # default csv
      emit_states: false
    tolerances:                                  # optional, all positive floats
      residual: 1.0e-10
      degeneracy: 1.0e-9
      positivity: 1.0e-10
      evolve: 1.0e-9
    solver:                                      # optional
      t_max: 10000.0
      dt: null                                   # null = auto step
    seed: 1234

Unknown keys anywhere are rejected with the offending dotted path, so typos
fail loudly instead of being ignored.
"""

from __future__ import annotations

import dataclasses
import math
import re

import numpy as np
import yaml

from .errors import ScenarioError
from .model import (
    QubitSpec,
    SystemModel,
    build_custom,
    build_refrigerator,
    build_two_qubit,
)

__all__ = [
    "Scenario",
    "SweepSpec",
    "default_refrigerator_scenario",
    "default_tolerances",
    "default_two_qubit_scenario",
    "load_scenario",
    "parse_scenario",
]

KINDS = ("two_qubit", "refrigerator", "custom")
METHODS = ("exact", "perturbative", "closed_form", "evolve", "all")
_QUBIT_COUNTS = {"two_qubit": 2, "refrigerator": 3}
_SWEEP_PATH = re.compile(r"^qubits\[(\d+)\]\.(E|beta|T|p)$")


def default_tolerances() -> dict:
    return {"residual": 1e-10, "degeneracy": 1e-9,
            "positivity": 1e-10, "evolve": 1e-9}


def _expect_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"expected a mapping, got {type(value).__name__}",
                            field=path)
    return value


def _reject_unknown(mapping: dict, allowed, path: str):
    for key in mapping:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ScenarioError("unknown key", field=where)


def _number(value, path: str, *, minimum=None, strict=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", field=path)
    x = float(value)
    if not math.isfinite(x):
        raise ScenarioError("must be finite", field=path)
    if minimum is not None:
        if strict and x <= minimum:
            raise ScenarioError(f"must be > {minimum}", field=path)
        if not strict and x < minimum:
            raise ScenarioError(f"must be >= {minimum}", field=path)
    return x


def _parse_qubit(entry, path: str) -> QubitSpec:
    entry = _expect_mapping(entry, path)
    _reject_unknown(entry, ("E", "beta", "T", "p"), path)
    for key in ("E", "p"):
        if key not in entry:
            raise ScenarioError("missing key", field=f"{path}.{key}")
    has_beta, has_t = "beta" in entry, "T" in entry
    if has_beta == has_t:
        raise ScenarioError("give exactly one of beta or T", field=path)
    e = _number(entry["E"], f"{path}.E", minimum=0.0, strict=True)
    p = _number(entry["p"], f"{path}.p", minimum=0.0, strict=True)
    if has_beta:
        beta = _number(entry["beta"], f"{path}.beta", minimum=0.0, strict=True)
    else:
        beta = 1.0 / _number(entry["T"], f"{path}.T", minimum=0.0, strict=True)
    return QubitSpec(E=e, beta=beta, p=p)


def _parse_interaction(rows, dim: int, path: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise ScenarioError(f"expected {dim} rows", field=path)
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ScenarioError(f"expected {dim} entries", field=f"{path}[{i}]")
        for j, cell in enumerate(row):
            where = f"{path}[{i}][{j}]"
            if isinstance(cell, (int, float)) and not isinstance(cell, bool):
                out[i, j] = float(cell)
            elif (isinstance(cell, list) and len(cell) == 2
                  and all(isinstance(u, (int, float)) and not isinstance(u, bool)
                          for u in cell)):
                out[i, j] = complex(float(cell[0]), float(cell[1]))
            else:
                raise ScenarioError("expected a number or [re, im] pair", field=where)
    return out


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """One swept parameter and the values it takes, in run order."""

    parameter: str
    values: tuple


@dataclasses.dataclass(frozen=True, eq=False)
class Scenario:
    """A validated run description; see the module docstring for the schema."""

    kind: str
    qubits: tuple
    g: float
    method: str = "exact"
    order: int = 6
    interaction: np.ndarray | None = None
    sweep: SweepSpec | None = None
    output_format: str = "csv"
    emit_states: bool = False
    tolerances: dict = dataclasses.field(default_factory=default_tolerances)
    t_max: float = 1e4
    dt: float | None = None
    seed: int = 1234

    def build_model(self) -> SystemModel:
        try:
            if self.kind == "two_qubit":
                return build_two_qubit(*self.qubits, self.g)
            if self.kind == "refrigerator":
                return build_refrigerator(*self.qubits, self.g)
            return build_custom(self.qubits, self.interaction, self.g)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc

    def model_with(self, parameter: str, value: float) -> SystemModel:
        """Model with one swept parameter replaced by ``value``."""
        value = _number(value, f"sweep value for {parameter}")
        if parameter == "g":
            if value < 0.0:
                raise ScenarioError("swept g must be >= 0", field="sweep.values")
            return dataclasses.replace(self, g=value).build_model()
        match = _SWEEP_PATH.fullmatch(parameter)
        if match is None:
            raise ScenarioError(
                "parameter must be 'g' or 'qubits[i].(E|beta|T|p)'",
                field="sweep.parameter")
        index, attr = int(match.group(1)), match.group(2)
        if index >= len(self.qubits):
            raise ScenarioError(f"qubit index {index} out of range",
                                field="sweep.parameter")
        old = self.qubits[index]
        try:
            if attr == "T":
                new = QubitSpec(E=old.E, beta=1.0 / value, p=old.p)
            else:
                new = dataclasses.replace(old, **{attr: value})
        except (ValueError, ZeroDivisionError) as exc:
            raise ScenarioError(str(exc), field="sweep.values") from exc
        qubits = tuple(new if i == index else qb
                       for i, qb in enumerate(self.qubits))
        return dataclasses.replace(self, qubits=qubits).build_model()

    def models(self):
        """Yield (sweep_value, model) pairs; a lone (None, model) without a sweep."""
        if self.sweep is None:
            yield None, self.build_model()
            return
        for value in self.sweep.values:
            yield value, self.model_with(self.sweep.parameter, value)


def parse_scenario(data, source: str = "scenario") -> Scenario:
    """Validate a parsed YAML document into a :class:`Scenario`."""
    data = _expect_mapping(data, source)
    _reject_unknown(data, ("kind", "qubits", "g", "method", "order",
                           "interaction", "sweep", "output", "tolerances",
                           "solver", "seed"), "")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}",
                            field="kind")
    raw_qubits = data.get("qubits")
    if not isinstance(raw_qubits, list) or not raw_qubits:
        raise ScenarioError("expected a non-empty list", field="qubits")
    expected = _QUBIT_COUNTS.get(kind)
    if expected is not None and len(raw_qubits) != expected:
        raise ScenarioError(f"{kind} needs exactly {expected} qubits",
                            field="qubits")
    if len(raw_qubits) > 3:
        # The versioned results schema echoes up to three qubits per row.
        raise ScenarioError("scenarios support at most 3 qubits", field="qubits")
    qubits = tuple(_parse_qubit(entry, f"qubits[{i}]")
                   for i, entry in enumerate(raw_qubits))
    if "g" not in data:
        raise ScenarioError("missing key", field="g")
    g = _number(data["g"], "g", minimum=0.0)

    method = data.get("method", "exact")
    if method not in METHODS:
        raise ScenarioError(f"method must be one of {', '.join(METHODS)}",
                            field="method")
    if method == "closed_form" and kind == "custom":
        raise ScenarioError("closed_form applies only to the built-in kinds",
                            field="method")

    order = data.get("order", 6)
    if isinstance(order, bool) or not isinstance(order, int) or order < 0:
        raise ScenarioError("order must be a non-negative integer", field="order")

    interaction = None
    if kind == "custom":
        if "interaction" not in data:
            raise ScenarioError("custom kind needs an interaction matrix",
                                field="interaction")
        interaction = _parse_interaction(data["interaction"],
                                         2 ** len(qubits), "interaction")
    elif "interaction" in data:
        raise ScenarioError("interaction is only accepted for kind: custom",
                            field="interaction")

    sweep = None
    if "sweep" in data and data["sweep"] is not None:
        raw = _expect_mapping(data["sweep"], "sweep")
        _reject_unknown(raw, ("parameter", "values"), "sweep")
        parameter = raw.get("parameter")
        if not isinstance(parameter, str):
            raise ScenarioError("expected a parameter path", field="sweep.parameter")
        if parameter != "g" and _SWEEP_PATH.fullmatch(parameter) is None:
            raise ScenarioError(
                "parameter must be 'g' or 'qubits[i].(E|beta|T|p)'",
                field="sweep.parameter")
        values = raw.get("values")
        if not isinstance(values, list) or not values:
            raise ScenarioError("expected a non-empty list", field="sweep.values")
        values = tuple(_number(v, f"sweep.values[{i}]")
                       for i, v in enumerate(values))
        sweep = SweepSpec(parameter=parameter, values=values)

    output_format, emit_states = "csv", False
    if "output" in data and data["output"] is not None:
        raw = _expect_mapping(data["output"], "output")
        _reject_unknown(raw, ("format", "emit_states"), "output")
        output_format = raw.get("format", "csv")
        if output_format not in ("csv", "json"):
            raise ScenarioError("format must be csv or json", field="output.format")
        emit_states = raw.get("emit_states", False)
        if not isinstance(emit_states, bool):
            raise ScenarioError("expected a boolean", field="output.emit_states")

    tolerances = default_tolerances()
    if "tolerances" in data and data["tolerances"] is not None:
        raw = _expect_mapping(data["tolerances"], "tolerances")
        _reject_unknown(raw, tuple(tolerances), "tolerances")
        for key, value in raw.items():
            tolerances[key] = _number(value, f"tolerances.{key}",
                                      minimum=0.0, strict=True)

    t_max, dt = 1e4, None
    if "solver" in data and data["solver"] is not None:
        raw = _expect_mapping(data["solver"], "solver")
        _reject_unknown(raw, ("t_max", "dt"), "solver")
        if "t_max" in raw:
            t_max = _number(raw["t_max"], "solver.t_max", minimum=0.0, strict=True)
        if "dt" in raw and raw["dt"] is not None:
            dt = _number(raw["dt"], "solver.dt", minimum=0.0, strict=True)

    seed = data.get("seed", 1234)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError("seed must be an integer", field="seed")

    scenario = Scenario(kind=kind, qubits=qubits, g=g, method=method,
                        order=order, interaction=interaction, sweep=sweep,
                        output_format=output_format, emit_states=emit_states,
                        tolerances=tolerances, t_max=t_max, dt=dt, seed=seed)
    if sweep is not None:
        match = _SWEEP_PATH.fullmatch(sweep.parameter)
        if match and int(match.group(1)) >= len(qubits):
            raise ScenarioError(f"qubit index {match.group(1)} out of range",
                                field="sweep.parameter")
    scenario.build_model()  # surface model-level validation errors now
    return scenario


def load_scenario(path: str) -> Scenario:
    """Read and validate a scenario YAML file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid YAML in {path}: {exc}") from exc
    return parse_scenario(data, source=path)


def default_two_qubit_scenario() -> Scenario:
    """Resonant two-qubit default used when no config file is given."""
    return Scenario(kind="two_qubit",
                    qubits=(QubitSpec(E=1.0, beta=1.0, p=0.1),
                            QubitSpec(E=1.0, beta=0.5, p=0.1)),
                    g=0.05)


def default_refrigerator_scenario() -> Scenario:
    """Resonant refrigerator default: E=(1,2,1), T=(1,2,10), p=0.1, g=0.05."""
    return Scenario(kind="refrigerator",
                    qubits=(QubitSpec.from_temperature(1.0, 1.0, 0.1),
                            QubitSpec.from_temperature(2.0, 2.0, 0.1),
                            QubitSpec.from_temperature(1.0, 10.0, 0.1)),
                    g=0.05)
