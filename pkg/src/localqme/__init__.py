"""Steady states and thermodynamic audits for locally dissipated qubit networks.

Qubits with unequal splittings sit in their own thermal reset baths and talk
through a weak exchange coupling; this package computes the resulting steady
state four independent ways (exact nullspace, coupling series, analytic
closed form, time evolution) and audits the heat currents against the first
and second laws.
"""

from .errors import (
    DegenerateSteadyState,
    NonTracelessRHS,
    NoSteadyState,
    NotConverged,
    OutsideConvergenceWarning,
    ScenarioError,
    SingularOnSubspace,
    SolverError,
    TemperatureOrderingWarning,
)
from .linalg import (
    Superoperator,
    commutator,
    dagger,
    devectorize,
    frobenius,
    hamiltonian_superoperator,
    insert_subsystem,
    is_hermitian,
    is_positive_semidefinite,
    is_unit_trace,
    kron,
    liouvillian,
    maximally_mixed,
    nullspace_density_matrix,
    partial_trace,
    solve_on_traceless_subspace,
    trace_functional,
    vectorize,
)
from .model import (
    QubitSpec,
    SystemModel,
    build_custom,
    build_refrigerator,
    build_two_qubit,
    pauli,
    reset_dissipator,
    thermal_state,
)
from .scenario import (
    Scenario,
    SweepSpec,
    default_refrigerator_scenario,
    default_two_qubit_scenario,
    load_scenario,
    parse_scenario,
)
from .solvers import (
    PerturbativeSeries,
    RefrigeratorCoefficients,
    SteadyStateResult,
    TruncationScan,
    TwoQubitCoefficients,
    closed_form_refrigerator,
    closed_form_two_qubit,
    evolve_to_steady,
    exact_steady_state,
    fit_refrigerator_coefficients,
    fit_two_qubit_coefficients,
    perturbative_series,
    refrigerator_coefficients,
    truncation_error_scan,
    two_qubit_coefficients,
)
from .thermo import (
    ThermoReport,
    ViolationPoint,
    audit_state,
    consistency_audit,
    entropy_production,
    exchange_currents,
    exchange_currents_closed_form,
    find_second_law_violation,
    heat_currents,
    heat_currents_closed_form,
)
from .verify import CheckResult, run_verification

__version__ = "0.1.0"
