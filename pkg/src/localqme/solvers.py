"""Steady-state solvers: exact nullspace, coupling series, closed forms, evolution.

Four independent routes to the same fixed point, kept separate on purpose so
they can cross-check each other:

* :func:`exact_steady_state` solves the full generator's nullspace directly.
* :func:`perturbative_series` expands in the coupling g around the product of
  local Gibbs states and resums partial orders.
* :func:`closed_form_two_qubit` / :func:`closed_form_refrigerator` evaluate
  the resummed analytic solution for the two built-in models.  The resummed
  form is a rational function of g and stays exact even where the series
  itself diverges (the pole sits at negative g^2, outside the physical axis).
* :func:`evolve_to_steady` integrates the master equation until the
  time derivative is negligible.

The closed forms write the steady state over the product Gibbs state as

    rho = tau_1 (x) ... (x) tau_n
          + sum_i a_i Z_i + sum_{i<j} b_ij Z_i Z_j + c Z_1 Z_2 Z_3
          + m X + d Y

with Z_i the embedded sigma-z strings, X the exchange interaction, and
Y = i (S^dag - S) its conjugate quadrature.  d carries the steady coherence
(and with it every heat current), m is the in-phase response, and the
diagonal shifts a, b, c follow algebraically from d.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np

from .errors import NotConverged, OutsideConvergenceWarning
from .linalg import (
    Array,
    commutator,
    devectorize,
    frobenius,
    liouvillian,
    nullspace_density_matrix,
    solve_on_traceless_subspace,
    vectorize,
)
from .model import SystemModel, pauli

__all__ = [
    "PerturbativeSeries",
    "RefrigeratorCoefficients",
    "SteadyStateResult",
    "TruncationScan",
    "TwoQubitCoefficients",
    "closed_form_refrigerator",
    "closed_form_two_qubit",
    "evolve_to_steady",
    "exact_steady_state",
    "fit_refrigerator_coefficients",
    "fit_two_qubit_coefficients",
    "perturbative_series",
    "refrigerator_coefficients",
    "truncation_error_scan",
    "two_qubit_coefficients",
]


@dataclasses.dataclass(frozen=True, eq=False)
class SteadyStateResult:
    """A steady state, how it was obtained, and solver diagnostics."""

    rho: Array
    method: str
    residual: float
    diagnostics: dict = dataclasses.field(default_factory=dict)


@dataclasses.dataclass(frozen=True)
class TwoQubitCoefficients:
    """Operator-basis components of the two-qubit steady state.

    ``x`` is the geometric ratio of the coupling series (rho^(k+2) = x rho^(k)
    for k >= 1); it is negative, so 1 - g^2 x never vanishes.
    """

    d: float
    m: float
    a1: float
    a2: float
    b: float
    x: float
    q: float
    delta_s: float
    delta_e: float


@dataclasses.dataclass(frozen=True)
class RefrigeratorCoefficients:
    """Operator-basis components of the three-qubit refrigerator steady state."""

    d: float
    m: float
    a1: float
    a2: float
    a3: float
    b12: float
    b23: float
    b31: float
    c: float
    x: float
    q: float
    delta_s: float
    delta_e: float


@dataclasses.dataclass(frozen=True, eq=False)
class PerturbativeSeries:
    """Terms rho^(k) of the coupling expansion; rho(g) = sum_k g^k rho^(k)."""

    terms: tuple
    g: float
    convergence_ratio: float | None

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def partial_sum(self, order: int | None = None, g: float | None = None) -> Array:
        if order is None:
            order = self.order
        if g is None:
            g = self.g
        if not 0 <= order <= self.order:
            raise ValueError(f"order {order} outside computed range 0..{self.order}")
        out = np.zeros_like(self.terms[0])
        for k in range(order + 1):
            out = out + (g ** k) * self.terms[k]
        return out


@dataclasses.dataclass(frozen=True)
class TruncationScan:
    """Truncation error of one partial sum against the exact state, per g."""

    order: int
    g_values: tuple
    errors: tuple
    slope: float | None


def exact_steady_state(model: SystemModel, *,
                       residual_tol: float = 1e-10,
                       degeneracy_tol: float = 1e-9) -> SteadyStateResult:
    """Unique steady state from the generator's nullspace.  Ground truth."""
    gen = liouvillian(model)
    rho, info = nullspace_density_matrix(gen, residual_tol=residual_tol,
                                         degeneracy_tol=degeneracy_tol,
                                         return_info=True)
    return SteadyStateResult(rho=rho, method="exact",
                             residual=info["residual"], diagnostics=info)


def perturbative_series(model: SystemModel, order: int) -> PerturbativeSeries:
    """Expand the steady state in powers of the coupling.

    Order zero is the product of local Gibbs states; each next term solves
    the uncoupled generator against the commutator of the previous one:

        L0(rho^(k+1)) = i [X, rho^(k)]

    Every term beyond the zeroth is traceless, odd terms live in the
    coherence plane spanned by X and Y, even terms are diagonal.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    l0 = liouvillian(model.with_coupling(0.0))
    x_op = model.interaction
    terms = [model.thermal_product_state()]
    for _ in range(order):
        rhs = 1j * commutator(x_op, terms[-1])
        terms.append(solve_on_traceless_subspace(l0, rhs))
    return PerturbativeSeries(terms=tuple(terms), g=model.g,
                              convergence_ratio=_convergence_ratio(model, terms))


def _convergence_ratio(model: SystemModel, terms) -> float | None:
    if model.kind == "two_qubit":
        return abs(model.g ** 2 * two_qubit_coefficients(model).x)
    if model.kind == "refrigerator":
        return abs(model.g ** 2 * refrigerator_coefficients(model).x)
    if len(terms) >= 4:
        n1 = frobenius(terms[1])
        if n1 > 0.0:
            return model.g ** 2 * frobenius(terms[3]) / n1
    return None


def two_qubit_coefficients(model: SystemModel) -> TwoQubitCoefficients:
    """Closed-form steady-state components for the excitation-swap pair."""
    if model.kind != "two_qubit":
        raise ValueError(f"expected a two_qubit model, got kind={model.kind!r}")
    (q1, q2), g = model.qubits, model.g
    p1, p2, s1, s2 = q1.p, q2.p, q1.s, q2.s
    q = p1 + p2
    delta_e = q1.E - q2.E
    delta_s = 0.5 * (s1 - s2)
    lorentz = q * q + delta_e * delta_e
    d1 = -q * delta_s / lorentz
    x = -2.0 * q * q / (lorentz * p1 * p2)
    d = g * d1 / (1.0 - g * g * x)
    m = -(delta_e / q) * d
    a1 = (g / p1) * d
    a2 = -(g / p2) * d
    b = (p2 * s2 * a1 + p1 * s1 * a2) / q
    return TwoQubitCoefficients(d=d, m=m, a1=a1, a2=a2, b=b, x=x, q=q,
                                delta_s=delta_s, delta_e=delta_e)


def refrigerator_coefficients(model: SystemModel) -> RefrigeratorCoefficients:
    """Closed-form steady-state components for the three-body exchange fridge."""
    if model.kind != "refrigerator":
        raise ValueError(f"expected a refrigerator model, got kind={model.kind!r}")
    g = model.g
    p = [qb.p for qb in model.qubits]
    s = [qb.s for qb in model.qubits]
    e = [qb.E for qb in model.qubits]
    q = p[0] + p[1] + p[2]
    delta_e = e[0] - e[1] + e[2]
    # Population imbalance driving the exchange: excited(1)*ground(2)*excited(3)
    # minus the reverse, which condenses to the polarizations below.
    delta_s = 0.25 * (s[0] - s[1] + s[2] - s[0] * s[1] * s[2])
    lorentz = q * q + delta_e * delta_e
    d1 = -q * delta_s / lorentz
    x = _refrigerator_geometric_ratio(p, s, lorentz)
    d = g * d1 / (1.0 - g * g * x)
    m = -(delta_e / q) * d
    a1 = (g / (2.0 * p[0])) * d
    a2 = -(g / (2.0 * p[1])) * d
    a3 = (g / (2.0 * p[2])) * d
    # A two-site z string decays at p_i + p_j; the remaining bath maps it
    # onto the three-site string instead of damping it.
    b12 = (p[0] * s[0] * a2 + p[1] * s[1] * a1) / (p[0] + p[1])
    b23 = (p[1] * s[1] * a3 + p[2] * s[2] * a2) / (p[1] + p[2])
    b31 = (p[2] * s[2] * a1 + p[0] * s[0] * a3) / (p[2] + p[0])
    c = (p[0] * s[0] * b23 + p[1] * s[1] * b31 + p[2] * s[2] * b12
         - 0.5 * g * d) / q
    return RefrigeratorCoefficients(d=d, m=m, a1=a1, a2=a2, a3=a3,
                                    b12=b12, b23=b23, b31=b31, c=c, x=x, q=q,
                                    delta_s=delta_s, delta_e=delta_e)


def _refrigerator_geometric_ratio(p, s, lorentz: float) -> float:
    q = p[0] + p[1] + p[2]
    singles = [p[i] / (q - p[i]) for i in range(3)]
    pairs = {}
    for i, j in ((0, 1), (1, 2), (2, 0)):
        pairs[(i, j)] = (p[i] * singles[j] + p[j] * singles[i]) / (q - p[i] - p[j])
    # Pair weights: probability that the two baths agree on whether their
    # qubits sit on the transport-favoring side.  Qubit 2 counts flipped
    # because the exchange de-excites it while exciting 1 and 3.
    omega = {
        (0, 1): 0.5 * (1.0 - s[0] * s[1]),
        (1, 2): 0.5 * (1.0 - s[1] * s[2]),
        (2, 0): 0.5 * (1.0 + s[2] * s[0]),
    }
    total = 4.0 + 2.0 * sum(singles)
    for key, qp in pairs.items():
        total += 2.0 * qp * omega[key]
    return -total / lorentz


def _string(model: SystemModel, sites) -> Array:
    op = np.eye(model.dim, dtype=complex)
    for i in sites:
        op = op @ pauli("z", i, model.n_qubits)
    return op


def _assemble(model: SystemModel, diag_terms, m: float, d: float) -> Array:
    rho = model.thermal_product_state()
    for coeff, sites in diag_terms:
        rho = rho + coeff * _string(model, sites)
    rho = rho + m * model.interaction + d * model.coherence_operator()
    return rho


def _closed_form_result(model: SystemModel, rho: Array, ratio: float):
    if ratio >= 1.0:
        warnings.warn(
            f"coupling series diverges here (g^2 |x| = {ratio:.3g} >= 1); "
            f"the resummed closed form itself remains exact",
            OutsideConvergenceWarning, stacklevel=3)
    residual = frobenius(liouvillian(model).apply(rho))
    return SteadyStateResult(rho=rho, method="closed_form", residual=residual,
                             diagnostics={"convergence_ratio": ratio})


def closed_form_two_qubit(model: SystemModel):
    """Analytic steady state of the swap-coupled pair; returns (result, coefficients)."""
    co = two_qubit_coefficients(model)
    rho = _assemble(model, [(co.a1, (0,)), (co.a2, (1,)), (co.b, (0, 1))],
                    co.m, co.d)
    return _closed_form_result(model, rho, abs(model.g ** 2 * co.x)), co


def closed_form_refrigerator(model: SystemModel):
    """Analytic steady state of the exchange fridge; returns (result, coefficients)."""
    co = refrigerator_coefficients(model)
    diag = [(co.a1, (0,)), (co.a2, (1,)), (co.a3, (2,)),
            (co.b12, (0, 1)), (co.b23, (1, 2)), (co.b31, (2, 0)),
            (co.c, (0, 1, 2))]
    rho = _assemble(model, diag, co.m, co.d)
    return _closed_form_result(model, rho, abs(model.g ** 2 * co.x)), co


def _component(rho: Array, op: Array, baseline: float, weight: float) -> float:
    return float((np.trace(op @ rho).real - baseline) / weight)


def fit_two_qubit_coefficients(model: SystemModel, rho: Array) -> TwoQubitCoefficients:
    """Read the operator-basis components off an arbitrary two-qubit state."""
    if model.kind != "two_qubit":
        raise ValueError(f"expected a two_qubit model, got kind={model.kind!r}")
    s1, s2 = (qb.s for qb in model.qubits)
    analytic = two_qubit_coefficients(model)
    z1, z2 = _string(model, (0,)), _string(model, (1,))
    return TwoQubitCoefficients(
        d=_component(rho, model.coherence_operator(), 0.0, 2.0),
        m=_component(rho, model.interaction, 0.0, 2.0),
        a1=_component(rho, z1, s1, 4.0),
        a2=_component(rho, z2, s2, 4.0),
        b=_component(rho, z1 @ z2, s1 * s2, 4.0),
        x=analytic.x, q=analytic.q,
        delta_s=analytic.delta_s, delta_e=analytic.delta_e)


def fit_refrigerator_coefficients(model: SystemModel,
                                  rho: Array) -> RefrigeratorCoefficients:
    """Read the operator-basis components off an arbitrary three-qubit state."""
    if model.kind != "refrigerator":
        raise ValueError(f"expected a refrigerator model, got kind={model.kind!r}")
    s = [qb.s for qb in model.qubits]
    analytic = refrigerator_coefficients(model)
    z = [_string(model, (i,)) for i in range(3)]
    return RefrigeratorCoefficients(
        d=_component(rho, model.coherence_operator(), 0.0, 2.0),
        m=_component(rho, model.interaction, 0.0, 2.0),
        a1=_component(rho, z[0], s[0], 8.0),
        a2=_component(rho, z[1], s[1], 8.0),
        a3=_component(rho, z[2], s[2], 8.0),
        b12=_component(rho, z[0] @ z[1], s[0] * s[1], 8.0),
        b23=_component(rho, z[1] @ z[2], s[1] * s[2], 8.0),
        b31=_component(rho, z[2] @ z[0], s[2] * s[0], 8.0),
        c=_component(rho, z[0] @ z[1] @ z[2], s[0] * s[1] * s[2], 8.0),
        x=analytic.x, q=analytic.q,
        delta_s=analytic.delta_s, delta_e=analytic.delta_e)


def evolve_to_steady(model: SystemModel, rho0: Array | None = None, *,
                     dt: float | None = None, t_max: float = 1e4,
                     tol: float = 1e-9) -> SteadyStateResult:
    """Integrate the master equation until the derivative norm drops below tol.

    Classic fixed-step fourth-order Runge-Kutta on the vectorized state.
    The default step resolves both the fastest reset rate and the fastest
    coherent oscillation; a caller-supplied dt is checked against the
    generator's spectral radius and rejected when the scheme would be
    unstable.  Raises :class:`NotConverged` when t_max is reached first.
    """
    if rho0 is None:
        rho0 = model.thermal_product_state()
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise ValueError(f"initial state must be ({model.dim}, {model.dim})")
    if frobenius(rho0 - rho0.conj().T) > 1e-10:
        raise ValueError("initial state must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-10:
        raise ValueError("initial state must have unit trace")
    if float(np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T)).min()) < -1e-10:
        raise ValueError("initial state must be positive semidefinite")

    gen = liouvillian(model)
    rates = [sum(qb.p for qb in model.qubits),
             max(qb.E for qb in model.qubits), model.g]
    if dt is None:
        dt = 0.1 / max(rates)
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    radius = float(np.abs(np.linalg.eigvals(gen.matrix)).max())
    # The real-axis stability boundary of the scheme sits near 2.785; stay
    # inside it with margin.
    if dt * radius > 2.5:
        raise ValueError(
            f"dt = {dt:.3g} is unstable for spectral radius {radius:.3g}; "
            f"use dt < {2.5 / radius:.3g}")

    m = gen.matrix
    v = vectorize(rho0)
    n_steps = max(1, int(np.ceil(t_max / dt)))
    drift = 0.0
    converged = False
    steps_taken = 0
    residual = frobenius(gen.apply(rho0))
    for _ in range(n_steps):
        k1 = m @ v
        residual = float(np.linalg.norm(k1))
        if residual <= tol:
            converged = True
            break
        k2 = m @ (v + (0.5 * dt) * k1)
        k3 = m @ (v + (0.5 * dt) * k2)
        k4 = m @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        steps_taken += 1
        tr = complex(np.sum(v[:: model.dim + 1]))
        drift = max(drift, abs(tr - 1.0))
        v = v / tr
    t_final = steps_taken * dt
    if not converged:
        raise NotConverged(
            f"derivative norm {residual:.3e} above {tol:.1e} after t = {t_final:.3g}",
            residual=residual, t_final=t_final)
    rho = devectorize(v, model.dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return SteadyStateResult(
        rho=rho, method="evolved", residual=frobenius(gen.apply(rho)),
        diagnostics={"steps": steps_taken, "t_final": t_final,
                     "trace_drift": drift, "dt": dt})


def truncation_error_scan(model: SystemModel, order: int,
                          g_values) -> TruncationScan:
    """Error of the order-``order`` partial sum versus the exact state, per g.

    The log-log slope estimates the leading truncated power; for a series
    whose odd/even sectors advance in steps of two it lands near order + 1
    or order + 2 depending on parity.
    """
    series = perturbative_series(model, order)
    gs = [float(g) for g in g_values]
    errors = []
    for g in gs:
        exact = exact_steady_state(model.with_coupling(g))
        errors.append(frobenius(exact.rho - series.partial_sum(order=order, g=g)))
    ga = np.asarray(gs)
    ea = np.asarray(errors)
    mask = (ga > 0.0) & (ea > 0.0)
    slope = None
    if int(mask.sum()) >= 2:
        slope = float(np.polyfit(np.log(ga[mask]), np.log(ea[mask]), 1)[0])
    return TruncationScan(order=order, g_values=tuple(gs),
                          errors=tuple(float(e) for e in errors), slope=slope)
