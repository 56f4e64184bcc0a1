"""Qubit specs, thermal states, reset dissipators, and the model builders."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localqme import (
    QubitSpec,
    SystemModel,
    TemperatureOrderingWarning,
    build_custom,
    build_refrigerator,
    build_two_qubit,
    commutator,
    dagger,
    frobenius,
    kron,
    pauli,
    partial_trace,
    reset_dissipator,
    thermal_state,
)

positive = st.floats(min_value=0.05, max_value=3.0,
                     allow_nan=False, allow_infinity=False)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# ------------------------------------------------------------------ QubitSpec

def test_qubit_spec_values_are_frozen():
    q = QubitSpec(E=1.0, beta=1.0, p=0.1)
    assert q.s == -0.46211715726000974
    tau = thermal_state(q)
    assert np.allclose(np.diag(tau).real,
                       [0.2689414213699951, 0.7310585786300049])
    assert tau[0, 1] == 0 and tau[1, 0] == 0
    assert q.excited_population == pytest.approx(0.2689414213699951)
    assert q.T == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs", [
    dict(E=0.0, beta=1.0, p=0.1),
    dict(E=-1.0, beta=1.0, p=0.1),
    dict(E=1.0, beta=0.0, p=0.1),
    dict(E=1.0, beta=-2.0, p=0.1),
    dict(E=1.0, beta=1.0, p=0.0),
    dict(E=math.inf, beta=1.0, p=0.1),
    dict(E=math.nan, beta=1.0, p=0.1),
])
def test_qubit_spec_rejects_non_positive_parameters(kwargs):
    with pytest.raises(ValueError):
        QubitSpec(**kwargs)


def test_from_temperature_inverts():
    q = QubitSpec.from_temperature(1.0, 2.0, 0.1)
    assert q.beta == pytest.approx(0.5)
    assert q.T == pytest.approx(2.0)
    with pytest.raises(ValueError):
        QubitSpec.from_temperature(1.0, 0.0, 0.1)


@given(positive, positive)
def test_polarization_range_and_detailed_balance(e, beta):
    q = QubitSpec(E=e, beta=beta, p=0.1)
    assert -1.0 < q.s < 0.0
    # excited / ground occupation obeys the Gibbs ratio
    tau = thermal_state(q)
    ratio = tau[0, 0].real / tau[1, 1].real
    assert ratio == pytest.approx(math.exp(-beta * e), rel=1e-12)


def test_polarization_limits():
    # very cold: polarized onto the ground level; very hot: unpolarized
    cold = QubitSpec(E=1.0, beta=1e4, p=0.1)
    assert cold.s == pytest.approx(-1.0, abs=1e-12)
    hot = QubitSpec(E=1.0, beta=1e-8, p=0.1)
    assert abs(hot.s) <= 1e-8
    assert hot.excited_population == pytest.approx(0.5, abs=1e-8)


# ---------------------------------------------------------------------- pauli

def test_pauli_embedding_acts_on_one_slot():
    z1 = pauli("z", 1, 3)
    expect = kron(kron(np.eye(2), np.diag([1.0, -1.0])), np.eye(2))
    assert np.array_equal(z1, expect)


def test_pauli_raising_lowering_are_nilpotent():
    for which in ("+", "-"):
        op = pauli(which, 0, 2)
        assert np.allclose(op @ op, 0.0)
    # sigma+ populates the excited level from the ground level
    plus = pauli("+", 0, 1)
    ground = np.array([0.0, 1.0])
    assert np.allclose(plus @ ground, [1.0, 0.0])


def test_pauli_argument_validation():
    with pytest.raises(ValueError):
        pauli("w", 0, 2)
    with pytest.raises(ValueError):
        pauli("x", 2, 2)


# ----------------------------------------------------------------- dissipator

def test_reset_dissipator_matches_replacement_map():
    rng = np.random.default_rng(21)
    q = QubitSpec(E=1.0, beta=0.7, p=0.3)
    for slot in (0, 1):
        dis = reset_dissipator(q, slot, 2)
        rho = random_density(rng, 4)
        reduced = partial_trace(rho, (2, 2), trace_out=(slot,))
        tau = thermal_state(q)
        replaced = kron(tau, reduced) if slot == 0 else kron(reduced, tau)
        expect = q.p * (replaced - rho)
        assert np.allclose(dis.apply(rho), expect, atol=1e-14)


def test_reset_dissipator_fixed_point_and_trace():
    q = QubitSpec(E=1.0, beta=1.0, p=0.2)
    dis = reset_dissipator(q, 0, 1)
    assert np.allclose(dis.apply(thermal_state(q)), 0.0, atol=1e-15)
    rng = np.random.default_rng(2)
    rho = random_density(rng, 2)
    assert abs(np.trace(dis.apply(rho))) <= 1e-14


def test_reset_dissipator_damps_coherence_at_rate_p():
    q = QubitSpec(E=1.0, beta=1.0, p=0.37)
    dis = reset_dissipator(q, 0, 1)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    assert np.allclose(dis.apply(y), -q.p * y, atol=1e-14)


@given(st.integers(min_value=0, max_value=1), positive, positive)
def test_reset_dissipator_preserves_hermiticity(slot, e, beta):
    q = QubitSpec(E=e, beta=beta, p=0.25)
    dis = reset_dissipator(q, slot, 2)
    rng = np.random.default_rng(17)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = 0.5 * (m + m.conj().T)
    out = dis.apply(m)
    assert frobenius(out - dagger(out)) <= 1e-13


# -------------------------------------------------------------------- builders

def test_system_model_validation():
    q = QubitSpec(E=1.0, beta=1.0, p=0.1)
    with pytest.raises(ValueError):
        SystemModel(qubits=(), interaction=np.eye(1), g=0.1)
    with pytest.raises(ValueError):
        SystemModel(qubits=(q,), interaction=np.eye(2), g=-0.1)
    with pytest.raises(ValueError):
        SystemModel(qubits=(q,), interaction=np.eye(4), g=0.1)
    with pytest.raises(ValueError):
        SystemModel(qubits=(q,), interaction=np.array([[0, 1], [0, 0]]), g=0.1)
    with pytest.raises(ValueError):
        SystemModel(qubits=(q,), interaction=np.eye(2), g=0.1, labels=("a", "b"))


def test_interaction_matrix_is_read_only():
    model = build_two_qubit(QubitSpec(E=1.0, beta=1.0, p=0.1),
                            QubitSpec(E=1.0, beta=0.5, p=0.1), 0.05)
    with pytest.raises(ValueError):
        model.interaction[0, 0] = 5.0


def test_two_qubit_interaction_swaps_one_excitation():
    model = build_two_qubit(QubitSpec(E=1.0, beta=1.0, p=0.1),
                            QubitSpec(E=0.8, beta=0.5, p=0.1), 0.05)
    x = model.interaction
    assert frobenius(x - dagger(x)) == 0.0
    assert np.trace(x) == 0
    # couples |01> and |10> only (excited = first basis state per qubit)
    assert x[1, 2] == 1 and x[2, 1] == 1
    assert np.count_nonzero(x) == 2
    assert model.detuning() == pytest.approx(0.2)
    assert model.labels == ("q1", "q2")


def test_refrigerator_interaction_and_detuning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        model = build_refrigerator(
            QubitSpec.from_temperature(1.0, 1.0, 0.1),
            QubitSpec.from_temperature(2.0, 2.0, 0.1),
            QubitSpec.from_temperature(1.0, 10.0, 0.1), 0.05)
    x = model.interaction
    # flips 1 and 3 up while 2 drops: couples |010> (index 2) and |101> (index 5)
    assert x[2, 5] == 1 and x[5, 2] == 1
    assert np.count_nonzero(x) == 2
    assert model.detuning() == pytest.approx(0.0)
    assert model.kind == "refrigerator"


def test_refrigerator_warns_on_unusual_bath_ordering():
    q = lambda t: QubitSpec.from_temperature(1.0, t, 0.1)
    with pytest.warns(TemperatureOrderingWarning):
        build_refrigerator(q(5.0), q(2.0), q(10.0), 0.05)


def test_hamiltonian_assembly():
    model = build_two_qubit(QubitSpec(E=1.5, beta=1.0, p=0.1),
                            QubitSpec(E=0.5, beta=0.5, p=0.1), 0.2)
    h0 = model.free_hamiltonian()
    expect = 0.75 * pauli("z", 0, 2) + 0.25 * pauli("z", 1, 2)
    assert np.allclose(h0, expect)
    assert np.allclose(model.hamiltonian(), h0 + 0.2 * model.interaction)
    replaced = model.with_coupling(0.0)
    assert replaced.g == 0.0
    assert np.allclose(replaced.hamiltonian(), h0)


def test_free_hamiltonian_rotates_coherence_plane():
    # i[H0, X] = -dE Y and i[H0, Y] = +dE X: the detuning mixes the two
    # coherence directions and nothing else.
    model = build_two_qubit(QubitSpec(E=1.3, beta=1.0, p=0.1),
                            QubitSpec(E=0.6, beta=0.5, p=0.1), 0.05)
    h0 = model.free_hamiltonian()
    x, y = model.interaction, model.coherence_operator()
    de = model.detuning()
    assert np.allclose(1j * commutator(h0, x), -de * y, atol=1e-13)
    assert np.allclose(1j * commutator(h0, y), de * x, atol=1e-13)


def test_resonant_free_hamiltonian_commutes_with_interaction():
    model = build_two_qubit(QubitSpec(E=1.0, beta=1.0, p=0.1),
                            QubitSpec(E=1.0, beta=0.5, p=0.1), 0.05)
    assert np.allclose(commutator(model.free_hamiltonian(), model.interaction),
                       0.0, atol=1e-15)


def test_refrigerator_interaction_squared_is_rank_two_projector():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TemperatureOrderingWarning)
        model = build_refrigerator(QubitSpec(E=1.0, beta=1.0, p=0.1),
                                   QubitSpec(E=2.0, beta=0.5, p=0.1),
                                   QubitSpec(E=1.0, beta=0.1, p=0.1), 0.05)
    x2 = model.interaction @ model.interaction
    assert np.allclose(x2, np.diag(np.diag(x2)))
    assert np.allclose(x2 @ x2, x2, atol=1e-14)
    assert np.trace(x2).real == pytest.approx(2.0)


def test_coherence_operator_matches_hopping_antisymmetrization():
    model = build_two_qubit(QubitSpec(E=1.0, beta=1.0, p=0.1),
                            QubitSpec(E=1.0, beta=0.5, p=0.1), 0.05)
    s = pauli("+", 0, 2) @ pauli("-", 1, 2)
    assert np.allclose(model.coherence_operator(), 1j * (dagger(s) - s))
    custom = build_custom((QubitSpec(E=1.0, beta=1.0, p=0.1),),
                          np.zeros((2, 2)), 0.0)
    with pytest.raises(ValueError):
        custom.coherence_operator()
    assert custom.detuning() is None


def test_commutator_of_interaction_with_thermal_product():
    # i[X, tau1 tau2 tau3] lies purely along the coherence direction Y with
    # weight set by the population imbalance across the exchange.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TemperatureOrderingWarning)
        model = build_refrigerator(QubitSpec(E=1.0, beta=1.2, p=0.1),
                                   QubitSpec(E=2.0, beta=0.5, p=0.1),
                                   QubitSpec(E=1.0, beta=0.3, p=0.1), 0.05)
    s = [qb.s for qb in model.qubits]
    delta_s = 0.25 * (s[0] - s[1] + s[2] - s[0] * s[1] * s[2])
    lhs = 1j * commutator(model.interaction, model.thermal_product_state())
    assert np.allclose(lhs, delta_s * model.coherence_operator(), atol=1e-14)


def test_thermal_product_and_reduced_state():
    model = build_two_qubit(QubitSpec(E=1.0, beta=1.0, p=0.1),
                            QubitSpec(E=1.0, beta=0.5, p=0.1), 0.05)
    rho = model.thermal_product_state()
    assert np.isclose(np.trace(rho), 1.0)
    for i in range(2):
        assert np.allclose(model.reduced_state(rho, i),
                           thermal_state(model.qubits[i]), atol=1e-14)
    assert model.temperatures() == pytest.approx((1.0, 2.0))
    assert model.dim == 4 and model.n_qubits == 2
