"""Qubit network models with local thermal reset baths.

Each qubit i has a level splitting ``E_i > 0``, an inverse bath temperature
``beta_i > 0``, and a reset rate ``p_i > 0``.  The free Hamiltonian is
``sum_i E_i sz_i / 2`` with ``|0>`` the *excited* level (``sz |0> = +|0>``),
and units are chosen so hbar = k_B = 1.  Each bath acts by replacing its
qubit with the local Gibbs state at rate p_i:

    D_i(rho) = p_i (tau_i (x) tr_i rho  -  rho)

where ``tau_i = (1 + s_i sz)/2`` and ``s_i = tanh(-beta_i E_i / 2)`` is the
thermal polarization (negative: ground state favored).  The exchange
coupling between qubits enters as ``g * X`` with ``X`` a Hermitian hopping
operator supplied by the model builders.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .errors import TemperatureOrderingWarning
from .linalg import (
    Array,
    Superoperator,
    dagger,
    frobenius,
    insert_subsystem,
    kron,
    partial_trace,
)

__all__ = [
    "PAULI_MINUS",
    "PAULI_PLUS",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "QubitSpec",
    "SystemModel",
    "build_custom",
    "build_refrigerator",
    "build_two_qubit",
    "pauli",
    "reset_dissipator",
    "thermal_state",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|, raises into the excited level
PAULI_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

_SINGLE = {
    "x": PAULI_X,
    "y": PAULI_Y,
    "z": PAULI_Z,
    "+": PAULI_PLUS,
    "-": PAULI_MINUS,
    "i": np.eye(2, dtype=complex),
}


def pauli(which: str, qubit: int, n_qubits: int) -> Array:
    """Single-site operator embedded in an ``n_qubits`` register.

    ``which`` is one of ``x y z + - i``; ``qubit`` is 0-based in Kronecker
    order (qubit 0 leftmost).
    """
    key = which.lower()
    if key not in _SINGLE:
        raise ValueError(f"unknown operator {which!r}, expected one of x y z + - i")
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    op = np.eye(1, dtype=complex)
    for j in range(n_qubits):
        op = kron(op, _SINGLE[key] if j == qubit else np.eye(2))
    return op


def _positive_float(value, name: str) -> float:
    x = float(value)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return x


@dataclasses.dataclass(frozen=True)
class QubitSpec:
    """One qubit: splitting E, inverse bath temperature beta, reset rate p."""

    E: float
    beta: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "E", _positive_float(self.E, "E"))
        object.__setattr__(self, "beta", _positive_float(self.beta, "beta"))
        object.__setattr__(self, "p", _positive_float(self.p, "p"))

    @classmethod
    def from_temperature(cls, E: float, T: float, p: float) -> "QubitSpec":
        return cls(E=E, beta=1.0 / _positive_float(T, "T"), p=p)

    @property
    def s(self) -> float:
        """Thermal polarization tanh(-beta E / 2), in (-1, 0)."""
        return math.tanh(-0.5 * self.beta * self.E)

    @property
    def T(self) -> float:
        return 1.0 / self.beta

    @property
    def excited_population(self) -> float:
        return 0.5 * (1.0 + self.s)


def thermal_state(q: QubitSpec) -> Array:
    """Single-qubit Gibbs state diag((1+s)/2, (1-s)/2)."""
    s = q.s
    return np.array([[0.5 * (1 + s), 0.0], [0.0, 0.5 * (1 - s)]], dtype=complex)


def reset_dissipator(q: QubitSpec, qubit_index: int, n_qubits: int) -> Superoperator:
    """Superoperator of  rho -> p (tau_i (x) tr_i rho - rho).

    Built directly from matrix units: in vectorized form the replacement map
    is ``sum_{a,m} tau_aa kron(E_am, E_am)`` with ``E_am = |a><m|`` embedded
    at the qubit's slot, which avoids a column-by-column construction.
    """
    dim = 2 ** n_qubits
    tau = thermal_state(q)
    total = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a in range(2):
        for m in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[a, m] = 1.0
            embedded = _embed(unit, qubit_index, n_qubits)
            total += tau[a, a] * np.kron(embedded, embedded)
    total -= np.eye(dim * dim)
    return Superoperator(q.p * total, dim)


def _embed(op2: Array, qubit: int, n_qubits: int) -> Array:
    out = np.eye(1, dtype=complex)
    for j in range(n_qubits):
        out = kron(out, op2 if j == qubit else np.eye(2))
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class SystemModel:
    """A qubit register, its local baths, and one exchange interaction g*X."""

    qubits: tuple[QubitSpec, ...]
    interaction: Array
    g: float
    kind: str = "custom"
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        qubits = tuple(self.qubits)
        if not qubits:
            raise ValueError("need at least one qubit")
        object.__setattr__(self, "qubits", qubits)
        g = float(self.g)
        if not math.isfinite(g) or g < 0.0:
            raise ValueError(f"coupling g must be finite and >= 0, got {self.g!r}")
        object.__setattr__(self, "g", g)
        dim = 2 ** len(qubits)
        x = np.asarray(self.interaction, dtype=complex)
        if x.shape != (dim, dim):
            raise ValueError(f"interaction must be ({dim}, {dim}), got {x.shape}")
        if frobenius(x - dagger(x)) > 1e-12:
            raise ValueError("interaction operator must be Hermitian")
        x = x.copy()
        x.flags.writeable = False
        object.__setattr__(self, "interaction", x)
        labels = tuple(self.labels) or tuple(f"q{i + 1}" for i in range(len(qubits)))
        if len(labels) != len(qubits):
            raise ValueError("labels length must match qubit count")
        object.__setattr__(self, "labels", labels)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def local_hamiltonian(self, i: int) -> Array:
        return 0.5 * self.qubits[i].E * pauli("z", i, self.n_qubits)

    def free_hamiltonian(self) -> Array:
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for i in range(self.n_qubits):
            h += self.local_hamiltonian(i)
        return h

    def hamiltonian(self) -> Array:
        return self.free_hamiltonian() + self.g * self.interaction

    def thermal_product_state(self) -> Array:
        rho = np.eye(1, dtype=complex)
        for q in self.qubits:
            rho = kron(rho, thermal_state(q))
        return rho

    def dissipator(self, i: int) -> Superoperator:
        return reset_dissipator(self.qubits[i], i, self.n_qubits)

    def dissipators(self) -> list[Superoperator]:
        return [self.dissipator(i) for i in range(self.n_qubits)]

    def with_coupling(self, g: float) -> "SystemModel":
        return dataclasses.replace(self, g=g)

    def temperatures(self) -> tuple[float, ...]:
        return tuple(q.T for q in self.qubits)

    def detuning(self) -> float | None:
        """Mismatch of bare transition energies bridged by the interaction."""
        e = [q.E for q in self.qubits]
        if self.kind == "two_qubit":
            return e[0] - e[1]
        if self.kind == "refrigerator":
            return e[0] + e[2] - e[1]
        return None

    def coherence_operator(self) -> Array:
        """The Hermitian partner i (S^dag - S) of the hopping term S in X."""
        n = self.n_qubits
        if self.kind == "two_qubit":
            s = pauli("+", 0, n) @ pauli("-", 1, n)
        elif self.kind == "refrigerator":
            s = pauli("+", 0, n) @ pauli("-", 1, n) @ pauli("+", 2, n)
        else:
            raise ValueError("coherence operator is defined only for the built-in kinds")
        return 1j * (dagger(s) - s)

    def reduced_state(self, rho: Array, i: int) -> Array:
        return partial_trace(rho, (2,) * self.n_qubits, keep=(i,))


def build_two_qubit(q1: QubitSpec, q2: QubitSpec, g: float) -> SystemModel:
    """Two qubits exchanging one excitation: X = s1+ s2- + s1- s2+."""
    s = pauli("+", 0, 2) @ pauli("-", 1, 2)
    return SystemModel(qubits=(q1, q2), interaction=s + dagger(s), g=g,
                       kind="two_qubit")


def build_refrigerator(q1: QubitSpec, q2: QubitSpec, q3: QubitSpec,
                       g: float) -> SystemModel:
    """Three-qubit absorption refrigerator: X = s1+ s2- s3+ + h.c.

    Qubit 1 is the cold load, qubit 2 dumps into the hottest bath via the
    three-body exchange; the conventional operating regime has
    T1 < T2 < T3, and a different ordering gets a warning, not an error.
    """
    if not (q1.T < q2.T < q3.T):
        warnings.warn("refrigerator baths are usually ordered T1 < T2 < T3",
                      TemperatureOrderingWarning, stacklevel=2)
    s = pauli("+", 0, 3) @ pauli("-", 1, 3) @ pauli("+", 2, 3)
    return SystemModel(qubits=(q1, q2, q3), interaction=s + dagger(s), g=g,
                       kind="refrigerator")


def build_custom(qubits, interaction: Array, g: float) -> SystemModel:
    """Arbitrary qubit register with a user-supplied Hermitian interaction."""
    return SystemModel(qubits=tuple(qubits), interaction=interaction, g=g,
                       kind="custom")
