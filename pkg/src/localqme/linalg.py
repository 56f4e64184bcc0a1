"""Dense complex operator algebra for small open quantum systems.

Everything here works on plain complex numpy arrays: an operator on a
D-dimensional Hilbert space is a ``(D, D)`` array, a superoperator is a
``(D*D, D*D)`` array acting on vectorized operators.  Two conventions are
fixed once, documented here, and pinned by the test suite:

* **Vectorization is column-stacking**: ``vectorize(m)[i + D*j] == m[i, j]``.
  Under this convention ``vec(a @ rho @ b) == kron(b.T, a) @ vec(rho)``, so
  left multiplication lifts to ``kron(eye, a)`` and right multiplication to
  ``kron(b.T, eye)``.
* **Composite ordering** follows the order of the factors handed to
  :func:`kron`; subsystem 0 is the leftmost (slowest-varying) index.

Solves are direct dense methods.  Steady states are extracted by replacing
one scalar equation of the (rank-deficient) generator with the trace
constraint and solving the resulting square system; the SVD is kept only as
a degeneracy diagnostic.  This is sized for a few qubits (the models in this
package use D = 4 and D = 8); anything much past 2**10 total dimension is
out of scope.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Iterable

import numpy as np

from .errors import (
    DegenerateSteadyState,
    NonTracelessRHS,
    NoSteadyState,
    SingularOnSubspace,
)

Array = np.ndarray

__all__ = [
    "Superoperator",
    "commutator",
    "dagger",
    "devectorize",
    "frobenius",
    "hamiltonian_superoperator",
    "insert_subsystem",
    "is_hermitian",
    "is_positive_semidefinite",
    "is_unit_trace",
    "kron",
    "liouvillian",
    "maximally_mixed",
    "nullspace_density_matrix",
    "partial_trace",
    "solve_on_traceless_subspace",
    "trace_functional",
    "vectorize",
]


def _as_square(m, name: str = "matrix") -> Array:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def dagger(m: Array) -> Array:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def frobenius(m: Array) -> float:
    """Frobenius norm as a plain float."""
    return float(np.linalg.norm(m))


def is_hermitian(m: Array, tol: float = 1e-12) -> bool:
    m = _as_square(m)
    return frobenius(m - dagger(m)) <= tol


def is_unit_trace(m: Array, tol: float = 1e-12) -> bool:
    m = _as_square(m)
    return abs(np.trace(m) - 1.0) <= tol


def is_positive_semidefinite(m: Array, tol: float = 1e-10) -> bool:
    """Eigenvalue check on the Hermitian part; ``tol`` is slack below zero."""
    m = _as_square(m)
    herm = 0.5 * (m + dagger(m))
    return float(np.linalg.eigvalsh(herm).min()) >= -tol


def kron(a: Array, b: Array) -> Array:
    """Kronecker product; subsystem order is the argument order."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def commutator(a: Array, b: Array) -> Array:
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def maximally_mixed(dim: int) -> Array:
    if dim < 1:
        raise ValueError("dimension must be positive")
    return np.eye(dim, dtype=complex) / dim


def _normalize_indices(indices: Iterable[int], n: int) -> tuple[int, ...]:
    out = tuple(sorted(set(int(i) for i in indices)))
    for i in out:
        if not 0 <= i < n:
            raise ValueError(f"subsystem index {i} out of range for {n} subsystems")
    return out


def partial_trace(rho: Array, dims, trace_out=None, keep=None) -> Array:
    """Trace out a subset of subsystems.

    ``dims`` lists the subsystem dimensions in Kronecker order.  Exactly one
    of ``trace_out`` / ``keep`` must be given (each an iterable of subsystem
    indices); the surviving subsystems keep their relative order.
    """
    rho = _as_square(rho, "rho")
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if any(d < 1 for d in dims):
        raise ValueError("subsystem dimensions must be positive")
    total = int(np.prod(dims)) if dims else 1
    if total != rho.shape[0]:
        raise ValueError(f"dims {dims} inconsistent with matrix of size {rho.shape[0]}")
    if (trace_out is None) == (keep is None):
        raise ValueError("specify exactly one of trace_out or keep")
    if keep is not None:
        kept = _normalize_indices(keep, n)
        traced = tuple(i for i in range(n) if i not in kept)
    else:
        traced = _normalize_indices(trace_out, n)
        kept = tuple(i for i in range(n) if i not in traced)
    if not traced:
        return rho.copy()
    tensor = rho.reshape(dims + dims)
    for step, ax in enumerate(sorted(traced, reverse=True)):
        remaining = n - step
        tensor = np.trace(tensor, axis1=ax, axis2=ax + remaining)
    d_keep = int(np.prod([dims[i] for i in kept])) if kept else 1
    return tensor.reshape(d_keep, d_keep)


def insert_subsystem(factor: Array, reduced: Array, position: int, dims) -> Array:
    """Tensor ``factor`` into slot ``position``, ``reduced`` onto the rest.

    ``dims`` is the dimension tuple of the *full* system; ``reduced`` must
    act on the joint space of all other subsystems in their original order.
    Inverse companion of :func:`partial_trace` for product inputs.
    """
    factor = _as_square(factor, "factor")
    reduced = _as_square(reduced, "reduced")
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if not 0 <= position < n:
        raise ValueError(f"position {position} out of range for {n} subsystems")
    if factor.shape[0] != dims[position]:
        raise ValueError("factor dimension does not match its slot")
    rest = tuple(d for j, d in enumerate(dims) if j != position)
    d_rest = int(np.prod(rest)) if rest else 1
    if reduced.shape[0] != d_rest:
        raise ValueError("reduced dimension does not match the remaining slots")
    if not rest:
        return factor * reduced[0, 0]
    tensor = np.multiply.outer(factor, reduced.reshape(rest + rest))
    # axes: (row_pos, col_pos, row_rest..., col_rest...)
    row_axes, col_axes = [], []
    r = 0
    for j in range(n):
        if j == position:
            row_axes.append(0)
            col_axes.append(1)
        else:
            row_axes.append(2 + r)
            col_axes.append(2 + (n - 1) + r)
            r += 1
    full = int(np.prod(dims))
    return tensor.transpose(row_axes + col_axes).reshape(full, full)


def vectorize(m: Array) -> Array:
    """Column-stack a matrix into a vector."""
    return _as_square(m).reshape(-1, order="F")


def devectorize(v: Array, dim: int | None = None) -> Array:
    """Inverse of :func:`vectorize`; infers the dimension when omitted."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape((dim, dim), order="F")


def trace_functional(dim: int) -> Array:
    """Row vector t with ``t @ vectorize(m) == trace(m)``."""
    t = np.zeros(dim * dim, dtype=complex)
    t[:: dim + 1] = 1.0
    return t


@dataclasses.dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on operators, stored as a matrix on column-stacked vectors."""

    matrix: Array
    dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d2 = self.dim * self.dim
        if m.shape != (d2, d2):
            raise ValueError(f"superoperator matrix must be ({d2}, {d2}), got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_map(cls, fn: Callable[[Array], Array], dim: int) -> "Superoperator":
        """Materialize a linear map by applying it to the matrix-unit basis."""
        d2 = dim * dim
        cols = np.empty((d2, d2), dtype=complex)
        for j in range(d2):
            basis = np.zeros(d2, dtype=complex)
            basis[j] = 1.0
            cols[:, j] = vectorize(fn(devectorize(basis, dim)))
        return cls(matrix=cols, dim=dim)

    def apply(self, rho: Array) -> Array:
        rho = _as_square(rho, "rho")
        if rho.shape[0] != self.dim:
            raise ValueError(f"operand dimension {rho.shape[0]} != {self.dim}")
        return devectorize(self.matrix @ vectorize(rho), self.dim)

    __call__ = apply

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if not isinstance(other, Superoperator):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch in superoperator sum")
        return Superoperator(self.matrix + other.matrix, self.dim)

    def __mul__(self, scalar) -> "Superoperator":
        return Superoperator(self.matrix * complex(scalar), self.dim)

    __rmul__ = __mul__


def hamiltonian_superoperator(h: Array) -> Superoperator:
    """Superoperator of the coherent part, rho -> -i [h, rho]."""
    h = _as_square(h, "h")
    d = h.shape[0]
    eye = np.eye(d)
    return Superoperator(-1j * (np.kron(eye, h) - np.kron(h.T, eye)), d)


def liouvillian(model) -> Superoperator:
    """Full generator of a model: coherent part plus every bath dissipator."""
    gen = hamiltonian_superoperator(model.hamiltonian())
    for dis in model.dissipators():
        gen = gen + dis
    return gen


def _replace_trace_row(matrix: Array, dim: int) -> Array:
    # Row 0 is the (0,0) matrix-element equation.  For a trace-preserving
    # generator the diagonal-element rows are linearly dependent (they sum
    # to zero), so swapping one of them for the trace constraint loses
    # nothing and makes the system square and nonsingular.
    out = matrix.copy()
    out[0, :] = trace_functional(dim)
    return out


def solve_on_traceless_subspace(gen: Superoperator, rhs: Array, *,
                                trace_tol: float = 1e-10,
                                singular_tol: float = 1e-9,
                                return_info: bool = False):
    """Solve ``gen(sigma) = rhs`` for the unique traceless ``sigma``.

    Requires a generator whose restriction to traceless matrices is
    invertible (one-dimensional kernel carrying the trace).  Raises
    :class:`NonTracelessRHS` when ``trace(rhs)`` is not zero within
    ``trace_tol`` and :class:`SingularOnSubspace` when the restricted
    system is rank deficient beyond ``singular_tol``.
    """
    d = gen.dim
    rhs = _as_square(rhs, "rhs")
    if rhs.shape[0] != d:
        raise ValueError(f"rhs dimension {rhs.shape[0]} != {d}")
    tr = complex(np.trace(rhs))
    if abs(tr) > trace_tol:
        raise NonTracelessRHS(f"rhs has trace {tr:.3e}, expected 0 within {trace_tol:.1e}")
    m = _replace_trace_row(gen.matrix, d)
    svals = np.linalg.svd(m, compute_uv=False)
    if svals[0] == 0.0 or svals[-1] <= singular_tol * svals[0]:
        raise SingularOnSubspace(
            f"restricted generator is rank deficient "
            f"(singular value ratio {svals[-1] / max(svals[0], 1e-300):.3e})")
    # vectorize can return a view of the caller's buffer; never mutate it
    b = vectorize(rhs).copy()
    b[0] = 0.0
    sigma = devectorize(np.linalg.solve(m, b), d)
    discard = 0.0
    if frobenius(rhs - dagger(rhs)) <= 1e-10 * max(1.0, frobenius(rhs)):
        # Hermitian data, so the solution is Hermitian up to roundoff.
        discard = frobenius(0.5 * (sigma - dagger(sigma)))
        sigma = 0.5 * (sigma + dagger(sigma))
    if not return_info:
        return sigma
    info = {
        "residual": frobenius(gen.apply(sigma) - rhs),
        "hermiticity_discard": discard,
        "singular_ratio": float(svals[-1] / svals[0]),
    }
    return sigma, info


def nullspace_density_matrix(gen: Superoperator, *,
                             residual_tol: float = 1e-10,
                             degeneracy_tol: float = 1e-9,
                             return_info: bool = False):
    """Unique unit-trace fixed point of a generator.

    Solves ``gen(rho) = 0, trace(rho) = 1`` by trace-row replacement, then
    symmetrizes ``rho <- (rho + rho^dag)/2`` (the discarded anti-Hermitian
    norm is reported in ``info``).  Raises :class:`DegenerateSteadyState`
    when the kernel is not one-dimensional within ``degeneracy_tol`` and
    :class:`NoSteadyState` when the residual of the result exceeds
    ``residual_tol``.
    """
    d = gen.dim
    svals = np.linalg.svd(gen.matrix, compute_uv=False)
    degeneracy_margin = float("inf")
    if svals.size >= 2 and svals[0] > 0.0:
        degeneracy_margin = float(svals[-2] / svals[0])
    if degeneracy_margin <= degeneracy_tol:
        raise DegenerateSteadyState(
            f"second-smallest singular value ratio {degeneracy_margin:.3e} "
            f"signals a multi-dimensional kernel")
    m = _replace_trace_row(gen.matrix, d)
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        rho = devectorize(np.linalg.solve(m, b), d)
    except np.linalg.LinAlgError:
        # One-dimensional kernel, but traceless: no unit-trace fixed point.
        raise NoSteadyState(
            "trace-normalized fixed-point system is singular: "
            "the kernel carries no trace") from None
    discard = frobenius(0.5 * (rho - dagger(rho)))
    rho = 0.5 * (rho + dagger(rho))
    tr = np.trace(rho).real
    if tr == 0.0 or not np.isfinite(tr):
        raise NoSteadyState("fixed-point candidate has no usable trace")
    rho = rho / tr
    residual = frobenius(gen.apply(rho))
    if not np.isfinite(residual) or residual > residual_tol:
        raise NoSteadyState(
            f"fixed-point residual {residual:.3e} exceeds {residual_tol:.1e}")
    if not return_info:
        return rho
    info = {
        "residual": residual,
        "degeneracy_margin": degeneracy_margin,
        "hermiticity_discard": discard,
        "min_eigenvalue": float(np.linalg.eigvalsh(rho).min()),
    }
    return rho, info
