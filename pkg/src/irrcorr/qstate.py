"""Dense density matrices, partial traces, entropies and Hermitian matrix functions.

Particle 1 is always the most significant tensor factor, i.e. basis index
``b`` has the state of particle ``j`` in bit ``n - j``.  Entropies are in
bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, NotAStateError, SizeLimitError, ValidationError

if TYPE_CHECKING:
    from .stabilizer import PauliString

DEFAULT_DENSE_LIMIT = 12

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
EIGEN_CLAMP = 1e-10
NORM_TOL = 1e-10


def check_dense_limit(n_qubits: int, dense_limit: int = DEFAULT_DENSE_LIMIT) -> None:
    if n_qubits > dense_limit:
        raise SizeLimitError(
            f"{n_qubits} qubits exceeds the dense limit of {dense_limit}"
        )


def _qubit_count(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValidationError(f"dimension {dim} is not a power of two >= 2")
    return n


def clamped_eigvalsh(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix with round-off negatives set to zero.

    Raises NotAStateError for eigenvalues below ``-EIGEN_CLAMP``.
    """
    w = np.linalg.eigvalsh(matrix)
    if w[0] < -EIGEN_CLAMP:
        raise NotAStateError(f"negative eigenvalue {w[0]:.3e}")
    return np.where(w < 0.0, 0.0, w)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated n-qubit density matrix (Hermitian, unit trace, PSD)."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dim = 1 << self.n_qubits
        if self.n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        if m.shape != (dim, dim):
            raise ValidationError(
                f"matrix shape {m.shape} does not match {self.n_qubits} qubits"
            )
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise NotAStateError(f"matrix is not Hermitian (deviation {herm:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotAStateError(f"trace {tr.real:.12g} is not 1")
        # symmetrize away the sub-tolerance anti-Hermitian part
        m = 0.5 * (m + m.conj().T)
        clamped_eigvalsh(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_array(cls, matrix) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        return cls(_qubit_count(m.shape[0]), m)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def eigvals(self) -> np.ndarray:
        """Ascending eigenvalues, clamped at zero."""
        return clamped_eigvalsh(self.matrix)

    def min_eigval(self) -> float:
        return float(self.eigvals()[0])

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits < 1 or a.shape[0] != (1 << self.n_qubits):
            raise ValidationError(
                f"vector length {a.shape[0]} does not match {self.n_qubits} qubits"
            )
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_TOL:
            raise NotAStateError(f"state vector norm {norm:.12g} is not 1")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def density_matrix(self) -> DensityMatrix:
        a = self.amplitudes
        return DensityMatrix(self.n_qubits, np.outer(a, a.conj()))


@dataclass(frozen=True)
class SubsetIndex:
    """Sorted set of 1-based particle labels drawn from ``{1..n}``."""

    members: tuple[int, ...]
    n_qubits: int

    def __post_init__(self):
        members = tuple(int(j) for j in self.members)
        if not members:
            raise ValidationError("subset must be nonempty")
        if len(set(members)) != len(members):
            raise ValidationError(f"duplicate labels in subset {members}")
        if any(j < 1 or j > self.n_qubits for j in members):
            raise ValidationError(
                f"subset {members} has labels outside 1..{self.n_qubits}"
            )
        object.__setattr__(self, "members", tuple(sorted(members)))

    def complement(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n_qubits + 1) if j not in self.members)

    def __len__(self) -> int:
        return len(self.members)


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def tensor(a: DensityMatrix, b: DensityMatrix, dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix:
    n = a.n_qubits + b.n_qubits
    check_dense_limit(n, dense_limit)
    return DensityMatrix(n, np.kron(a.matrix, b.matrix))


def tensor_all(factors: Sequence[DensityMatrix], dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix:
    n = sum(f.n_qubits for f in factors)
    check_dense_limit(n, dense_limit)
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f.matrix)
    return DensityMatrix(n, out)


def partial_trace_array(matrix: np.ndarray, n_qubits: int, keep: Sequence[int]) -> np.ndarray:
    """Reduce a ``2^n x 2^n`` array onto the 1-based particles in ``keep``.

    No state validation; ``keep`` must be sorted and in range.
    """
    keep = list(keep)
    traced = [j for j in range(1, n_qubits + 1) if j not in keep]
    if not traced:
        return np.array(matrix, dtype=complex)
    t = np.asarray(matrix).reshape([2] * (2 * n_qubits))
    ket = [j - 1 for j in keep] + [j - 1 for j in traced]
    bra = [n_qubits + a for a in ket]
    dk, dt = 1 << len(keep), 1 << len(traced)
    t = t.transpose(ket + bra).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def partial_trace(rho: DensityMatrix, keep: SubsetIndex | Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the particles in ``keep`` (1-based labels)."""
    if not isinstance(keep, SubsetIndex):
        keep = SubsetIndex(tuple(keep), rho.n_qubits)
    elif keep.n_qubits != rho.n_qubits:
        raise ValidationError("subset and state have different qubit counts")
    out = partial_trace_array(rho.matrix, rho.n_qubits, keep.members)
    return DensityMatrix(len(keep), out)


def single_particle_marginals(rho: DensityMatrix) -> list[DensityMatrix]:
    return [partial_trace(rho, (j,)) for j in range(1, rho.n_qubits + 1)]


def entropy_from_eigvals(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    """Entropy ``-Tr rho log2 rho`` in bits.

    Accepts a DensityMatrix or any square Hermitian array.
    """
    s = entropy_from_eigvals(clamped_eigvalsh(_as_matrix(rho)))
    return max(s, 0.0)


def _check_hermitian(h: np.ndarray) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > HERMITIAN_TOL:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3e})")


def hermitian_exp(h) -> np.ndarray:
    """Matrix exponential of a Hermitian matrix via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    _check_hermitian(h)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(w)) @ v.conj().T


def hermitian_log(h) -> np.ndarray:
    """Natural matrix logarithm of a Hermitian positive-definite matrix."""
    h = np.asarray(h, dtype=complex)
    _check_hermitian(h)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    if w[0] <= 0.0:
        raise NotAStateError("matrix logarithm needs a positive-definite matrix")
    return (v * np.log(w)) @ v.conj().T


def normalized_exp(h) -> tuple[np.ndarray, float]:
    """Return ``(exp(h) / Tr exp(h), ln Tr exp(h))`` computed without overflow."""
    h = np.asarray(h, dtype=complex)
    _check_hermitian(h)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    shift = w[-1]
    e = np.exp(w - shift)
    z = e.sum()
    state = (v * (e / z)) @ v.conj().T
    return state, float(shift + np.log(z))


def pauli_expectation(rho: DensityMatrix, p: "PauliString") -> float:
    """Real expectation ``Tr(rho p)`` of a Hermitian Pauli string."""
    if p.n_qubits != rho.n_qubits:
        raise ValidationError(
            f"Pauli string on {p.n_qubits} qubits, state on {rho.n_qubits}"
        )
    value = pauli_trace(rho.matrix, p)
    if abs(value.imag) > 1e-8:
        raise ConsistencyError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def pauli_trace(matrix: np.ndarray, p: "PauliString") -> complex:
    """``Tr(matrix p)`` evaluated from the bit masks, no dense Pauli matrix."""
    b = np.arange(matrix.shape[0])
    signs = 1 - 2 * (np.bitwise_count(b & p.z).astype(np.int64) & 1)
    total = np.sum(matrix[b, b ^ p.x] * signs)
    return complex(total * p.xz_coefficient())


def depolarize(rho: DensityMatrix, eps: float) -> DensityMatrix:
    if not 0.0 <= eps <= 1.0:
        raise ValidationError(f"depolarizing strength {eps} outside [0, 1]")
    mixed = np.eye(rho.dim, dtype=complex) / rho.dim
    return DensityMatrix(rho.n_qubits, (1.0 - eps) * rho.matrix + eps * mixed)


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    d = 1 << n_qubits
    return DensityMatrix(n_qubits, np.eye(d, dtype=complex) / d)


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    diff = _as_matrix(a) - _as_matrix(b)
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(0.5 * np.sum(np.abs(w)))
