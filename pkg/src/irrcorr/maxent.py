"""Maximum-entropy reconstruction from all l-particle marginals.

The maximum-entropy state with prescribed l-particle marginals has the form
``exp(sum_P theta_P P) / Z`` where ``P`` runs over the non-identity Pauli
strings of weight at most ``l``.  The coefficients minimize the convex dual

    f(theta) = ln Tr exp(sum_P theta_P P) - sum_P theta_P t_P,

whose gradient is ``<P>_theta - t_P``.  Matching all weight-<=l Pauli
expectations is the same as matching every l-particle reduced density
matrix.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ConvergenceError, DivergenceError, ValidationError
from .qstate import (
    DensityMatrix,
    partial_trace,
    single_particle_marginals,
    tensor_all,
    von_neumann_entropy,
    entropy_from_eigvals,
)
from .stabilizer import PauliString

log = logging.getLogger(__name__)

THETA_GUARD = 1e3
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000
ARMIJO_START = 1.0
ARMIJO_SHRINK = 0.5
ARMIJO_SLOPE = 1e-4
OPTIMIZERS = ("newton", "gradient")


def basis_size(n_qubits: int, order: int) -> int:
    return sum(comb(n_qubits, w) * 3**w for w in range(1, order + 1))


def pauli_basis(n_qubits: int, order: int) -> tuple[PauliString, ...]:
    """Non-identity Pauli strings of weight ``<= order``, by weight then support."""
    out = []
    for w in range(1, order + 1):
        for support in itertools.combinations(range(1, n_qubits + 1), w):
            for letters in itertools.product("XYZ", repeat=w):
                out.append(PauliString.single(n_qubits, dict(zip(support, letters))))
    return tuple(out)


class PauliStack:
    """Vectorized signed-permutation form of a list of Pauli strings.

    String ``k`` maps basis state ``b`` to ``coef[k, b] * |b ^ x[k]>``.
    """

    def __init__(self, paulis, n_qubits: int):
        self.paulis = tuple(paulis)
        self.n_qubits = n_qubits
        d = 1 << n_qubits
        self.dim = d
        b = np.arange(d)
        self.rows = np.array([p.x for p in self.paulis], dtype=np.int64)[:, None] ^ b[None, :]
        z = np.array([p.z for p in self.paulis], dtype=np.int64)
        signs = 1 - 2 * (np.bitwise_count(z[:, None] & b[None, :]).astype(np.int64) & 1)
        phases = np.array([p.xz_coefficient() for p in self.paulis], dtype=complex)
        self.coef = signs * phases[:, None]
        self.cols = np.broadcast_to(b, self.rows.shape)

    def __len__(self) -> int:
        return len(self.paulis)

    def expectations(self, matrix: np.ndarray) -> np.ndarray:
        """``Tr(matrix P_k)`` for every string; real part only."""
        vals = np.sum(matrix[self.cols, self.rows] * self.coef, axis=1)
        return vals.real

    def combine(self, theta: np.ndarray) -> np.ndarray:
        """Dense ``sum_k theta_k P_k``."""
        h = np.zeros((self.dim, self.dim), dtype=complex)
        np.add.at(h, (self.rows, self.cols), theta[:, None] * self.coef)
        return h

    def rotated(self, v: np.ndarray) -> np.ndarray:
        """``V^dag P_k V`` for every string, shape ``(K, d, d)``."""
        # (P V)[a, :] = coef[k, a ^ x] * V[a ^ x, :]; row a ^ x is the column b with rows[k, b] == a
        pv = np.empty((len(self), self.dim, self.dim), dtype=complex)
        idx = np.arange(len(self))[:, None]
        pv[idx, self.rows, :] = self.coef[:, :, None] * v[None, :, :]
        return np.einsum("ia,kib->kab", v.conj(), pv, optimize=True)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Target expectations for every non-identity Pauli string of weight ``<= order``."""

    n_qubits: int
    order: int
    paulis: tuple[PauliString, ...]
    targets: np.ndarray

    def __post_init__(self):
        if not 1 <= self.order <= self.n_qubits:
            raise ValidationError(f"order {self.order} outside 1..{self.n_qubits}")
        t = np.array(self.targets, dtype=float)
        expected = basis_size(self.n_qubits, self.order)
        if len(self.paulis) != expected or t.shape != (expected,):
            raise ValidationError(
                f"expected {expected} constraints for n={self.n_qubits}, l={self.order}"
            )
        if np.any(np.abs(t) > 1.0 + 1e-9):
            raise ValidationError("Pauli expectation targets must lie in [-1, 1]")
        t.setflags(write=False)
        object.__setattr__(self, "targets", t)

    def __len__(self) -> int:
        return len(self.paulis)

    def as_dict(self) -> dict[str, float]:
        return {p.letters: float(v) for p, v in zip(self.paulis, self.targets)}

    def marginal(self, keep) -> np.ndarray:
        """Reduced density matrix on ``keep`` rebuilt from the targets."""
        keep = tuple(sorted(keep))
        if len(keep) > self.order:
            raise ValidationError(f"marginal on {len(keep)} particles needs order >= {len(keep)}")
        k = len(keep)
        d = 1 << k
        out = np.eye(d, dtype=complex)
        for p, t in zip(self.paulis, self.targets):
            if set(p.support_set()) <= set(keep):
                local = PauliString.single(k, {keep.index(j) + 1: p.letters[j - 1] for j in p.support_set()})
                out += t * local.to_matrix()
        return out / d


@dataclass(frozen=True, eq=False)
class DualParameters:
    paulis: tuple[PauliString, ...]
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (len(self.paulis),) or not np.all(np.isfinite(c)):
            raise ValidationError("dual coefficients must be finite, one per Pauli string")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def as_dict(self) -> dict[str, float]:
        return {p.letters: float(v) for p, v in zip(self.paulis, self.coefficients)}


@dataclass(frozen=True, eq=False)
class MaxEntResult:
    order: int
    state: DensityMatrix
    dual: DualParameters | None
    entropy_bits: float
    residual: float
    iterations: int
    converged: bool

    def diagnostics(self) -> dict:
        return {
            "l": self.order,
            "iterations": self.iterations,
            "residual": self.residual,
            "entropy_bits": self.entropy_bits,
            "converged": self.converged,
        }


def extract_constraints(rho: DensityMatrix, order: int) -> ConstraintSet:
    if not 1 <= order <= rho.n_qubits:
        raise ValidationError(f"order {order} outside 1..{rho.n_qubits}")
    paulis = pauli_basis(rho.n_qubits, order)
    stack = PauliStack(paulis, rho.n_qubits)
    return ConstraintSet(rho.n_qubits, order, paulis, stack.expectations(rho.matrix))


class _Dual:
    """Dual objective evaluated in the eigenbasis of ``sum theta_P P``."""

    def __init__(self, c: ConstraintSet, stack: PauliStack | None = None):
        self.c = c
        self.stack = stack or PauliStack(c.paulis, c.n_qubits)

    def evaluate(self, theta: np.ndarray):
        if np.max(np.abs(theta), initial=0.0) > THETA_GUARD:
            raise DivergenceError(
                f"dual parameters exceed {THETA_GUARD:g}; the target marginals are "
                "probably rank deficient"
            )
        h = self.stack.combine(theta)
        w, v = np.linalg.eigh(h)
        shift = w[-1]
        e = np.exp(w - shift)
        z = e.sum()
        p = e / z
        log_z = shift + np.log(z)
        state = (v * p) @ v.conj().T
        expect = self.stack.expectations(state)
        value = log_z - theta @ self.c.targets
        return value, expect - self.c.targets, (w, v, p, state)

    def hessian(self, theta: np.ndarray, eig) -> np.ndarray:
        w, v, p, _ = eig
        diff = w[:, None] - w[None, :]
        big = np.maximum(p[:, None], p[None, :])
        a = np.abs(diff)
        with np.errstate(invalid="ignore", divide="ignore"):
            kernel = np.where(a > 1e-300, big * -np.expm1(-a) / np.where(a > 0, a, 1.0), big)
        rot = self.stack.rotated(v)
        k = len(self.stack)
        lhs = (rot * kernel[None]).reshape(k, -1)
        rhs = rot.transpose(0, 2, 1).reshape(k, -1)
        second = (lhs @ rhs.T).real
        mean = np.real(np.einsum("kii,i->k", rot, p))
        hess = second - np.outer(mean, mean)
        return 0.5 * (hess + hess.T)


def dual_value_and_gradient(theta: DualParameters | np.ndarray, c: ConstraintSet):
    """Dual value (nats) and gradient ``<P>_theta - t_P`` as an array aligned with ``c.paulis``."""
    if isinstance(theta, DualParameters):
        if theta.paulis != c.paulis:
            raise ValidationError("dual parameters and constraints use different Pauli keys")
        theta = theta.coefficients
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(c),):
        raise ValidationError(f"expected {len(c)} dual coefficients, got {theta.shape}")
    value, grad, _ = _Dual(c).evaluate(theta)
    return float(value), grad


def _result(c: ConstraintSet, theta, grad, eig, iterations, converged) -> MaxEntResult:
    _, _, p, state = eig
    return MaxEntResult(
        order=c.order,
        state=DensityMatrix(c.n_qubits, state),
        dual=DualParameters(c.paulis, theta),
        entropy_bits=entropy_from_eigvals(p),
        residual=float(np.max(np.abs(grad), initial=0.0)),
        iterations=iterations,
        converged=converged,
    )


def fit(c: ConstraintSet, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
        optimizer: str = "newton") -> MaxEntResult:
    """Minimize the dual from ``theta = 0`` with an Armijo backtracking line search.

    ``optimizer="newton"`` uses the exact dual Hessian for the search
    direction; ``"gradient"`` uses plain steepest descent.  Stops once the
    max-norm of the gradient (the largest constraint violation) is ``<= tol``.

    Raises:
        DivergenceError: coefficients left the ``|theta| <= 1e3`` box.
        ConvergenceError: ``max_iter`` reached; ``exc.best`` holds the last iterate.
    """
    if optimizer not in OPTIMIZERS:
        raise ValidationError(f"unknown optimizer {optimizer!r}")
    dual = _Dual(c)
    theta = np.zeros(len(c))
    value, grad, eig = dual.evaluate(theta)
    for it in range(max_iter + 1):
        gnorm = np.max(np.abs(grad), initial=0.0)
        if gnorm <= tol:
            return _result(c, theta, grad, eig, it, True)
        if it == max_iter:
            break
        if optimizer == "newton":
            hess = dual.hessian(theta, eig)
            try:
                direction = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                direction = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            slope = grad @ direction
            if not np.isfinite(slope) or slope >= 0.0:
                direction, slope = -grad, -(grad @ grad)
        else:
            direction, slope = -grad, -(grad @ grad)
        step = ARMIJO_START
        while True:
            trial = theta + step * direction
            t_value, t_grad, t_eig = dual.evaluate(trial)
            if t_value <= value + ARMIJO_SLOPE * step * slope:
                break
            step *= ARMIJO_SHRINK
            if step < 1e-20:
                break
        if t_value > value + 1e-14 * max(1.0, abs(value)):
            log.debug("line search stalled at iteration %d (|g|=%.3e)", it, gnorm)
            break
        theta, value, grad, eig = trial, t_value, t_grad, t_eig
    best = _result(c, theta, grad, eig, it, False)
    raise ConvergenceError(
        f"maxent fit (l={c.order}) stopped at residual {best.residual:.3e} after {it} iterations",
        best=best,
    )


def product_state_closure(rho: DensityMatrix) -> MaxEntResult:
    """Order-1 maximum-entropy state: the product of single-particle marginals."""
    marginals = single_particle_marginals(rho)
    state = tensor_all(marginals)
    dual = None
    if all(m.min_eigval() > 0.0 for m in marginals):
        # log of a product state is a sum of local logs; keep the traceless part
        paulis = pauli_basis(rho.n_qubits, 1)
        coeffs = []
        for p in paulis:
            (j,) = p.support_set()
            w, v = np.linalg.eigh(marginals[j - 1].matrix)
            log_m = (v * np.log(w)) @ v.conj().T
            local = PauliString.from_label(p.letters[j - 1]).to_matrix()
            coeffs.append(0.5 * np.trace(log_m @ local).real)
        dual = DualParameters(paulis, np.array(coeffs))
    return MaxEntResult(
        order=1,
        state=state,
        dual=dual,
        entropy_bits=sum(von_neumann_entropy(m) for m in marginals),
        residual=0.0,
        iterations=0,
        converged=True,
    )


def marginal_residual(result: MaxEntResult, rho: DensityMatrix) -> float:
    """Largest trace distance between matching l-particle marginals."""
    from .qstate import trace_distance

    worst = 0.0
    for keep in itertools.combinations(range(1, rho.n_qubits + 1), result.order):
        worst = max(worst, trace_distance(partial_trace(result.state, keep), partial_trace(rho, keep)))
    return worst
