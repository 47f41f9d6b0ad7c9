"""Correlation spectra: numeric, continuity-regularized, and GHZ closed forms."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import log2

import numpy as np

from .errors import ConvergenceError, DivergenceError, RankDeficientError, ValidationError
from .maxent import DEFAULT_MAX_ITER, DEFAULT_TOL, extract_constraints, fit, product_state_closure
from .qstate import (
    DEFAULT_DENSE_LIMIT,
    DensityMatrix,
    StateVector,
    check_dense_limit,
    depolarize,
    single_particle_marginals,
    von_neumann_entropy,
)
from .spectrum import CorrelationSpectrum
from .stabilizer import PauliString

log = logging.getLogger(__name__)

FULL_RANK_GATE = 1e-6
DEFAULT_EPS_SEQUENCE = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)


def binary_entropy(x: float) -> float:
    """``-x log2 x - (1-x) log2 (1-x)`` with ``0 log 0 = 0``."""
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"binary entropy argument {x} outside [0, 1]")
    return -sum(p * log2(p) for p in (x, 1.0 - x) if p > 0.0)


def total_correlation(rho: DensityMatrix) -> float:
    """Sum of single-particle entropies minus the joint entropy, in bits."""
    marginals = single_particle_marginals(rho)
    return sum(von_neumann_entropy(m) for m in marginals) - von_neumann_entropy(rho)


def spectrum_from_ladder(n_qubits: int, ladder, method: str, c_total: float | None = None,
                         **kwargs) -> CorrelationSpectrum:
    """Assemble ``C(k) = S_(k-1) - S_k`` from an entropy ladder ``S_1..S_L``."""
    ladder = tuple(float(s) for s in ladder)
    c = {k: ladder[k - 2] - ladder[k - 1] for k in range(2, len(ladder) + 1)}
    if c_total is None:
        c_total = ladder[0] - ladder[-1]
    return CorrelationSpectrum(n_qubits, ladder, c, c_total, method, **kwargs)


def spectrum_full_rank(rho: DensityMatrix, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, max_order: int | None = None,
                       optimizer: str = "newton") -> CorrelationSpectrum:
    """Numeric spectrum from maximum-entropy fits of every order.

    Order 1 uses the product of marginals and order n is the state itself;
    the orders in between are fitted.  ``max_order`` stops the ladder early
    (``C_total`` is still the exact total correlation).

    Raises:
        RankDeficientError: smallest eigenvalue below ``1e-6``.
        ConvergenceError: a fit did not converge.
    """
    n = rho.n_qubits
    lam_min = rho.min_eigval()
    if lam_min < FULL_RANK_GATE:
        raise RankDeficientError(
            f"smallest eigenvalue {lam_min:.3e} < {FULL_RANK_GATE:g}; "
            "use spectrum_continuity for rank-deficient states"
        )
    top = n if max_order is None else max_order
    if not 1 <= top <= n:
        raise ValidationError(f"max_order {max_order} outside 1..{n}")
    closure = product_state_closure(rho)
    ladder = [closure.entropy_bits]
    diagnostics = [closure.diagnostics()]
    for order in range(2, top + 1):
        if order == n:
            s = von_neumann_entropy(rho)
            diagnostics.append({"l": n, "iterations": 0, "residual": 0.0,
                                "entropy_bits": s, "converged": True})
        else:
            res = fit(extract_constraints(rho, order), tol=tol, max_iter=max_iter,
                      optimizer=optimizer)
            s = res.entropy_bits
            diagnostics.append(res.diagnostics())
        ladder.append(s)
    c_total = total_correlation(rho) if top < n else None
    return spectrum_from_ladder(n, ladder, "numeric", c_total=c_total,
                                diagnostics=tuple(diagnostics))


@dataclass(frozen=True)
class ContinuitySchedule:
    eps_sequence: tuple[float, ...] = DEFAULT_EPS_SEQUENCE
    convergence_tol: float = 1e-3

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_sequence)
        if not eps:
            raise ValidationError("empty depolarization schedule")
        if any(not 0.0 < e < 1.0 for e in eps):
            raise ValidationError("schedule values must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValidationError("schedule must be strictly decreasing")
        if self.convergence_tol <= 0:
            raise ValidationError("convergence_tol must be positive")
        object.__setattr__(self, "eps_sequence", eps)

    @classmethod
    def parse(cls, text: str, convergence_tol: float = 1e-3) -> "ContinuitySchedule":
        try:
            eps = tuple(float(t) for t in text.split(","))
        except ValueError as exc:
            raise ValidationError(f"bad schedule {text!r}: {exc}") from exc
        return cls(eps, convergence_tol)


def spectrum_continuity(rho: DensityMatrix, schedule: ContinuitySchedule | None = None,
                        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                        max_order: int | None = None,
                        optimizer: str = "newton") -> CorrelationSpectrum:
    """Spectrum of a possibly rank-deficient state as the limit of depolarized copies.

    Walks the schedule from the largest ``eps`` down and stops once two
    successive spectra agree to ``convergence_tol`` (max norm).  The last
    spectrum is returned with ``uncertainty`` set to the last successive
    difference; if the schedule runs out first, or a fit diverges, the best
    estimate so far is returned with ``converged=False``.
    """
    schedule = schedule or ContinuitySchedule()
    prev: CorrelationSpectrum | None = None
    delta: float | None = None
    converged = False
    for eps in schedule.eps_sequence:
        try:
            cur = spectrum_full_rank(depolarize(rho, eps), tol=tol, max_iter=max_iter,
                                     max_order=max_order, optimizer=optimizer)
        except (ConvergenceError, RankDeficientError) as exc:
            if prev is None:
                raise
            log.warning("continuity schedule stopped at eps=%g: %s", eps, exc)
            break
        if prev is not None:
            delta = cur.max_deviation(prev)
            log.debug("eps=%g: successive difference %.3e", eps, delta)
        prev = cur
        if delta is not None and delta < schedule.convergence_tol:
            converged = True
            break
    return CorrelationSpectrum(
        n_qubits=prev.n_qubits,
        entropy_ladder=prev.entropy_ladder,
        c_of_k=prev.c_of_k,
        c_total=prev.c_total,
        method="numeric-extrapolated",
        uncertainty=delta,
        converged=converged,
        diagnostics=prev.diagnostics,
    )


def analyze_state(rho: DensityMatrix, method: str = "auto", **kwargs) -> CorrelationSpectrum:
    """Dispatch to the numeric or continuity pipeline.

    ``auto`` picks numeric when the smallest eigenvalue is at least ``1e-6``.
    """
    schedule = kwargs.pop("schedule", None)
    if method == "auto":
        method = "numeric" if rho.min_eigval() >= FULL_RANK_GATE else "continuity"
    if method == "numeric":
        return spectrum_full_rank(rho, **kwargs)
    if method == "continuity":
        return spectrum_continuity(rho, schedule, **kwargs)
    raise ValidationError(f"unknown method {method!r}")


# -- generalized GHZ states -------------------------------------------------


@dataclass(frozen=True)
class GHZSpec:
    """``sqrt(alpha_sq)|0...0> + sqrt(1 - alpha_sq) e^{i phi}|1...1>``."""

    n_qubits: int
    alpha_sq: float
    phi: float = 0.0

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValidationError("GHZ states need at least 2 qubits")
        if not 0.0 < self.alpha_sq < 1.0:
            raise ValidationError(f"alpha_sq={self.alpha_sq} must lie strictly inside (0, 1)")

    @property
    def bloch(self) -> np.ndarray:
        """Unit vector ``(sin t cos phi, sin t sin phi, cos t)`` with ``cos(t/2) = alpha``."""
        theta = 2.0 * np.arccos(np.sqrt(self.alpha_sq))
        return np.array([np.sin(theta) * np.cos(self.phi),
                         np.sin(theta) * np.sin(self.phi),
                         np.cos(theta)])


def ghz_state(spec: GHZSpec, dense_limit: int = DEFAULT_DENSE_LIMIT) -> StateVector:
    check_dense_limit(spec.n_qubits, dense_limit)
    amps = np.zeros(1 << spec.n_qubits, dtype=complex)
    amps[0] = np.sqrt(spec.alpha_sq)
    amps[-1] = np.sqrt(1.0 - spec.alpha_sq) * np.exp(1j * spec.phi)
    # renormalize away the rounding of the two square roots
    amps /= np.linalg.norm(amps)
    return StateVector(spec.n_qubits, amps)


def theorem3_spectrum(spec: GHZSpec) -> CorrelationSpectrum:
    """Closed-form spectrum of a generalized GHZ state.

    With ``E = binary_entropy(alpha_sq)`` the ladder is ``n E`` at order 1,
    ``E`` for orders ``2..n-1`` and ``0`` at order ``n``, so
    ``C(2) = (n-1) E``, ``C(n) = E`` and everything in between vanishes.
    For ``n = 2`` the two nonzero orders coincide and ``C(2) = 2 E``.
    """
    n = spec.n_qubits
    e = binary_entropy(spec.alpha_sq)
    ladder = [n * e] + [e] * (n - 2) + [0.0]
    return spectrum_from_ladder(n, ladder, "ghz-analytic", c_total=n * e)


def ghz_sigma_operators(n_qubits: int) -> tuple[PauliString, PauliString, PauliString]:
    """``(X X..X, Y X..X, Z I..I)`` whose Bloch-vector combination stabilizes the GHZ state."""
    rest = "X" * (n_qubits - 1)
    return (PauliString.from_label("X" + rest),
            PauliString.from_label("Y" + rest),
            PauliString.from_label("Z" + "I" * (n_qubits - 1)))


def ghz_family(n_qubits: int, gamma: float, lambda_vec, spec: GHZSpec | None = None,
               dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix:
    """Normalized ``exp(gamma sum_i Z1 Zi + lambda_vec . Sigma)``.

    Built from the commuting product form
    ``2^-n prod_i [1 + tanh(gamma) Z1 Zi] [1 + tanh|lambda| Sigma_hat]``.
    ``spec`` is accepted for call-site symmetry and only checked for size.
    """
    if n_qubits < 2:
        raise ValidationError("GHZ family needs at least 2 qubits")
    if spec is not None and spec.n_qubits != n_qubits:
        raise ValidationError("GHZ spec and family disagree on the qubit count")
    check_dense_limit(n_qubits, dense_limit)
    d = 1 << n_qubits
    eye = np.eye(d, dtype=complex)
    out = eye.copy()
    tg = np.tanh(gamma)
    for i in range(2, n_qubits + 1):
        zz = PauliString.single(n_qubits, {1: "Z", i: "Z"}).to_matrix()
        out = out @ (eye + tg * zz)
    lam_vec = np.asarray(lambda_vec, dtype=float).reshape(3)
    lam = float(np.linalg.norm(lam_vec))
    if lam > 0.0:
        sigma = sum(c * p.to_matrix() for c, p in zip(lam_vec / lam, ghz_sigma_operators(n_qubits)))
        out = out @ (eye + np.tanh(lam) * sigma)
    return DensityMatrix(n_qubits, out / d)


def ghz_family_generator(n_qubits: int, gamma: float, lambda_vec) -> np.ndarray:
    """Dense exponent ``gamma sum_i Z1 Zi + lambda_vec . Sigma`` (no normalization)."""
    d = 1 << n_qubits
    h = np.zeros((d, d), dtype=complex)
    for i in range(2, n_qubits + 1):
        h += gamma * PauliString.single(n_qubits, {1: "Z", i: "Z"}).to_matrix()
    for c, p in zip(np.asarray(lambda_vec, dtype=float), ghz_sigma_operators(n_qubits)):
        h += c * p.to_matrix()
    return h


def ghz_marginal_condition(lambda_vec) -> np.ndarray:
    """``(0, 0, lz')`` with ``tanh lz' = (lz / |lambda|) tanh |lambda|``.

    Replacing ``lambda_vec`` by the result leaves every (n-1)-particle
    marginal of :func:`ghz_family` unchanged.
    """
    lam_vec = np.asarray(lambda_vec, dtype=float).reshape(3)
    lam = float(np.linalg.norm(lam_vec))
    if not lam > 0.0:
        raise ValidationError("lambda vector must be nonzero")
    target = lam_vec[2] / lam * np.tanh(lam)
    if abs(target) >= 1.0:
        raise OverflowError("tanh(lambda'_z) reached +-1; lambda'_z is infinite")
    lz = float(np.arctanh(target))
    if not np.isfinite(lz):
        raise OverflowError("lambda'_z overflowed")
    return np.array([0.0, 0.0, lz])


def ghz_limit_marginal_state(spec: GHZSpec) -> DensityMatrix:
    """Diagonal mixture ``|alpha|^2 |0..0><0..0| + |beta|^2 |1..1><1..1|``."""
    d = 1 << spec.n_qubits
    m = np.zeros((d, d), dtype=complex)
    m[0, 0] = spec.alpha_sq
    m[-1, -1] = 1.0 - spec.alpha_sq
    return DensityMatrix(spec.n_qubits, m)
