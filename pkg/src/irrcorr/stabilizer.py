"""Signed Pauli strings over GF(2) and stabilizer-group algebra.

A :class:`PauliString` stores the operator ``i**phase * P_1 (x) ... (x) P_n``
with letters ``P_j`` in ``{I, X, Y, Z}``.  Qubit ``j`` (1-based) lives in bit
``n - j`` of the ``x``/``z`` masks, matching the dense basis ordering of
:mod:`irrcorr.qstate`.  ``Y`` is stored as ``x = z = 1``; since
``Y = i X Z`` the XZ-form coefficient of a string is
``i**(phase + #Y)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import GroupError, SizeLimitError, ValidationError
from .qstate import DEFAULT_DENSE_LIMIT, DensityMatrix, check_dense_limit
from .spectrum import CorrelationSpectrum

DEFAULT_ENUMERATION_GUARD = 20

_LETTERS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full or self.x < 0 or self.z < 0:
            raise ValidationError("bit masks wider than n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"[+|-][i]XYZI..."``, e.g. ``"-YYX"`` or ``"+iZ"``."""
        text = label.strip()
        phase = 0
        if text[:1] in "+-" and text:
            phase = 0 if text[0] == "+" else 2
            text = text[1:]
        if text[:1] == "i":
            phase += 1
            text = text[1:]
        if not text or any(c not in _LETTERS for c in text):
            raise ValidationError(f"malformed Pauli label {label!r}")
        n = len(text)
        x = z = 0
        for j, c in enumerate(text):
            bx, bz = _LETTERS[c]
            x |= bx << (n - 1 - j)
            z |= bz << (n - 1 - j)
        return cls(n, x, z, phase)

    @classmethod
    def single(cls, n_qubits: int, letters: dict[int, str]) -> "PauliString":
        """Build a string from ``{qubit: letter}`` with 1-based qubit labels."""
        chars = ["I"] * n_qubits
        for j, c in letters.items():
            chars[j - 1] = c
        return cls.from_label("".join(chars))

    @property
    def letters(self) -> str:
        out = []
        for j in range(self.n_qubits):
            bit = self.n_qubits - 1 - j
            out.append("IXZY"[((self.x >> bit) & 1) | (((self.z >> bit) & 1) << 1)])
        return "".join(out)

    @property
    def label(self) -> str:
        return _PHASE_TEXT[self.phase] + self.letters

    def __str__(self) -> str:
        return self.label

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    @property
    def support(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def n_identity(self) -> int:
        return self.n_qubits - self.support

    def support_set(self) -> tuple[int, ...]:
        return tuple(
            j for j in range(1, self.n_qubits + 1)
            if (self.support_mask >> (self.n_qubits - j)) & 1
        )

    @property
    def y_count(self) -> int:
        return _popcount(self.x & self.z)

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def sign(self) -> int:
        if not self.is_hermitian():
            raise ValidationError(f"{self.label} is not Hermitian")
        return 1 if self.phase == 0 else -1

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z, 0)

    def xz_coefficient(self) -> complex:
        """Scalar ``c`` with ``self == c * X^x Z^z``."""
        return 1j ** ((self.phase + self.y_count) % 4)

    def symplectic(self) -> int:
        """``x || z`` packed into one ``2n``-bit integer."""
        return (self.x << self.n_qubits) | self.z

    def commutes(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def to_matrix(self) -> np.ndarray:
        d = 1 << self.n_qubits
        b = np.arange(d)
        signs = 1 - 2 * (np.bitwise_count(b & self.z).astype(np.int64) & 1)
        m = np.zeros((d, d), dtype=complex)
        m[b ^ self.x, b] = signs * self.xz_coefficient()
        return m


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    if a.n_qubits != b.n_qubits:
        raise ValidationError(
            f"cannot multiply Pauli strings on {a.n_qubits} and {b.n_qubits} qubits"
        )
    # X^x1 Z^z1 X^x2 Z^z2 = (-1)^{z1.x2} X^(x1^x2) Z^(z1^z2)
    x, z = a.x ^ b.x, a.z ^ b.z
    xz_phase = a.phase + a.y_count + b.phase + b.y_count + 2 * _popcount(a.z & b.x)
    return PauliString(a.n_qubits, x, z, xz_phase - _popcount(x & z))


def parse_generators(text: str) -> list[PauliString]:
    """Parse comma-separated generator tokens like ``"+XXX,ZZI,-IZZ"``."""
    tokens = [t.strip() for t in text.split(",")]
    if not tokens or any(not t for t in tokens):
        raise ValidationError(f"empty generator token in {text!r}")
    out = []
    for k, t in enumerate(tokens, start=1):
        body = t[1:] if t[0] in "+-" else t
        if not body or any(c not in "IXYZ" for c in body):
            raise ValidationError(f"generator {k} ({t!r}) must be [+|-] followed by I/X/Y/Z")
        out.append(PauliString.from_label(t))
    return out


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of row vectors packed as integers."""
    basis: dict[int, int] = {}  # leading bit -> reduced row
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead not in basis:
                basis[lead] = r
                break
            r ^= basis[lead]
    return len(basis)


class _GF2Basis:
    """Incremental GF(2) basis with independence test."""

    def __init__(self):
        self._rows: dict[int, int] = {}

    def reduce(self, r: int) -> int:
        while r:
            lead = r.bit_length() - 1
            if lead not in self._rows:
                return r
            r ^= self._rows[lead]
        return 0

    def add(self, r: int) -> bool:
        r = self.reduce(r)
        if r == 0:
            return False
        self._rows[r.bit_length() - 1] = r
        return True

    def __len__(self) -> int:
        return len(self._rows)


@dataclass(frozen=True)
class StabilizerGroup:
    """Validated group generated by ``m`` independent commuting Hermitian Paulis.

    Build instances with :func:`validate_group`.
    """

    n_qubits: int
    generators: tuple[PauliString, ...]

    @property
    def m(self) -> int:
        return len(self.generators)

    @classmethod
    def from_text(cls, text: str) -> "StabilizerGroup":
        return validate_group(parse_generators(text))


def validate_group(gens: Sequence[PauliString]) -> StabilizerGroup:
    gens = tuple(gens)
    if not gens:
        raise GroupError("at least one generator is required", "empty")
    n = gens[0].n_qubits
    for k, g in enumerate(gens, start=1):
        if g.n_qubits != n:
            raise GroupError(
                f"generator {k} acts on {g.n_qubits} qubits, expected {n}", "size", (k,)
            )
        if not g.is_hermitian():
            raise GroupError(f"generator {k} ({g.label}) has odd phase", "phase", (k,))
    for a, b in itertools.combinations(range(len(gens)), 2):
        if not gens[a].commutes(gens[b]):
            raise GroupError(
                f"generators {a + 1} ({gens[a].label}) and {b + 1} ({gens[b].label}) anticommute",
                "noncommuting",
                (a + 1, b + 1),
            )
    basis = _GF2Basis()
    for k, g in enumerate(gens, start=1):
        if not basis.add(g.symplectic()):
            raise GroupError(
                f"generator {k} ({g.label}) depends on the preceding generators",
                "dependent",
                (k,),
            )
    return StabilizerGroup(n, gens)


def enumerate_elements(g: StabilizerGroup, guard: int = DEFAULT_ENUMERATION_GUARD) -> list[PauliString]:
    """All ``2^m`` group elements; element ``s`` is the product of generators in bitmask ``s``."""
    if g.m > guard:
        raise SizeLimitError(f"2^{g.m} elements exceeds the enumeration guard 2^{guard}")
    elements = [PauliString.identity(g.n_qubits)]
    for gen in g.generators:
        elements += [h * gen for h in elements]
    return elements


@dataclass(frozen=True)
class RankProfile:
    """``ranks[k-1]`` is the GF(2) rank of the weight-<=k elements."""

    ranks: tuple[int, ...]
    m: int

    def __post_init__(self):
        r = self.ranks
        if any(b < a for a, b in zip(r, r[1:])) or (r and r[-1] != self.m):
            raise ValidationError(f"invalid rank profile {r} for m={self.m}")

    def rank(self, k: int) -> int:
        return 0 if k <= 0 else self.ranks[k - 1]

    def to_json(self) -> dict:
        return {"ranks": list(self.ranks), "m": self.m}


def rank_profile(g: StabilizerGroup, guard: int = DEFAULT_ENUMERATION_GUARD) -> RankProfile:
    elements = enumerate_elements(g, guard)
    ranks = []
    for k in range(1, g.n_qubits + 1):
        ranks.append(gf2_rank(h.symplectic() for h in elements if 0 < h.support <= k))
    return RankProfile(tuple(ranks), g.m)


def theorem2_spectrum(g: StabilizerGroup, guard: int = DEFAULT_ENUMERATION_GUARD) -> CorrelationSpectrum:
    """Exact integer spectrum ``C(k) = r_k - r_(k-1)`` of the stabilizer state."""
    prof = rank_profile(g, guard)
    n = g.n_qubits
    ladder = tuple(n - prof.rank(k) for k in range(1, n + 1))
    c = {k: prof.rank(k) - prof.rank(k - 1) for k in range(2, n + 1)}
    return CorrelationSpectrum(
        n_qubits=n,
        entropy_ladder=ladder,
        c_of_k=c,
        c_total=prof.rank(n) - prof.rank(1),
        method="stabilizer-exact",
    )


def nested_generators(g: StabilizerGroup, guard: int = DEFAULT_ENUMERATION_GUARD) -> list[list[PauliString]]:
    """Generators arranged so that ``layers[0] + ... + layers[k-1]`` generates ``G_k``.

    Built greedily: scan elements weight class by weight class and keep
    each one that is independent of everything kept so far.
    """
    elements = enumerate_elements(g, guard)
    basis = _GF2Basis()
    layers: list[list[PauliString]] = []
    for k in range(1, g.n_qubits + 1):
        layer = []
        for h in sorted((h for h in elements if h.support == k), key=lambda h: (h.x, h.z)):
            if basis.add(h.symplectic()):
                layer.append(h)
        layers.append(layer)
    return layers


def check_nested(g: StabilizerGroup, layers: Sequence[Sequence[PauliString]],
                 guard: int = DEFAULT_ENUMERATION_GUARD) -> None:
    """Raise ValidationError unless ``layers`` is a nested generating set for ``g``."""
    prof = rank_profile(g, guard)
    members = {h for h in enumerate_elements(g, guard)}
    if len(layers) != g.n_qubits:
        raise ValidationError(f"expected {g.n_qubits} layers, got {len(layers)}")
    basis = _GF2Basis()
    for k, layer in enumerate(layers, start=1):
        for h in layer:
            if h not in members:
                raise ValidationError(f"{h.label} is not an element of the group")
            if h.support > k:
                raise ValidationError(f"{h.label} has weight {h.support} > {k} in layer {k}")
            if not basis.add(h.symplectic()):
                raise ValidationError(f"{h.label} in layer {k} is not independent")
        if len(basis) != prof.rank(k):
            raise ValidationError(
                f"layers 1..{k} span rank {len(basis)}, but weight-<={k} elements span {prof.rank(k)}"
            )


def to_density_matrix(g: StabilizerGroup, dense_limit: int = DEFAULT_DENSE_LIMIT,
                      guard: int = DEFAULT_ENUMERATION_GUARD) -> DensityMatrix:
    """Uniform mixture ``2^-n * sum_h h`` over all group elements."""
    check_dense_limit(g.n_qubits, dense_limit)
    d = 1 << g.n_qubits
    acc = np.zeros((d, d), dtype=complex)
    for h in enumerate_elements(g, guard):
        acc += h.to_matrix()
    return DensityMatrix(g.n_qubits, acc / d)


def lambda_family(g: StabilizerGroup, order: int, lam: float,
                  layers: Sequence[Sequence[PauliString]] | None = None,
                  dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix:
    """Normalized ``exp(lam * sum of generators in layers 1..order)``.

    Uses the expansion ``2^-n * sum_d tanh(lam)^d * (products of d distinct
    selected generators)``, valid because the selected generators commute
    and are independent.
    """
    n = g.n_qubits
    check_dense_limit(n, dense_limit)
    if not 1 <= order <= n:
        raise ValidationError(f"order {order} outside 1..{n}")
    if layers is None:
        layers = nested_generators(g)
    else:
        check_nested(g, layers)
    selected = [h for layer in layers[:order] for h in layer]
    t = np.tanh(lam)
    d = 1 << n
    acc = np.zeros((d, d), dtype=complex)
    for size in range(len(selected) + 1):
        weight = t ** size
        for combo in itertools.combinations(selected, size):
            prod = PauliString.identity(n)
            for h in combo:
                prod = prod * h
            acc += weight * prod.to_matrix()
    return DensityMatrix(n, acc / d)
