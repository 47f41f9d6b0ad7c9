"""The :class:`CorrelationSpectrum` value type and its JSON/CSV encodings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import ValidationError

METHODS = ("numeric", "numeric-extrapolated", "stabilizer-exact", "ghz-analytic")

DEFINITION_TOL = 1e-12
SUM_RULE_TOL = 1e-9
NEGATIVITY_TOL = 1e-6


@dataclass(frozen=True)
class CorrelationSpectrum:
    """Irreducible correlations ``C(k)`` for ``2 <= k <= n`` and the total ``C_T``.

    ``entropy_ladder[l-1]`` is the entropy (bits) of the maximum-entropy state
    consistent with all l-particle marginals.  A truncated spectrum (computed
    with a ``max_order`` cap) holds fewer than ``n - 1`` orders; the sum rule
    is only enforced on complete spectra.
    """

    n_qubits: int
    entropy_ladder: tuple[float, ...]
    c_of_k: Mapping[int, float]
    c_total: float
    method: str
    uncertainty: float | None = None
    converged: bool = True
    diagnostics: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entropy_ladder", tuple(self.entropy_ladder))
        object.__setattr__(self, "c_of_k", {int(k): v for k, v in sorted(self.c_of_k.items())})
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        ladder = self.entropy_ladder
        for k, c in self.c_of_k.items():
            if not 2 <= k <= self.n_qubits or k > len(ladder):
                raise ValidationError(f"order {k} out of range for this spectrum")
            if abs(c - (ladder[k - 2] - ladder[k - 1])) > DEFINITION_TOL:
                raise ValidationError(f"C({k}) is not the ladder difference")
            if c < -NEGATIVITY_TOL:
                raise ValidationError(f"C({k}) = {c:.3e} is negative")
        if self.is_complete and abs(sum(self.c_of_k.values()) - self.c_total) > SUM_RULE_TOL:
            raise ValidationError("sum of C(k) differs from C_total")

    @property
    def is_complete(self) -> bool:
        return len(self.c_of_k) == self.n_qubits - 1

    def __getitem__(self, k: int) -> float:
        return self.c_of_k[k]

    def max_deviation(self, other: "CorrelationSpectrum") -> float:
        """Max-norm distance over shared orders and the total."""
        keys = set(self.c_of_k) & set(other.c_of_k)
        diffs = [abs(self.c_of_k[k] - other.c_of_k[k]) for k in keys]
        diffs.append(abs(self.c_total - other.c_total))
        return max(diffs)

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n_qubits,
            "method": self.method,
            "entropy_ladder": list(self.entropy_ladder),
            "C": {str(k): v for k, v in self.c_of_k.items()},
            "C_total": self.c_total,
            "uncertainty": self.uncertainty,
            "converged": self.converged,
        }

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(), **kwargs)

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CorrelationSpectrum":
        try:
            return cls(
                n_qubits=int(data["n"]),
                entropy_ladder=tuple(data["entropy_ladder"]),
                c_of_k={int(k): v for k, v in data["C"].items()},
                c_total=data["C_total"],
                method=data["method"],
                uncertainty=data.get("uncertainty"),
                converged=bool(data.get("converged", True)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed spectrum JSON: {exc!r}") from exc

    @classmethod
    def loads(cls, text: str) -> "CorrelationSpectrum":
        return cls.from_json(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "C_k", "uncertainty"])
        unc = "" if self.uncertainty is None else self.uncertainty
        for k, c in self.c_of_k.items():
            w.writerow([k, c, unc])
        return buf.getvalue()
