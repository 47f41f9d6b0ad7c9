"""JSON readers and writers for density matrices and state vectors.

Formats::

    {"n": 2, "matrix": [[[re, im], ...], ...]}    # row-major
    {"n": 2, "vector": [[re, im], ...]}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import NotAStateError, ValidationError
from .qstate import DEFAULT_DENSE_LIMIT, DensityMatrix, StateVector, check_dense_limit


class StateFileError(ValidationError):
    pass


def _complex(entry, where: str) -> complex:
    if (not isinstance(entry, (list, tuple)) or len(entry) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)):
        raise StateFileError(f"{where}: expected a [re, im] pair of numbers, got {entry!r}")
    return complex(entry[0], entry[1])


def _read_n(data, dense_limit: int) -> int:
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise StateFileError(f"field 'n': expected a positive integer, got {n!r}")
    check_dense_limit(n, dense_limit)
    return n


def parse_state(data, dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix | StateVector:
    """Build a DensityMatrix or StateVector from decoded JSON."""
    if not isinstance(data, dict):
        raise StateFileError("top level: expected a JSON object")
    has_m, has_v = "matrix" in data, "vector" in data
    if has_m == has_v:
        raise StateFileError("top level: expected exactly one of 'matrix' or 'vector'")
    n = _read_n(data, dense_limit)
    d = 1 << n
    if has_v:
        vec = data["vector"]
        if not isinstance(vec, list) or len(vec) != d:
            raise StateFileError(f"field 'vector': expected {d} entries for n={n}")
        amps = np.array([_complex(e, f"vector[{i}]") for i, e in enumerate(vec)])
        try:
            return StateVector(n, amps)
        except NotAStateError as exc:
            raise StateFileError(f"field 'vector': {exc}") from exc
    rows = data["matrix"]
    if not isinstance(rows, list) or len(rows) != d:
        raise StateFileError(f"field 'matrix': expected {d} rows for n={n}")
    m = np.empty((d, d), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise StateFileError(f"matrix[{i}]: expected {d} entries")
        for j, e in enumerate(row):
            m[i, j] = _complex(e, f"matrix[{i}][{j}]")
    dev = np.abs(m - m.conj().T)
    i, j = np.unravel_index(np.argmax(dev), dev.shape)
    if dev[i, j] > 1e-10:
        raise StateFileError(
            f"matrix[{i}][{j}]: not Hermitian (differs from conj(matrix[{j}][{i}]) by {dev[i, j]:.3e})"
        )
    try:
        return DensityMatrix(n, m)
    except NotAStateError as exc:
        raise StateFileError(f"field 'matrix': {exc}") from exc


def load_state(path, dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix | StateVector:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_state(data, dense_limit)


def load_density_matrix(path, dense_limit: int = DEFAULT_DENSE_LIMIT) -> DensityMatrix:
    state = load_state(path, dense_limit)
    return state.density_matrix() if isinstance(state, StateVector) else state


def _pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in a]


def density_matrix_to_json(rho: DensityMatrix) -> dict:
    return {"n": rho.n_qubits, "matrix": [_pairs(row) for row in rho.matrix]}


def state_vector_to_json(psi: StateVector) -> dict:
    return {"n": psi.n_qubits, "vector": _pairs(psi.amplitudes)}


def save_state(path, state: DensityMatrix | StateVector) -> None:
    if isinstance(state, StateVector):
        data = state_vector_to_json(state)
    else:
        data = density_matrix_to_json(state)
    Path(path).write_text(json.dumps(data))
