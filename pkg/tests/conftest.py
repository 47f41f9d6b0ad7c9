import numpy as np
import pytest

from irrcorr.qstate import DensityMatrix, StateVector
from irrcorr.stabilizer import PauliString, gf2_rank, validate_group

ACCEPTANCE_LINES: list[str] = []


def random_density(n, rng, rank=None):
    d = 1 << n
    k = d if rank is None else rank
    a = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = a @ a.conj().T
    return DensityMatrix(n, m / np.trace(m))


def random_full_rank(n, rng, floor=1e-3):
    """Ginibre state mixed with a little white noise so the min eigenvalue is >= floor."""
    d = 1 << n
    rho = random_density(n, rng)
    return DensityMatrix(n, (1 - d * floor) * rho.matrix + floor * np.eye(d))


def random_group(rng, n, m):
    """Rejection-sample m independent commuting signed Pauli strings."""
    gens = []
    while len(gens) < m:
        p = PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)), 2 * int(rng.integers(2)))
        if p.is_identity() or not all(p.commutes(g) for g in gens):
            continue
        if gf2_rank([g.symplectic() for g in gens] + [p.symplectic()]) == len(gens) + 1:
            gens.append(p)
    return validate_group(gens)


LETTER_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(label):
    """Kronecker-product oracle for a signed label like "-YYX"."""
    sign = -1 if label.startswith("-") else 1
    out = np.ones((1, 1), dtype=complex)
    for c in label.lstrip("+-"):
        out = np.kron(out, LETTER_MATRICES[c])
    return sign * out


def projector(vec):
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return StateVector(int(np.log2(len(v))), v).density_matrix()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sigma1():
    m = np.zeros((8, 8), dtype=complex)
    m[0, 0] = m[7, 7] = 0.5
    return DensityMatrix(3, m)


@pytest.fixture
def sigma2():
    v = np.zeros(8)
    v[0] = v[7] = 1
    return projector(v)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
