import itertools
import math

import numpy as np
import pytest
from scipy.special import entr

from irrcorr.correlations import (
    ContinuitySchedule,
    GHZSpec,
    analyze_state,
    binary_entropy,
    ghz_family,
    ghz_family_generator,
    ghz_limit_marginal_state,
    ghz_marginal_condition,
    ghz_state,
    spectrum_continuity,
    spectrum_from_ladder,
    spectrum_full_rank,
    theorem3_spectrum,
    total_correlation,
)
from irrcorr.errors import RankDeficientError, ValidationError
from irrcorr.qstate import (
    depolarize,
    hermitian_exp,
    maximally_mixed,
    partial_trace,
    tensor_all,
    trace_distance,
    von_neumann_entropy,
)
from irrcorr.spectrum import CorrelationSpectrum
from irrcorr.stabilizer import StabilizerGroup, theorem2_spectrum, to_density_matrix

from conftest import projector, random_density, random_full_rank


def entr_binary(x):
    """scipy-based binary entropy oracle (nats -> bits)."""
    return float((entr(x) + entr(1 - x)) / math.log(2))


def test_binary_entropy_oracle():
    for x in (0.1, 0.25, 0.5, 0.9):
        assert binary_entropy(x) == pytest.approx(entr_binary(x), abs=1e-12)
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.9) == pytest.approx(0.468996, abs=1e-6)


def test_total_correlation_sigma_states(sigma1, sigma2):
    assert total_correlation(sigma2) == pytest.approx(3.0)
    assert total_correlation(sigma1) == pytest.approx(2.0)


def test_total_correlation_product(rng):
    rho = tensor_all([random_density(1, rng) for _ in range(3)])
    assert total_correlation(rho) == pytest.approx(0.0, abs=1e-9)


def test_full_rank_maximally_mixed():
    s = spectrum_full_rank(maximally_mixed(3))
    assert s.method == "numeric"
    assert all(abs(v) < 1e-12 for v in s.c_of_k.values())


@pytest.mark.parametrize("seed", range(3))
def test_full_rank_sum_rule(seed):
    rho = random_full_rank(3, np.random.default_rng(seed))
    s = spectrum_full_rank(rho)
    assert sum(s.c_of_k.values()) == pytest.approx(total_correlation(rho), abs=1e-6)
    assert all(v >= -1e-6 for v in s.c_of_k.values())


def test_full_rank_depolarized_sigma1(sigma1):
    s = spectrum_full_rank(depolarize(sigma1, 1e-2))
    assert s[3] <= 0.02
    assert s[2] == pytest.approx(2.0, abs=0.1)


def test_full_rank_gate(sigma2):
    with pytest.raises(RankDeficientError):
        spectrum_full_rank(sigma2)


def test_full_rank_max_order(rng):
    rho = random_full_rank(3, rng)
    s = spectrum_full_rank(rho, max_order=2)
    assert list(s.c_of_k) == [2] and not s.is_complete
    assert s.c_total == pytest.approx(total_correlation(rho))


@pytest.mark.parametrize("fixture,expected", [("sigma1", {2: 2, 3: 0}), ("sigma2", {2: 2, 3: 1})])
def test_continuity_sigma_examples(request, fixture, expected):
    s = spectrum_continuity(request.getfixturevalue(fixture))
    assert s.method == "numeric-extrapolated"
    assert s.uncertainty is not None
    for k, v in expected.items():
        assert s[k] == pytest.approx(v, abs=5e-2)


def test_continuity_on_full_rank_input(rng):
    rho = random_full_rank(3, rng, floor=0.02)
    direct = spectrum_full_rank(rho)
    cont = spectrum_continuity(rho)
    # first schedule step moves the state by at most eps = 1e-2 in trace distance
    assert cont.max_deviation(direct) < 0.05
    assert cont.converged


def test_continuity_converges_with_loose_tolerance(sigma2):
    s = spectrum_continuity(sigma2, ContinuitySchedule(convergence_tol=5e-3))
    assert s.converged and s.uncertainty < 5e-3


def test_schedule_validation():
    with pytest.raises(ValidationError):
        ContinuitySchedule((1e-3, 1e-2))
    with pytest.raises(ValidationError):
        ContinuitySchedule((0.0,))
    assert ContinuitySchedule.parse("1e-2,1e-3").eps_sequence == (1e-2, 1e-3)


def test_analyze_dispatch(sigma2):
    assert analyze_state(maximally_mixed(2)).method == "numeric"
    assert analyze_state(sigma2).method == "numeric-extrapolated"
    with pytest.raises(ValidationError):
        analyze_state(sigma2, "bogus")


def test_spectrum_invariants_enforced():
    with pytest.raises(ValidationError):
        CorrelationSpectrum(3, (3.0, 1.0, 0.0), {2: 2.0, 3: 1.0}, 2.5, "numeric")
    with pytest.raises(ValidationError):
        CorrelationSpectrum(3, (3.0, 1.0, 0.0), {2: 1.5, 3: 1.0}, 2.5, "numeric")
    with pytest.raises(ValidationError):
        spectrum_from_ladder(2, (1.0, 1.5), "numeric")


def test_spectrum_round_trip_json_and_csv():
    s = spectrum_from_ladder(3, (3.0, 1.25, 0.5), "numeric-extrapolated", uncertainty=1e-3, converged=False)
    assert CorrelationSpectrum.loads(s.dumps()) == s
    lines = s.to_csv().splitlines()
    assert lines[0] == "k,C_k,uncertainty" and len(lines) == 3


def test_ghz_state_examples(sigma2):
    psi = ghz_state(GHZSpec(3, 0.5))
    assert np.allclose(psi.density_matrix().matrix, sigma2.matrix)
    bell = ghz_state(GHZSpec(2, 0.5)).amplitudes
    assert np.allclose(bell, np.array([1, 0, 0, 1]) / np.sqrt(2))
    rng = np.random.default_rng(7)
    for _ in range(5):
        spec = GHZSpec(int(rng.integers(2, 6)), float(rng.uniform(0.01, 0.99)), float(rng.uniform(0, 6)))
        assert np.linalg.norm(ghz_state(spec).amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_ghz_spec_validation():
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValidationError):
            GHZSpec(3, bad)
    with pytest.raises(ValidationError):
        GHZSpec(1, 0.5)


def test_theorem3_values():
    s = theorem3_spectrum(GHZSpec(3, 0.5))
    assert s.c_of_k == {2: 2.0, 3: 1.0}
    s = theorem3_spectrum(GHZSpec(5, 0.5))
    assert s.c_of_k == {2: 4.0, 3: 0.0, 4: 0.0, 5: 1.0}
    e = entr_binary(0.9)
    s = theorem3_spectrum(GHZSpec(3, 0.9))
    assert s[2] == pytest.approx(2 * e, abs=1e-12) and s[3] == pytest.approx(e, abs=1e-12)
    assert s.method == "ghz-analytic"


def test_theorem3_two_qubits_is_mutual_information():
    spec = GHZSpec(2, 0.3)
    rho = ghz_state(spec).density_matrix()
    assert theorem3_spectrum(spec)[2] == pytest.approx(total_correlation(rho), abs=1e-9)


@pytest.mark.parametrize("n,alpha_sq", [(2, 0.5), (3, 0.2), (4, 0.7), (5, 0.9)])
def test_ghz_total_correlation(n, alpha_sq):
    rho = ghz_state(GHZSpec(n, alpha_sq, 0.4)).density_matrix()
    assert total_correlation(rho) == pytest.approx(n * binary_entropy(alpha_sq), abs=1e-9)


def test_ghz_family_trivial():
    assert np.allclose(ghz_family(3, 0.0, np.zeros(3)).matrix, np.eye(8) / 8)


@pytest.mark.parametrize("alpha_sq,phi", [(0.5, 0.0), (0.3, 1.1)])
def test_ghz_family_limit(alpha_sq, phi):
    spec = GHZSpec(3, alpha_sq, phi)
    lam = 20.0
    fam = ghz_family(3, lam, lam * spec.bloch, spec)
    assert trace_distance(fam, ghz_state(spec).density_matrix()) < 1e-6


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ghz_family_product_form_matches_exponential(n):
    lam_vec = 0.8 * np.array([0.6, 0.0, 0.8])
    e = hermitian_exp(ghz_family_generator(n, 0.4, lam_vec))
    e /= np.trace(e)
    assert np.max(np.abs(ghz_family(n, 0.4, lam_vec).matrix - e)) <= 1e-10


def test_marginal_condition_fixed_point():
    assert np.allclose(ghz_marginal_condition([0, 0, 0.7]), [0, 0, 0.7])
    assert np.allclose(ghz_marginal_condition([0, 0, -0.4]), [0, 0, -0.4])


def test_marginal_condition_errors():
    with pytest.raises(ValidationError):
        ghz_marginal_condition([0, 0, 0])
    with pytest.raises(OverflowError):
        ghz_marginal_condition([0, 0, 40.0])


@pytest.mark.parametrize("n,lam_vec", [(3, (0.3, 0.2, 0.5)), (4, (-0.6, 0.9, 0.2)), (3, (1.0, 0.0, -0.3))])
def test_marginal_condition_preserves_marginals(n, lam_vec):
    gamma = 0.4
    before = ghz_family(n, gamma, lam_vec)
    after = ghz_family(n, gamma, ghz_marginal_condition(lam_vec))
    for keep in itertools.combinations(range(1, n + 1), n - 1):
        assert trace_distance(partial_trace(before, keep), partial_trace(after, keep)) <= 1e-10
    assert trace_distance(before, after) > 1e-3


def test_marginal_condition_limit_is_diagonal_mixture():
    spec = GHZSpec(3, 0.3, 0.7)
    lam = 30.0
    lz = ghz_marginal_condition(lam * spec.bloch)
    assert np.tanh(lz[2]) == pytest.approx(spec.bloch[2], abs=1e-12)
    # with gamma -> infinity as well, the primed family approaches the diagonal mixture
    fam = ghz_family(3, lam, lz)
    assert trace_distance(fam, ghz_limit_marginal_state(spec)) < 1e-9
    assert von_neumann_entropy(ghz_limit_marginal_state(spec)) == pytest.approx(binary_entropy(0.3))


def test_cross_method_agreement_n3(sigma2):
    g = StabilizerGroup.from_text("+XXX,+ZZI,+IZZ")
    t2 = theorem2_spectrum(g)
    t3 = theorem3_spectrum(GHZSpec(3, 0.5))
    assert t2.c_of_k == t3.c_of_k and t2.c_total == t3.c_total
    assert spectrum_continuity(sigma2).max_deviation(t3) < 5e-2


@pytest.mark.parametrize("alpha_sq", [0.3, 0.8])
def test_theorem3_interior_ladder_numeric_n4(alpha_sq):
    spec = GHZSpec(4, alpha_sq, 0.5)
    numeric = spectrum_continuity(ghz_state(spec).density_matrix())
    exact = theorem3_spectrum(spec)
    assert numeric.max_deviation(exact) < 5e-2
    assert np.allclose(numeric.entropy_ladder, exact.entropy_ladder, atol=5e-2)


@pytest.mark.parametrize("text", [
    "+ZZII,+IZZI",
    "+XXXX,+ZZII,+IZZI,+IIZZ",
    "+XZZX,+ZIIZ",
    "+ZIII,+IXXI,+IZZI",
    "+XXII,+ZZII,+IIXX,+IIZZ",
    "+ZXZI,+IZXZ",
])
def test_theorem2_matches_continuity_n4(text):
    g = StabilizerGroup.from_text(text)
    numeric = spectrum_continuity(to_density_matrix(g))
    assert numeric.max_deviation(theorem2_spectrum(g)) < 5e-2


def test_w_state_has_no_three_body_correlation():
    # pure 3-qubit states other than GHZ type are fixed by their 2-marginals
    w = projector([0, 1, 1, 0, 1, 0, 0, 0])
    s = spectrum_continuity(w)
    assert s[3] == pytest.approx(0.0, abs=5e-2)
    assert s.c_total == pytest.approx(total_correlation(depolarize(w, 1e-4)), abs=1e-6)
