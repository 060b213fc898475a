import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqkd.constellations import FourStateUDParams, OAPKParams, build_oapk
from cvqkd.ensemble import (
    Constellation,
    density_matrix,
    ensemble_entropy,
    entropy_via_weighted_gram,
    gram_matrix,
    gram_schmidt,
    mean_photon_number,
    overlap,
    shannon_entropy,
    von_neumann_entropy,
)
from cvqkd.errors import ConstellationError, NumericalError
from cvqkd.verification import random_constellation

from oracles import fock_entropy, fock_vector

E05 = 0.6065306597126334  # exp(-1/2)
TWO_STATE_EIGS = (0.8032653298563167, 0.1967346701436833)  # (1 +/- exp(-1/2)) / 2
TWO_STATE_ENTROPY = 0.7153491667107217  # binary entropy of TWO_STATE_EIGS


def two_state():
    return Constellation([0.5, -0.5], [0.5, 0.5])


@st.composite
def constellations(draw, max_states=16):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_constellation(np.random.default_rng(seed), max_states=max_states)


# --- Constellation --------------------------------------------------------

def test_constellation_rejects_duplicates():
    with pytest.raises(ConstellationError, match="coincide"):
        Constellation([0.3, 0.3 + 1e-13], [0.5, 0.5])


@pytest.mark.parametrize(
    "amps, probs",
    [([], []), ([1.0, 2.0], [1.0]), ([1.0, 2.0], [0.7, 0.4]), ([1.0, 2.0], [1.2, -0.2])],
)
def test_constellation_rejects_bad_inputs(amps, probs):
    with pytest.raises(ConstellationError):
        Constellation(amps, probs)


def test_constellation_is_immutable():
    c = two_state()
    with pytest.raises(ValueError):
        c.amplitudes[0] = 3.0


def test_dict_round_trip():
    c = Constellation([0.5 + 0.25j, -1.0], [0.25, 0.75], "x")
    back = Constellation.from_dict(c.to_dict())
    np.testing.assert_array_equal(back.amplitudes, c.amplitudes)
    np.testing.assert_array_equal(back.probabilities, c.probabilities)
    assert back.label == "x"


# --- overlap / Gram -------------------------------------------------------

@pytest.mark.parametrize("a", [0, 0.3, -1.2 + 0.7j, 2j])
def test_overlap_identity(a):
    assert overlap(a, a) == pytest.approx(1.0, abs=1e-15)


def test_overlap_real_pair():
    assert overlap(0.5, -0.5) == pytest.approx(E05, abs=1e-15)


def test_overlap_complex_pair():
    v = overlap(1, 1j)
    assert v.real == pytest.approx(0.19876611034641298, abs=1e-14)
    assert v.imag == pytest.approx(0.3095598756531122, abs=1e-14)


@pytest.mark.parametrize("a, b", [(0.5, -0.5), (1, 1j), (0.3 - 0.2j, -1.1 + 0.4j), (2.0, 1.5j)])
def test_overlap_matches_fock_inner_product(a, b):
    ref = np.vdot(fock_vector(a), fock_vector(b))
    assert abs(overlap(a, b) - ref) < 1e-12


def test_gram_single_state():
    np.testing.assert_array_equal(gram_matrix(Constellation([0.7j], [1.0])), [[1.0]])


def test_gram_two_state():
    np.testing.assert_allclose(gram_matrix(two_state()), [[1, E05], [E05, 1]], atol=1e-15)


def test_gram_real_four_state():
    a = np.array([0.4, -0.4, 0.9, -0.9])
    v = gram_matrix(Constellation(a, [0.25] * 4))
    np.testing.assert_allclose(v.imag, 0, atol=0)
    np.testing.assert_allclose(v.real, np.exp(-0.5 * (a[:, None] - a[None, :]) ** 2), atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(constellations())
def test_gram_invariants(c):
    v = gram_matrix(c)
    assert np.max(np.abs(v - v.conj().T)) <= 1e-14
    assert np.max(np.abs(np.diag(v) - 1)) <= 1e-14
    assert np.linalg.eigvalsh(v).min() >= -1e-12


# --- Gram-Schmidt ---------------------------------------------------------

def test_gram_schmidt_single():
    m = gram_schmidt(np.array([[1.0]]))
    np.testing.assert_array_equal(m.entries, [[1.0]])
    assert not m.rank_deficient


def test_gram_schmidt_two_state():
    m = gram_schmidt(gram_matrix(two_state())).entries
    assert m[1, 0] == pytest.approx(E05, abs=1e-15)
    assert m[1, 1] == pytest.approx(0.7950600976206501, abs=1e-15)
    assert m[0, 1] == 0


@pytest.mark.parametrize("n", [4, 8])
def test_gram_schmidt_reconstructs_oapk(n):
    c = build_oapk(OAPKParams(n, n, FourStateUDParams(0.5, 0.4)))
    v = gram_matrix(c)
    m = gram_schmidt(v).entries
    assert np.max(np.abs(m @ m.conj().T - v.T)) <= 1e-10


@settings(max_examples=80, deadline=None)
@given(constellations())
def test_projection_invariants(c):
    v = gram_matrix(c)
    pm = gram_schmidt(v)
    m = pm.entries
    assert np.all(np.triu(m, 1) == 0)
    d = np.diag(m)
    assert np.all(np.imag(d) == 0)
    assert np.all((d.real >= 0) & (d.real <= 1))
    assert np.max(np.abs(m @ m.conj().T - v.T)) <= 1e-10


def test_rank_deficiency_is_flagged():
    # 16 states of tiny amplitude span far fewer than 16 numerically distinct directions
    c = Constellation(0.01 * np.exp(2j * np.pi * np.arange(16) / 16), np.full(16, 1 / 16))
    pm = gram_schmidt(gram_matrix(c))
    assert pm.rank_deficient
    assert pm.effective_rank < 16
    m = pm.entries
    assert np.max(np.abs(m @ m.conj().T - gram_matrix(c).T)) <= 1e-10


def test_non_psd_input_raises():
    with pytest.raises(NumericalError, match="positive semidefinite"):
        gram_schmidt(np.array([[1.0, 2.0], [2.0, 1.0]]))


# --- density matrices and entropy ------------------------------------------

def test_density_single_state():
    c = Constellation([1.3 - 0.2j], [1.0])
    rho = density_matrix(c, gram_schmidt(gram_matrix(c)))
    np.testing.assert_allclose(rho, [[1.0]], atol=1e-15)


def test_density_two_state_spectrum():
    c = two_state()
    rho = density_matrix(c, gram_schmidt(gram_matrix(c)))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho))[::-1], TWO_STATE_EIGS, atol=1e-14)


def test_density_pure_weighting():
    c = Constellation([0.5, -0.5], [1.0, 0.0])
    rho = density_matrix(c, gram_schmidt(gram_matrix(c)))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho)), [0.0, 1.0], atol=1e-14)


@settings(max_examples=80, deadline=None)
@given(constellations())
def test_density_invariants(c):
    rho = density_matrix(c, gram_schmidt(gram_matrix(c)))
    assert np.max(np.abs(rho - rho.conj().T)) <= 1e-12
    assert abs(np.trace(rho) - 1) <= 1e-10
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_entropy_pure_state():
    assert von_neumann_entropy(np.array([[1.0, 0], [0, 0]])) == 0.0


def test_entropy_two_state():
    assert ensemble_entropy(two_state()) == pytest.approx(TWO_STATE_ENTROPY, abs=1e-12)


def test_entropy_maximally_mixed():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-15)


def test_entropy_batched_matches_loop():
    rhos = np.stack([np.eye(2) / 2, np.diag([1.0, 0.0]), np.diag([0.8, 0.2])])
    got = von_neumann_entropy(rhos)
    assert got.shape == (3,)
    np.testing.assert_allclose(got, [von_neumann_entropy(r) for r in rhos], atol=0)


def test_entropy_against_fock_basis():
    c = Constellation([0.9, -0.3 + 0.8j, -0.6 - 0.7j, 1.4j], [0.1, 0.2, 0.3, 0.4])
    assert ensemble_entropy(c) == pytest.approx(fock_entropy(c.amplitudes, c.probabilities), abs=1e-10)


def test_shannon_entropy_handles_zeros():
    assert shannon_entropy([0.5, 0.5, 0.0]) == 1.0
    np.testing.assert_allclose(shannon_entropy(np.array([[1.0, 0.0], [0.5, 0.5]])), [0.0, 1.0])


# --- mean photon number ---------------------------------------------------

def test_mean_photon_number():
    assert mean_photon_number(Constellation([0.5, -0.5], [0.5, 0.5])) == pytest.approx(0.25)
    psk = Constellation(np.exp(2j * np.pi * np.arange(5) / 5), np.full(5, 0.2))
    assert mean_photon_number(psk) == pytest.approx(1.0, abs=1e-15)
    a1, a2, p1, p2 = 0.4, 1.3, 0.35, 0.15
    c = Constellation([a1, -a1, a2, -a2], [p1, p1, p2, p2])
    assert mean_photon_number(c) == pytest.approx(2 * p1 * a1**2 + 2 * p2 * a2**2, abs=1e-15)


# --- weighted-Gram oracle ---------------------------------------------------

def test_weighted_gram_examples():
    assert entropy_via_weighted_gram(Constellation([0.2], [1.0])) == 0.0
    assert entropy_via_weighted_gram(two_state()) == pytest.approx(TWO_STATE_ENTROPY, abs=1e-12)


def test_weighted_gram_random_eight_state():
    rng = np.random.default_rng(8)
    a = rng.normal(size=8) + 1j * rng.normal(size=8)
    c = Constellation(a, rng.dirichlet(np.ones(8)))
    assert abs(entropy_via_weighted_gram(c) - ensemble_entropy(c)) <= 1e-9


# --- properties -------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(constellations())
def test_oracle_equivalence(c):
    assert abs(ensemble_entropy(c) - entropy_via_weighted_gram(c)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(constellations(), st.floats(0, 2 * math.pi))
def test_entropy_phase_invariance(c, theta):
    assert abs(ensemble_entropy(c) - ensemble_entropy(c.rotated(theta))) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(constellations())
def test_entropy_bounds(c):
    s = ensemble_entropy(c)
    assert 0 <= s <= math.log2(c.size) + 1e-12


@settings(max_examples=40, deadline=None)
@given(constellations(), st.integers(0, 15))
def test_entropy_zero_iff_pure(c, k):
    k = k % c.size
    pure = Constellation(c.amplitudes, np.eye(c.size)[k])
    assert ensemble_entropy(pure) <= 1e-12
    if c.size > 1 and np.max(c.probabilities) < 1 - 1e-6:
        assert ensemble_entropy(c) > 1e-12
