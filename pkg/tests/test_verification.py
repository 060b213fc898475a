import numpy as np
import pytest

from cvqkd.channel import ChannelParams
from cvqkd.constellations import build_psk
from cvqkd.ensemble import Constellation, ensemble_entropy
from cvqkd.errors import ConfigurationError
from cvqkd.rates import build_grid, mutual_information
from cvqkd.verification import (
    McEstimate,
    mc_mutual_information,
    random_constellation,
    run_oracle_suite,
    spectrum_oracle_entropy,
)


def test_single_state_estimate_is_zero():
    est = mc_mutual_information(Constellation([0.4j], [1.0]), ChannelParams(0.5), 20_000, seed=3)
    assert est.mean_bits == 0.0
    # every sample is exactly zero, so the spread is degenerate
    assert est.standard_error_bits == 0.0


def test_psk8_brackets_quadrature():
    c = build_psk(8)
    ch = ChannelParams(0.3)
    quad = mutual_information(c, ch, build_grid(c, ch))
    est = mc_mutual_information(c, ch, 1_000_000, seed=11)
    assert est.standard_error_bits > 0
    assert est.brackets(quad, 3.0)


def test_same_seed_bit_identical():
    c = build_psk(4)
    ch = ChannelParams(0.4)
    a = mc_mutual_information(c, ch, 50_000, seed=7)
    b = mc_mutual_information(c, ch, 50_000, seed=7)
    assert a == b
    assert mc_mutual_information(c, ch, 50_000, seed=8) != a


def test_sharding_is_deterministic():
    c = build_psk(8)
    ch = ChannelParams(0.2)
    a = mc_mutual_information(c, ch, 30_001, seed=1, shards=4)
    b = mc_mutual_information(c, ch, 30_001, seed=1, shards=4)
    assert a == b
    assert a.shards == 4 and a.samples == 30_001


def test_minimum_samples():
    with pytest.raises(ConfigurationError):
        mc_mutual_information(build_psk(4), ChannelParams(0.5), 9_999)


def test_zero_probability_letters_never_drawn():
    c = Constellation([1.0, -1.0, 1j], [0.5, 0.5, 0.0])
    est = mc_mutual_information(c, ChannelParams(0.5), 20_000, seed=2)
    assert np.isfinite(est.mean_bits)


def test_brackets():
    est = McEstimate(0.5, 0.01, 10_000, 0)
    assert est.brackets(0.529)
    assert not est.brackets(0.531)


def test_spectrum_oracle_delegates():
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = random_constellation(rng)
        assert abs(spectrum_oracle_entropy(c) - ensemble_entropy(c)) <= 1e-9


def test_random_constellation_respects_bounds():
    rng = np.random.default_rng(0)
    for _ in range(50):
        c = random_constellation(rng, max_states=16, radius=3.0, min_distance=1e-2)
        assert 1 <= c.size <= 16
        assert np.all(np.abs(c.amplitudes) <= 3.0)
        if c.size > 1:
            d = np.abs(c.amplitudes[:, None] - c.amplitudes[None, :])
            assert d[np.triu_indices(c.size, 1)].min() >= 1e-2


def test_oracle_suite_passes():
    results = run_oracle_suite(seed=0, samples=100_000, cases=20)
    assert all(r.passed for r in results), [r for r in results if not r.passed]
