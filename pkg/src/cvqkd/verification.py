"""Independent oracles for the quadrature and Gram-Schmidt code paths.

The Monte Carlo estimator draws from PCG64 streams and builds complex
Gaussian noise by the polar Box-Muller transform, so every call consumes a
fixed number of uniforms: results are bit-reproducible for a given
``(seed, shards)`` pair.  Shard ``k`` uses the ``k``-th child of
``SeedSequence(seed)`` and the first ``samples % shards`` shards take one extra
sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelParams, joint_log_density
from .ensemble import Constellation, entropy_via_weighted_gram
from .errors import ConfigurationError

MIN_SAMPLES = 10_000
_BLOCK = 65_536


@dataclass(frozen=True)
class McEstimate:
    mean_bits: float
    standard_error_bits: float
    samples: int
    seed: int
    shards: int = 1

    def brackets(self, value: float, k: float = 3.0) -> bool:
        return abs(value - self.mean_bits) <= k * self.standard_error_bits


def _shard_sizes(samples: int, shards: int) -> list[int]:
    base, extra = divmod(samples, shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]


def _pointwise_information(c: Constellation, ch: ChannelParams, rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random((n, 3))
    cdf = np.cumsum(c.probabilities)
    letters = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right"), c.size - 1)
    # 1 - u lies in (0, 1], so the log is finite
    noise = np.sqrt(-np.log1p(-u[:, 1])) * np.exp(2j * np.pi * u[:, 2])
    b = math.sqrt(ch.tau) * c.amplitudes[letters] + noise

    out = np.empty(n)
    for start in range(0, n, _BLOCK):
        sl = slice(start, start + _BLOCK)
        joint = joint_log_density(b[sl], c, ch)
        log_pb = logsumexp(joint, axis=-1)
        log_cond = np.take_along_axis(joint, letters[sl, None], axis=-1)[:, 0] - np.log(
            c.probabilities[letters[sl]]
        )
        out[sl] = (log_cond - log_pb) / math.log(2.0)
    return out


def mc_mutual_information(
    c: Constellation, ch: ChannelParams, samples: int = 1_000_000, seed: int = 0, shards: int = 1
) -> McEstimate:
    """Monte Carlo estimate of I(A;B) as the mean of log2 p(b|a)/p(b)."""
    if samples < MIN_SAMPLES:
        raise ConfigurationError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if shards < 1 or shards > samples:
        raise ConfigurationError(f"invalid shard count {shards}")
    children = np.random.SeedSequence(seed).spawn(shards)
    parts = [
        _pointwise_information(c, ch, np.random.Generator(np.random.PCG64(child)), n)
        for child, n in zip(children, _shard_sizes(samples, shards))
    ]
    values = np.concatenate(parts)
    return McEstimate(
        mean_bits=float(values.mean()),
        standard_error_bits=float(values.std(ddof=1) / math.sqrt(values.size)),
        samples=samples,
        seed=seed,
        shards=shards,
    )


def spectrum_oracle_entropy(c: Constellation) -> float:
    return entropy_via_weighted_gram(c)


def random_constellation(
    rng: np.random.Generator, max_states: int = 16, radius: float = 3.0, min_distance: float = 1e-2
) -> Constellation:
    """Uniform points in a disc with Dirichlet probabilities, redrawn until the
    pairwise distance bound holds."""
    n = int(rng.integers(1, max_states + 1))
    while True:
        r = radius * np.sqrt(rng.random(n))
        a = r * np.exp(2j * np.pi * rng.random(n))
        if n == 1:
            break
        d = np.abs(a[:, None] - a[None, :])
        if d[np.triu_indices(n, 1)].min() >= min_distance:
            break
    p = rng.dirichlet(np.ones(n))
    p /= p.sum()
    return Constellation(a, p, label=f"random{n}")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_oracle_suite(seed: int = 0, samples: int = 200_000, resolution=(96, 128), cases: int = 50) -> list[CheckResult]:
    """Quick self-check used by the ``verify`` command."""
    from .constellations import build_psk
    from .ensemble import ensemble_entropy
    from .rates import build_grid, mutual_information, secret_key_rate

    results = []
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        c = random_constellation(rng)
        worst = max(worst, abs(ensemble_entropy(c) - spectrum_oracle_entropy(c)))
    results.append(
        CheckResult("entropy oracle equivalence", worst <= 1e-9, f"{cases} random ensembles, max |diff| = {worst:.2e} bits")
    )

    c = build_psk(8)
    for tau in (0.1, 0.3, 0.5):
        ch = ChannelParams(tau)
        quad = mutual_information(c, ch, build_grid(c, ch, resolution))
        est = mc_mutual_information(c, ch, samples, seed)
        results.append(
            CheckResult(
                f"MC mutual information 8PSK tau={tau}",
                est.brackets(quad),
                f"quadrature {quad:.6f}, MC {est.mean_bits:.6f} +/- {est.standard_error_bits:.1e}",
            )
        )

    rep = secret_key_rate(c, ChannelParams(1.0), resolution)
    ok = rep.holevo_bits == 0.0 and abs(rep.skr_bits - rep.mutual_information_bits) <= 1e-10
    results.append(CheckResult("tau = 1 boundary", ok, f"chi = {rep.holevo_bits}, K = {rep.skr_bits:.6f}"))
    return results
