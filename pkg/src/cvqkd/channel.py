"""Pure-loss channel: a beam splitter of transmittance tau mixing Alice's state
with vacuum.  Bob heterodynes one output port; Eve keeps the other."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .ensemble import DUPLICATE_TOL, Constellation
from .errors import ConfigurationError, NumericalError


class EnsembleMarker(enum.Enum):
    """Stand-in for an Eve ensemble whose states are all identical."""

    VACUUM = "vacuum"


@dataclass(frozen=True)
class ChannelParams:
    transmittance: float

    def __post_init__(self):
        try:
            tau = float(self.transmittance)
        except (TypeError, ValueError):
            raise ConfigurationError(f"transmittance must be a number, got {self.transmittance!r}") from None
        if not (math.isfinite(tau) and 0.0 < tau <= 1.0):
            raise ConfigurationError(f"transmittance must lie in (0, 1], got {tau!r}")

    @property
    def tau(self) -> float:
        return float(self.transmittance)


def bob_constellation(c: Constellation, ch: ChannelParams) -> Constellation:
    return c.scaled(math.sqrt(ch.tau), label=f"{c.label}@bob")


def eve_constellation(c: Constellation, ch: ChannelParams) -> Constellation | EnsembleMarker:
    """Eve's ensemble, or ``EnsembleMarker.VACUUM`` when her port carries
    vacuum (tau = 1) or all her states coincide to within the duplicate
    tolerance; in both cases she learns nothing."""
    factor = math.sqrt(1.0 - ch.tau)
    if factor == 0.0:
        return EnsembleMarker.VACUUM
    if c.size > 1:
        spread = float(np.max(np.abs(c.amplitudes[:, None] - c.amplitudes[None, :])))
        if factor * spread <= DUPLICATE_TOL:
            return EnsembleMarker.VACUUM
    return c.scaled(factor, label=f"{c.label}@eve")


def heterodyne_likelihood(b, alpha: complex, ch: ChannelParams):
    """Density of Bob's heterodyne outcome ``b`` given Alice sent ``alpha``."""
    d = np.abs(np.asarray(b) - math.sqrt(ch.tau) * complex(alpha)) ** 2
    out = np.exp(-d) / math.pi
    return float(out) if out.ndim == 0 else out


def joint_log_density(b, c: Constellation, ch: ChannelParams) -> np.ndarray:
    """``log(p_i * p(b | alpha_i))`` with shape ``b.shape + (N,)``."""
    b = np.asarray(b, dtype=complex)
    centers = math.sqrt(ch.tau) * c.amplitudes
    with np.errstate(divide="ignore"):
        logp = np.log(c.probabilities)
    return logp - np.abs(b[..., None] - centers) ** 2 - math.log(math.pi)


def bob_statistics(b, c: Constellation, ch: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(log p(b), posterior)`` at each outcome.

    Computed with max-subtraction so far-tail outcomes do not underflow.
    """
    joint = joint_log_density(b, c, ch)
    log_pb = logsumexp(joint, axis=-1)
    if not np.all(np.isfinite(log_pb)):
        raise NumericalError("outcome density is not finite; non-finite outcome supplied")
    post = np.exp(joint - log_pb[..., None])
    # renormalize to absorb exp/log round-off
    post /= post.sum(axis=-1, keepdims=True)
    return log_pb, post


def posterior(b, c: Constellation, ch: ChannelParams) -> np.ndarray:
    """``p(alpha_i | b)``; last axis indexes the letters."""
    return bob_statistics(b, c, ch)[1]
