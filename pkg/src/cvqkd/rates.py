"""Mutual information, Holevo bound and secret key rate by 2D quadrature.

Integrals over Bob's heterodyne outcome run on a polar tensor grid centred on
the origin: Gauss-Legendre in the radius (weight ``r dr``) times the uniform
trapezoidal rule in the angle, which is spectrally accurate for the periodic
angular integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import ensemble
from .channel import (
    ChannelParams,
    EnsembleMarker,
    bob_statistics,
    eve_constellation,
    joint_log_density,
)
from .ensemble import Constellation
from .errors import ConfigurationError, NumericalError

DEFAULT_RESOLUTION = (96, 128)
# heterodyne outcomes have unit variance, so six of them leave ~e^-36 of mass outside
TRUNCATION_SIGMAS = 6.0
NORMALIZATION_TOL = 1e-6
CHI_CLAMP_TOL = 1e-8
NODE_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    radial: int
    angular: int
    radius: float
    normalization_error: float
    scheme: str = "polar: Gauss-Legendre radial x uniform angular"

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.radial, self.angular)


def polar_grid(radius: float, radial: int, angular: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating over the disc of the given radius."""
    x, w = roots_legendre(radial)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w * r
    theta = 2.0 * np.pi * np.arange(angular) / angular
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(wr * (2.0 * np.pi / angular), angular)
    return nodes, weights


def parse_resolution(resolution) -> tuple[int, int]:
    try:
        radial, angular = (int(v) for v in resolution)
    except (TypeError, ValueError):
        raise ConfigurationError(f"resolution must be a pair of integers, got {resolution!r}") from None
    if radial < 1 or angular < 1:
        raise ConfigurationError(f"resolution entries must be positive, got {resolution!r}")
    return radial, angular


def build_grid(c: Constellation, ch: ChannelParams, resolution=DEFAULT_RESOLUTION) -> QuadratureGrid:
    radial, angular = parse_resolution(resolution)
    radius = float(np.max(np.abs(c.amplitudes))) * math.sqrt(ch.tau) + TRUNCATION_SIGMAS
    nodes, weights = polar_grid(radius, radial, angular)

    # every letter's likelihood must integrate to one on this grid
    uniform = Constellation(c.amplitudes, np.full(c.size, 1.0 / c.size))
    lik = np.exp(joint_log_density(nodes, uniform, ch)) * c.size
    err = float(np.max(np.abs(weights @ lik - 1.0)))
    if err > NORMALIZATION_TOL:
        raise ConfigurationError(
            f"quadrature normalization self-test failed (error {err:.2e} > {NORMALIZATION_TOL:g}) "
            f"at resolution {radial}x{angular}; increase the resolution"
        )
    return QuadratureGrid(nodes, weights, radial, angular, radius, err)


@dataclass(frozen=True)
class RateReport:
    label: str
    n_states: int
    tau: float
    mutual_information_bits: float
    holevo_bits: float
    eve_entropy_bits: float
    eve_effective_rank: int
    eve_rank_deficient: bool
    quadrature_normalization_error: float
    radial_nodes: int
    angular_nodes: int

    @property
    def skr_bits(self) -> float:
        return self.mutual_information_bits - self.holevo_bits

    FIELDS = (
        "label",
        "n_states",
        "tau",
        "mutual_information_bits",
        "holevo_bits",
        "skr_bits",
        "eve_entropy_bits",
        "eve_effective_rank",
        "eve_rank_deficient",
        "quadrature_normalization_error",
        "radial_nodes",
        "angular_nodes",
    )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    def csv_row(self) -> list[str]:
        return [format_value(getattr(self, name)) for name in self.FIELDS]


def format_value(value) -> str:
    """Locale-independent text for CSV cells; floats at 12 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _weighted_sum(weights: np.ndarray, values: np.ndarray) -> float:
    # exact-rounded summation: independent of evaluation order
    return math.fsum((weights * values).tolist())


def _conditional_terms(c: Constellation, ch: ChannelParams, g: QuadratureGrid):
    log_pb, post = bob_statistics(g.nodes, c, ch)
    return g.weights * np.exp(log_pb), post


def _mutual_information(c: Constellation, wpb: np.ndarray, post: np.ndarray) -> float:
    h_prior = ensemble.shannon_entropy(c.probabilities)
    if c.size == 1:
        return 0.0
    return h_prior - _weighted_sum(wpb, ensemble.shannon_entropy(post))


def _holevo(c: Constellation, ch: ChannelParams, wpb: np.ndarray, post: np.ndarray):
    eve = eve_constellation(c, ch)
    if eve is EnsembleMarker.VACUUM or c.size == 1:
        return 0.0, 0.0, 1, False
    m = ensemble.gram_schmidt(ensemble.gram_matrix(eve))
    s_eve = ensemble.von_neumann_entropy(ensemble.density_matrix(eve, m))
    cond = np.empty(post.shape[0])
    for start in range(0, post.shape[0], NODE_CHUNK):
        stop = start + NODE_CHUNK
        cond[start:stop] = ensemble.von_neumann_entropy(ensemble.mixed_state(post[start:stop], m))
    chi = s_eve - _weighted_sum(wpb, cond)
    if chi < 0.0:
        if chi < -CHI_CLAMP_TOL:
            raise NumericalError(f"Holevo bound evaluated to {chi:.3e} < -{CHI_CLAMP_TOL:g}")
        chi = 0.0
    return chi, s_eve, m.effective_rank, m.rank_deficient


def mutual_information(c: Constellation, ch: ChannelParams, g: QuadratureGrid) -> float:
    """I(A;B) in bits for heterodyne detection."""
    wpb, post = _conditional_terms(c, ch, g)
    return _mutual_information(c, wpb, post)


def holevo_bound(c: Constellation, ch: ChannelParams, g: QuadratureGrid) -> float:
    """Eve's Holevo information about Bob's outcome, in bits.

    Eve's conditional states reuse a single Gram-Schmidt factorization of her
    ensemble; only the mixing weights change from node to node.
    """
    wpb, post = _conditional_terms(c, ch, g)
    return _holevo(c, ch, wpb, post)[0]


def secret_key_rate(c: Constellation, ch: ChannelParams, resolution=DEFAULT_RESOLUTION) -> RateReport:
    """Collective-attack, reverse-reconciliation key rate; may be negative."""
    g = build_grid(c, ch, resolution)
    wpb, post = _conditional_terms(c, ch, g)
    mi = _mutual_information(c, wpb, post)
    chi, s_eve, rank, deficient = _holevo(c, ch, wpb, post)
    return RateReport(
        label=c.label,
        n_states=c.size,
        tau=ch.tau,
        mutual_information_bits=mi,
        holevo_bits=chi,
        eve_entropy_bits=s_eve,
        eve_effective_rank=rank,
        eve_rank_deficient=deficient,
        quadrature_normalization_error=abs(float(np.sum(wpb)) - 1.0),
        radial_nodes=g.radial,
        angular_nodes=g.angular,
    )
