"""Key rates of discrete-modulated CV-QKD constellations over a pure-loss channel."""

import json
from importlib import resources

from .channel import ChannelParams, EnsembleMarker, bob_constellation, eve_constellation, posterior
from .constellations import (
    FourStateUDParams,
    OAPKParams,
    build_apk,
    build_four_state_ud,
    build_oapk,
    build_psk,
)
from .ensemble import (
    Constellation,
    ProjectionMatrix,
    density_matrix,
    ensemble_entropy,
    entropy_via_weighted_gram,
    gram_matrix,
    gram_schmidt,
    mean_photon_number,
    overlap,
    von_neumann_entropy,
)
from .errors import ConfigurationError, ConstellationError, NumericalError
from .optimizer import SearchSpec, optimize_four_state, sweep_optimal
from .rates import RateReport, build_grid, holevo_bound, mutual_information, secret_key_rate

__version__ = "0.1.0"


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package: ``constellation``, ``skr`` or ``optimize``."""
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
