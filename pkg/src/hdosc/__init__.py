"""FHRR hyperdimensional computing on phases and on simulated oscillators."""

from .backends import OscillatorBackend, PhaseBackend, make_backend
from .errors import ConfigError, DegeneratePhaseError, DimensionError, IntegrationDivergedError
from .fhrr import (
    bind,
    bundle,
    distance,
    make_rng,
    random_codebook,
    random_symbol,
    similarity,
    unbind,
    unbundle,
    weighted_bundle,
    wrap,
)

__version__ = "0.1.0"
