"""Beat tracking post-processing: PLPDP, DP, HMM and peak picking."""

from ._plpdp import (
    DEFAULT_FPS,
    ConfigError,
    ParseError,
    combined_plp,
    fmeasure,
    penalty,
    pick_peaks,
    plp,
    plpdp_conditioned,
    synth_activation,
    synth_corpus,
    tempo_condition,
    tempo_stability,
    tempo_transition,
    track,
)

__all__ = [
    "DEFAULT_FPS",
    "ConfigError",
    "ParseError",
    "combined_plp",
    "fmeasure",
    "penalty",
    "pick_peaks",
    "plp",
    "plpdp_conditioned",
    "synth_activation",
    "synth_corpus",
    "tempo_condition",
    "tempo_stability",
    "tempo_transition",
    "track",
]
