"""Markov chains in random environments: coupling constants, assumption
checks, coupling campaigns and decay estimators backed by the C++ core."""

from ._mcre import (
    CouplingConstants,
    DegenerateDecomposition,
    DegenerateFit,
    InconsistentSpec,
    InputError,
    InvalidPair,
    NumericOverflow,
    SpecError,
    alpha_mixing,
    coupling_campaign,
    derive_constants,
    model_info,
    normalize_assumption,
    rank_templates,
    simulate,
    subordinate_norm,
    tv_estimate,
    var_cvar,
    verify,
    zoo_keys,
)

__all__ = [
    "CouplingConstants",
    "DegenerateDecomposition",
    "DegenerateFit",
    "InconsistentSpec",
    "InputError",
    "InvalidPair",
    "NumericOverflow",
    "SpecError",
    "alpha_mixing",
    "coupling_campaign",
    "derive_constants",
    "model_info",
    "normalize_assumption",
    "rank_templates",
    "simulate",
    "subordinate_norm",
    "tv_estimate",
    "var_cvar",
    "verify",
    "zoo_keys",
]
