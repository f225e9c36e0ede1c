"""Honeyword security metrics: flatness and success-number, exactly.

A honeyword system stores each account's real password among k-1
decoys.  This package computes the two standard security metrics of the
optimal distinguishing attacker -- the flatness curve epsilon(i) and the
success-number curve lambda_U(i) -- in closed form from the password and
honeyword distributions, and validates every formula against Monte
Carlo game simulation and exact brute-force enumeration.
"""

from .core import (
    ContinuousRatioModel,
    PasswordModel,
    RatioSpectrum,
    build_ratio_spectrum,
    verify_ratio_identity,
)
from .errors import (
    DegenerateSampleError,
    DomainError,
    HoneymetricsError,
    InstanceTooLargeError,
    NumericalError,
    SpaceMismatchError,
)
from .flatness import (
    MetricCurve,
    collision_bound,
    flatness_continuous,
    flatness_discrete,
    theorem_epsilon1_discrete,
    uniform_collision_closed_form,
    uniform_missing_mass,
    zipf_flatness_closed_form,
    zipf_missing_mass,
    zipf_missing_mass_direct,
    zipf_missing_mass_series,
)
from .games import (
    brute_force_flatness,
    brute_force_sn,
    gen_swl,
    monte_carlo_flatness,
    monte_carlo_sn,
    optimal_guess_order,
    sn_game,
)
from .models import (
    Corpus,
    linear_example,
    sample,
    train_list_model,
    train_list_model_indices,
    uniform_model,
    zipf_model,
    zipf_params,
)
from .successnum import (
    PhiTable,
    WSample,
    expected_v,
    lambda_curve,
    lambda_delta_approx,
    phi_table,
    sample_w,
)

__version__ = "1.0.0"

__all__ = [
    "ContinuousRatioModel", "PasswordModel", "RatioSpectrum",
    "build_ratio_spectrum", "verify_ratio_identity",
    "HoneymetricsError", "SpaceMismatchError", "DomainError",
    "NumericalError", "InstanceTooLargeError", "DegenerateSampleError",
    "MetricCurve", "flatness_discrete", "flatness_continuous",
    "theorem_epsilon1_discrete", "zipf_flatness_closed_form",
    "uniform_missing_mass", "zipf_missing_mass", "zipf_missing_mass_direct",
    "zipf_missing_mass_series", "collision_bound", "uniform_collision_closed_form",
    "Corpus", "uniform_model", "zipf_model", "zipf_params", "sample",
    "train_list_model", "train_list_model_indices", "linear_example",
    "WSample", "PhiTable", "sample_w", "expected_v", "lambda_curve",
    "phi_table", "lambda_delta_approx",
    "gen_swl", "optimal_guess_order", "monte_carlo_flatness",
    "sn_game", "monte_carlo_sn", "brute_force_flatness", "brute_force_sn",
]
