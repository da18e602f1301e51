"""Fuzzy analysis of questionnaires built on CUB models for ordinal ratings."""

__version__ = "0.1.0"

from .aggregate import (
    CompositeResult, RespondentAggregate, WeightVector, category_weighted_membership,
    composite, fuzzy_prop_membership, fuzzy_prop_uncertainty, hamming_distance, iwam,
    log_inverse_weights, membership_aggregate,
)
from .cub import (
    CubFit, CubParams, CubShelterParams, FitOptions, cub_pmf, cub_shelter_pmf, fit_cub,
    fit_cub_shelter, loglik, lr_test, select_model, shifted_binomial, simulate, std_errors,
)
from .fuzzy import (
    IfsProfile, IfsTriple, SplineConfig, cub_fuzzy_profile, empirical_profile, fuzzy_accuracy,
    fuzzy_score, spline_profile,
)
from .ratings import Edf, RatingSample, RatingScale, build_sample, edf, reverse_sample
