"""Capacity-distortion limits of ISAC channels under logarithmic loss.

Subpackages by task:

- ``info``: entropy/mutual-information arithmetic and concave envelopes
- ``channel``: channel construction, degradedness tests, case classification
- ``closed_form``: exact binary/Gaussian tradeoff curves
- ``bounds``: generic lower/upper bound solver for finite channels
- ``extremal``: numerical verification of the extremal inequalities
- ``sim``: Monte Carlo simulation of the superposition coding scheme
- ``cli``: command-line front end
"""

__version__ = "0.1.0"

from .channel import (
    BinaryIsacParams,
    DegradednessVerdict,
    GaussianIsacParams,
    IsacChannel,
    TradeoffCase,
    binary_channel,
    classify_binary_case,
    classify_gaussian_case,
    couple_to_physical,
    degradedness,
    is_stochastically_degraded,
    marginals,
)
from .closed_form import (
    CurvePoint,
    DistortionRange,
    binary_capacity_distortion,
    binary_distortion_range,
    gaussian_capacity_logloss,
    gaussian_distortion_range_logloss,
    gaussian_pprime,
    logloss_from_conventional,
    mse_capacity,
    mse_distortion_range,
    solve_alpha_d,
    state_split_transform,
)
from .info import (
    JointPmf,
    PiecewiseLinearEnvelope,
    Pmf,
    binary_convolve,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    gaussian_differential_entropy,
    mutual_information,
    upper_concave_envelope,
)

__all__ = [
    "__version__",
    "BinaryIsacParams",
    "DegradednessVerdict",
    "GaussianIsacParams",
    "IsacChannel",
    "TradeoffCase",
    "binary_channel",
    "classify_binary_case",
    "classify_gaussian_case",
    "couple_to_physical",
    "degradedness",
    "is_stochastically_degraded",
    "marginals",
    "CurvePoint",
    "DistortionRange",
    "binary_capacity_distortion",
    "binary_distortion_range",
    "gaussian_capacity_logloss",
    "gaussian_distortion_range_logloss",
    "gaussian_pprime",
    "logloss_from_conventional",
    "mse_capacity",
    "mse_distortion_range",
    "solve_alpha_d",
    "state_split_transform",
    "JointPmf",
    "PiecewiseLinearEnvelope",
    "Pmf",
    "binary_convolve",
    "binary_entropy",
    "conditional_entropy",
    "conditional_mutual_information",
    "entropy",
    "gaussian_differential_entropy",
    "mutual_information",
    "upper_concave_envelope",
]
