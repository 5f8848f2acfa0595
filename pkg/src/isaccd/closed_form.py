"""Closed-form capacity-distortion curves for the binary and Gaussian families.

Every evaluator takes a distortion target inside the family's feasible
range and returns a CurvePoint whose ``exactness`` records whether the
value is the capacity itself or only a certified lower bound (the
intermediate regime under the relaxed loss conventions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import (
    BinaryIsacParams,
    GaussianIsacParams,
    TradeoffCase,
    classify_binary_case,
    classify_gaussian_case,
)
from .errors import DomainError, RangeError, UsageError
from .info import binary_convolve, binary_entropy, gaussian_differential_entropy

EXACT = "exact"
LOWER_BOUND = "lower_bound"
UPPER_BOUND = "upper_bound"  # used only by the generic bound solver

_TWO_PI_E = 2.0 * math.pi * math.e
#: slack when checking that a target lies inside a distortion range
RANGE_TOL = 1e-12


@dataclass(frozen=True)
class CurvePoint:
    """One (distortion, rate) pair; rate in bits per channel use."""

    d: float
    c: float
    exactness: str = EXACT

    def __post_init__(self):
        if self.exactness not in (EXACT, LOWER_BOUND, UPPER_BOUND):
            raise UsageError(f"unknown exactness flag {self.exactness!r}")


@dataclass(frozen=True)
class DistortionRange:
    d_min: float
    d_max: float

    def __post_init__(self):
        if not (self.d_min <= self.d_max):
            raise UsageError("distortion range requires d_min <= d_max")

    def clamp(self, d: float, what: str = "distortion") -> float:
        """Validate d against the range, absorbing float round-off only."""
        if not (self.d_min - RANGE_TOL <= d <= self.d_max + RANGE_TOL):
            raise RangeError(
                f"{what} {d!r} outside the feasible range "
                f"[{self.d_min!r}, {self.d_max!r}]",
                d_min=self.d_min,
                d_max=self.d_max,
            )
        return min(max(d, self.d_min), self.d_max)


def binary_distortion_range(params: BinaryIsacParams) -> DistortionRange:
    """Feasible log-loss distortions of the binary family."""
    b2, bs = params.beta2, params.beta_s
    d_min = binary_entropy(b2) + binary_entropy(bs) - binary_entropy(binary_convolve(b2, bs))
    return DistortionRange(d_min, binary_entropy(bs))


def _hsuy2(params: BinaryIsacParams, alpha: float) -> float:
    """Residual state entropy when the estimator knows the cloud center and
    the split parameter is alpha."""
    b2, bs = params.beta2, params.beta_s
    e = binary_convolve(alpha, b2)
    return binary_entropy(bs) + binary_entropy(e) - binary_entropy(binary_convolve(e, bs))


def solve_alpha_d(params: BinaryIsacParams, d: float) -> float:
    """Invert the (monotone) split-to-distortion map by bisection.

    Returns the alpha in [0, 1/2] whose residual state entropy equals d;
    the residual of the defining equation is below 1e-12.
    """
    rng = binary_distortion_range(params)
    d = rng.clamp(d)
    lo, hi = 0.0, 0.5
    f_lo = _hsuy2(params, lo) - d
    f_hi = _hsuy2(params, hi) - d
    if f_lo >= 0.0:
        return lo
    if f_hi <= 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _hsuy2(params, mid) - d <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14:
            break
    return 0.5 * (lo + hi)


def binary_capacity_distortion(
    params: BinaryIsacParams, d: float, loss: str = "symbol"
) -> CurvePoint:
    """Binary-family tradeoff at distortion d under the given loss convention.

    loss: "symbol" (per-letter soft estimates) or "sequence" (a joint soft
    estimate over the whole block).  The two agree except in the timesharing
    regime, where only a lower bound is known under sequence loss.
    """
    if loss not in ("symbol", "sequence"):
        raise UsageError(f"loss must be 'symbol' or 'sequence', got {loss!r}")
    rng = binary_distortion_range(params)
    d = rng.clamp(d)
    b1, b2, bs = params.beta1, params.beta2, params.beta_s
    b2s = binary_convolve(b2, bs)
    case = classify_binary_case(params)
    if case is TradeoffCase.CONSTANT:
        return CurvePoint(d, 1.0 - binary_entropy(b1), EXACT)
    if case is TradeoffCase.TIMESHARE:
        slope = (binary_entropy(b2s) - binary_entropy(b1)) / (
            binary_entropy(b2s) - binary_entropy(b2)
        )
        c = slope * (d - binary_entropy(bs)) + 1.0 - binary_entropy(b1)
        exactness = EXACT if loss == "symbol" else LOWER_BOUND
        return CurvePoint(d, c, exactness)
    alpha = solve_alpha_d(params, d)
    c = (
        1.0
        - binary_entropy(b1)
        + binary_entropy(binary_convolve(alpha, b1))
        - binary_entropy(binary_convolve(alpha, b2s))
    )
    return CurvePoint(d, c, EXACT)


def gaussian_distortion_range_logloss(params: GaussianIsacParams) -> DistortionRange:
    """Feasible log-loss distortions (bits) of the Gaussian family."""
    n2, ns, p = params.n2, params.ns, params.p
    d_min = gaussian_differential_entropy(n2 * ns / (n2 + ns))
    d_max = gaussian_differential_entropy((p + n2) * ns / (p + n2 + ns))
    return DistortionRange(d_min, d_max)


def gaussian_pprime(params: GaussianIsacParams, d: float) -> float:
    """Superposition power split that meets a log-loss distortion target.

    Inverts h(S | U, Y2) = d for the satellite power; lies in [0, P] with
    the endpoints hit exactly at the range endpoints.
    """
    rng = gaussian_distortion_range_logloss(params)
    d = rng.clamp(d)
    n2, ns = params.n2, params.ns
    p_prime = ns / (_TWO_PI_E * ns * 2.0 ** (-2.0 * d) - 1.0) - n2
    return min(max(p_prime, 0.0), params.p)


def _gaussian_param_curve(params: GaussianIsacParams, d: float) -> float:
    """Rate of the Gaussian superposition family at log-loss distortion d."""
    n1, n2, ns, p = params.n1, params.n2, params.ns, params.p
    inner = _TWO_PI_E * (n1 - n2) * ns + (n2 + ns - n1) * 2.0 ** (2.0 * d)
    return 0.5 * math.log2((p + n2 + ns) / (_TWO_PI_E * n1 * ns**2) * inner)


def gaussian_capacity_logloss(params: GaussianIsacParams, d: float) -> CurvePoint:
    """Gaussian-family tradeoff at log-loss distortion d (both loss types)."""
    rng = gaussian_distortion_range_logloss(params)
    d = rng.clamp(d)
    n1, n2, ns, p = params.n1, params.n2, params.ns, params.p
    case = classify_gaussian_case(params)
    if case is TradeoffCase.CONSTANT:
        return CurvePoint(d, 0.5 * math.log2((p + n1) / n1), EXACT)
    if case is TradeoffCase.TIMESHARE:
        # line through the endpoints of the superposition curve; only a
        # lower bound is known in this regime
        slope = math.log2((p + n1) * (n2 + ns) / (n1 * (p + n2 + ns))) / math.log2(
            (p + n2) * (n2 + ns) / ((p + n2 + ns) * n2)
        )
        c = 0.5 * math.log2((p + n1) / n1) + slope * (d - rng.d_max)
        return CurvePoint(d, c, LOWER_BOUND)
    return CurvePoint(d, _gaussian_param_curve(params, d), EXACT)


def mse_distortion_range(params: GaussianIsacParams) -> DistortionRange:
    """Feasible squared-error distortions of the Gaussian family."""
    n2, ns, p = params.n2, params.ns, params.p
    return DistortionRange(n2 * ns / (n2 + ns), (p + n2) * ns / (p + n2 + ns))


def mse_capacity(params: GaussianIsacParams, d: float) -> CurvePoint:
    """Gaussian-family tradeoff under squared error; exact in every regime."""
    rng = mse_distortion_range(params)
    d = rng.clamp(d)
    n1, n2, ns, p = params.n1, params.n2, params.ns, params.p
    if classify_gaussian_case(params) is TradeoffCase.CONSTANT:
        return CurvePoint(d, 0.5 * math.log2((p + n1) / n1), EXACT)
    inner = (n1 - n2) * ns + (n2 + ns - n1) * d
    c = 0.5 * math.log2((p + n2 + ns) / (n1 * ns**2) * inner)
    return CurvePoint(d, c, EXACT)


def state_split_transform(params: GaussianIsacParams, d: float) -> tuple:
    """Reduce the intermediate squared-error regime to the solved one.

    Splits the state into an estimable part (which becomes the new state)
    and a remainder folded into the sensing noise.  Returns (params', d')
    with params'.n2 = n1 and state variance n2 + ns - n1; evaluating the
    solved-regime formula there reproduces mse_capacity(params, d).
    """
    n1, n2, ns, p = params.n1, params.n2, params.ns, params.p
    if not (n2 < n1 < n2 + ns):
        raise UsageError(
            f"state splitting applies only for n1 strictly between n2 and "
            f"n2 + ns; got n1={n1!r}, n2={n2!r}, ns={ns!r}"
        )
    d = mse_distortion_range(params).clamp(d)
    ns_new = n2 + ns - n1
    d_new = ns_new * ((n1 - n2) * (ns - d) + ns * d) / ns**2
    return GaussianIsacParams(n1=n1, n2=n1, ns=ns_new, p=p), d_new


def logloss_from_conventional(kind: str, param: float, d_tilde: float) -> float:
    """Log-loss level implied by a conventional distortion guarantee.

    A scheme meeting Hamming distortion d_tilde on a Bernoulli(param) state
    (or squared error d_tilde on a Gaussian(param) state) yields posterior
    soft estimates whose log loss is at most the returned value.
    """
    if kind == "bernoulli":
        if not (0.0 < param < 1.0):
            raise DomainError(f"bernoulli state parameter must be in (0, 1), got {param!r}")
        if not (0.0 <= d_tilde <= min(param, 1.0 - param) + RANGE_TOL):
            raise RangeError(
                f"Hamming distortion {d_tilde!r} outside [0, {min(param, 1 - param)!r}]",
                d_min=0.0,
                d_max=min(param, 1.0 - param),
            )
        return binary_entropy(min(d_tilde, min(param, 1.0 - param)))
    if kind == "gaussian":
        if not (param > 0.0):
            raise DomainError(f"gaussian state variance must be positive, got {param!r}")
        if not (0.0 < d_tilde <= param + RANGE_TOL):
            raise RangeError(
                f"squared-error distortion {d_tilde!r} outside (0, {param!r}]",
                d_min=0.0,
                d_max=param,
            )
        return 0.5 * math.log2(_TWO_PI_E * min(d_tilde, param))
    raise UsageError(f"kind must be 'bernoulli' or 'gaussian', got {kind!r}")
