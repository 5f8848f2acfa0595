"""Monte Carlo simulation of the superposition coding scheme.

Two modes cover the two halves of the achievability argument at feasible
cost: genie mode hands the estimator the true cloud-center sequence and
verifies the distortion analysis at large blocklength; coded mode uses
fresh random codebooks with exact maximum-likelihood decoding at tiny
blocklength and verifies the decoding analysis.

Trials draw from independently spawned substreams of the master seed, so
results do not depend on how trials would be scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import BinaryIsacParams, GaussianIsacParams
from .errors import DomainError, UsageError
from .info import binary_convolve

_LOG2E = math.log2(math.e)

#: exhaustive-ML feasibility limits for coded mode
MAX_CODED_BLOCKLENGTH = 24
MAX_CODED_TOTAL_BITS = 20


@dataclass(frozen=True)
class SimConfig:
    """Bundled simulation request (the CLI's view of a run)."""

    n: int
    mode: str  # genie | coded
    split: float  # binary split in [0, 1/2] or Gaussian satellite power
    trials: int
    seed: int
    r1: float = 0.0
    r2: float = 0.0

    def __post_init__(self):
        if self.mode not in ("genie", "coded"):
            raise UsageError(f"mode must be 'genie' or 'coded', got {self.mode!r}")
        if self.n < 1 or self.trials < 1:
            raise UsageError("n and trials must be >= 1")
        if self.mode == "coded":
            _validate_coded_limits(self.n, self.r1, self.r2)


def _validate_coded_limits(n: int, r1: float, r2: float) -> None:
    if r1 < 0.0 or r2 < 0.0:
        raise UsageError("rates must be nonnegative")
    if n > MAX_CODED_BLOCKLENGTH:
        raise UsageError(
            f"coded mode is limited to n <= {MAX_CODED_BLOCKLENGTH} "
            f"(exhaustive ML), got n={n}"
        )
    bits = _ceil_eps(n * r1) + _ceil_eps(n * r2)
    if bits > MAX_CODED_TOTAL_BITS:
        raise UsageError(
            f"coded mode is limited to {MAX_CODED_TOTAL_BITS} total codebook "
            f"bits, got ceil(n r1) + ceil(n r2) = {bits}"
        )


def _ceil_eps(x: float) -> int:
    return int(math.ceil(x - 1e-9))


def _codebook_size(n: int, rate: float) -> int:
    return max(1, int(math.ceil(2.0 ** (n * rate) - 1e-9)))


@dataclass(frozen=True)
class SimResult:
    """Empirical error rates, distortion, and power with 95% half-widths."""

    err_rate_comm: float
    err_rate_sense: float
    distortion: float
    power: float | None
    ci_halfwidth: dict
    n: int
    trials: int
    mode: str
    metric: str
    zero_prob_hit: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "err_rate_comm": self.err_rate_comm,
            "err_rate_sense": self.err_rate_sense,
            "distortion": self.distortion,
            "power": self.power,
            "ci_halfwidth": self.ci_halfwidth,
            "n": self.n,
            "trials": self.trials,
            "mode": self.mode,
            "metric": self.metric,
            "zero_prob_hit": self.zero_prob_hit,
            "details": self.details,
        }


def _trial_rngs(seed: int, trials: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def _mean_ci(per_trial_means: np.ndarray, per_symbol_var: float | None = None, n_symbols: int = 0):
    """95% normal half-width from trial means (falls back to the per-symbol
    variance for single-trial runs, where symbols are i.i.d.)."""
    trials = per_trial_means.size
    mean = float(per_trial_means.mean())
    if trials >= 2:
        hw = 1.96 * float(per_trial_means.std(ddof=1)) / math.sqrt(trials)
    elif per_symbol_var is not None and n_symbols > 1:
        hw = 1.96 * math.sqrt(per_symbol_var / n_symbols)
    else:
        hw = float("inf")
    return mean, hw


def _rate_ci(errors: int, trials: int):
    p = errors / trials
    return p, 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def _binary_posterior_table(alpha: float, params: BinaryIsacParams) -> np.ndarray:
    """q[w, s]: posterior of the state given (cloud center, sensing output)
    with w the output offset by the center; the residual channel noise is
    the split convolved with the sensing crossover."""
    eps = binary_convolve(alpha, params.beta2)
    bs = params.beta_s
    p1_w1 = bs * (1.0 - eps) / binary_convolve(eps, bs)
    p1_w0 = bs * eps / (1.0 - binary_convolve(eps, bs))
    return np.array([[1.0 - p1_w0, p1_w0], [1.0 - p1_w1, p1_w1]])


def run_binary_genie(
    params: BinaryIsacParams,
    alpha: float,
    n: int,
    trials: int,
    seed: int = 0,
) -> SimResult:
    """Genie-aided binary run: the estimator knows the true cloud centers.

    Per-symbol log loss then concentrates on the residual state entropy of
    the split family.
    """
    if not (0.0 <= alpha <= 0.5):
        raise DomainError(f"alpha must lie in [0, 1/2], got {alpha!r}")
    if n < 1 or trials < 1:
        raise UsageError("n and trials must be >= 1")
    q_table = _binary_posterior_table(alpha, params)
    losses = np.empty(trials)
    sq_acc = 0.0
    for t, rng in enumerate(_trial_rngs(seed, trials)):
        u = rng.random(n) < 0.5
        delta = rng.random(n) < alpha
        x = u ^ delta
        z2 = rng.random(n) < params.beta2
        s = rng.random(n) < params.beta_s
        y2 = x ^ z2 ^ s
        w = (y2 ^ u).astype(int)
        q_s = q_table[w, s.astype(int)]
        loss = -np.log2(q_s)
        losses[t] = loss.mean()
        sq_acc += float((loss**2).mean())
    per_symbol_var = sq_acc / trials - (losses.mean()) ** 2
    distortion, hw = _mean_ci(losses, per_symbol_var, n * trials)
    return SimResult(
        err_rate_comm=0.0,
        err_rate_sense=0.0,
        distortion=distortion,
        power=None,
        ci_halfwidth={"distortion": hw, "err_rate_comm": 0.0, "err_rate_sense": 0.0},
        n=n,
        trials=trials,
        mode="genie",
        metric="logloss",
    )


def run_gaussian_genie(
    params: GaussianIsacParams,
    p_prime: float,
    n: int,
    trials: int,
    seed: int = 0,
    metric: str = "logloss",
) -> SimResult:
    """Genie-aided Gaussian run scoring either log loss or squared error.

    The estimator applies the exact Gaussian posterior of the state given
    the cloud center and the sensing output; empirical power is reported
    against the budget.
    """
    if metric not in ("logloss", "mse"):
        raise UsageError(f"metric must be 'logloss' or 'mse', got {metric!r}")
    if not (-1e-12 <= p_prime <= params.p + 1e-12):
        raise DomainError(f"p_prime must lie in [0, P], got {p_prime!r}")
    if n < 1 or trials < 1:
        raise UsageError("n and trials must be >= 1")
    p_prime = min(max(p_prime, 0.0), params.p)
    n2, ns = params.n2, params.ns
    gain = ns / (p_prime + n2 + ns)
    post_var = (p_prime + n2) * ns / (p_prime + n2 + ns)
    losses = np.empty(trials)
    powers = np.empty(trials)
    sq_acc = 0.0
    for t, rng in enumerate(_trial_rngs(seed, trials)):
        u = rng.normal(0.0, math.sqrt(params.p - p_prime), n) if params.p > p_prime else np.zeros(n)
        delta = rng.normal(0.0, math.sqrt(p_prime), n) if p_prime > 0 else np.zeros(n)
        x = u + delta
        z2 = rng.normal(0.0, math.sqrt(n2), n)
        s = rng.normal(0.0, math.sqrt(ns), n)
        y2 = x + z2 + s
        residual = s - gain * (y2 - u)
        if metric == "logloss":
            loss = 0.5 * math.log2(2.0 * math.pi * post_var) + (
                residual**2 / (2.0 * post_var)
            ) * _LOG2E
        else:
            loss = residual**2
        losses[t] = loss.mean()
        sq_acc += float((loss**2).mean())
        powers[t] = float((x**2).mean())
    per_symbol_var = sq_acc / trials - (losses.mean()) ** 2
    distortion, hw = _mean_ci(losses, per_symbol_var, n * trials)
    power, hw_p = _mean_ci(powers)
    return SimResult(
        err_rate_comm=0.0,
        err_rate_sense=0.0,
        distortion=distortion,
        power=power,
        ci_halfwidth={
            "distortion": hw,
            "power": hw_p,
            "err_rate_comm": 0.0,
            "err_rate_sense": 0.0,
        },
        n=n,
        trials=trials,
        mode="genie",
        metric=metric,
    )


def run_binary_coded(
    params: BinaryIsacParams,
    alpha: float,
    n: int,
    r1: float,
    r2: float,
    trials: int,
    seed: int = 0,
) -> SimResult:
    """Two-layer random coding with exact ML decoding at tiny blocklength.

    Fresh codebooks per trial.  The sensing receiver decodes the cloud
    index over the per-letter center-to-output channel and reuses the genie
    posterior with its decoded centers, so its distortion can only degrade
    relative to the genie run (also reported, computed on the same noise).
    """
    if not (0.0 <= alpha <= 0.5):
        raise DomainError(f"alpha must lie in [0, 1/2], got {alpha!r}")
    if trials < 1:
        raise UsageError("trials must be >= 1")
    _validate_coded_limits(n, r1, r2)
    m1 = _codebook_size(n, r1)
    m2 = _codebook_size(n, r2)
    eps_u = binary_convolve(alpha, binary_convolve(params.beta2, params.beta_s))
    q_table = _binary_posterior_table(alpha, params)
    err_comm = 0
    err_sense = 0
    losses = np.empty(trials)
    losses_genie = np.empty(trials)
    for t, rng in enumerate(_trial_rngs(seed, trials)):
        u_cb = (rng.random((m1, n)) < 0.5).astype(np.uint8)
        delta_cb = (rng.random((m1, m2, n)) < alpha).astype(np.uint8)
        x_cb = u_cb[:, None, :] ^ delta_cb
        m1_true = int(rng.integers(m1))
        m2_true = int(rng.integers(m2))
        x = x_cb[m1_true, m2_true]
        z1 = (rng.random(n) < params.beta1).astype(np.uint8)
        z2 = (rng.random(n) < params.beta2).astype(np.uint8)
        s = (rng.random(n) < params.beta_s).astype(np.uint8)
        y1 = x ^ z1
        y2 = x ^ z2 ^ s

        # sensing Rx: ML over cloud centers through the marginal channel,
        # which is a BSC, so ML is minimum Hamming distance (eps_u < 1/2)
        d_sense = (u_cb ^ y2).sum(axis=1)
        m1_hat = int(np.argmin(d_sense))
        if m1_hat != m1_true:
            err_sense += 1

        # communication Rx: joint ML over all satellite codewords
        d_comm = (x_cb.reshape(m1 * m2, n) ^ y1).sum(axis=1)
        k = int(np.argmin(d_comm))
        if (k // m2, k % m2) != (m1_true, m2_true):
            err_comm += 1

        w_hat = (y2 ^ u_cb[m1_hat]).astype(int)
        losses[t] = -np.log2(q_table[w_hat, s.astype(int)]).mean()
        w_true = (y2 ^ u_cb[m1_true]).astype(int)
        losses_genie[t] = -np.log2(q_table[w_true, s.astype(int)]).mean()

    distortion, hw = _mean_ci(losses)
    genie_distortion, _ = _mean_ci(losses_genie)
    p_sense, hw_sense = _rate_ci(err_sense, trials)
    p_comm, hw_comm = _rate_ci(err_comm, trials)
    return SimResult(
        err_rate_comm=p_comm,
        err_rate_sense=p_sense,
        distortion=distortion,
        power=None,
        ci_halfwidth={
            "distortion": hw,
            "err_rate_comm": hw_comm,
            "err_rate_sense": hw_sense,
        },
        n=n,
        trials=trials,
        mode="coded",
        metric="logloss",
        details={
            "m1": m1,
            "m2": m2,
            "crossover_center_to_sense": eps_u,
            "distortion_genie": genie_distortion,
        },
    )


def hard_from_soft(q, distortion_table) -> int:
    """Reconstruction symbol minimizing expected conventional distortion.

    ``q`` is a soft state estimate; ``distortion_table[s, cand]`` prices
    reconstructing state s as cand.  Ties go to the smallest index.
    """
    q_arr = np.asarray(getattr(q, "probs", q), dtype=float)
    table = np.asarray(distortion_table, dtype=float)
    if q_arr.size == 0 or table.size == 0:
        raise UsageError("hard_from_soft: empty alphabet")
    if table.ndim != 2 or table.shape[0] != q_arr.size:
        raise UsageError(
            "distortion table must be (state alphabet) x (candidate alphabet)"
        )
    costs = q_arr @ table
    return int(np.argmin(costs))


def empirical_log_loss(states, softs) -> tuple:
    """Average symbol-wise log loss of soft estimates along a sequence.

    Returns (bits_per_symbol, zero_prob_hit); a soft estimate assigning
    zero probability to the realized state yields +inf with the flag set,
    rather than being clamped.
    """
    states = np.asarray(states, dtype=int)
    softs = np.asarray(softs, dtype=float)
    if softs.ndim != 2 or states.ndim != 1 or softs.shape[0] != states.size:
        raise UsageError("need one soft estimate (a pmf) per realized state")
    picked = softs[np.arange(states.size), states]
    if np.any(picked <= 0.0):
        return float("inf"), True
    return float(-np.log2(picked).mean()), False
