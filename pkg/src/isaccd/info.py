"""Information measures over finite distributions and scalar Gaussians.

All public quantities are in bits.  The conventions are the usual ones:
0 log 0 = 0, and entropies are computed after clamping negative round-off
to zero (inputs are validated first, so the clamp never hides real mass).

The module also provides the upper concave envelope of a planar point set,
which is how timesharing combinations of achievable (distortion, rate)
pairs are realized numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, InvalidDistribution, UsageError

#: max allowed deviation of total probability mass from 1
MASS_TOL = 1e-9
#: cross-product tolerance when building concave envelopes
HULL_TOL = 1e-12

_LN2 = math.log(2.0)


def _as_prob_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise InvalidDistribution(f"{what}: empty probability table")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution(f"{what}: non-finite entries")
    if arr.min() < -1e-12:
        raise InvalidDistribution(
            f"{what}: negative entry {arr.min():.3e} below tolerance"
        )
    arr = np.maximum(arr, 0.0)
    total = float(arr.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise InvalidDistribution(
            f"{what}: total mass {total!r} deviates from 1 by more than {MASS_TOL}"
        )
    # deviation is within tolerance: renormalize so downstream sums are exact
    return arr / total


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over a finite alphabet."""

    probs: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        probs = _as_prob_array(self.probs, "Pmf")
        if probs.ndim != 1:
            raise UsageError("Pmf.probs must be one-dimensional")
        if self.labels is not None and len(self.labels) != probs.size:
            raise UsageError("Pmf.labels length must match probs length")
        object.__setattr__(self, "probs", probs)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class JointPmf:
    """Joint probability table over named axes (e.g. ("U", "X", "S"))."""

    table: np.ndarray
    axes: tuple

    def __post_init__(self):
        table = _as_prob_array(self.table, "JointPmf")
        axes = tuple(self.axes)
        if len(axes) != table.ndim:
            raise UsageError("JointPmf.axes must name every table dimension")
        if len(set(axes)) != len(axes):
            raise UsageError("JointPmf.axes must be distinct")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "axes", axes)

    def axis_indices(self, names) -> tuple:
        names = (names,) if isinstance(names, str) else tuple(names)
        try:
            return tuple(self.axes.index(n) for n in names)
        except ValueError as exc:
            raise UsageError(f"unknown axis in {names}; have {self.axes}") from exc

    def marginal(self, keep) -> "JointPmf":
        """Marginalize onto the named axes, preserving their given order."""
        keep = (keep,) if isinstance(keep, str) else tuple(keep)
        idx = self.axis_indices(keep)
        drop = tuple(i for i in range(self.table.ndim) if i not in idx)
        table = self.table.sum(axis=drop) if drop else self.table
        # reorder to the caller's axis order
        order = tuple(sorted(range(len(idx)), key=lambda k: idx[k]))
        inv = tuple(order.index(k) for k in range(len(idx)))
        return JointPmf(np.transpose(table, inv), keep)

    def to_pmf(self) -> Pmf:
        if self.table.ndim != 1:
            raise UsageError("to_pmf requires a single remaining axis")
        return Pmf(self.table)


def binary_entropy(p):
    """Entropy in bits of a Bernoulli(p) variable; vectorized."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise DomainError(f"binary_entropy: probability outside [0, 1]: {p!r}")
    out = -(xlogy(arr, arr) + xlogy(1.0 - arr, 1.0 - arr)) / _LN2
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def binary_convolve(a, b):
    """Crossover probability of two cascaded binary symmetric channels."""
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    if np.any(aa < 0) or np.any(aa > 1) or np.any(bb < 0) or np.any(bb > 1):
        raise DomainError("binary_convolve: arguments must lie in [0, 1]")
    out = (1.0 - aa) * bb + aa * (1.0 - bb)
    scalar = (np.isscalar(a) or aa.ndim == 0) and (np.isscalar(b) or bb.ndim == 0)
    return float(out) if scalar else out


def _entropy_of_table(table: np.ndarray) -> float:
    clipped = np.maximum(table, 0.0)
    return float(-xlogy(clipped, clipped).sum() / _LN2)


def entropy(p) -> float:
    """Shannon entropy in bits of a Pmf, JointPmf, or raw table."""
    if isinstance(p, Pmf):
        return _entropy_of_table(p.probs)
    if isinstance(p, JointPmf):
        return _entropy_of_table(p.table)
    return _entropy_of_table(_as_prob_array(p, "entropy"))


def conditional_entropy(joint: JointPmf, target, given=()) -> float:
    """H(target | given) in bits."""
    target = (target,) if isinstance(target, str) else tuple(target)
    given = (given,) if isinstance(given, str) else tuple(given)
    if set(target) & set(given):
        raise UsageError("target and given axes must be disjoint")
    h_joint = entropy(joint.marginal(target + given))
    h_given = entropy(joint.marginal(given)) if given else 0.0
    return h_joint - h_given


def mutual_information(joint: JointPmf, a, b) -> float:
    """I(a; b) in bits."""
    a = (a,) if isinstance(a, str) else tuple(a)
    b = (b,) if isinstance(b, str) else tuple(b)
    if set(a) & set(b):
        raise UsageError("mutual_information axes must be disjoint")
    return (
        entropy(joint.marginal(a))
        + entropy(joint.marginal(b))
        - entropy(joint.marginal(a + b))
    )


def conditional_mutual_information(joint: JointPmf, a, b, given) -> float:
    """I(a; b | given) in bits."""
    a = (a,) if isinstance(a, str) else tuple(a)
    b = (b,) if isinstance(b, str) else tuple(b)
    given = (given,) if isinstance(given, str) else tuple(given)
    if (set(a) & set(b)) or (set(a) & set(given)) or (set(b) & set(given)):
        raise UsageError("conditional_mutual_information axes must be disjoint")
    return (
        entropy(joint.marginal(a + given))
        + entropy(joint.marginal(b + given))
        - entropy(joint.marginal(a + b + given))
        - (entropy(joint.marginal(given)) if given else 0.0)
    )


def gaussian_differential_entropy(variance) -> float:
    """Differential entropy in bits of a Gaussian with the given variance."""
    v = float(variance)
    if not (v > 0.0) or not math.isfinite(v):
        raise DomainError(f"gaussian_differential_entropy: variance must be > 0, got {variance!r}")
    return 0.5 * math.log2(2.0 * math.pi * math.e * v)


@dataclass(frozen=True)
class PiecewiseLinearEnvelope:
    """Concave piecewise-linear function given by its breakpoints.

    Breakpoint abscissas are strictly increasing and segment slopes are
    non-increasing.  Evaluation is only defined on [x_min, x_max].
    """

    breakpoints: tuple = field(default_factory=tuple)

    def __post_init__(self):
        bps = tuple((float(x), float(y)) for x, y in self.breakpoints)
        if len(bps) < 2:
            raise UsageError("envelope needs at least two breakpoints")
        xs = np.array([b[0] for b in bps])
        if np.any(np.diff(xs) <= 0):
            raise UsageError("envelope breakpoints must have strictly increasing x")
        object.__setattr__(self, "breakpoints", bps)

    @property
    def xs(self) -> np.ndarray:
        return np.array([b[0] for b in self.breakpoints])

    @property
    def ys(self) -> np.ndarray:
        return np.array([b[1] for b in self.breakpoints])

    def slopes(self) -> np.ndarray:
        xs, ys = self.xs, self.ys
        return np.diff(ys) / np.diff(xs)

    def __call__(self, x):
        xs, ys = self.xs, self.ys
        arr = np.asarray(x, dtype=float)
        if np.any(arr < xs[0] - 1e-12) or np.any(arr > xs[-1] + 1e-12):
            raise UsageError(
                f"envelope evaluated outside its domain [{xs[0]!r}, {xs[-1]!r}]"
            )
        out = np.interp(np.clip(arr, xs[0], xs[-1]), xs, ys)
        return float(out) if arr.ndim == 0 else out

    @property
    def x_min(self) -> float:
        return self.breakpoints[0][0]

    @property
    def x_max(self) -> float:
        return self.breakpoints[-1][0]


def upper_concave_envelope(points) -> PiecewiseLinearEnvelope:
    """Upper boundary of the convex hull of a planar point set.

    Breakpoints are the points of strict concavity: anything below a chord,
    or collinear with its neighbors within HULL_TOL, is dropped (so points
    on a line reduce to the two extremes, while samples of a strictly
    concave function are all retained).
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise UsageError("upper_concave_envelope needs at least two points")
    if not all(math.isfinite(x) and math.isfinite(y) for x, y in pts):
        raise UsageError("upper_concave_envelope: points must be finite")
    # for duplicate x keep only the highest y (the rest are dominated)
    best: dict = {}
    for x, y in pts:
        if x not in best or y > best[x]:
            best[x] = y
    xs = sorted(best)
    if len(xs) < 2:
        raise UsageError("upper_concave_envelope needs two distinct x values")
    hull: list = []
    for x in xs:
        p = (x, best[x])
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            cross = (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0)
            # cross > 0: the middle point dips below the new chord
            if cross > -HULL_TOL:
                hull.pop()
            else:
                break
        hull.append(p)
    return PiecewiseLinearEnvelope(tuple(hull))
