"""ISAC broadcast channels: finite tables, parametric families, degradedness.

A channel couples one input X to a communication output Y1 and a sensing
output Y2, with an i.i.d. state S entering the sensing path.  The state
prior does not depend on the input, which the representation enforces by
storing ``p_s`` separately from the conditional kernel p(y1, y2 | x, s).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DomainError,
    InvalidDistribution,
    PreconditionError,
    UsageError,
)
from .info import MASS_TOL, binary_convolve

#: max entrywise violation for a degrading map to count as feasible
DEGRADE_TOL = 1e-7


class TradeoffCase(enum.IntEnum):
    """Which branch of the closed-form tradeoff a parameter set falls in.

    CONSTANT: the communication channel is the weaker one; the curve is flat.
    TIMESHARE: intermediate regime; the curve is the timesharing line.
    SUPERPOSITION: the sensing channel is the weaker one; the curve is traced
    by the superposition split parameter.
    """

    CONSTANT = 1
    TIMESHARE = 2
    SUPERPOSITION = 3


@dataclass(frozen=True)
class BinaryIsacParams:
    """Crossover/state probabilities of the binary channel family."""

    beta1: float
    beta2: float
    beta_s: float

    def __post_init__(self):
        for name, v in (("beta1", self.beta1), ("beta2", self.beta2), ("beta_s", self.beta_s)):
            v = float(v)
            if not (0.0 < v < 0.5):
                raise DomainError(f"{name} must lie in the open interval (0, 0.5), got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class GaussianIsacParams:
    """Noise/state variances and power budget of the Gaussian family."""

    n1: float
    n2: float
    ns: float
    p: float

    def __post_init__(self):
        for name, v in (("n1", self.n1), ("n2", self.n2), ("ns", self.ns), ("p", self.p)):
            v = float(v)
            if not (v > 0.0) or not np.isfinite(v):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class IsacChannel:
    """Finite-alphabet broadcast channel with additive sensing state.

    kernel[x, s, y1, y2] = p(y1, y2 | x, s); p_s is the state prior.
    """

    p_s: np.ndarray
    kernel: np.ndarray

    def __post_init__(self):
        p_s = np.asarray(self.p_s, dtype=float)
        kernel = np.asarray(self.kernel, dtype=float)
        if p_s.ndim != 1:
            raise InvalidDistribution("p_s must be one-dimensional")
        if kernel.ndim != 4:
            raise InvalidDistribution("kernel must be indexed [x, s, y1, y2]")
        if kernel.shape[1] != p_s.size:
            raise InvalidDistribution("kernel state axis does not match p_s")
        if not np.all(np.isfinite(p_s)) or not np.all(np.isfinite(kernel)):
            raise InvalidDistribution("channel tables must be finite")
        if p_s.min() < -1e-12 or kernel.min() < -1e-12:
            raise InvalidDistribution("channel tables must be nonnegative")
        p_s = np.maximum(p_s, 0.0)
        if abs(p_s.sum() - 1.0) > MASS_TOL:
            raise InvalidDistribution(f"p_s sums to {p_s.sum()!r}, not 1")
        p_s = p_s / p_s.sum()
        kernel = np.maximum(kernel, 0.0)
        slice_sums = kernel.sum(axis=(2, 3))
        if np.any(np.abs(slice_sums - 1.0) > MASS_TOL):
            bad = np.unravel_index(np.argmax(np.abs(slice_sums - 1.0)), slice_sums.shape)
            raise InvalidDistribution(
                f"kernel slice (x={bad[0]}, s={bad[1]}) sums to {slice_sums[bad]!r}, not 1"
            )
        kernel = kernel / slice_sums[:, :, None, None]
        object.__setattr__(self, "p_s", p_s)
        object.__setattr__(self, "kernel", kernel)

    @property
    def x_size(self) -> int:
        return self.kernel.shape[0]

    @property
    def s_size(self) -> int:
        return self.kernel.shape[1]

    @property
    def y1_size(self) -> int:
        return self.kernel.shape[2]

    @property
    def y2_size(self) -> int:
        return self.kernel.shape[3]

    def p_y1_given_x(self) -> np.ndarray:
        """p(y1 | x), shape (x, y1)."""
        return np.einsum("s,xsab->xa", self.p_s, self.kernel)

    def p_y2s_given_x(self) -> np.ndarray:
        """p(y2, s | x), shape (x, y2, s)."""
        return np.einsum("s,xsab->xbs", self.p_s, self.kernel)

    def p_y2_given_x(self) -> np.ndarray:
        """p(y2 | x), shape (x, y2)."""
        return self.p_y2s_given_x().sum(axis=2)


@dataclass(frozen=True)
class DegradednessVerdict:
    """Outcome of testing both degradation orders between two channels."""

    direction: str  # y1_degraded_wrt_y2 | y2_degraded_wrt_y1 | both | neither
    witness: np.ndarray | None = None
    witness_reverse: np.ndarray | None = None
    violation: float = field(default=float("nan"))
    violation_reverse: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "witness": None if self.witness is None else self.witness.tolist(),
            "witness_reverse": None
            if self.witness_reverse is None
            else self.witness_reverse.tolist(),
            "violation": self.violation,
            "violation_reverse": self.violation_reverse,
        }


def binary_channel(params: BinaryIsacParams) -> IsacChannel:
    """Binary family: Y1 = X xor Z1, Y2 = X xor Z2 xor S, all Bernoulli."""

    def bsc(eps: float) -> np.ndarray:
        return np.array([[1.0 - eps, eps], [eps, 1.0 - eps]])

    a = bsc(params.beta1)  # a[x, y1]
    b = bsc(params.beta2)  # b[x xor s, y2]
    kernel = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for s in range(2):
            kernel[x, s] = np.outer(a[x], b[x ^ s])
    p_s = np.array([1.0 - params.beta_s, params.beta_s])
    return IsacChannel(p_s=p_s, kernel=kernel)


def marginals(ch: IsacChannel) -> tuple:
    """The two conditionals that fully determine the tradeoff:

    p(y1 | x) with shape (x, y1) and p(y2, s | x) with shape (x, y2, s).
    """
    return ch.p_y1_given_x(), ch.p_y2s_given_x()


def _validate_conditional(table, what: str) -> np.ndarray:
    arr = np.asarray(table, dtype=float)
    if arr.ndim != 2:
        raise UsageError(f"{what} must be a 2-D conditional table (input, output)")
    if not np.all(np.isfinite(arr)) or arr.min() < -1e-12:
        raise InvalidDistribution(f"{what} must be finite and nonnegative")
    arr = np.maximum(arr, 0.0)
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-7):
        raise InvalidDistribution(f"{what} rows must sum to 1")
    return arr / sums[:, None]


def _exact_square_witness(p_weak, p_strong):
    """Closed-form degrading map when the strong conditional is square and
    invertible (covers all binary-symmetric pairs); None when inapplicable."""
    ny = p_strong.shape[1]
    if p_strong.shape[0] != ny:
        return None
    if abs(np.linalg.det(p_strong)) < 1e-12:
        return None
    q = np.linalg.solve(p_strong, p_weak)  # q[y_strong, y_weak]
    if q.min() < -1e-10 or np.any(np.abs(q.sum(axis=1) - 1.0) > 1e-10):
        return np.clip(q, 0.0, None), False
    q = np.clip(q, 0.0, None)
    q = q / q.sum(axis=1, keepdims=True)
    return q, True


def find_degrading_map(p_weak, p_strong, tol: float = DEGRADE_TOL):
    """Search for a row-stochastic q with p_weak = p_strong composed with q.

    Composition convention: p_weak(y|x) = sum_y' p_strong(y'|x) q(y|y'),
    with q returned as q[y_strong, y_weak].  Returns (q or None, violation)
    where violation is the best achievable max entrywise error.
    """
    p_weak = _validate_conditional(p_weak, "weak conditional")
    p_strong = _validate_conditional(p_strong, "strong conditional")
    if p_weak.shape[0] != p_strong.shape[0]:
        raise UsageError("conditionals must share the input alphabet")

    exact = _exact_square_witness(p_weak, p_strong)
    if exact is not None:
        # the square-invertible system has a unique algebraic solution, so
        # its (in)feasibility settles the question without an LP
        q, feasible = exact
        violation = float(np.abs(p_strong @ q - p_weak).max())
        if feasible and violation <= tol:
            return q, violation
        return None, violation

    nx = p_weak.shape[0]
    n_strong, n_weak = p_strong.shape[1], p_weak.shape[1]
    nq = n_strong * n_weak
    # variables: vec(q) then the violation bound t; minimize t subject to
    # |p_strong q - p_weak| <= t entrywise and q row-stochastic
    c = np.zeros(nq + 1)
    c[-1] = 1.0
    rows = []
    rhs = []
    for x in range(nx):
        for y in range(n_weak):
            coeff = np.zeros(nq + 1)
            for yp in range(n_strong):
                coeff[yp * n_weak + y] = p_strong[x, yp]
            coeff[-1] = -1.0
            rows.append(coeff.copy())
            rhs.append(p_weak[x, y])
            rows.append(-coeff)
            rows[-1][-1] = -1.0
            rhs.append(-p_weak[x, y])
    a_eq = np.zeros((n_strong, nq + 1))
    for yp in range(n_strong):
        a_eq[yp, yp * n_weak : (yp + 1) * n_weak] = 1.0
    res = linprog(
        c,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        A_eq=a_eq,
        b_eq=np.ones(n_strong),
        bounds=[(0.0, 1.0)] * nq + [(0.0, None)],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"degradedness LP failed: {res.message}")
    q = np.maximum(res.x[:-1].reshape(n_strong, n_weak), 0.0)
    q = q / q.sum(axis=1, keepdims=True)
    q = _polish_witness(q, p_weak, p_strong)
    violation = float(np.abs(p_strong @ q - p_weak).max())
    if violation <= tol:
        return q, violation
    return None, violation


def _polish_witness(q, p_weak, p_strong, iters: int = 300) -> np.ndarray:
    """Projected-gradient refinement of a degrading map.

    LP vertices are usually exact already; this drives residuals of strictly
    feasible instances down to solver-independent precision.
    """
    from .backend import project_rows

    gram = p_strong.T @ p_strong
    lip = max(float(np.linalg.eigvalsh(gram).max()), 1e-12)
    best = q.copy()
    best_res = float(np.abs(p_strong @ q - p_weak).max())
    cur = q.copy()
    for _ in range(iters):
        grad = gram @ cur - p_strong.T @ p_weak
        cur = project_rows(cur - grad / lip)
        res = float(np.abs(p_strong @ cur - p_weak).max())
        if res < best_res:
            best, best_res = cur.copy(), res
        if best_res < 1e-13:
            break
    return best


def is_stochastically_degraded(p_y1_given_x, p_y2_given_x, tol: float = DEGRADE_TOL) -> DegradednessVerdict:
    """Test both degradation orders between two conditionals on a common input.

    Direction ``y1_degraded_wrt_y2`` means the first conditional can be
    simulated by post-processing the second one's output.
    """
    q_fwd, viol_fwd = find_degrading_map(p_y1_given_x, p_y2_given_x, tol)
    q_rev, viol_rev = find_degrading_map(p_y2_given_x, p_y1_given_x, tol)
    if q_fwd is not None and q_rev is not None:
        direction = "both"
    elif q_fwd is not None:
        direction = "y1_degraded_wrt_y2"
    elif q_rev is not None:
        direction = "y2_degraded_wrt_y1"
    else:
        direction = "neither"
    return DegradednessVerdict(
        direction=direction,
        witness=q_fwd,
        witness_reverse=q_rev,
        violation=viol_fwd,
        violation_reverse=viol_rev,
    )


def degradedness(ch: IsacChannel, tol: float = DEGRADE_TOL) -> DegradednessVerdict:
    """Degradedness verdict between a channel's two output marginals."""
    return is_stochastically_degraded(ch.p_y1_given_x(), ch.p_y2_given_x(), tol)


def couple_to_physical(ch: IsacChannel, direction: str) -> IsacChannel:
    """Re-couple the channel so the requested degradation order holds physically.

    The construction only changes the joint of (Y1, Y2) given (X, S); both
    p(y1|x) and p(y2, s|x) are preserved, so every tradeoff quantity is too.
    Requires stochastic degradedness in the requested direction.
    """
    p1 = ch.p_y1_given_x()
    p2 = ch.p_y2_given_x()
    p2s = ch.p_y2s_given_x()  # (x, y2, s)
    p_s = ch.p_s
    ns, ny1, ny2 = ch.s_size, ch.y1_size, ch.y2_size

    if direction == "y1_degraded_wrt_y2":
        q, viol = find_degrading_map(p1, p2)
        if q is None:
            raise PreconditionError(
                f"channel is not y1-degraded (best violation {viol:.3e})"
            )
        # p'(y1, y2, s | x) = p(y2, s | x) q(y1 | y2)
        joint = np.einsum("xbs,ba->xsab", p2s, q)
    elif direction == "y2_degraded_wrt_y1":
        q, viol = find_degrading_map(p2, p1)
        if q is None:
            raise PreconditionError(
                f"channel is not y2-degraded (best violation {viol:.3e})"
            )
        # p'(y1, y2, s | x) = p(y1|x) q(y2|y1) p(s | x, y2)
        with np.errstate(invalid="ignore", divide="ignore"):
            s_given_xy2 = p2s / p2[:, :, None]
        s_given_xy2 = np.where(p2[:, :, None] > 0, s_given_xy2, 1.0 / ns)
        joint = np.einsum("xa,ab,xbs->xsab", p1, q, s_given_xy2)
    else:
        raise UsageError(f"unknown coupling direction {direction!r}")

    # convert p'(y1, y2, s | x) into a state-conditional kernel
    kernel = np.empty((ch.x_size, ns, ny1, ny2))
    for s in range(ns):
        if p_s[s] > 0:
            kernel[:, s] = joint[:, s] / p_s[s]
        else:
            kernel[:, s] = 1.0 / (ny1 * ny2)
    return IsacChannel(p_s=p_s.copy(), kernel=kernel)


def classify_binary_case(params: BinaryIsacParams) -> TradeoffCase:
    """Case split of the binary closed form, boundaries as in the statement."""
    b2s = binary_convolve(params.beta2, params.beta_s)
    if params.beta1 >= b2s:
        return TradeoffCase.CONSTANT
    if params.beta1 > params.beta2:
        return TradeoffCase.TIMESHARE
    return TradeoffCase.SUPERPOSITION


def classify_gaussian_case(params: GaussianIsacParams) -> TradeoffCase:
    """Case split of the Gaussian closed form."""
    if params.n1 >= params.n2 + params.ns:
        return TradeoffCase.CONSTANT
    if params.n1 > params.n2:
        return TradeoffCase.TIMESHARE
    return TradeoffCase.SUPERPOSITION


def channel_to_dict(ch: IsacChannel) -> dict:
    return {
        "x_size": ch.x_size,
        "y1_size": ch.y1_size,
        "y2_size": ch.y2_size,
        "s_size": ch.s_size,
        "p_s": ch.p_s.tolist(),
        "kernel": ch.kernel.tolist(),
    }


def channel_from_dict(doc: dict) -> IsacChannel:
    """Parse the channel-spec JSON document; raises InvalidDistribution or
    UsageError naming the failing invariant."""
    try:
        sizes = {k: int(doc[k]) for k in ("x_size", "y1_size", "y2_size", "s_size")}
        p_s = np.asarray(doc["p_s"], dtype=float)
        kernel = np.asarray(doc["kernel"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed channel spec: {exc}") from exc
    if any(v < 1 for v in sizes.values()):
        raise UsageError("channel spec: alphabet sizes must be >= 1")
    expected = (sizes["x_size"], sizes["s_size"], sizes["y1_size"], sizes["y2_size"])
    if kernel.shape != expected:
        raise UsageError(
            f"channel spec: kernel shape {kernel.shape} does not match "
            f"declared sizes {expected} (indexed [x][s][y1][y2])"
        )
    if p_s.shape != (sizes["s_size"],):
        raise UsageError("channel spec: p_s length does not match s_size")
    return IsacChannel(p_s=p_s, kernel=kernel)


def load_channel(path) -> IsacChannel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"channel spec is not valid JSON: {exc}") from exc
    return channel_from_dict(doc)


def save_channel(ch: IsacChannel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_dict(ch), fh, indent=2)
        fh.write("\n")
