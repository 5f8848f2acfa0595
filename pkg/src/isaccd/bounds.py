"""Generic lower/upper tradeoff bounds for finite-alphabet channels.

The single-letter programs are non-convex maximizations over auxiliary
joints, so they are evaluated by a Lagrangian sweep: for each multiplier
the solver runs multistart projected supergradient ascent, every visited
optimum becomes an achievable (distortion, rate) candidate, and the upper
concave envelope of all candidates is read off at the requested grid.

The lower curve is certified (every candidate is achievable); the upper
curves are honest heuristics for a maximum that the solver may undershoot,
except when a degradation order lets the corollary shortcuts take over.
To keep the numerical sandwich lower <= upper_sym <= upper_seq intact, the
upper candidate pools always absorb the lower solver's candidates (an
auxiliary pair with a constant second component evaluates identically) and
the sequence pool re-scores the symbol pool's joints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import backend
from .channel import (
    IsacChannel,
    couple_to_physical,
    degradedness,
    find_degrading_map,
)
from .closed_form import EXACT, LOWER_BOUND, UPPER_BOUND, CurvePoint, DistortionRange
from .errors import PreconditionError, RangeError, UsageError
from .info import upper_concave_envelope

_LN2 = math.log(2.0)

LOWER = "lower"
UPPER_SYM = "upper_sym"
UPPER_SEQ = "upper_seq"
DEGRADED_EXACT = "degraded_exact"

_KIND_EXACTNESS = {LOWER: LOWER_BOUND, UPPER_SYM: UPPER_BOUND, UPPER_SEQ: UPPER_BOUND}


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for the Lagrangian multistart solver."""

    multistarts: int = 64
    max_iters: int = 300
    step_c: float = 0.25
    lambda_grid: tuple = (0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    seed: int = 0
    tol: float = 1e-7
    tie_tol: float = 1e-12
    u_size: int | None = None
    v_size: int | None = None

    def __post_init__(self):
        if self.multistarts < 1:
            raise UsageError("multistarts must be >= 1")
        if self.max_iters < 1:
            raise UsageError("max_iters must be >= 1")
        if not (self.tol > 0.0):
            raise UsageError("tol must be positive")
        if any(lam < 0.0 for lam in self.lambda_grid) or not self.lambda_grid:
            raise UsageError("lambda_grid must be non-empty with nonnegative entries")


@dataclass(frozen=True)
class AuxiliaryJoint:
    """Auxiliary input joint: p(u, x) for the lower bound, p(u, v, x) above.

    Cardinality caps from the sufficiency bounds are enforced here so that
    solver tables cannot silently grow past what the theory needs.
    """

    table: np.ndarray
    kind: str = LOWER

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if not np.all(np.isfinite(table)) or table.min() < -1e-12:
            raise UsageError("auxiliary joint must be finite and nonnegative")
        table = np.maximum(table, 0.0)
        if abs(table.sum() - 1.0) > 1e-9:
            raise UsageError("auxiliary joint must sum to 1")
        table = table / table.sum()
        if self.kind == LOWER:
            if table.ndim != 2:
                raise UsageError("lower-bound auxiliary joint must be p(u, x)")
            nx = table.shape[1]
            if table.shape[0] > nx + 1:
                raise UsageError(
                    f"|U| = {table.shape[0]} exceeds the cap |X|+1 = {nx + 1}"
                )
        elif self.kind in (UPPER_SYM, UPPER_SEQ, "upper"):
            if table.ndim != 3:
                raise UsageError("upper-bound auxiliary joint must be p(u, v, x)")
            nu, nv, nx = table.shape
            if nu > nx + 2:
                raise UsageError(f"|U| = {nu} exceeds the cap |X|+2 = {nx + 2}")
            if nv > nu * nx + 1:
                raise UsageError(f"|V| = {nv} exceeds the cap |U||X|+1 = {nu * nx + 1}")
        else:
            raise UsageError(f"unknown auxiliary joint kind {self.kind!r}")
        object.__setattr__(self, "table", table)


@dataclass(frozen=True)
class BoundCurve:
    points: tuple
    kind: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _Objective:
    """Packed min-of-entropies objective consumed by the kernel backend."""

    l_stack: np.ndarray
    row_off: np.ndarray
    gcoef: np.ndarray
    glin: np.ndarray
    dcoef: np.ndarray
    shape: tuple  # shape of the auxiliary joint this objective expects

    def evaluate(self, w):
        return backend.evaluate(
            self.l_stack, self.row_off, self.gcoef, self.glin, self.dcoef, w
        )

    def ascend(self, w0, lam, cfg: SolverConfig):
        return backend.ascend(
            self.l_stack,
            self.row_off,
            self.gcoef,
            self.glin,
            self.dcoef,
            w0,
            float(lam),
            int(cfg.max_iters),
            float(cfg.step_c),
            float(cfg.tie_tol),
            float(cfg.tol),
        )


def _row_entropies(table: np.ndarray) -> np.ndarray:
    flat = table.reshape(table.shape[0], -1)
    return -xlogy(flat, flat).sum(axis=1) / _LN2


def _stack(images):
    l_stack = np.ascontiguousarray(np.vstack(images))
    row_off = np.zeros(len(images) + 1, dtype=np.int64)
    row_off[1:] = np.cumsum([im.shape[0] for im in images])
    return l_stack, row_off


def _channel_tables(ch: IsacChannel):
    a = ch.p_y1_given_x()  # (x, y1)
    b = ch.p_y2_given_x()  # (x, y2)
    c2 = ch.p_y2s_given_x().reshape(ch.x_size, -1)  # (x, y2*s)
    e = np.einsum("s,xsab->xab", ch.p_s, ch.kernel).reshape(ch.x_size, -1)  # (x, y1*y2)
    f = np.einsum("s,xsab->xabs", ch.p_s, ch.kernel).reshape(ch.x_size, -1)
    return a, b, c2, e, f


def lower_objective(ch: IsacChannel, u_size: int) -> _Objective:
    """Two-term rate objective over p(u, x) with residual state entropy as
    the distortion functional."""
    a, b, c2, _, _ = _channel_tables(ch)
    eye = np.eye(u_size)
    images = [
        np.tile(a.T, (1, u_size)),  # Y1
        np.kron(eye, a.T),  # U,Y1
        np.tile(b.T, (1, u_size)),  # Y2
        np.kron(eye, b.T),  # U,Y2
        np.kron(eye, c2.T),  # U,Y2,S
    ]
    l_stack, row_off = _stack(images)
    h_y1_given_x = np.tile(_row_entropies(a), u_size)
    gcoef = np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, -1.0, 0.0],
        ]
    )
    glin = np.vstack([-h_y1_given_x, -h_y1_given_x])
    dcoef = np.array([0.0, 0.0, 0.0, -1.0, 1.0])
    return _Objective(
        l_stack, row_off, gcoef, np.ascontiguousarray(glin), dcoef, (u_size, ch.x_size)
    )


def upper_objective(ch: IsacChannel, u_size: int, v_size: int, variant: str) -> _Objective:
    """Three-term rate objective over p(u, v, x); variant selects whether the
    third term scores the state as observed (seq) or not (sym)."""
    if variant not in ("sym", "seq"):
        raise UsageError(f"variant must be 'sym' or 'seq', got {variant!r}")
    a, b, c2, e, f = _channel_tables(ch)
    nuv = u_size * v_size
    eye_u = np.eye(u_size)
    eye_uv = np.eye(nuv)
    joint = f if variant == "seq" else e
    images = [
        np.tile(a.T, (1, nuv)),  # Y1
        np.kron(eye_u, np.tile(a.T, (1, v_size))),  # U,Y1
        np.tile(b.T, (1, nuv)),  # Y2
        np.kron(eye_u, np.tile(b.T, (1, v_size))),  # U,Y2
        np.kron(eye_uv, b.T),  # U,V,Y2
        np.kron(eye_uv, joint.T),  # U,V,(Y1,Y2[,S])
        np.kron(eye_uv, c2.T),  # U,V,Y2,S
    ]
    l_stack, row_off = _stack(images)
    h_a = np.tile(_row_entropies(a), nuv)
    h_j = np.tile(_row_entropies(joint), nuv)
    gcoef = np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, -1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0],
        ]
    )
    glin = np.vstack([-h_a, -h_a, -h_j])
    dcoef = np.array([0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0])
    return _Objective(
        l_stack,
        row_off,
        gcoef,
        np.ascontiguousarray(glin),
        dcoef,
        (u_size, v_size, ch.x_size),
    )


def eval_lower_objective(ch: IsacChannel, p_ux) -> tuple:
    """Rate and distortion (bits) of one lower-bound auxiliary joint."""
    aux = p_ux if isinstance(p_ux, AuxiliaryJoint) else AuxiliaryJoint(p_ux, LOWER)
    if aux.kind != LOWER:
        raise UsageError("eval_lower_objective expects a lower-bound joint")
    if aux.table.shape[1] != ch.x_size:
        raise UsageError("auxiliary joint input axis does not match the channel")
    obj = lower_objective(ch, aux.table.shape[0])
    rate, dist = obj.evaluate(aux.table.reshape(1, -1))
    return float(rate[0]), float(dist[0])


def eval_upper_objective(ch: IsacChannel, p_uvx, variant: str = "sym") -> tuple:
    """Rate and distortion (bits) of one upper-bound auxiliary joint."""
    aux = p_uvx if isinstance(p_uvx, AuxiliaryJoint) else AuxiliaryJoint(p_uvx, "upper")
    if aux.table.ndim != 3:
        raise UsageError("eval_upper_objective expects a p(u, v, x) joint")
    if aux.table.shape[2] != ch.x_size:
        raise UsageError("auxiliary joint input axis does not match the channel")
    obj = upper_objective(ch, aux.table.shape[0], aux.table.shape[1], variant)
    rate, dist = obj.evaluate(aux.table.reshape(1, -1))
    return float(rate[0]), float(dist[0])


def _lower_structured_starts(ch: IsacChannel, u_size: int) -> np.ndarray:
    """Copy, constant, deterministic-input, and (for binary inputs) the
    superposition-split family of auxiliary joints."""
    nx = ch.x_size
    starts = []
    w = np.zeros((u_size, nx))
    w[0, :] = 1.0 / nx  # U constant, X uniform
    starts.append(w)
    w = np.zeros((u_size, nx))
    for x in range(nx):
        w[min(x, u_size - 1), x] = 1.0 / nx  # U = X copy
    starts.append(w)
    for x in range(nx):  # deterministic inputs: rate 0, anchor distortions
        w = np.zeros((u_size, nx))
        w[0, x] = 1.0
        starts.append(w)
    if nx == 2 and u_size >= 2:
        for alpha in np.linspace(0.0, 0.5, 11):
            w = np.zeros((u_size, nx))
            w[0, 0] = w[1, 1] = 0.5 * (1.0 - alpha)
            w[0, 1] = w[1, 0] = 0.5 * alpha
            starts.append(w)
    return np.array([s.reshape(-1) for s in starts])


def _random_starts(rng, count: int, n_w: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_w), size=count)


def _embed_lower_in_upper(w_lower: np.ndarray, dims_lower, dims_upper) -> np.ndarray:
    """Lift p(u, x) candidates to p(u, v, x) with constant v (identical value)."""
    nu_l, nx = dims_lower
    nu_u, nv, _ = dims_upper
    k = w_lower.shape[0]
    out = np.zeros((k, nu_u, nv, nx))
    out[:, :nu_l, 0, :] = w_lower.reshape(k, nu_l, nx)
    return out.reshape(k, -1)


def _collect_candidates(obj: _Objective, starts: np.ndarray, cfg: SolverConfig):
    """Run the Lagrangian sweep; return all candidate joints and diagnostics."""
    pools = [starts]
    conv_frac = []
    for lam in cfg.lambda_grid:
        w_best, _, _, conv = obj.ascend(starts, lam, cfg)
        pools.append(np.asarray(w_best))
        conv_frac.append(float(np.mean(conv)))
    w_all = np.vstack(pools)
    diag = {
        "lambda_grid": [float(x) for x in cfg.lambda_grid],
        "converged_fraction": conv_frac,
        "starts": int(starts.shape[0]),
        "candidates": int(w_all.shape[0]),
        "backend": backend.backend_name(),
    }
    if conv_frac and min(conv_frac) < 1.0:
        diag["warning"] = "some ascent runs were still improving at the iteration cap"
    return w_all, diag


def _merge_close(dists, rates, tol: float = 1e-10):
    """Collapse candidates whose distortions differ only by float dust.

    Prevents near-vertical envelope segments from hiding the true value at
    shared endpoints; the distortion understatement is bounded by ``tol``.
    """
    order = np.argsort(dists)
    merged = []
    for i in order:
        d, r = float(dists[i]), float(rates[i])
        if merged and d - merged[-1][0] <= tol:
            if r > merged[-1][1]:
                merged[-1] = (merged[-1][0], r)
        else:
            merged.append((d, r))
    return merged


def _curve_from_points(dists, rates, grid, kind: str, diagnostics: dict) -> BoundCurve:
    if np.any(~np.isfinite(dists)) or np.any(~np.isfinite(rates)):
        raise RuntimeError("bound solver produced non-finite candidate points")
    merged = _merge_close(dists, rates)
    if len(merged) == 1:  # constant-distortion channel: a flat curve
        merged.append((merged[0][0] + 1e-9, merged[0][1]))
    env = upper_concave_envelope(merged)
    xs, ys = env.xs, env.ys
    peak = int(np.argmax(ys))
    points = []
    for d in grid:
        d = float(d)
        if d < xs[0] - 1e-9:
            raise UsageError(
                f"grid point {d!r} lies below the smallest certified "
                f"distortion {xs[0]!r}"
            )
        value = ys[peak] if d >= xs[peak] else float(env(max(d, xs[0])))
        points.append(CurvePoint(d, value, _KIND_EXACTNESS.get(kind, EXACT)))
    return BoundCurve(points=tuple(points), kind=kind, diagnostics=diagnostics)


def _validated_grid(grid) -> np.ndarray:
    arr = np.asarray(list(grid), dtype=float)
    if arr.size == 0:
        raise UsageError("distortion grid must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise UsageError("distortion grid must be finite")
    return np.sort(arr)


def bound_curves(ch: IsacChannel, grid, cfg: SolverConfig | None = None, kinds=(LOWER, UPPER_SYM, UPPER_SEQ)) -> dict:
    """Compute the requested bound curves on a common distortion grid.

    Returns {kind: BoundCurve}.  Candidate pools are shared downward (see
    module docstring) so the returned curves always satisfy
    lower <= upper_sym <= upper_seq pointwise.
    """
    cfg = cfg or SolverConfig()
    grid = _validated_grid(grid)
    kinds = tuple(kinds)
    unknown = set(kinds) - {LOWER, UPPER_SYM, UPPER_SEQ}
    if unknown:
        raise UsageError(f"unknown curve kinds {sorted(unknown)}")
    rng = np.random.default_rng(cfg.seed)

    nu_l = cfg.u_size or (ch.x_size + 1)
    obj_l = lower_objective(ch, nu_l)
    starts_l = np.vstack(
        [
            _lower_structured_starts(ch, nu_l),
            _random_starts(rng, cfg.multistarts, nu_l * ch.x_size),
        ]
    )
    w_lower, diag_l = _collect_candidates(obj_l, starts_l, cfg)
    out: dict = {}
    if LOWER in kinds:
        rate, dist = obj_l.evaluate(w_lower)
        out[LOWER] = _curve_from_points(dist, rate, grid, LOWER, diag_l)

    need_upper = [k for k in kinds if k in (UPPER_SYM, UPPER_SEQ)]
    if not need_upper:
        return out

    # The converse functionals depend on the joint output coupling, which
    # the tradeoff itself does not; when a degradation order is certified,
    # evaluating them on the physically coupled kernel (same marginals)
    # gives the tight version of the bound.
    verdict = degradedness(ch)
    if verdict.direction in ("y1_degraded_wrt_y2", "both"):
        ch_upper = couple_to_physical(ch, "y1_degraded_wrt_y2")
        coupled = "y1_degraded_wrt_y2"
    elif verdict.direction == "y2_degraded_wrt_y1":
        ch_upper = couple_to_physical(ch, "y2_degraded_wrt_y1")
        coupled = "y2_degraded_wrt_y1"
    else:
        ch_upper = ch
        coupled = None

    nu_u = cfg.u_size or (ch.x_size + 2)
    nv_u = cfg.v_size or (nu_u * ch.x_size + 1)
    dims_u = (nu_u, nv_u, ch.x_size)
    lifted_lower = _embed_lower_in_upper(w_lower, (nu_l, ch.x_size), dims_u)
    starts_u = np.vstack(
        [
            _embed_lower_in_upper(
                _lower_structured_starts(ch, nu_l), (nu_l, ch.x_size), dims_u
            ),
            _random_starts(rng, cfg.multistarts, nu_u * nv_u * ch.x_size),
        ]
    )

    obj_sym = upper_objective(ch_upper, nu_u, nv_u, "sym")
    w_sym, diag_sym = _collect_candidates(obj_sym, starts_u, cfg)
    w_sym_pool = np.vstack([w_sym, lifted_lower])
    if UPPER_SYM in kinds:
        rate, dist = obj_sym.evaluate(w_sym_pool)
        diag_sym["coupled_direction"] = coupled
        out[UPPER_SYM] = _curve_from_points(dist, rate, grid, UPPER_SYM, diag_sym)

    if UPPER_SEQ in kinds:
        obj_seq = upper_objective(ch_upper, nu_u, nv_u, "seq")
        w_seq, diag_seq = _collect_candidates(obj_seq, starts_u, cfg)
        diag_seq["coupled_direction"] = coupled
        pool = np.vstack([w_seq, w_sym_pool])
        rate, dist = obj_seq.evaluate(pool)
        out[UPPER_SEQ] = _curve_from_points(dist, rate, grid, UPPER_SEQ, diag_seq)
    return out


def lower_bound_curve(ch: IsacChannel, grid, cfg: SolverConfig | None = None) -> BoundCurve:
    """Certified achievable (distortion, rate) curve on the given grid."""
    return bound_curves(ch, grid, cfg, kinds=(LOWER,))[LOWER]


def upper_bound_curve(ch: IsacChannel, grid, cfg: SolverConfig | None = None, variant: str = "sym") -> BoundCurve:
    """Heuristic evaluation of the converse curve (sym or seq variant)."""
    if variant not in ("sym", "seq"):
        raise UsageError(f"variant must be 'sym' or 'seq', got {variant!r}")
    kind = UPPER_SYM if variant == "sym" else UPPER_SEQ
    return bound_curves(ch, grid, cfg, kinds=(kind,))[kind]


def _deterministic_input_distortions(ch: IsacChannel) -> np.ndarray:
    """H(S | Y2, X = x) for every deterministic input x."""
    c2 = ch.p_y2s_given_x()  # (x, y2, s)
    h_joint = _row_entropies(c2.reshape(ch.x_size, -1))
    h_y2 = _row_entropies(c2.sum(axis=2))
    return h_joint - h_y2


def _unconstrained_capacity_input(ch: IsacChannel):
    """Capacity-achieving input of the communication channel (concave solve)."""
    import cvxpy as cp

    a = ch.p_y1_given_x()
    c = (xlogy(a, a) / _LN2).sum(axis=1)
    x = cp.Variable(ch.x_size, nonneg=True)
    objective = c @ x + cp.sum(cp.entr(a.T @ x)) / _LN2
    problem = cp.Problem(cp.Maximize(objective), [cp.sum(x) == 1])
    _solve_concave(problem)
    px = np.maximum(np.asarray(x.value, dtype=float), 0.0)
    return px / px.sum(), float(problem.value)


def _solve_concave(problem) -> None:
    import cvxpy as cp

    # 1e-10 keeps Clarabel in clean "optimal" territory while leaving the
    # objective accurate to ~1e-11 bits on these tiny programs
    problem.solve(
        solver=cp.CLARABEL,
        tol_gap_abs=1e-10,
        tol_gap_rel=1e-10,
        tol_feas=1e-10,
    )
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"concave program terminated with status {problem.status}")


def feasible_distortion_interval(ch: IsacChannel) -> DistortionRange:
    """Default distortion span for grids: from the best deterministic-input
    residual entropy to the residual entropy under the capacity-achieving
    input."""
    lo = float(_deterministic_input_distortions(ch).min())
    px, _ = _unconstrained_capacity_input(ch)
    p_y2s = np.einsum("x,xbs->bs", px, ch.p_y2s_given_x())
    h_joint = -float((xlogy(p_y2s, p_y2s) / _LN2).sum())
    p_y2 = p_y2s.sum(axis=1)
    h_y2 = -float((xlogy(p_y2, p_y2) / _LN2).sum())
    hi = h_joint - h_y2
    if hi < lo:  # numerically inverted span (constant-distortion channels)
        lo, hi = hi, lo
    return DistortionRange(lo, hi)


def degraded_capacity(ch: IsacChannel, d: float, direction: str, cfg: SolverConfig | None = None) -> CurvePoint:
    """Exact tradeoff value at distortion d when a degradation order holds.

    direction "y1_degraded_wrt_y2": concave program over the input law alone.
    direction "y2_degraded_wrt_y1": the two-term program, solved by the
    multistart machinery (exactness is claimed because the bounds coincide).
    """
    import cvxpy as cp

    cfg = cfg or SolverConfig()
    p1 = ch.p_y1_given_x()
    p2 = ch.p_y2_given_x()
    if direction == "y1_degraded_wrt_y2":
        witness, viol = find_degrading_map(p1, p2)
        if witness is None:
            raise PreconditionError(
                f"channel is not y1-degraded (best violation {viol:.3e})"
            )
        det = _deterministic_input_distortions(ch)
        if d < det.min() - 1e-12:
            raise RangeError(
                f"distortion {d!r} below the smallest achievable "
                f"H(S|Y2, X=x) = {det.min()!r}",
                d_min=float(det.min()),
            )
        a = p1
        c = (xlogy(a, a) / _LN2).sum(axis=1)
        x = cp.Variable(ch.x_size, nonneg=True)
        objective = c @ x + cp.sum(cp.entr(a.T @ x)) / _LN2
        constraints = [cp.sum(x) == 1, det @ x <= d]
        problem = cp.Problem(cp.Maximize(objective), constraints)
        _solve_concave(problem)
        return CurvePoint(float(d), float(problem.value), EXACT)
    if direction == "y2_degraded_wrt_y1":
        witness, viol = find_degrading_map(p2, p1)
        if witness is None:
            raise PreconditionError(
                f"channel is not y2-degraded (best violation {viol:.3e})"
            )
        curve = lower_bound_curve(ch, [d], cfg)
        pt = curve.points[0]
        return CurvePoint(pt.d, pt.c, EXACT)
    raise UsageError(f"unknown degradedness direction {direction!r}")


def degraded_curve(ch: IsacChannel, grid, cfg: SolverConfig | None = None) -> BoundCurve | None:
    """Exact curve via the degradation shortcut, or None when neither order holds."""
    verdict = degradedness(ch)
    if verdict.direction in ("y1_degraded_wrt_y2", "both"):
        direction = "y1_degraded_wrt_y2"
    elif verdict.direction == "y2_degraded_wrt_y1":
        direction = "y2_degraded_wrt_y1"
    else:
        return None
    grid = _validated_grid(grid)
    if direction == "y2_degraded_wrt_y1":
        base = lower_bound_curve(ch, grid, cfg)
        points = tuple(CurvePoint(p.d, p.c, EXACT) for p in base.points)
        return BoundCurve(points=points, kind=DEGRADED_EXACT, diagnostics=base.diagnostics)
    points = tuple(degraded_capacity(ch, float(d), direction, cfg) for d in grid)
    return BoundCurve(points=points, kind=DEGRADED_EXACT, diagnostics={"direction": direction})
