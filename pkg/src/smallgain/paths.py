"""Construction and validation of strictly increasing decay paths.

A decay path ("Omega-path") for a monotone gain operator is a vector of
class K-infinity functions sigma with ``Gamma_mu(sigma(r)) < sigma(r)`` for
every positive radius.  Paths are represented piecewise linearly on anchor
radii and extended linearly beyond the last anchor.  Constructors cover the
bounded, irreducible, max-aggregation, homogeneous, three-node additive,
mixed bounded/unbounded, and reducible cases; every constructor validates
its result on a log-spaced radius grid before returning it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BisectionFailure,
    BlockSgcFails,
    CompatibilityError,
    CycleConditionFails,
    EmptyGap,
    LambdaNotContractive,
    NotBounded,
    NotInOmega,
    NotIrreducible,
    NotLinearizable,
    OutOfRange,
    PathStalled,
    SeedNotFound,
    SpliceFailure,
    Stalled,
    UnsupportedAggregation,
    WrongAggregation,
)
from .gains import (
    TOL_STRICT,
    BlockMaxSum,
    Compose,
    DiagOp,
    GainClass,
    GainExpr,
    GainNetwork,
    Linear,
    MaxAgg,
    PlusId,
    SumAgg,
    Zero,
    classify_gain,
    eval_operator,
    eval_operator_ext,
    strictly_less,
    zero_rows,
)
from .graph import adjacency, is_irreducible, scc_decompose
from .sgc import check_cycle_condition, check_linear_spectral, nonlinear_perron

R_MAX_DEFAULT = 1e6
VALIDATION_POINTS = 1000
# anchors per decade on synthetic radius grids
GRID_DENSITY = 12


def _log_grid(lo: float, hi: float, per_decade: int = GRID_DENSITY) -> np.ndarray:
    decades = np.log10(hi / lo)
    count = max(2, int(np.ceil(decades * per_decade)) + 1)
    return np.geomspace(lo, hi, count)


# ---------------------------------------------------------------------------
# Piecewise-linear path types


@dataclass(frozen=True)
class OmegaPath:
    """Vector of strictly increasing piecewise-linear K-infinity functions.

    Anchored at radii ``0 = r_0 < r_1 < ... < r_M`` with ``sigma(0) = 0``;
    beyond the last anchor each component continues with its final segment
    slope, which keeps every component unbounded.
    """

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or radii.ndim != 1 or len(radii) != len(values):
            raise ValueError("anchor radii and values are inconsistent")
        if len(radii) < 2:
            raise ValueError("a path needs at least two anchors")
        if radii[0] != 0.0 or np.any(values[0] != 0.0):
            raise ValueError("paths start at the origin")
        if np.any(np.diff(radii) <= 0):
            raise ValueError("anchor radii must increase strictly")
        if np.any(np.diff(values, axis=0) <= 0):
            raise ValueError("every component must increase strictly across anchors")
        radii.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def anchor_count(self) -> int:
        return len(self.radii)

    @property
    def tail_slopes(self) -> np.ndarray:
        dr = self.radii[-1] - self.radii[-2]
        return (self.values[-1] - self.values[-2]) / dr

    def __call__(self, r):
        rr = np.asarray(r, dtype=float)
        scalar = rr.ndim == 0
        rr = np.atleast_1d(rr)
        out = np.empty(rr.shape + (self.n,))
        for i in range(self.n):
            out[..., i] = np.interp(rr, self.radii, self.values[:, i])
        beyond = rr > self.radii[-1]
        if np.any(beyond):
            extra = (rr[beyond] - self.radii[-1])[:, None] * self.tail_slopes[None, :]
            out[beyond] = self.values[-1][None, :] + extra
        return out[0] if scalar else out

    def inverse(self, i: int, y):
        """Preimage of ``y`` under component ``i`` (left segment at anchors)."""
        yy = np.asarray(y, dtype=float)
        scalar = yy.ndim == 0
        yy = np.atleast_1d(yy)
        col = self.values[:, i]
        out = np.interp(yy, col, self.radii)
        beyond = yy > col[-1]
        if np.any(beyond):
            out[beyond] = self.radii[-1] + (yy[beyond] - col[-1]) / self.tail_slopes[i]
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class PLFunction:
    """Scalar nondecreasing piecewise-linear map with ``f(0) = 0``.

    Used for external budget maps: between anchors the interpolant is the
    chord, beyond the last anchor the final slope continues (possibly zero,
    in which case the map is bounded and inversion past the bound raises
    :class:`OutOfRange`).
    """

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape:
            raise ValueError("anchor radii and values are inconsistent")
        if radii[0] != 0.0 or values[0] != 0.0:
            raise ValueError("budget maps start at the origin")
        if np.any(np.diff(radii) <= 0):
            raise ValueError("anchor radii must increase strictly")
        if np.any(np.diff(values) < 0):
            raise ValueError("budget maps must be nondecreasing")
        radii.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @property
    def tail_slope(self) -> float:
        return float(
            (self.values[-1] - self.values[-2]) / (self.radii[-1] - self.radii[-2])
        )

    def __call__(self, r):
        rr = np.asarray(r, dtype=float)
        scalar = rr.ndim == 0
        rr = np.atleast_1d(rr)
        out = np.interp(rr, self.radii, self.values)
        beyond = rr > self.radii[-1]
        if np.any(beyond):
            out[beyond] = self.values[-1] + self.tail_slope * (rr[beyond] - self.radii[-1])
        return float(out[0]) if scalar else out

    def inverse(self, y):
        """Smallest radius reaching level ``y`` (flat stretches resolve left)."""
        yy = float(y)
        if yy < 0:
            raise ValueError("budget levels live on the nonnegative half line")
        vals = self.values
        if yy <= vals[-1]:
            idx = int(np.searchsorted(vals, yy, side="left"))
            if vals[idx] == yy:
                return float(self.radii[idx])
            r0, r1 = self.radii[idx - 1], self.radii[idx]
            v0, v1 = vals[idx - 1], vals[idx]
            return float(r0 + (yy - v0) * (r1 - r0) / (v1 - v0))
        slope = self.tail_slope
        if slope <= 0:
            raise OutOfRange(
                f"budget map is bounded by {vals[-1]:.6g}; level {yy:.6g} unreachable",
                sup=float(vals[-1]),
                value=yy,
            )
        return float(self.radii[-1] + (yy - vals[-1]) / slope)


def identity_budget(r_top: float = R_MAX_DEFAULT) -> PLFunction:
    return PLFunction(np.array([0.0, r_top]), np.array([0.0, r_top]))


@dataclass(frozen=True)
class PathReport:
    """Margins and monotonicity audit of a candidate path."""

    radii: np.ndarray
    margins: np.ndarray
    min_margin: float
    monotone_ok: bool
    slopes_ok: bool
    anchor_count: int

    @property
    def valid(self) -> bool:
        return self.monotone_ok and self.slopes_ok and self.min_margin > 0.0


def validate_path(net: GainNetwork, sigma: OmegaPath, radii=None) -> PathReport:
    """Margins ``min_i(sigma_i(r) - Gamma_i(sigma(r)))`` on a radius grid.

    The grid defaults to 1000 log-spaced radii in ``[1e-6, 1e6]``; positive
    anchor radii are always included.  Strict per-component monotonicity and
    positive segment slopes are audited alongside.
    """
    if radii is None:
        radii = np.geomspace(1e-6, 1e6, VALIDATION_POINTS)
    rr = np.unique(np.concatenate([np.asarray(radii, dtype=float),
                                   sigma.radii[sigma.radii > 0]]))
    states = sigma(rr)
    image = eval_operator(net, states)
    margins = np.min(states - image, axis=1)
    monotone_ok = bool(np.all(np.diff(sigma.values, axis=0) > 0))
    slopes = np.diff(sigma.values, axis=0) / np.diff(sigma.radii)[:, None]
    slopes_ok = bool(np.all(slopes > 0))
    return PathReport(
        radii=rr,
        margins=margins,
        min_margin=float(margins.min()),
        monotone_ok=monotone_ok,
        slopes_ok=slopes_ok,
        anchor_count=sigma.anchor_count,
    )


def export_path_csv(net: GainNetwork, sigma: OmegaPath, out, radii=None) -> None:
    """Write ``r,sigma_1,...,sigma_n,margin_min`` rows at log-spaced radii."""
    if radii is None:
        radii = np.geomspace(1e-6, 1e6, VALIDATION_POINTS)
    rr = np.asarray(radii, dtype=float)
    states = sigma(rr)
    image = eval_operator(net, states)
    margins = np.min(states - image, axis=1)
    header = "r," + ",".join(f"sigma_{i + 1}" for i in range(sigma.n)) + ",margin_min"
    lines = [header]
    for k, r in enumerate(rr):
        cells = [f"{r:.12g}"] + [f"{states[k, i]:.12g}" for i in range(sigma.n)]
        cells.append(f"{margins[k]:.12g}")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Shared machinery: downward iteration, upward chaining, anchor assembly


def _downward_leg(op, s0: np.ndarray, stop_abs: float,
                  stall_rel: float = 1e-9, stall_limit: int = 10,
                  max_steps: int = 50000) -> list[np.ndarray]:
    """Iterate ``op`` from ``s0`` until the sup norm drops below ``stop_abs``.

    The first step enforces membership in the strict decay set: an exact
    fixed point reports ``Stalled`` (the iteration cannot decrease, which
    contradicts the small gain condition), any other non-strict component
    reports ``NotInOmega``.
    """
    s0 = np.asarray(s0, dtype=float)
    first = op(s0)
    if not strictly_less(first, s0):
        if np.array_equal(first, s0):
            raise Stalled("starting point is a fixed point of the gain operator")
        raise NotInOmega(
            "starting point is not strictly inside the decay set"
        )
    anchors = [s0.copy()]
    s = s0
    stall = 0
    while s.max() >= stop_abs:
        nxt = op(s)
        if not np.all(nxt < s):
            raise Stalled("downward iteration stopped decreasing componentwise")
        if (s - nxt).max() < stall_rel * s.max():
            stall += 1
            if stall >= stall_limit:
                raise Stalled(
                    "downward iteration is stalling above the stopping ball"
                )
        else:
            stall = 0
        s = nxt
        anchors.append(s.copy())
        if len(anchors) > max_steps:
            raise Stalled("downward iteration exceeded the step budget")
    return anchors


def path_downward(net: GainNetwork, s0) -> np.ndarray:
    """Anchor sequence ``s0, Gamma(s0), Gamma^2(s0), ...`` down to the origin.

    Runs until the sup norm falls below ``1e-12 * ||s0||`` and appends the
    origin.  Rows with no nonzero gains are rejected: their components land
    on zero after one step and the segmentwise strictness argument needs
    every component to keep moving (such networks go through the reducible
    route instead).
    """
    s0 = np.asarray(s0, dtype=float)
    if s0.ndim != 1 or len(s0) != net.n:
        raise ValueError("starting point has the wrong dimension")
    if zero_rows(net):
        raise CompatibilityError(
            "gain rows without nonzero entries: decompose into blocks first"
        )
    anchors = _downward_leg(lambda s: eval_operator(net, s), s0,
                            stop_abs=1e-12 * float(s0.max()))
    anchors.append(np.zeros(net.n))
    return np.array(anchors)


def _chain_up(op, start: np.ndarray, target_sup: float,
              backoff: float = 0.5, growth_tol: float = 1e-6,
              stall_limit: int = 50, max_steps: int = 20000) -> list[np.ndarray]:
    """Grow anchors along the ones direction until ``target_sup`` is passed.

    Each step takes ``t*`` = sup of admissible steps with
    ``op(s + t 1) < s`` and advances by ``backoff * t*``, which keeps the
    next image strictly below the previous anchor so whole segments stay in
    the decay set.  For operators with bounded rows ``t*`` is infinite; the
    step then jumps past ``target_sup`` in one segment.
    """
    s = np.asarray(start, dtype=float).copy()
    ones = np.ones_like(s)
    anchors = [s.copy()]
    stall = 0

    def ok(t: float) -> bool:
        return strictly_less(op(s + t * ones), s)

    while s.max() < target_sup:
        scale = 1.0 + s.max()
        t = 0.1 * scale
        if ok(t):
            cap = 1e9 * scale
            hi = None
            while ok(2.0 * t):
                t *= 2.0
                if t > cap:
                    jump = max(4.0 * target_sup, 4.0 * t)
                    if ok(jump):
                        anchors.append(s + jump * ones)
                        return anchors
                    hi = jump
                    break
            t_lo, t_hi = t, (2.0 * t if hi is None else hi)
        else:
            while t > 1e-14 * scale and not ok(t):
                t *= 0.5
            if not ok(t):
                raise PathStalled(
                    "no admissible step above the strictness tolerance; "
                    "the operator is near-critical at this anchor"
                )
            t_lo, t_hi = t, 2.0 * t
        for _ in range(60):
            if t_hi - t_lo < 1e-3 * t_lo:
                break
            mid = 0.5 * (t_lo + t_hi)
            if ok(mid):
                t_lo = mid
            else:
                t_hi = mid
        step = backoff * t_lo
        if step < growth_tol * max(1.0, s.max()):
            stall += 1
            if stall >= stall_limit:
                raise PathStalled(
                    "anchor growth below 1e-6 relative for 50 consecutive steps"
                )
        else:
            stall = 0
        s = s + step * ones
        anchors.append(s.copy())
        if len(anchors) > max_steps:
            raise PathStalled("upward chaining exceeded the step budget")
    return anchors


def _find_seed(op, n: int, seed: int = 0) -> np.ndarray:
    """Point of the strict decay set on the unit sup-norm sphere.

    Tries the ones direction, 2n axis-biased directions, then 500 random
    simplex directions, each scaled to sup norm one.
    """
    candidates = [np.ones(n)]
    for i in range(n):
        low = np.full(n, 0.5)
        low[i] = 1.0
        high = np.ones(n)
        high[i] = 0.5 if n > 1 else 1.0
        candidates.extend([low, high])
    rng = np.random.default_rng(seed)
    for _ in range(500):
        w = rng.random(n) + 1e-12
        candidates.append(w / w.max())
    for cand in candidates:
        if strictly_less(op(cand), cand):
            return cand
    raise SeedNotFound(
        "no point of the strict decay set found on the unit sphere; "
        "evidence against the small gain condition"
    )


def _assemble(down: list[np.ndarray], up: list[np.ndarray]) -> OmegaPath:
    """Merge a downward and an upward anchor leg into one path.

    ``down`` starts at the shared seed and decreases; ``up`` starts at the
    same seed and increases.  Radii are the anchor sup norms above the seed;
    below the seed the radius assignment is compressed quadratically
    (``r = ||s||^2 / ||seed||``) so the path runs ahead of its radius near
    the origin and low-radius margins inherit the seed scale rather than
    collapsing with the anchors.
    """
    rows = list(reversed(down))[:-1] + up
    rows = [row for row in rows if row.max() > 0]
    sups = np.array([row.max() for row in rows])
    rho0 = float(down[0].max())
    radii = np.where(sups >= rho0, sups, sups**2 / rho0)
    radii = np.concatenate([[0.0], radii])
    values = np.vstack([np.zeros_like(rows[0]), np.array(rows)])
    return OmegaPath(radii, values)


def _compressed_floor(rho0: float) -> float:
    # smallest anchor's compressed radius must land below the 1e-6 grid edge
    return float(np.sqrt(0.9e-6 * rho0))


def _finalize(net: GainNetwork, sigma: OmegaPath, r_max: float) -> OmegaPath:
    grid = np.geomspace(1e-6, min(1e6, r_max), VALIDATION_POINTS)
    report = validate_path(net, sigma, grid)
    if not report.valid:
        raise NotInOmega(
            f"constructed path failed validation (min margin {report.min_margin:.3g})"
        )
    return sigma


# ---------------------------------------------------------------------------
# Constructors


def path_bounded(net: GainNetwork, *, r_max: float = R_MAX_DEFAULT) -> OmegaPath:
    """Path for operators whose nonzero gains are all bounded.

    The rowwise structural supremum ``s*`` gives an interior point
    ``s0 = 1.05 s*`` of the decay set; the upward leg is the ray through
    ``s0`` (every inflation of ``s0`` stays strictly decaying), the downward
    leg iterates the operator.
    """
    classes = {classify_gain(g) for row in net.gamma for g in row}
    if GainClass.K_INFINITY in classes:
        raise NotBounded("unbounded internal gains present; use the mixed route")
    zr = zero_rows(net)
    if len(zr) == net.n:
        top = 1.05 * r_max
        sigma = OmegaPath(np.array([0.0, top]), np.vstack([np.zeros(net.n),
                                                           np.full(net.n, top)]))
        return _finalize(net, sigma, r_max)
    if zr:
        raise CompatibilityError(
            "rows without nonzero gains: decompose into blocks first"
        )
    sups = np.array([
        net.mu[i].aggregate(
            np.array([0.0 if net.gamma[i][j].is_zero else net.gamma[i][j].sup()
                      for j in range(net.n)]),
            np.array(0.0),
        )
        for i in range(net.n)
    ])
    if not np.all(np.isfinite(sups)):
        raise NotBounded("row aggregation is unbounded despite bounded gains")
    s0 = 1.05 * sups
    for _ in range(41):
        if strictly_less(eval_operator(net, s0), s0):
            break
        s0 = 2.0 * s0
    else:
        raise NotInOmega("inflated rowwise supremum never entered the decay set")
    rho0 = float(s0.max())
    down = _downward_leg(lambda s: eval_operator(net, s), s0,
                         stop_abs=_compressed_floor(rho0))
    eta = 1.05 * r_max / rho0
    up = [s0.copy(), eta * s0]
    sigma = _assemble(down, up)
    return _finalize(net, sigma, r_max)


def path_irreducible(net: GainNetwork, d: DiagOp | None = None, *,
                     r_max: float = R_MAX_DEFAULT, seed: int = 0) -> OmegaPath:
    """Seed-and-chain construction for strongly connected unbounded gains.

    With a diagonal operator ``d`` the path is built for ``D(Gamma(s))``,
    which leaves extra additive margin for external budgets.
    """
    adj = adjacency(net)
    if not is_irreducible(adj):
        raise NotIrreducible(
            "interconnection graph is not strongly connected; use the reducible route"
        )
    for row in net.gamma:
        for g in row:
            if not g.is_zero and classify_gain(g) is not GainClass.K_INFINITY:
                raise CompatibilityError(
                    "bounded gains present; use the bounded or mixed route"
                )
    if d is None:
        op = lambda s: eval_operator(net, s)
    else:
        op = lambda s: d(eval_operator(net, s))
    seed_vec = _find_seed(op, net.n, seed)
    up = _chain_up(op, seed_vec, target_sup=1.05 * r_max)
    down = _downward_leg(op, seed_vec, stop_abs=_compressed_floor(1.0))
    sigma = _assemble(down, up)
    return _finalize(net, sigma, r_max)


def path_homogeneous(net: GainNetwork, *, r_max: float = R_MAX_DEFAULT) -> OmegaPath:
    """Ray path along the eigendirection of a homogeneous operator.

    The ray is linear, so any anchor set reproduces it exactly; a dense
    log grid is kept anyway because downstream budget maps are resolved
    on the path's anchors.
    """
    lam, vec, _res = nonlinear_perron(net)
    if lam >= 1.0 - TOL_STRICT:
        raise LambdaNotContractive(
            f"nonlinear spectral radius {lam:.6g} is not below one", lam=lam
        )
    direction = vec / vec.max()
    radii = np.concatenate([[0.0], _log_grid(1e-7, 1.05 * r_max)])
    sigma = OmegaPath(radii, radii[:, None] * direction[None, :])
    return _finalize(net, sigma, r_max)


def path_max(net: GainNetwork, *, r_max: float = R_MAX_DEFAULT,
             seed: int = 0) -> OmegaPath:
    """Path for pure max aggregation, gated by the cycle condition."""
    for mu in net.mu:
        if not isinstance(mu, MaxAgg):
            raise WrongAggregation("max-aggregation path needs max rows throughout")
    verdict = check_cycle_condition(net)
    if not verdict.holds:
        raise CycleConditionFails(
            "a subordinated cycle composition is not a contraction",
            cycle=verdict.cycle,
        )
    adj = adjacency(net)
    if not is_irreducible(adj):
        return path_reducible(net, r_max=r_max, seed=seed).sigma
    op = lambda s: eval_operator(net, s)
    seed_vec = _find_seed(op, net.n, seed)
    up = _chain_up(op, seed_vec, target_sup=1.05 * r_max)
    down = _downward_leg(op, seed_vec, stop_abs=_compressed_floor(1.0))
    sigma = _assemble(down, up)
    return _finalize(net, sigma, r_max)


def path_three_sum(net: GainNetwork, *, r_max: float = R_MAX_DEFAULT) -> OmegaPath:
    """Closed-form style construction for complete three-node sum networks.

    ``sigma_1 = r``; ``sigma_2`` balances the two transfer budgets of rows
    one and two; ``sigma_3`` sits halfway between the inflow ``h`` and the
    right-to-left running minimum ``g*`` of the remaining budget ``g``.
    """
    if net.n != 3:
        raise CompatibilityError("the balanced construction is specific to n = 3")
    for mu in net.mu:
        if not isinstance(mu, SumAgg):
            raise WrongAggregation("the balanced construction needs additive rows")
    offdiag = [(i, j) for i in range(3) for j in range(3) if i != j]
    if any(net.gamma[i][j].is_zero for i, j in offdiag):
        return path_irreducible(net, r_max=r_max)
    if any(classify_gain(net.gamma[i][j]) is not GainClass.K_INFINITY
           for i, j in offdiag):
        raise CompatibilityError("the balanced construction needs unbounded gains")
    g12, g13 = net.gamma[0][1], net.gamma[0][2]
    g21, g23 = net.gamma[1][0], net.gamma[1][2]
    g31, g32 = net.gamma[2][0], net.gamma[2][1]

    radii = _log_grid(1e-7, 1.5 * r_max * 10.0)
    s2 = np.empty_like(radii)

    def residual(r: float, cand: float) -> float:
        left = g13.inverse(max(r - g12(cand), 0.0))
        right = g23.inverse(max(cand - g21(r), 0.0))
        return left - right

    for k, r in enumerate(radii):
        lo = g21(r)
        hi = g12.inverse(r)
        if hi < lo - 1e-12 * max(1.0, lo):
            raise BisectionFailure(
                f"no bracket for the balance equation at radius {r:.6g}"
            )
        tol_r = 1e-9 * max(1.0, r)
        if hi <= lo:
            s2[k] = 0.5 * (lo + hi)
            continue
        flo = residual(r, lo)
        fhi = residual(r, hi)
        if flo < -tol_r or fhi > tol_r:
            raise BisectionFailure(
                f"balance equation bracket has the wrong signs at radius {r:.6g}"
            )
        if flo <= 0.0:
            s2[k] = lo
            continue
        if fhi >= 0.0:
            s2[k] = hi
            continue
        a, b = lo, hi
        for _ in range(300):
            if (b - a) < 1e-14 * max(b, 1e-300):
                break
            mid = 0.5 * (a + b)
            if residual(r, mid) >= 0:
                a = mid
            else:
                b = mid
        s2[k] = 0.5 * (a + b)
    for k in range(1, len(radii)):
        if s2[k] <= s2[k - 1]:
            s2[k] = s2[k - 1] * (1.0 + 1e-14)

    h = g31._eval(radii) + g32._eval(s2)
    g = np.array([g13.inverse(max(r - g12(v), 0.0)) for r, v in zip(radii, s2)])
    g_star = np.minimum.accumulate(g[::-1])[::-1]
    if np.any(h >= g_star):
        k = int(np.argmax(h >= g_star))
        raise EmptyGap(
            f"inflow meets the remaining budget at radius {radii[k]:.6g}; "
            "numerical evidence against the small gain condition"
        )
    s3 = 0.5 * (g_star + h)
    values = np.column_stack([radii, s2, s3])
    radii_full = np.concatenate([[0.0], radii])
    values_full = np.vstack([np.zeros(3), values])
    sigma = OmegaPath(radii_full, values_full)
    return _finalize(net, sigma, r_max)


def _unbounded_bounded_split(net: GainNetwork):
    gamma_u_part = []
    gamma_b_part = []
    for i in range(net.n):
        row_u, row_b = [], []
        for j in range(net.n):
            g = net.gamma[i][j]
            cls = classify_gain(g)
            if cls is GainClass.K_INFINITY:
                row_u.append(g)
                row_b.append(Zero())
            elif cls is GainClass.ZERO:
                row_u.append(Zero())
                row_b.append(Zero())
            else:
                row_u.append(Zero())
                row_b.append(g)
        gamma_u_part.append(tuple(row_u))
        gamma_b_part.append(tuple(row_b))
    return tuple(gamma_u_part), tuple(gamma_b_part)


def path_mixed(net: GainNetwork, *, r_max: float = R_MAX_DEFAULT,
               seed: int = 0) -> OmegaPath:
    """Path for additive rows mixing bounded and unbounded gains.

    The unbounded part gets a path built against the inflated operator
    ``Gamma_U(s + rho(s))``; the inflation term then absorbs the bounded
    part's supremum beyond a crossover radius, and a downward leg covers
    the radii below it.
    """
    for mu in net.mu:
        if not isinstance(mu, SumAgg):
            raise WrongAggregation("the split construction needs additive rows")
    gamma_u_part, gamma_b_part = _unbounded_bounded_split(net)
    has_bounded = any(not g.is_zero for row in gamma_b_part for g in row)
    has_unbounded = any(not g.is_zero for row in gamma_u_part for g in row)
    if not has_bounded:
        return path_irreducible(net, r_max=r_max, seed=seed)
    if not has_unbounded:
        return path_bounded(net, r_max=r_max)
    s_star = np.array([
        sum(0.0 if g.is_zero else g.sup() for g in gamma_b_part[i])
        for i in range(net.n)
    ])

    zero_gain = Zero()
    last_error: Exception | None = None
    for c in (0.05, 0.01, 0.002):
        rho = Linear(c)
        inflated = tuple(
            tuple(zero_gain if g.is_zero else Compose(g, PlusId(rho)) for g in row)
            for row in gamma_u_part
        )
        t_net = GainNetwork(net.n, inflated,
                            tuple(zero_gain for _ in range(net.n)), net.mu)
        try:
            if is_irreducible(adjacency(t_net)):
                sigma_u = path_irreducible(t_net, r_max=r_max, seed=seed)
            else:
                sigma_u = path_reducible(t_net, r_max=r_max, seed=seed).sigma
        except (SeedNotFound, PathStalled, Stalled, NotInOmega, BlockSgcFails) as exc:
            last_error = exc
            continue
        try:
            return _splice_mixed(net, sigma_u, c, s_star, r_max)
        except SpliceFailure as exc:
            last_error = exc
            continue
    raise last_error if last_error is not None else SpliceFailure(
        "no inflation level admitted a valid splice"
    )


def _splice_mixed(net: GainNetwork, sigma_u: OmegaPath, c: float,
                  s_star: np.ndarray, r_max: float) -> OmegaPath:
    # crossover: the inflation term must clear the bounded part's supremum
    def crossover_ok(r: float) -> bool:
        vals = sigma_u(r)
        return bool(np.all(c * vals >= s_star * (1.0 + 1e-6) + 1e-12))

    candidates = sigma_u.radii[sigma_u.radii > 0]
    r_star = None
    for r in candidates:
        if crossover_ok(r):
            r_star = float(r)
            break
    if r_star is None:
        r_star = float(candidates[-1])
        while not crossover_ok(r_star):
            r_star *= 2.0
            if r_star > 1e18:
                raise SpliceFailure("crossover radius ran away")

    op = lambda s: eval_operator(net, s)
    for _ in range(40):
        top = max(1.1 * r_max, 2.0 * r_star)
        upper_radii = np.unique(np.concatenate([
            [r_star],
            candidates[(candidates > r_star) & (candidates <= top)],
            [top],
        ]))
        upper_vals = sigma_u(upper_radii) * (1.0 + c)
        s0 = upper_vals[0]
        if not strictly_less(op(s0), s0):
            r_star *= 2.0
            continue
        rho0 = float(s0.max())
        down = _downward_leg(op, s0, stop_abs=_compressed_floor(rho0))
        up_rows = [upper_vals[k] for k in range(len(upper_radii))]
        sigma = _assemble(down, up_rows)
        grid = np.geomspace(1e-6, min(1e6, r_max), VALIDATION_POINTS)
        report = validate_path(net, sigma, grid)
        if report.valid:
            return sigma
        r_star *= 2.0
    raise SpliceFailure("validation margin stayed non-positive at the splice")


# ---------------------------------------------------------------------------
# Reducible networks


@dataclass(frozen=True)
class ReduciblePath:
    """Composed path and external budget for a block-triangular network.

    ``sigma`` satisfies the strict decay property for the internal operator
    and, together with ``phi``, the extended operator:
    ``Gamma_ext(sigma(r), phi(r)) < sigma(r)``.  ``blocks`` lists the
    strongly connected blocks most-downstream first; ``block_paths`` holds
    each block's local path in the same order.
    """

    sigma: OmegaPath
    phi: PLFunction
    blocks: tuple[tuple[int, ...], ...]
    block_paths: tuple[OmegaPath, ...]
    report: PathReport


def _subnet(net: GainNetwork, block: tuple[int, ...]) -> GainNetwork:
    zero_gain = Zero()
    gamma = tuple(
        tuple(net.gamma[i][j] for j in block) for i in block
    )
    mus = []
    for i in block:
        mu = net.mu[i]
        if isinstance(mu, BlockMaxSum):
            pos = {j: k for k, j in enumerate(block)}
            remapped = tuple(
                tuple(pos[j] for j in b if j in pos)
                for b in mu.blocks
            )
            remapped = tuple(b for b in remapped if b)
            mu = BlockMaxSum(remapped) if remapped else SumAgg()
        mus.append(mu)
    return GainNetwork(len(block), gamma,
                       tuple(zero_gain for _ in block), tuple(mus))


def _check_block(subnet: GainNetwork, index: int,
                 block: tuple[int, ...]) -> None:
    if all(isinstance(mu, MaxAgg) for mu in subnet.mu):
        verdict = check_cycle_condition(subnet)
        if verdict.fails:
            raise BlockSgcFails(
                f"diagonal block {index} fails the cycle condition",
                block=block,
            )
        return
    try:
        verdict = check_linear_spectral(subnet)
    except NotLinearizable:
        return
    if verdict.fails:
        raise BlockSgcFails(
            f"diagonal block {index} fails the spectral check",
            block=block,
        )


def _block_path(subnet: GainNetwork, r_max: float, seed: int) -> OmegaPath:
    if subnet.n == 1 and subnet.gamma[0][0].is_zero:
        top = 1.1 * r_max
        return OmegaPath(np.array([0.0, top]), np.array([[0.0], [top]]))
    classes = {classify_gain(g) for row in subnet.gamma for g in row
               if not g.is_zero}
    if all(isinstance(mu, MaxAgg) for mu in subnet.mu):
        return path_max(subnet, r_max=r_max, seed=seed)
    if classes and GainClass.K_INFINITY not in classes:
        return path_bounded(subnet, r_max=r_max)
    if classes != {GainClass.K_INFINITY} and all(
            isinstance(mu, SumAgg) for mu in subnet.mu):
        return path_mixed(subnet, r_max=r_max, seed=seed)
    try:
        return path_irreducible(subnet, r_max=r_max, seed=seed)
    except PathStalled:
        return path_irreducible(subnet, d=DiagOp(Linear(0.01)),
                                r_max=r_max, seed=seed)


def _ext_budget(mu, slots: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Largest external slot value keeping the row at or below ``target``.

    Vectorized doubling-and-bisection per radius; entries whose target the
    aggregation can never reach come back infinite (no constraint).
    """
    m = slots.shape[0]
    lo = np.zeros(m)
    hi = np.ones(m)
    reachable = np.ones(m, dtype=bool)
    for _ in range(400):
        vals = mu.aggregate(slots, hi)
        need = vals < target
        if not np.any(need):
            break
        hi = np.where(need, hi * 2.0, hi)
        if np.any(hi > 1e300):
            reachable &= ~(need & (hi > 1e300))
            hi = np.minimum(hi, 1e300)
            if not np.any(need & reachable):
                break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vals = mu.aggregate(slots, mid)
        below = vals <= target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = lo
    return np.where(reachable, out, np.inf)


def _invert_gain_capped(g: GainExpr, levels: np.ndarray) -> np.ndarray:
    """Componentwise preimages; levels at or beyond the supremum map to inf."""
    sup = g.sup()
    out = np.full_like(levels, np.inf)
    finite = np.isfinite(levels)
    mask = finite & (levels < sup * (1.0 - 1e-12))
    if np.any(mask):
        out[mask] = g.inverse(levels[mask])
    return out


def path_reducible(net: GainNetwork, *, r_max: float = R_MAX_DEFAULT,
                   seed: int = 0) -> ReduciblePath:
    """Blockwise construction for reducible interconnections.

    Blocks are processed from the most upstream one downward.  A block with
    no inflow keeps its local path unreparametrized; a block fed only by
    the external input keeps its path and shrinks the external budget map
    so half of each row's margin absorbs the input; a block fed by other
    blocks is reparametrized so its local margins dominate twice the
    aggregated inflow, generalizing the two-block recipe
    ``sigma = (2 eta~(r), r)``, ``phi = min(id, eta2^{-1}(id/2))``.
    """
    adj = adjacency(net)
    if net.n > 1 and is_irreducible(adj):
        raise CompatibilityError(
            "interconnection graph is strongly connected; use the irreducible route"
        )
    blocks = scc_decompose(adj)
    radii_pos = _log_grid(1e-7, 1.1 * r_max)
    m = len(radii_pos)
    comp_vals: dict[int, np.ndarray] = {}
    phi_vals = radii_pos.copy()
    block_path_by_index: dict[int, OmegaPath] = {}

    for bi in reversed(range(len(blocks))):
        block = blocks[bi]
        cross_cols = {
            i: [j for j in range(net.n)
                if j not in block and not net.gamma[i][j].is_zero]
            for i in block
        }
        has_cross = any(cross_cols[i] for i in block)
        has_ext = any(not net.gamma_u[i].is_zero for i in block)
        for i in block:
            if (cross_cols[i] or not net.gamma_u[i].is_zero) and not isinstance(
                    net.mu[i], (SumAgg, MaxAgg)):
                raise UnsupportedAggregation(
                    "cross-block inflow needs additive or max aggregation"
                )
        subnet = _subnet(net, block)
        _check_block(subnet, bi, block)
        bp = _block_path(subnet, r_max, seed)
        block_path_by_index[bi] = bp

        local = {j: k for k, j in enumerate(block)}
        bp_vals = bp(radii_pos)

        if not has_cross and not has_ext:
            for i in block:
                comp_vals[i] = bp_vals[:, local[i]]
            continue

        # internal slot values and margins of the local path on the shared grid
        def _internal_slots(vals: np.ndarray) -> dict[int, np.ndarray]:
            slots = {}
            for i in block:
                cols = np.zeros((vals.shape[0], len(block)))
                for k, j in enumerate(block):
                    g = net.gamma[i][j]
                    if not g.is_zero:
                        cols[:, k] = g._eval(vals[:, local[j]])
                slots[i] = cols
            return slots

        if not has_cross:
            # external input only: keep the local path, shrink the budget map
            slots = _internal_slots(bp_vals)
            for i in block:
                comp_vals[i] = bp_vals[:, local[i]]
            for i in block:
                giu = net.gamma_u[i]
                if giu.is_zero:
                    continue
                row_int = net.mu[i].aggregate(slots[i], np.zeros(m))
                margin = comp_vals[i] - row_int
                target = comp_vals[i] - 0.5 * margin
                budget = _ext_budget(net.mu[i], slots[i], target)
                cap = _invert_gain_capped(giu, budget)
                phi_vals = np.minimum(phi_vals, cap)
            continue

        # blocks fed by other blocks: reparametrize the local path so its
        # margins dominate twice the aggregated inflow
        inflow = np.zeros((m, len(block)))
        for k, i in enumerate(block):
            if isinstance(net.mu[i], MaxAgg):
                acc = np.zeros(m)
                for j in cross_cols[i]:
                    acc = np.maximum(acc, net.gamma[i][j]._eval(comp_vals[j]))
                if not net.gamma_u[i].is_zero:
                    acc = np.maximum(acc, net.gamma_u[i]._eval(phi_vals))
            else:
                acc = np.zeros(m)
                for j in cross_cols[i]:
                    acc = acc + net.gamma[i][j]._eval(comp_vals[j])
                if not net.gamma_u[i].is_zero:
                    acc = acc + net.gamma_u[i]._eval(phi_vals)
            inflow[:, k] = acc

        t_lo, t_hi = 1e-10, 10.0 * r_max
        for _ in range(40):
            t_grid = _log_grid(t_lo, t_hi)
            t_vals = bp(t_grid)
            t_slots = _internal_slots(t_vals)
            tables = np.empty((len(t_grid), len(block)))
            for k, i in enumerate(block):
                if isinstance(net.mu[i], MaxAgg):
                    tables[:, k] = t_vals[:, local[i]]
                else:
                    row_int = net.mu[i].aggregate(t_slots[i], np.zeros(len(t_grid)))
                    tables[:, k] = t_vals[:, local[i]] - row_int
            suff = np.minimum.accumulate(tables[::-1], axis=0)[::-1]
            targets = 2.0 * inflow
            if np.all(suff[-1][None, :] >= targets.max(axis=0)):
                break
            t_hi *= 100.0
            if t_hi > 1e16 * r_max:
                raise PathStalled(
                    "local margins never dominate the aggregated inflow"
                )
        else:
            raise PathStalled("local margins never dominate the aggregated inflow")

        idx = np.zeros(m, dtype=int)
        for k in range(len(block)):
            idx = np.maximum(idx, np.searchsorted(suff[:, k], targets[:, k],
                                                  side="left"))
        idx = np.minimum(idx, len(t_grid) - 1)
        psi = t_grid[idx]
        psi = np.maximum.accumulate(psi)
        drift = 1e-3 * (psi[-1] + t_grid[0]) / radii_pos[-1]
        psi = psi + drift * radii_pos
        reparam = bp(psi)
        for i in block:
            comp_vals[i] = reparam[:, local[i]]

    values = np.column_stack([comp_vals[i] for i in range(net.n)])
    radii_full = np.concatenate([[0.0], radii_pos])
    values_full = np.vstack([np.zeros(net.n), values])
    sigma = OmegaPath(radii_full, values_full)

    phi_vals = np.minimum.accumulate(phi_vals[::-1])[::-1]
    phi = PLFunction(radii_full, np.concatenate([[0.0], phi_vals]))

    grid = np.geomspace(1e-6, min(1e6, r_max), VALIDATION_POINTS)
    report = validate_path(net, sigma, grid)
    if not report.valid:
        raise NotInOmega(
            f"composed path failed validation (min margin {report.min_margin:.3g})"
        )
    ext_image = eval_operator_ext(net, values, phi_vals)
    if not np.all(ext_image < values):
        raise NotInOmega(
            "composed path failed the extended-operator check with its budget map"
        )
    block_paths = tuple(block_path_by_index[i] for i in range(len(blocks)))
    return ReduciblePath(sigma=sigma, phi=phi, blocks=blocks,
                         block_paths=block_paths, report=report)


# ---------------------------------------------------------------------------
# Dispatch


def construct_path(net: GainNetwork, *, homogeneous: bool = False,
                   r_max: float = R_MAX_DEFAULT, seed: int = 0):
    """Pick a constructor by network shape (fixed, documented order).

    homogeneous (declared) -> max -> three-node sum -> mixed -> bounded ->
    irreducible -> reducible.  Returns an :class:`OmegaPath`, or a
    :class:`ReduciblePath` from the reducible route.
    """
    if homogeneous:
        return path_homogeneous(net, r_max=r_max)
    if all(isinstance(mu, MaxAgg) for mu in net.mu):
        return path_max(net, r_max=r_max, seed=seed)
    classes = {classify_gain(g) for row in net.gamma for g in row
               if not g.is_zero}
    all_sum = all(isinstance(mu, SumAgg) for mu in net.mu)
    if all_sum and net.n == 3 and all(
            not net.gamma[i][j].is_zero and
            classify_gain(net.gamma[i][j]) is GainClass.K_INFINITY
            for i in range(3) for j in range(3) if i != j):
        return path_three_sum(net, r_max=r_max)
    if all_sum and classes and classes != {GainClass.K_INFINITY} and (
            GainClass.K_INFINITY in classes):
        return path_mixed(net, r_max=r_max, seed=seed)
    if classes and GainClass.K_INFINITY not in classes:
        return path_bounded(net, r_max=r_max)
    if is_irreducible(adjacency(net)):
        try:
            return path_irreducible(net, r_max=r_max, seed=seed)
        except PathStalled:
            return path_irreducible(net, d=DiagOp(Linear(0.01)),
                                    r_max=r_max, seed=seed)
    return path_reducible(net, r_max=r_max, seed=seed)
