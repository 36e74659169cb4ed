"""Small gain condition checks.

Three certification routes and one honest falsifier:

* cycle criterion for max-type aggregation,
* spectral radius for networks whose operator is (conjugate to) a linear map,
* nonlinear eigenvalue for homogeneous irreducible operators,
* grid search for a witness s with Gamma_mu(s) >= s, which can only ever
  certify failure; absence of a witness stays Inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NoConvergence,
    NotHomogeneous,
    NotIrreducible,
    NotLinearizable,
    OutOfRange,
    WrongAggregation,
)
from .gains import (
    Compose,
    DiagOp,
    GainExpr,
    GainNetwork,
    Linear,
    MaxAgg,
    OuterSum,
    PlusId,
    Power,
    SumAgg,
    Zero,
    eval_operator,
    invert_gain,
)
from .graph import (
    CYCLE_ENUM_LIMIT,
    adjacency,
    is_irreducible,
    scc_decompose,
    subordinated_cycles,
)

CERTIFIED_HOLDS = "CertifiedHolds"
CERTIFIED_FAILS = "CertifiedFails"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SgcVerdict:
    status: str
    method: str
    witness: np.ndarray | None = None
    cycle: tuple[int, ...] | None = None
    rho: float | None = None
    margins: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status == CERTIFIED_HOLDS

    @property
    def fails(self) -> bool:
        return self.status == CERTIFIED_FAILS

    @property
    def inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE


@dataclass(frozen=True)
class GridSpec:
    """Search grid for falsification: log radii times sphere directions."""

    radii: int = 40
    rmin: float = 1e-6
    rmax: float = 1e6
    directions: int | None = None  # default 2n+200
    seed: int = 0


def _cycle_edge_gains(net: GainNetwork, cycle) -> list[GainExpr]:
    k = len(cycle)
    return [net.gamma[cycle[m]][cycle[(m + 1) % k]] for m in range(k)]


def _compose_cycle(gains, r):
    v = np.asarray(r, dtype=float)
    for g in reversed(gains):
        v = g(v)
    return v


def check_cycle_condition(net: GainNetwork, grid_points: int = 97) -> SgcVerdict:
    """Cycle criterion for pure max aggregation.

    Certifies the condition when every cyclic gain composition stays below
    the identity: exactly (slope product < 1) when a cycle is all linear,
    otherwise on a log grid over [1e-8, 1e8].
    """
    if not all(isinstance(m, MaxAgg) for m in net.mu):
        raise WrongAggregation("cycle criterion needs max aggregation in every row")
    cycles = subordinated_cycles(adjacency(net))
    grid = np.geomspace(1e-8, 1e8, grid_points)
    min_margin = np.inf
    for c in cycles:
        gains = _cycle_edge_gains(net, c)
        if all(isinstance(g, Linear) for g in gains):
            prod = float(np.prod([g.slope for g in gains]))
            if prod >= 1.0:
                return SgcVerdict(
                    status=CERTIFIED_FAILS, method="cycle-linear", cycle=c,
                    witness=_cycle_witness(net, c),
                    margins={"slope_product": prod},
                )
            min_margin = min(min_margin, 1.0 - prod)
            continue
        vals = _compose_cycle(gains, grid)
        if np.any(vals >= grid):
            return SgcVerdict(
                status=CERTIFIED_FAILS, method="cycle-grid", cycle=c,
                witness=_cycle_witness(net, c),
                margins={"worst_radius": float(grid[np.argmax(vals - grid)])},
            )
        min_margin = min(min_margin, float(np.min((grid - vals) / grid)))
    return SgcVerdict(
        status=CERTIFIED_HOLDS, method="cycle",
        margins={"min_margin": float(min_margin), "cycles": len(cycles)},
    )


def _cycle_witness(net: GainNetwork, cycle, radii=None, deltas=None):
    """Vector supported on a bad cycle with Gamma_mu(s) >= s, if one verifies.

    Walks the cycle making each edge tight via inversion; small per-step
    inflations absorb inversion residue when the composition has real slack.
    """
    if radii is None:
        radii = np.geomspace(1e-4, 1e4, 9)
    if deltas is None:
        deltas = (0.0, 1e-9, 1e-6, 1e-3, 0.03)
    for r in radii:
        for d in deltas:
            s = _tight_cycle_vector(net, cycle, float(r), d)
            if s is not None and _is_witness(net, s):
                return s
    return None


def _tight_cycle_vector(net, cycle, r, delta):
    s = np.zeros(net.n)
    s[cycle[0]] = r
    for m in range(len(cycle) - 1):
        g = net.gamma[cycle[m]][cycle[m + 1]]
        try:
            s[cycle[m + 1]] = invert_gain(g, s[cycle[m]]) * (1.0 + delta)
        except OutOfRange:
            return None
        if not np.isfinite(s[cycle[m + 1]]) or s[cycle[m + 1]] <= 0:
            return None
    return s


def _is_witness(net, s, op=None):
    out = eval_operator(net, s) if op is None else op(s)
    return bool(np.any(s > 0) and np.all(out >= s))


def _sphere_directions(n: int, count: int, rng) -> np.ndarray:
    dirs = [np.eye(n)[i] for i in range(n)] + [np.ones(n)]
    while len(dirs) < count:
        support = rng.random(n) < rng.uniform(0.3, 1.0)
        w = rng.gamma(1.0, size=n) * support
        m = w.max()
        if m > 0:
            dirs.append(w / m)
    return np.array(dirs[:count])


def falsify_sgc(net: GainNetwork, grid: GridSpec | None = None) -> SgcVerdict:
    """Search for s != 0 with Gamma_mu(s) >= s componentwise.

    A found witness certifies failure.  Nothing found is Inconclusive: a
    finite grid cannot certify the universal statement.
    """
    grid = grid or GridSpec()
    return _falsify(net, None, grid, None, method="falsify")


def _falsify(net, op, grid, edge_transform, method):
    n = net.n
    rng = np.random.default_rng(grid.seed)
    radii = np.geomspace(grid.rmin, grid.rmax, grid.radii)
    count = grid.directions if grid.directions is not None else 2 * n + 200
    dirs = _sphere_directions(n, count, rng)

    apply = (lambda s: eval_operator(net, s)) if op is None else op
    best_deficit = np.inf

    # radius-major sweep, batched over directions
    for r in radii:
        batch = r * dirs
        out = apply(batch)
        deficit = np.max(batch - out, axis=1)
        hit = np.flatnonzero((deficit <= 0.0) & np.any(batch > 0, axis=1))
        if hit.size:
            w = batch[hit[0]]
            return SgcVerdict(
                status=CERTIFIED_FAILS, method=method, witness=w,
                margins={"radius": float(r)},
            )
        best_deficit = min(best_deficit, float(deficit.min()))

    # structured candidates: tight cycle walks, then a Perron direction
    if n <= CYCLE_ENUM_LIMIT:
        for c in subordinated_cycles(adjacency(net)):
            cnet = net if edge_transform is None else _transform_net(net, edge_transform)
            w = _cycle_witness_for_op(cnet, net, c, apply)
            if w is not None:
                return SgcVerdict(
                    status=CERTIFIED_FAILS, method=method + "-cycle",
                    witness=w, cycle=c,
                )
    try:
        G, p = _linearize(net)
    except NotLinearizable:
        G = None
    if G is not None and op is None:
        rho, v = _power_rho(G)
        for scale in (1e-3, 1.0, 1e3):
            w = scale * np.power(v, p)
            if _is_witness(net, w):
                return SgcVerdict(
                    status=CERTIFIED_FAILS, method=method + "-perron",
                    witness=w, rho=rho,
                )
    return SgcVerdict(
        status=INCONCLUSIVE, method=method,
        margins={"best_deficit": best_deficit},
    )


def _transform_net(net, edge_transform):
    gamma = tuple(
        tuple(g if g.is_zero else edge_transform(g) for g in row)
        for row in net.gamma
    )
    return GainNetwork(n=net.n, gamma=gamma, gamma_u=net.gamma_u, mu=net.mu)


def _cycle_witness_for_op(walk_net, base_net, cycle, apply):
    radii = np.geomspace(1e-4, 1e4, 9)
    for r in radii:
        for d in (0.0, 1e-9, 1e-6, 1e-3, 0.03):
            s = _tight_cycle_vector(walk_net, cycle, float(r), d)
            if s is not None and _is_witness(base_net, s, op=apply):
                return s
    return None


def check_strong_sgc(
    net: GainNetwork, d: DiagOp, side: str = "left", grid: GridSpec | None = None
) -> SgcVerdict:
    """Falsify the diagonally strengthened condition.

    side="left" searches D(Gamma_mu(s)) >= s, side="right" searches
    Gamma_mu(D(s)) >= s.  Semantics as in :func:`falsify_sgc`.
    """
    grid = grid or GridSpec()
    if side == "left":
        op = lambda s: d(eval_operator(net, s))
        tr = lambda g: Compose(PlusId(d.alpha), g)
    elif side == "right":
        op = lambda s: eval_operator(net, d(np.asarray(s, dtype=float)))
        tr = lambda g: Compose(g, PlusId(d.alpha))
    else:
        raise ValueError("side must be 'left' or 'right'")
    return _falsify(net, op, grid, tr, method=f"strong-{side}")


def _linearize(net: GainNetwork):
    """Slope matrix G and exponent p with Gamma_mu(s) = (G s^(1/p))^p.

    p=1 is the plain linear case (sum rows, linear gains).  p>1 covers sum
    rows wrapped in a pure power, with every gain a matching root power; the
    coordinate change t = s^(1/p) then makes the operator exactly linear.
    """
    exps = []
    for m in net.mu:
        if isinstance(m, SumAgg):
            exps.append(1.0)
        elif (
            isinstance(m, OuterSum)
            and isinstance(m.rho, Power)
            and m.rho.coeff == 1.0
        ):
            exps.append(float(m.rho.exponent))
        else:
            raise NotLinearizable("row aggregation is not sum or power-of-sum")
    if len(set(exps)) != 1:
        raise NotLinearizable("rows use different outer powers")
    p = exps[0]
    G = np.zeros((net.n, net.n))
    for i, row in enumerate(net.gamma):
        for j, g in enumerate(row):
            if g.is_zero:
                continue
            if p == 1.0 and isinstance(g, Linear):
                G[i, j] = g.slope
            elif isinstance(g, Power) and abs(g.exponent - 1.0 / p) <= 1e-12:
                G[i, j] = g.coeff
            else:
                raise NotLinearizable("gain does not match the row exponent")
    return G, p


def _power_rho(G: np.ndarray, tol: float = 1e-14, max_iter: int = 200000):
    """Spectral radius of a nonnegative matrix by blockwise power iteration.

    On a reducible matrix the plain iteration crawls (defective dominant
    eigenvalue), so the radius is taken as the max over irreducible diagonal
    blocks, where the +I shift makes convergence geometric.  The returned
    vector is the winning block's Perron direction embedded in zeros; rows
    outside the block only gain from it, so it still witnesses expansion.
    """
    n = G.shape[0]
    best = 0.0
    bestvec = np.ones(n)
    for b in scc_decompose(G != 0):
        idx = np.array(b)
        B = G[np.ix_(idx, idx)]
        if len(b) == 1:
            rho_b, v_b = float(B[0, 0]), np.ones(1)
        else:
            M = B + np.eye(len(b))
            v = np.ones(len(b))
            for _ in range(max_iter):
                w = M @ v
                m = float(np.max(w))
                w = w / m
                if float(np.max(np.abs(w - v))) < tol:
                    break
                v = w
            else:
                raise NoConvergence("power iteration did not settle")
            rho_b, v_b = m - 1.0, w
        if rho_b > best:
            best = rho_b
            bestvec = np.zeros(n)
            bestvec[idx] = v_b
    return best, bestvec


def check_linear_spectral(net: GainNetwork, tol_strict: float = 1e-9) -> SgcVerdict:
    """Spectral radius route for operators linear after a power substitution.

    Certifies the condition when rho(G) < 1 - tol; at rho >= 1 tries the
    Perron direction as an explicit witness.
    """
    G, p = _linearize(net)
    rho, v = _power_rho(G)
    if rho < 1.0 - tol_strict:
        return SgcVerdict(status=CERTIFIED_HOLDS, method="spectral", rho=rho)
    w = np.power(v, p)
    if _is_witness(net, w):
        return SgcVerdict(
            status=CERTIFIED_FAILS, method="spectral", rho=rho, witness=w
        )
    return SgcVerdict(status=INCONCLUSIVE, method="spectral", rho=rho)


def nonlinear_perron(
    net: GainNetwork, tol: float = 1e-10, max_iter: int = 100000, seed: int = 0
):
    """Nonlinear eigenpair of a homogeneous irreducible operator.

    Damped normalized iteration s <- (Gamma_mu(s) + s) / max-norm; the raw
    normalized iteration can settle into a two-cycle, the damping cannot.
    Returns (lam, eigvec, residual) with the max-norm residual of
    Gamma_mu(v) = lam v at the fixed direction.
    """
    rng = np.random.default_rng(seed)
    for _ in range(16):
        s = rng.uniform(0.1, 10.0, size=net.n)
        a = eval_operator(net, 2.0 * s)
        b = 2.0 * eval_operator(net, s)
        if np.max(np.abs(a - b)) > 1e-9 * (np.max(np.abs(a)) + 1e-12):
            raise NotHomogeneous("operator fails the doubling test")
    if not is_irreducible(adjacency(net)):
        raise NotIrreducible("eigenpair iteration needs a strongly connected graph")
    v = np.ones(net.n)
    for _ in range(max_iter):
        w = eval_operator(net, v) + v
        m = float(np.max(w))
        w = w / m
        if float(np.max(np.abs(w - v))) < tol:
            v = w
            break
        v = w
    else:
        raise NoConvergence("eigen iteration hit the cap")
    gv = eval_operator(net, v)
    lam = float(np.max(gv))
    residual = float(np.max(np.abs(gv - lam * v)))
    return lam, v, residual
