"""Composition of subsystem energies into a network certificate.

The composite function is ``V(x) = max_i sigma_i^{-1}(V_i(x_i))`` for a
decay path ``sigma``.  Alongside the path, a scalar budget map ``phi``
bounds the external input magnitude for which the decrease property is
guaranteed at each level: ``Gamma_ext(sigma(r), phi(r)) < sigma(r)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CompatibilityError, GeneralCondFails
from .gains import (
    BlockMaxSum,
    GainExpr,
    GainNetwork,
    MaxAgg,
    OuterSum,
    SumAgg,
    eval_operator,
    eval_operator_ext,
)
from .paths import (
    OmegaPath,
    PLFunction,
    ReduciblePath,
    _invert_gain_capped,
)

ADDITIVE = "additive"
MAX = "max"
SEPARATED = "separated"
MODES = (ADDITIVE, MAX, SEPARATED)


@dataclass(frozen=True)
class SubsystemSpec:
    """State dimension and energy hook of one subsystem.

    ``V`` maps the subsystem's state slice to a nonnegative scalar with
    ``V(0) = 0``; ``alpha`` optionally records the decrease rate used when
    the gains were derived.
    """

    dim: int
    V: Callable[[np.ndarray], float]
    alpha: GainExpr | None = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("subsystem dimension must be positive")


def _audit_subsystem(spec: SubsystemSpec, index: int) -> None:
    # V(0) = 0 exactly, positive elsewhere on a seeded sample
    origin = float(spec.V(np.zeros(spec.dim)))
    if origin != 0.0:
        raise ValueError(
            f"subsystem {index}: energy must vanish at the origin, got {origin:.3g}"
        )
    rng = np.random.default_rng(1234 + index)
    for _ in range(100):
        x = rng.normal(size=spec.dim) * 10.0 ** rng.uniform(-3, 2)
        if not float(spec.V(x)) > 0.0:
            raise ValueError(
                f"subsystem {index}: energy is not positive definite at {x}"
            )


def derive_phi(net: GainNetwork, sigma: OmegaPath, mode: str,
               alpha: GainExpr | None = None) -> PLFunction:
    """Budget map from the path margins, on the path's anchor grid.

    The admissible external slot level of an input-fed row depends on how
    that row aggregates the slot.  A max row tolerates the row image
    ``Gamma_i(sigma(r))`` itself.  A row that adds the slot on top (plain
    sum, block-max-sum, or a wrapped sum with the slot added after the
    wrapper) tolerates ``alpha(Gamma_i(sigma(r)))`` and therefore needs
    the diagonal shift the path was built against.  A wrapped sum with
    the slot inside the wrapper tolerates the wrapper-preimage gap from
    the row image up to the midpoint level ``(Gamma_i + sigma_i)/2``,
    which keeps half of the path margin without any shift.  The budget is
    the smallest preimage under the external gains, capped by the
    identity, then flattened right-to-left into a nondecreasing envelope
    (the conservative choice between anchors).  Rows without an external
    gain put no constraint; if none of the rows has one the budget map is
    the identity.  Past the last anchor the budget follows the final
    chord, except where a structurally bounded row pins a finite ceiling.
    """
    if mode not in MODES:
        raise ValueError(f"unknown composition mode {mode!r}")
    pos = sigma.radii[1:]
    states = sigma(pos)
    image = eval_operator(net, states)
    caps = pos.copy()
    ceiling = np.inf
    for i in range(net.n):
        giu = net.gamma_u[i]
        if giu.is_zero:
            continue
        m = net.mu[i]
        levels = image[:, i]
        if isinstance(m, OuterSum) and m.external_in_sum:
            inner = m.rho.inverse(levels)
            target = m.rho.inverse(0.5 * (levels + sigma.values[1:, i]))
            gap = np.maximum(target - inner, 0.0)
            caps = np.minimum(caps, _invert_gain_capped(giu, gap))
            # the gap grows with sigma_i, so this row never caps the tail
            continue
        if isinstance(m, MaxAgg):
            lv = levels
        elif isinstance(m, (SumAgg, BlockMaxSum, OuterSum)):
            if alpha is None:
                raise CompatibilityError(
                    "rows adding the external slot on top need the "
                    "diagonal shift the path was built with"
                )
            lv = alpha._eval(levels)
        else:
            raise CompatibilityError(
                f"row {i}: aggregation shape unsupported for budget derivation"
            )
        caps = np.minimum(caps, _invert_gain_capped(giu, lv))
        # structural limit of the row image as the radius grows; a finite
        # limit bounds the budget, which must not be extrapolated past it
        slot_sups = np.array([min(net.gamma[i][j].sup(), 1e300)
                              for j in range(net.n)])
        with np.errstate(over="ignore"):
            lvl_sup = float(m.aggregate(slot_sups, np.array(0.0)))
            if not isinstance(m, MaxAgg) and np.isfinite(lvl_sup):
                lvl_sup = float(alpha._eval(np.asarray(lvl_sup)))
        if lvl_sup < giu.sup() * (1.0 - 1e-12):
            ceiling = min(ceiling, float(giu.inverse(lvl_sup)))
    caps = np.minimum.accumulate(caps[::-1])[::-1]
    radii = sigma.radii
    if np.isfinite(ceiling):
        caps = np.minimum(caps, ceiling)
        radii = np.concatenate([radii, [2.0 * radii[-1]]])
        caps = np.concatenate([caps, [caps[-1]]])
    return PLFunction(radii, np.concatenate([[0.0], caps]))


@dataclass(frozen=True)
class CompositeLyapunov:
    """Validated certificate: path, budget map, and subsystem energies."""

    net: GainNetwork
    sigma: OmegaPath
    phi: PLFunction
    mode: str
    subsystems: tuple[SubsystemSpec, ...]
    alpha: GainExpr | None = None
    c: float | None = None

    @property
    def offsets(self) -> tuple[int, ...]:
        out = []
        pos = 0
        for spec in self.subsystems:
            out.append(pos)
            pos += spec.dim
        return tuple(out)

    @property
    def state_dim(self) -> int:
        return sum(spec.dim for spec in self.subsystems)

    def eval_V(self, x) -> tuple[float, tuple[int, ...]]:
        """Composite value and the set of active (maximizing) indices.

        Ties resolve to every index within ``1e-12`` relative of the max;
        the path inverse takes the left segment at anchor values.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.state_dim,):
            raise ValueError(f"state vector must have length {self.state_dim}")
        scaled = np.empty(len(self.subsystems))
        for i, (spec, off) in enumerate(zip(self.subsystems, self.offsets)):
            vi = float(spec.V(x[off:off + spec.dim]))
            scaled[i] = self.sigma.inverse(i, max(vi, 0.0))
        vmax = float(scaled.max())
        tol = 1e-12 * max(1.0, vmax)
        active = tuple(i for i in range(len(scaled))
                       if abs(scaled[i] - vmax) <= tol)
        return vmax, active

    def eval_V_batch(self, X) -> np.ndarray:
        """Composite values along a batch of states, shape ``(m, dim)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cols = np.empty((X.shape[0], len(self.subsystems)))
        for i, (spec, off) in enumerate(zip(self.subsystems, self.offsets)):
            vi = np.array([float(spec.V(row[off:off + spec.dim])) for row in X])
            cols[:, i] = self.sigma.inverse(i, np.maximum(vi, 0.0))
        return np.max(cols, axis=1)

    def iss_threshold(self, u_norm: float) -> float:
        """Level below which the certificate guarantees eventual decay.

        Zero when the network has no external gains; raises
        :class:`OutOfRange` when the budget map is bounded below the
        requested input magnitude (restricted input range).
        """
        u = float(u_norm)
        if u < 0:
            raise ValueError("input magnitudes are nonnegative")
        if u == 0.0 or all(g.is_zero for g in self.net.gamma_u):
            return 0.0
        return float(self.phi.inverse(u))


def compose(net: GainNetwork, sigma, subsystems, mode: str = MAX,
            alpha: GainExpr | None = None,
            phi: PLFunction | None = None) -> CompositeLyapunov:
    """Assemble and check a composite certificate.

    ``sigma`` may be a plain path or the result of the reducible route,
    whose own budget map is then the default.  The extended operator
    inequality is checked at 1000 log-spaced radii; the first failing
    radius is reported.
    """
    if mode not in MODES:
        raise ValueError(f"unknown composition mode {mode!r}")
    if isinstance(sigma, ReduciblePath):
        if phi is None:
            phi = sigma.phi
        sigma = sigma.sigma
    if not isinstance(sigma, OmegaPath):
        raise TypeError("sigma must be a decay path")
    subsystems = tuple(subsystems)
    if len(subsystems) != net.n:
        raise ValueError(f"need {net.n} subsystem specs, got {len(subsystems)}")
    for i, spec in enumerate(subsystems):
        _audit_subsystem(spec, i)
    if phi is None:
        phi = derive_phi(net, sigma, mode, alpha)
    rr = np.geomspace(1e-6, 1e6, 1000)
    states = sigma(rr)
    image = eval_operator_ext(net, states, phi(rr))
    margins = np.min(states - image, axis=1)
    bad = margins <= 0.0
    if np.any(bad):
        radius = float(rr[int(np.argmax(bad))])
        raise GeneralCondFails(
            f"certificate inequality fails at radius {radius:.6g}",
            radius=radius,
        )
    return CompositeLyapunov(
        net=net, sigma=sigma, phi=phi, mode=mode, subsystems=subsystems,
        alpha=alpha, c=1.0 if mode == SEPARATED else None,
    )
