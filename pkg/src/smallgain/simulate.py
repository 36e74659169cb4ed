"""Worked example families, fixed-step simulation, and empirical checks.

Two built-in model families mirror the library's gain constructions: a
bank of diffusively coupled linear blocks with quadratic subsystem
energies, and a recurrent neural population with amplification bounds
and saturating activations, using the absolute value as the subsystem
energy.  A classical fixed-step RK4 integrator produces trajectories,
and two report-style checks probe a composite certificate against the
simulated dynamics: pointwise decrease of the composite function above
its input threshold, and trajectory-level decay and boundedness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compose import ADDITIVE, MAX, CompositeLyapunov, SubsystemSpec, compose
from .errors import BadParameters, Diverged, NotHurwitz, TooLarge
from .gains import (
    Compose,
    GainNetwork,
    Linear,
    OuterSum,
    Power,
    Saturating,
    Zero,
)
from .paths import R_MAX_DEFAULT, construct_path, path_homogeneous

DIVERGENCE_GUARD = 1e12
MAX_LYAP_DIM = 20
LYAP_RESIDUAL_TOL = 1e-8


def solve_lyapunov_eq(A, Q) -> np.ndarray:
    """Symmetric positive definite P with ``A'P + PA = -Q``.

    Solved as one dense linear system in the stacked entries of P, which
    caps the block dimension at a desk scale.  The Hurwitz requirement on
    A is validated after the fact: a singular system, a large residual,
    or an indefinite P all reject the block.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("state matrix must be square")
    if Q.shape != A.shape:
        raise ValueError("weight matrix must match the state matrix shape")
    d = A.shape[0]
    if d > MAX_LYAP_DIM:
        raise TooLarge(f"block dimension {d} above the dense-solve limit")
    if float(np.max(np.abs(Q - Q.T))) > 1e-12 * (1.0 + float(np.max(np.abs(Q)))):
        raise BadParameters("weight matrix must be symmetric")
    try:
        np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        raise BadParameters("weight matrix must be positive definite")
    # row-major stacking: vec(A'P) = (A' (x) I) vec(P), vec(PA) = (I (x) A') vec(P)
    eye = np.eye(d)
    M = np.kron(A.T, eye) + np.kron(eye, A.T)
    try:
        p = np.linalg.solve(M, -Q.reshape(-1))
    except np.linalg.LinAlgError:
        raise NotHurwitz("Lyapunov system is singular")
    P = p.reshape(d, d)
    P = 0.5 * (P + P.T)
    residual = float(np.max(np.abs(A.T @ P + P @ A + Q)))
    if residual > LYAP_RESIDUAL_TOL:
        raise NotHurwitz(f"Lyapunov residual {residual:.3g} too large")
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NotHurwitz("Lyapunov solution is not positive definite")
    return P


# ---------------------------------------------------------------------------
# Model families


@dataclass(frozen=True, eq=False)
class LinearBlock:
    """Diffusively coupled linear blocks sharing one input channel bank.

    ``A`` lists the square state matrices, ``delta`` maps off-diagonal
    pairs ``(i, j)`` to coupling matrices, and ``B`` lists per-block input
    matrices (None for unforced blocks).  All input matrices must agree
    on the channel count.
    """

    A: tuple
    delta: dict
    B: tuple

    def __post_init__(self):
        A = tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.A)
        if not A:
            raise BadParameters("at least one block is required")
        for a in A:
            if a.shape[0] != a.shape[1]:
                raise BadParameters("state matrices must be square")
        dims = tuple(a.shape[0] for a in A)
        offsets = np.concatenate([[0], np.cumsum(dims)])
        n = len(A)
        delta = {}
        for (i, j), m in dict(self.delta or {}).items():
            if i == j:
                raise BadParameters("self coupling belongs in the state matrix")
            if not (0 <= i < n and 0 <= j < n):
                raise BadParameters(f"coupling index ({i}, {j}) out of range")
            m = np.atleast_2d(np.asarray(m, dtype=float))
            if m.shape != (dims[i], dims[j]):
                raise BadParameters(f"coupling ({i}, {j}) has shape {m.shape}")
            delta[(i, j)] = m
        B = list(self.B) if self.B else [None] * n
        if len(B) != n:
            raise BadParameters("one input matrix per block (None allowed)")
        width = 0
        for b in B:
            if b is None:
                continue
            b = np.atleast_2d(np.asarray(b, dtype=float))
            if width and b.shape[1] != width:
                raise BadParameters("input matrices must agree on channel count")
            width = b.shape[1]
        Bn = []
        for i, b in enumerate(B):
            if b is None:
                Bn.append(np.zeros((dims[i], width)))
            else:
                b = np.atleast_2d(np.asarray(b, dtype=float))
                if b.shape != (dims[i], width):
                    raise BadParameters(f"block {i} input matrix has shape {b.shape}")
                Bn.append(b)
        N = int(offsets[-1])
        drift = np.zeros((N, N))
        for i in range(n):
            sl = slice(offsets[i], offsets[i + 1])
            drift[sl, sl] = A[i]
        for (i, j), m in delta.items():
            drift[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = m
        gain = np.vstack(Bn) if N else np.zeros((0, width))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "B", tuple(Bn))
        object.__setattr__(self, "_dims", dims)
        object.__setattr__(self, "_offsets", tuple(int(o) for o in offsets))
        object.__setattr__(self, "_drift", drift)
        object.__setattr__(self, "_gain", gain)

    @property
    def n_blocks(self) -> int:
        return len(self.A)

    @property
    def dims(self) -> tuple:
        return self._dims

    @property
    def state_dim(self) -> int:
        return self._offsets[-1]

    @property
    def input_dim(self) -> int:
        return self._gain.shape[1]

    def f(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return x @ self._drift.T + u @ self._gain.T


@dataclass(frozen=True, eq=False)
class CohenGrossberg:
    """Recurrent neural population with banded amplification.

    Neuron i evolves as ``-a_i(x_i) (b_i(x_i) - sum_j t_ij s_j(x_j) + u_i)``
    where the amplification ``a_i(x) = mid_i + spread_i tanh(x)`` stays
    strictly inside ``(alpha_lo_i, alpha_hi_i)``, the drift is
    ``b_i(x) = b_slope_i x``, and the activation
    ``s_j(x) = x / (1 + act_scale_j |x|)`` stays strictly under the unit
    saturating bound because ``act_scale_j > 1``.
    """

    alpha_lo: np.ndarray
    alpha_hi: np.ndarray
    b_slope: np.ndarray
    t_matrix: np.ndarray
    act_scale: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.alpha_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.alpha_hi, dtype=float))
        bs = np.atleast_1d(np.asarray(self.b_slope, dtype=float))
        ac = np.atleast_1d(np.asarray(self.act_scale, dtype=float))
        T = np.atleast_2d(np.asarray(self.t_matrix, dtype=float))
        n = len(lo)
        if not (len(hi) == len(bs) == len(ac) == n) or T.shape != (n, n):
            raise BadParameters("parameter arrays disagree on the neuron count")
        if not np.all(lo > 0.0) or not np.all(hi > lo):
            raise BadParameters("amplification band must satisfy 0 < lo < hi")
        if not np.all(bs > 0.0):
            raise BadParameters("drift slopes must be positive")
        if not np.all(ac > 1.0):
            raise BadParameters(
                "activation scales must exceed one to stay under the unit bound"
            )
        if np.any(np.diag(T) != 0.0):
            raise BadParameters("self connections are not representable as gains")
        for arr, name in ((lo, "alpha_lo"), (hi, "alpha_hi"), (bs, "b_slope"),
                          (T, "t_matrix"), (ac, "act_scale")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        mid = 0.5 * (lo + hi)
        spread = 0.5 * (hi - lo)
        mid.setflags(write=False)
        spread.setflags(write=False)
        object.__setattr__(self, "_mid", mid)
        object.__setattr__(self, "_spread", spread)

    @property
    def n_neurons(self) -> int:
        return len(self.alpha_lo)

    @property
    def state_dim(self) -> int:
        return len(self.alpha_lo)

    @property
    def input_dim(self) -> int:
        return len(self.alpha_lo)

    def f(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        amp = self._mid + self._spread * np.tanh(x)
        act = x / (1.0 + self.act_scale * np.abs(x))
        return -amp * (self.b_slope * x - act @ self.t_matrix.T + u)


# ---------------------------------------------------------------------------
# Input signals and trajectories


@dataclass(frozen=True, eq=False)
class InputSignal:
    """Deterministic input descriptor evaluated on the integration grid."""

    kind: str
    value: np.ndarray
    at: float = 0.0
    omega: float = 0.0
    phase: float = 0.0
    times: np.ndarray | None = None
    levels: np.ndarray | None = None

    KINDS = ("constant", "step", "sinusoid", "piecewise")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown input kind {self.kind!r}")
        v = np.atleast_1d(np.asarray(self.value, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "value", v)
        if self.kind == "piecewise":
            t = np.atleast_1d(np.asarray(self.times, dtype=float))
            lv = np.atleast_2d(np.asarray(self.levels, dtype=float))
            if lv.shape != (len(t), len(v)):
                raise ValueError("piecewise levels must be (segments, channels)")
            if np.any(np.diff(t) <= 0):
                raise ValueError("piecewise times must be strictly increasing")
            t.setflags(write=False)
            lv.setflags(write=False)
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "levels", lv)

    @classmethod
    def zero(cls, m: int) -> "InputSignal":
        return cls(kind="constant", value=np.zeros(max(m, 0)))

    @classmethod
    def constant(cls, value) -> "InputSignal":
        return cls(kind="constant", value=value)

    @classmethod
    def step(cls, value, at: float = 0.0) -> "InputSignal":
        return cls(kind="step", value=value, at=at)

    @classmethod
    def sinusoid(cls, amplitude, omega: float, phase: float = 0.0) -> "InputSignal":
        return cls(kind="sinusoid", value=amplitude, omega=omega, phase=phase)

    @classmethod
    def piecewise(cls, times, levels) -> "InputSignal":
        lv = np.atleast_2d(np.asarray(levels, dtype=float))
        return cls(kind="piecewise", value=lv[0], times=times, levels=lv)

    @property
    def dim(self) -> int:
        return len(self.value)

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            return self.value
        if self.kind == "step":
            if t >= self.at:
                return self.value
            return np.zeros_like(self.value)
        if self.kind == "sinusoid":
            return self.value * np.sin(self.omega * t + self.phase)
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        if k < 0:
            return np.zeros(self.levels.shape[1])
        return self.levels[k]

    def is_zero(self) -> bool:
        if self.kind == "piecewise":
            return not np.any(self.levels)
        return not np.any(self.value)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniform-step record of one simulated run."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray | None = None


def export_trajectory_csv(traj: Trajectory, out) -> None:
    """Write ``t,x_1..x_N,u_1..u_M,V`` rows; V only when recorded."""
    N = traj.x.shape[1]
    M = traj.u.shape[1]
    cols = ["t"] + [f"x_{i + 1}" for i in range(N)] + [f"u_{i + 1}" for i in range(M)]
    if traj.v is not None:
        cols.append("V")
    lines = [",".join(cols)]
    for k in range(len(traj.t)):
        cells = [f"{traj.t[k]:.12g}"]
        cells += [f"{traj.x[k, i]:.12g}" for i in range(N)]
        cells += [f"{traj.u[k, i]:.12g}" for i in range(M)]
        if traj.v is not None:
            cells.append(f"{traj.v[k]:.12g}")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _rk4(model, X, signal, steps: int, dt: float):
    """Batched classical RK4; returns (t, states, inputs) histories."""
    states = np.empty((steps + 1,) + X.shape)
    inputs = np.empty((steps + 1, signal.dim))
    states[0] = X
    inputs[0] = signal(0.0)
    t = 0.0
    for k in range(steps):
        u0 = signal(t)
        um = signal(t + 0.5 * dt)
        u1 = signal(t + dt)
        k1 = model.f(X, u0)
        k2 = model.f(X + 0.5 * dt * k1, um)
        k3 = model.f(X + 0.5 * dt * k2, um)
        k4 = model.f(X + dt * k3, u1)
        X = X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (k + 1) * dt
        if not np.all(np.isfinite(X)) or float(np.max(np.abs(X))) > DIVERGENCE_GUARD:
            raise Diverged(f"state norm blew past the guard at t={t:.6g}", t=t)
        states[k + 1] = X
        inputs[k + 1] = u1
    return np.arange(steps + 1) * dt, states, inputs


def integrate(model, x0, signal: InputSignal | None = None, T: float = 20.0,
              dt: float = 1e-3,
              certificate: CompositeLyapunov | None = None) -> Trajectory:
    """Fixed-step RK4 trajectory from ``x0`` under the given input.

    Records the composite function along the run when a certificate is
    attached.  The horizon is rounded to a whole number of steps.
    """
    if dt <= 0:
        raise ValueError("step size must be positive")
    if T < dt:
        raise ValueError("horizon must cover at least one step")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (model.state_dim,):
        raise ValueError(f"initial state must have length {model.state_dim}")
    if signal is None:
        signal = InputSignal.zero(model.input_dim)
    if signal.dim != model.input_dim:
        raise ValueError(f"input signal must have {model.input_dim} channels")
    steps = max(int(round(T / dt)), 1)
    t, states, inputs = _rk4(model, x0[None, :], signal, steps, dt)
    x = states[:, 0, :]
    v = None
    if certificate is not None:
        v = certificate.eval_V_batch(x)
    return Trajectory(t=t, x=x, u=inputs, v=v)


# ---------------------------------------------------------------------------
# Gain designs for the model families


@dataclass(frozen=True, eq=False)
class LinearDesign:
    """Gain network, slope matrix, and energies for a linear block bank."""

    net: GainNetwork
    G: np.ndarray
    P: tuple
    specs: tuple


@dataclass(frozen=True, eq=False)
class CGDesign:
    """Gain network and energies for a neural population."""

    net: GainNetwork
    specs: tuple


def linear_gains(model: LinearBlock, Q, epsilon: float) -> LinearDesign:
    """Quadratic-energy gain design for coupled linear blocks.

    Each block gets ``V_i = x' P_i x`` from its Lyapunov equation; the
    internal gains are square roots scaled by the coupling norms, the
    external gains are linear, and each row aggregates as a squared sum
    with the input slot inside the square.  Also produces the slope
    matrix whose spectral radius decides the small gain condition.
    """
    eps = float(epsilon)
    if not 0.0 < eps < 1.0:
        raise BadParameters("the margin split must lie strictly in (0, 1)")
    n = model.n_blocks
    Q = [np.atleast_2d(np.asarray(q, dtype=float)) for q in Q]
    if len(Q) != n:
        raise BadParameters("one weight matrix per block")
    P = []
    a = np.empty(n)
    b = np.empty(n)
    c = np.empty(n)
    for i in range(n):
        Pi = solve_lyapunov_eq(model.A[i], Q[i])
        eig = np.linalg.eigvalsh(Pi)
        a[i] = float(np.sqrt(eig[0]))
        b[i] = float(np.sqrt(eig[-1]))
        c[i] = float(np.linalg.eigvalsh(Q[i])[0])
        P.append(Pi)
    zero = Zero()
    gamma = []
    G = np.zeros((n, n))
    gamma_u = []
    for i in range(n):
        k_i = 2.0 * b[i] ** 3 / (c[i] * (1.0 - eps))
        row = []
        for j in range(n):
            m = model.delta.get((i, j))
            nrm = float(np.linalg.norm(m, 2)) if m is not None else 0.0
            if i == j or nrm == 0.0:
                row.append(zero)
            else:
                G[i, j] = k_i * nrm / a[j]
                row.append(Power(G[i, j], 0.5))
        gamma.append(tuple(row))
        bn = float(np.linalg.norm(model.B[i], 2)) if model.input_dim else 0.0
        gamma_u.append(Linear(k_i * bn) if bn > 0.0 else zero)
    mu = tuple(OuterSum(Power(1.0, 2.0), external_in_sum=True) for _ in range(n))
    net = GainNetwork(n, tuple(gamma), tuple(gamma_u), mu)
    specs = tuple(
        SubsystemSpec(
            dim=model.dims[i],
            V=(lambda xi, Pi=P[i]: float(xi @ Pi @ xi)),
            name=f"block_{i + 1}",
        )
        for i in range(n)
    )
    return LinearDesign(net=net, G=G, P=tuple(P), specs=specs)


def cg_gains(model: CohenGrossberg, epsilon: float, rho_slope: float = 1.0,
             bt=1.0) -> CGDesign:
    """Absolute-value-energy gain design for a neural population.

    ``bt`` is the linear lower envelope slope of each drift (must stay
    below the model's drift slope); ``rho_slope`` fixes the linear slack
    split in the triangle inequality.  The input channel's own wrapper is
    folded into the external gain, leaving rows that add the external
    slot after a linear wrapper around the internal sum.
    """
    eps = float(epsilon)
    rho = float(rho_slope)
    n = model.n_neurons
    bt = np.broadcast_to(np.asarray(bt, dtype=float), (n,)).copy()
    if eps <= 0.0 or eps >= float(np.min(model.alpha_lo)):
        raise BadParameters("margin must satisfy 0 < eps < min amplification")
    if rho <= 0.0:
        raise BadParameters("slack slope must be positive")
    if not np.all((bt > 0.0) & (bt < model.b_slope)):
        raise BadParameters("drift envelope slope must lie in (0, b_slope)")
    coeff = model.alpha_hi / (model.alpha_lo - eps)
    zero = Zero()
    unit = Saturating(1.0)
    gamma = []
    gamma_u = []
    mu = []
    for i in range(n):
        row = []
        for j in range(n):
            t = float(model.t_matrix[i, j])
            if i == j or t == 0.0:
                row.append(zero)
            else:
                row.append(Compose(Linear(float(coeff[i]) * abs(t)), unit))
        gamma.append(tuple(row))
        gamma_u.append(Linear(float(coeff[i]) * (1.0 + 1.0 / rho) / float(bt[i])))
        mu.append(OuterSum(Linear((1.0 + rho) / float(bt[i])),
                           external_in_sum=False))
    net = GainNetwork(n, tuple(gamma), tuple(gamma_u), tuple(mu))
    specs = tuple(
        SubsystemSpec(dim=1, V=(lambda xi: float(abs(xi[0]))),
                      name=f"neuron_{i + 1}")
        for i in range(n)
    )
    return CGDesign(net=net, specs=specs)


# ---------------------------------------------------------------------------
# Canonical demo instances


def linear_demo(delta: float = 0.2, drive: float = 1.0, epsilon: float = 0.5):
    """Two scalar blocks in a symmetric cycle; returns (model, design)."""
    model = LinearBlock(
        A=([[-1.0]], [[-1.0]]),
        delta={(0, 1): [[delta]], (1, 0): [[delta]]},
        B=([[drive]], [[drive]]) if drive else (None, None),
    )
    design = linear_gains(model, ([[2.0]], [[2.0]]), epsilon)
    return model, design


def cg_demo(coupling: float = 0.2):
    """Two mutually coupled neurons; returns (model, design)."""
    model = CohenGrossberg(
        alpha_lo=(1.0, 1.0),
        alpha_hi=(1.2, 1.2),
        b_slope=(1.5, 1.5),
        t_matrix=((0.0, coupling), (coupling, 0.0)),
        act_scale=(2.0, 2.0),
    )
    design = cg_gains(model, epsilon=0.5, rho_slope=1.0, bt=1.0)
    return model, design


def certify_linear(design: LinearDesign,
                   r_max: float = R_MAX_DEFAULT) -> CompositeLyapunov:
    """Certificate along the eigenray of the homogeneous linear design."""
    sigma = path_homogeneous(design.net, r_max=r_max)
    return compose(design.net, sigma, design.specs, mode=MAX)


def certify_cg(design: CGDesign, shift: float = 0.01,
               r_max: float = R_MAX_DEFAULT, seed: int = 0) -> CompositeLyapunov:
    """Certificate for the neural design via the bounded-gain route."""
    sigma = construct_path(design.net, r_max=r_max, seed=seed)
    return compose(design.net, sigma, design.specs, mode=ADDITIVE,
                   alpha=Linear(shift))


# ---------------------------------------------------------------------------
# Empirical certificate checks


@dataclass(frozen=True)
class DecreaseSpec:
    """Sampling plan for the pointwise decrease check."""

    samples: int = 10000
    u_norms: tuple = (0.0,)
    radius_range: tuple = (1e-3, 1e3)
    guard: float = 0.05
    seed: int = 0


@dataclass(frozen=True)
class DecreaseReport:
    requested: int
    evaluated: int
    violations: int
    worst: float
    u_norms: tuple

    @property
    def verdict(self) -> str:
        return "pass" if self.violations == 0 else "fail"

    def summary(self) -> str:
        return (f"verdict={self.verdict} violations={self.violations} "
                f"worst={self.worst:.6g}")

    def text(self) -> str:
        lines = [
            "decrease check",
            f"  samples evaluated: {self.evaluated} of {self.requested}",
            f"  input magnitudes: {', '.join(f'{u:g}' for u in self.u_norms)}",
            f"  worst derivative estimate: {self.worst:.6g}",
            self.summary(),
        ]
        return "\n".join(lines)


def check_decrease(model, cl: CompositeLyapunov,
                   spec: DecreaseSpec | None = None) -> DecreaseReport:
    """Directional-derivative sampling of the composite function.

    States are drawn from a log annulus and kept when the composite value
    clears the input threshold with a small guard; the derivative along
    the flow is estimated by central differences.  A sample violates when
    the estimate fails to be negative beyond ``1e-8 (1 + V)``.
    """
    spec = spec or DecreaseSpec()
    rng = np.random.default_rng(spec.seed)
    N = model.state_dim
    M = model.input_dim
    lo, hi = spec.radius_range
    per = max(spec.samples // max(len(spec.u_norms), 1), 1)
    evaluated = 0
    violations = 0
    worst = -np.inf
    for u_norm in spec.u_norms:
        threshold = cl.iss_threshold(float(u_norm)) * (1.0 + spec.guard)
        need = per
        attempts = 0
        while need > 0 and attempts < 500:
            attempts += 1
            k = max(need * 2, 256)
            dirs = rng.normal(size=(k, N))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            radii = 10.0 ** rng.uniform(np.log10(lo), np.log10(hi), size=k)
            X = radii[:, None] * dirs
            if M and u_norm:
                ud = rng.normal(size=(k, M))
                ud /= np.linalg.norm(ud, axis=1, keepdims=True)
                U = u_norm * ud
            else:
                U = np.zeros((k, M))
            V = cl.eval_V_batch(X)
            keep = V >= threshold
            if threshold == 0.0:
                keep = np.ones(k, dtype=bool)
            keep_idx = np.flatnonzero(keep)[:need]
            if keep_idx.size == 0:
                continue
            X = X[keep_idx]
            U = U[keep_idx]
            V = V[keep_idx]
            F = model.f(X, U)
            h = 1e-6 * (1.0 + np.linalg.norm(X, axis=1))
            vp = cl.eval_V_batch(X + h[:, None] * F)
            vm = cl.eval_V_batch(X - h[:, None] * F)
            est = (vp - vm) / (2.0 * h)
            tol = 1e-8 * (1.0 + V)
            bad = est >= -tol
            evaluated += keep_idx.size
            violations += int(np.count_nonzero(bad))
            worst = max(worst, float(np.max(est)))
            need -= keep_idx.size
    return DecreaseReport(
        requested=per * len(spec.u_norms),
        evaluated=evaluated,
        violations=violations,
        worst=worst,
        u_norms=tuple(float(u) for u in spec.u_norms),
    )


@dataclass(frozen=True)
class IssRunSpec:
    """Trajectory batch plan for the boundedness check."""

    runs: int = 50
    T: float = 20.0
    dt: float = 1e-3
    x0_scale: float = 1.0
    signal: InputSignal | None = None
    seed: int = 0
    drift_tol: float = 1e-8
    contraction: float = 1e-3
    settle_factor: float = 1.1
    settle_fraction: float = 0.25


@dataclass(frozen=True)
class IssBoundReport:
    kind: str
    runs: int
    violations: int
    worst: float
    drift_worst: float | None = None
    contraction_worst: float | None = None
    settle_worst: float | None = None
    threshold: float | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.violations == 0 else "fail"

    def summary(self) -> str:
        return (f"verdict={self.verdict} violations={self.violations} "
                f"worst={self.worst:.6g}")

    def text(self) -> str:
        lines = [f"trajectory check ({self.kind})", f"  runs: {self.runs}"]
        if self.drift_worst is not None:
            lines.append(f"  worst per-step drift: {self.drift_worst:.6g}")
        if self.contraction_worst is not None:
            lines.append(f"  worst contraction ratio: {self.contraction_worst:.6g}")
        if self.threshold is not None:
            lines.append(f"  input threshold: {self.threshold:.6g}")
        if self.settle_worst is not None:
            lines.append(f"  worst settled level ratio: {self.settle_worst:.6g}")
        lines.append(self.summary())
        return "\n".join(lines)


def check_iss_bound(model, cl: CompositeLyapunov,
                    spec: IssRunSpec | None = None) -> IssBoundReport:
    """Trajectory-level evidence for decay and input boundedness.

    Without an input the composite function must be nonincreasing along
    every run up to the drift tolerance and the final state must contract
    below the required factor.  With an input the composite function must
    sit below ``settle_factor`` times the input threshold over the last
    quarter of the horizon.
    """
    spec = spec or IssRunSpec()
    rng = np.random.default_rng(spec.seed)
    N = model.state_dim
    X0 = rng.normal(size=(spec.runs, N))
    X0 /= np.linalg.norm(X0, axis=1, keepdims=True)
    X0 *= spec.x0_scale
    signal = spec.signal or InputSignal.zero(model.input_dim)
    steps = max(int(round(spec.T / spec.dt)), 1)
    t, states, inputs = _rk4(model, X0, signal, steps, spec.dt)
    V = cl.eval_V_batch(states.reshape(-1, N)).reshape(steps + 1, spec.runs)
    if signal.is_zero():
        drift = np.diff(V, axis=0)
        drift_run = drift.max(axis=0) if steps else np.zeros(spec.runs)
        norms0 = np.linalg.norm(X0, axis=1)
        norms1 = np.linalg.norm(states[-1], axis=1)
        ratio = norms1 / norms0
        bad = (drift_run > spec.drift_tol) | (ratio >= spec.contraction)
        return IssBoundReport(
            kind="zero-input",
            runs=spec.runs,
            violations=int(np.count_nonzero(bad)),
            worst=float(drift_run.max()),
            drift_worst=float(drift_run.max()),
            contraction_worst=float(ratio.max()),
        )
    sup_u = float(np.max(np.linalg.norm(inputs, axis=1)))
    threshold = cl.iss_threshold(sup_u)
    tail = int(np.ceil((1.0 - spec.settle_fraction) * steps))
    tail_peak = V[tail:].max(axis=0)
    bound = spec.settle_factor * threshold
    bad = tail_peak > bound
    settle_worst = float(tail_peak.max() / threshold) if threshold > 0 else np.inf
    return IssBoundReport(
        kind="driven",
        runs=spec.runs,
        violations=int(np.count_nonzero(bad)),
        worst=settle_worst,
        settle_worst=settle_worst,
        threshold=threshold,
    )
