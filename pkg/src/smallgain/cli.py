"""Command line front end.

Configs are JSON documents.  The declarative network sections (``n``,
``gains``, ``external_gains``, ``mu``) describe a gain network with
expressions in the textual gain grammar; ``model`` instantiates one of
the built-in dynamic families, in which case the network and subsystem
energies come from the family's gain design and the declarative sections
may be omitted.  ``simulation`` holds the initial state, input signal,
horizon, and step size.  Indices inside configs are zero-based (they
address JSON array positions); report output numbers subsystems from
one.

Exit codes: 0 when the requested analysis certifies (or an inconclusive
check is backed by a successful path construction), 1 when it fails or a
constructor rejects the network (the error name is printed), 2 on config
errors, which are reported on stderr with JSON-pointer paths.

The ``--scale-sigma`` flag on ``simulate`` and ``verify`` is a test hook
that rescales the certificate's path while keeping its budget map; it
exists to demonstrate that the empirical checks catch a broken
certificate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .compose import ADDITIVE, MAX, SEPARATED, CompositeLyapunov, compose, derive_phi
from .errors import (
    ConfigError,
    NoConvergence,
    NotHomogeneous,
    NotIrreducible,
    NotLinearizable,
    OutOfRange,
    ParseError,
    RejectedNotClassK,
    SmallGainError,
    WrongAggregation,
)
from .gains import (
    BlockMaxSum,
    GainNetwork,
    Linear,
    MaxAgg,
    OuterSum,
    SumAgg,
    eval_operator_ext,
)
from .parser import parse_gain
from .paths import (
    R_MAX_DEFAULT,
    OmegaPath,
    ReduciblePath,
    construct_path,
    export_path_csv,
    validate_path,
)
from .sgc import (
    CERTIFIED_FAILS,
    CERTIFIED_HOLDS,
    GridSpec,
    check_cycle_condition,
    check_linear_spectral,
    falsify_sgc,
    nonlinear_perron,
)
from .simulate import (
    CGDesign,
    CohenGrossberg,
    InputSignal,
    LinearBlock,
    LinearDesign,
    cg_gains,
    check_decrease,
    check_iss_bound,
    DecreaseSpec,
    IssRunSpec,
    export_trajectory_csv,
    integrate,
    linear_gains,
)

MODE_NAMES = {"sum": ADDITIVE, "max": MAX, "separated": SEPARATED}


# ---------------------------------------------------------------------------
# Config loading


@dataclass
class LoadedConfig:
    net: GainNetwork | None
    homogeneous: bool
    alpha: object | None
    model: object | None
    design: object | None
    design_error: SmallGainError | None
    x0: np.ndarray | None
    signal: InputSignal | None
    T: float
    dt: float
    has_input: bool

    @property
    def effective_net(self) -> GainNetwork:
        if self.net is not None:
            return self.net
        if self.design is not None:
            return self.design.net
        if self.design_error is not None:
            raise self.design_error
        raise ConfigError(
            "either the declarative network sections or a model are required",
            pointer="/gains")


def _want(obj, key, kind, pointer, required=True, default=None):
    if key not in obj:
        if required:
            raise ConfigError(f"missing required key {key!r}", pointer=pointer)
        return default
    val = obj[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ConfigError(f"{key!r} must be a {kind.__name__}",
                          pointer=f"{pointer}/{key}")
    return val


def _parse_gain_at(text, pointer):
    if not isinstance(text, str):
        raise ConfigError("gain expressions are grammar strings", pointer=pointer)
    try:
        return parse_gain(text)
    except (ParseError, RejectedNotClassK) as exc:
        raise ConfigError(str(exc), pointer=pointer)


def _parse_mu_entry(tag, pointer):
    if tag == "sum":
        return SumAgg()
    if tag == "max":
        return MaxAgg()
    if isinstance(tag, dict) and set(tag) == {"outer_sum"}:
        spec = tag["outer_sum"]
        if isinstance(spec, str):
            return OuterSum(_parse_gain_at(spec, pointer + "/outer_sum"),
                            external_in_sum=True)
        if isinstance(spec, dict) and set(spec) <= {"rho", "external_in_sum"}:
            rho = _parse_gain_at(spec.get("rho"), pointer + "/outer_sum/rho")
            ext_in = spec.get("external_in_sum", True)
            if not isinstance(ext_in, bool):
                raise ConfigError("external_in_sum must be a boolean",
                                  pointer=pointer + "/outer_sum/external_in_sum")
            return OuterSum(rho, external_in_sum=ext_in)
        raise ConfigError("outer_sum takes a gain string or {rho, external_in_sum}",
                          pointer=pointer + "/outer_sum")
    if isinstance(tag, dict) and set(tag) == {"block_max_sum"}:
        blocks = tag["block_max_sum"]
        if (not isinstance(blocks, list)
                or not all(isinstance(b, list) for b in blocks)
                or not all(isinstance(i, int) and not isinstance(i, bool)
                           for b in blocks for i in b)):
            raise ConfigError("block_max_sum is a list of index lists",
                              pointer=pointer + "/block_max_sum")
        return BlockMaxSum(tuple(tuple(b) for b in blocks))
    raise ConfigError(
        'aggregation must be "sum", "max", {"outer_sum": ...} or '
        '{"block_max_sum": ...}', pointer=pointer)


def _load_network(doc) -> GainNetwork:
    n = _want(doc, "n", int, "")
    if n < 1:
        raise ConfigError("n must be at least 1", pointer="/n")
    gains = _want(doc, "gains", list, "")
    ext = _want(doc, "external_gains", list, "")
    mu_tags = _want(doc, "mu", list, "")
    if len(gains) != n or any(not isinstance(row, list) or len(row) != n
                              for row in gains):
        raise ConfigError(f"gains must be a {n} by {n} array of strings",
                          pointer="/gains")
    if len(ext) != n:
        raise ConfigError(f"external_gains must list {n} entries",
                          pointer="/external_gains")
    if len(mu_tags) != n:
        raise ConfigError(f"mu must list {n} entries", pointer="/mu")
    gamma = tuple(
        tuple(_parse_gain_at(gains[i][j], f"/gains/{i}/{j}") for j in range(n))
        for i in range(n))
    for i in range(n):
        if not gamma[i][i].is_zero:
            raise ConfigError("diagonal gains must be 0", pointer=f"/gains/{i}/{i}")
    gamma_u = tuple(_parse_gain_at(ext[i], f"/external_gains/{i}")
                    for i in range(n))
    mu = []
    for i in range(n):
        m = _parse_mu_entry(mu_tags[i], f"/mu/{i}")
        active = tuple(j for j in range(n) if not gamma[i][j].is_zero)
        try:
            m.check_active(active, n)
        except SmallGainError as exc:
            raise ConfigError(str(exc), pointer=f"/mu/{i}")
        mu.append(m)
    try:
        return GainNetwork(n, gamma, gamma_u, tuple(mu))
    except SmallGainError as exc:
        raise ConfigError(str(exc), pointer="/gains")


def _matrix(val, pointer):
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("expected a numeric matrix", pointer=pointer)
    if arr.ndim > 2:
        raise ConfigError("expected a numeric matrix", pointer=pointer)
    return np.atleast_2d(arr)


def _load_model(doc):
    family = _want(doc, "family", str, "/model")
    if family == "linear":
        A_raw = _want(doc, "A", list, "/model")
        A = tuple(_matrix(a, f"/model/A/{i}") for i, a in enumerate(A_raw))
        delta = {}
        for k, entry in enumerate(doc.get("coupling", [])):
            if not isinstance(entry, dict):
                raise ConfigError("coupling entries are {i, j, matrix} objects",
                                  pointer=f"/model/coupling/{k}")
            i = _want(entry, "i", int, f"/model/coupling/{k}")
            j = _want(entry, "j", int, f"/model/coupling/{k}")
            delta[(i, j)] = _matrix(entry.get("matrix"),
                                    f"/model/coupling/{k}/matrix")
        B_raw = doc.get("B")
        if B_raw is None:
            B = tuple(None for _ in A)
        else:
            if not isinstance(B_raw, list) or len(B_raw) != len(A):
                raise ConfigError("B must list one matrix or null per block",
                                  pointer="/model/B")
            B = tuple(None if b is None else _matrix(b, f"/model/B/{i}")
                      for i, b in enumerate(B_raw))
        Q_raw = doc.get("Q")
        if Q_raw is None:
            Q = [np.eye(a.shape[0]) for a in A]
        else:
            if not isinstance(Q_raw, list) or len(Q_raw) != len(A):
                raise ConfigError("Q must list one weight matrix per block",
                                  pointer="/model/Q")
            Q = [_matrix(q, f"/model/Q/{i}") for i, q in enumerate(Q_raw)]
        eps = _want(doc, "epsilon", float, "/model", required=False, default=0.5)
        try:
            model = LinearBlock(A=A, delta=delta, B=B)
        except SmallGainError as exc:
            raise ConfigError(f"{type(exc).__name__}: {exc}", pointer="/model")
        # a failing gain design (e.g. a non-Hurwitz block) is a runtime
        # verdict, not a config defect: simulate still runs uncertified
        try:
            return model, linear_gains(model, Q, eps), None
        except SmallGainError as exc:
            return model, None, exc
    if family == "cohen_grossberg":
        kw = {}
        for key in ("alpha_lo", "alpha_hi", "b_slope", "t_matrix", "act_scale"):
            kw[key] = _want(doc, key, list, "/model")
        eps = _want(doc, "epsilon", float, "/model", required=False, default=0.5)
        rho_slope = _want(doc, "rho_slope", float, "/model", required=False,
                          default=1.0)
        bt = _want(doc, "bt", float, "/model", required=False, default=1.0)
        try:
            model = CohenGrossberg(**kw)
        except (SmallGainError, TypeError, ValueError) as exc:
            raise ConfigError(f"{exc}", pointer="/model")
        try:
            return model, cg_gains(model, epsilon=eps, rho_slope=rho_slope,
                                   bt=bt), None
        except SmallGainError as exc:
            return model, None, exc
    raise ConfigError(f"unknown model family {family!r}", pointer="/model/family")


def _load_signal(doc):
    kind = _want(doc, "kind", str, "/simulation/input")
    try:
        if kind == "constant":
            return InputSignal.constant(_want(doc, "value", list,
                                              "/simulation/input"))
        if kind == "step":
            return InputSignal.step(
                _want(doc, "value", list, "/simulation/input"),
                at=_want(doc, "at", float, "/simulation/input",
                         required=False, default=0.0))
        if kind == "sinusoid":
            return InputSignal.sinusoid(
                _want(doc, "value", list, "/simulation/input"),
                omega=_want(doc, "omega", float, "/simulation/input"),
                phase=_want(doc, "phase", float, "/simulation/input",
                            required=False, default=0.0))
        if kind == "piecewise":
            return InputSignal.piecewise(
                _want(doc, "times", list, "/simulation/input"),
                _want(doc, "levels", list, "/simulation/input"))
    except ValueError as exc:
        raise ConfigError(str(exc), pointer="/simulation/input")
    raise ConfigError(f"unknown input kind {kind!r}",
                      pointer="/simulation/input/kind")


def load_config(path) -> LoadedConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", pointer="")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", pointer="")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", pointer="")
    net = None
    if any(k in doc for k in ("n", "gains", "external_gains", "mu")):
        net = _load_network(doc)
    homogeneous = doc.get("homogeneous", False)
    if not isinstance(homogeneous, bool):
        raise ConfigError("homogeneous must be a boolean", pointer="/homogeneous")
    alpha = None
    if "alpha" in doc:
        alpha = _parse_gain_at(doc["alpha"], "/alpha")
    model = design = design_error = None
    if "model" in doc:
        mdoc = doc["model"]
        if not isinstance(mdoc, dict):
            raise ConfigError("model must be an object", pointer="/model")
        model, design, design_error = _load_model(mdoc)
    x0 = None
    signal = None
    T, dt = 20.0, 1e-3
    has_input = False
    if "simulation" in doc:
        sdoc = doc["simulation"]
        if not isinstance(sdoc, dict):
            raise ConfigError("simulation must be an object", pointer="/simulation")
        T = _want(sdoc, "T", float, "/simulation", required=False, default=20.0)
        dt = _want(sdoc, "dt", float, "/simulation", required=False, default=1e-3)
        if "x0" in sdoc:
            raw = _want(sdoc, "x0", list, "/simulation")
            try:
                x0 = np.array(raw, dtype=float)
            except (TypeError, ValueError):
                raise ConfigError("x0 must be a numeric vector",
                                  pointer="/simulation/x0")
        if "input" in sdoc:
            idoc = sdoc["input"]
            if not isinstance(idoc, dict):
                raise ConfigError("input must be an object",
                                  pointer="/simulation/input")
            signal = _load_signal(idoc)
            has_input = not signal.is_zero()
    return LoadedConfig(net=net, homogeneous=homogeneous, alpha=alpha,
                        model=model, design=design, design_error=design_error,
                        x0=x0, signal=signal, T=T, dt=dt, has_input=has_input)


# ---------------------------------------------------------------------------
# Shared helpers


def _resolve_seed(args) -> int:
    env = os.environ.get("SMALLGAIN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("SMALLGAIN_SEED must be an integer", pointer="")
    if getattr(args, "seed", None) is not None:
        return args.seed
    return 0


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in np.atleast_1d(v)) + ")"


def _fmt_cycle(c) -> str:
    # subsystems are numbered from one in reports
    return "(" + ", ".join(str(i + 1) for i in c) + ")"


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _certificate(cfg: LoadedConfig, args) -> CompositeLyapunov:
    """Build the composite certificate a model-backed command works with."""
    design = cfg.design
    if design is None:
        if cfg.design_error is not None:
            raise cfg.design_error
        raise ConfigError("this command needs a model family", pointer="/model")
    homogeneous = cfg.homogeneous or isinstance(design, LinearDesign)
    sigma = construct_path(design.net, homogeneous=homogeneous,
                           r_max=getattr(args, "rmax", None) or R_MAX_DEFAULT,
                           seed=_resolve_seed(args))
    mode = MODE_NAMES[args.mode] if getattr(args, "mode", None) else None
    if mode is None:
        mode = MAX if isinstance(design, LinearDesign) else ADDITIVE
    alpha = cfg.alpha
    if alpha is None and isinstance(design, CGDesign):
        alpha = Linear(0.01)
    return compose(design.net, sigma, design.specs, mode=mode, alpha=alpha)


def _scaled(cl: CompositeLyapunov, factor: float) -> CompositeLyapunov:
    sigma = OmegaPath(cl.sigma.radii, cl.sigma.values * factor)
    return CompositeLyapunov(net=cl.net, sigma=sigma, phi=cl.phi, mode=cl.mode,
                             subsystems=cl.subsystems, alpha=cl.alpha, c=cl.c)


def _sup_input(cfg: LoadedConfig) -> float:
    sig = cfg.signal
    if sig is None or sig.is_zero():
        return 0.0
    if sig.kind == "piecewise":
        return float(np.max(np.linalg.norm(sig.levels, axis=1)))
    return float(np.linalg.norm(sig.value))


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(cfg: LoadedConfig, args) -> int:
    net = cfg.effective_net
    seed = _resolve_seed(args)
    statuses = []
    try:
        v = check_linear_spectral(net)
        print(f"spectral radius: {v.rho:.6g} ({v.status})")
        statuses.append(v.status)
    except NotLinearizable:
        pass
    try:
        v = check_cycle_condition(net, grid_points=args.grid)
        if v.status == CERTIFIED_HOLDS:
            print(f"cycle condition: holds (min margin "
                  f"{v.margins['min_margin']:.6g})")
        else:
            extra = f", witness {_fmt_vec(v.witness)}" if v.witness is not None else ""
            print(f"cycle condition: fails on cycle {_fmt_cycle(v.cycle)}{extra}")
        statuses.append(v.status)
    except WrongAggregation:
        pass
    try:
        lam, _vec, _res = nonlinear_perron(net)
        print(f"nonlinear spectral radius: {lam:.6g}")
        statuses.append(CERTIFIED_HOLDS if lam < 1.0 - 1e-9 else CERTIFIED_FAILS)
    except (NotHomogeneous, NotIrreducible, NoConvergence):
        pass
    v = falsify_sgc(net, GridSpec(seed=seed))
    if v.status == CERTIFIED_FAILS:
        print(f"falsification: witness {_fmt_vec(v.witness)}")
    else:
        print("falsification: no witness found")
    statuses.append(v.status)
    if CERTIFIED_FAILS in statuses:
        print("verdict: CertifiedFails")
        return 1
    if CERTIFIED_HOLDS in statuses:
        print("verdict: CertifiedHolds")
        return 0
    # nothing decisive either way; a constructed path settles it
    sigma = construct_path(net, homogeneous=cfg.homogeneous,
                           r_max=R_MAX_DEFAULT, seed=seed)
    if isinstance(sigma, ReduciblePath):
        sigma = sigma.sigma
    rep = validate_path(net, sigma)
    print(f"path construction: min margin {rep.min_margin:.6g}")
    print("verdict: Inconclusive (path construction succeeded)")
    return 0


def cmd_path(cfg: LoadedConfig, args) -> int:
    net = cfg.effective_net
    sigma = construct_path(net, homogeneous=cfg.homogeneous,
                           r_max=args.rmax or R_MAX_DEFAULT,
                           seed=_resolve_seed(args))
    if isinstance(sigma, ReduciblePath):
        sigma = sigma.sigma
    rep = validate_path(net, sigma)
    if args.out:
        export_path_csv(net, sigma, args.out)
        print(f"min margin: {rep.min_margin:.6g}")
    else:
        export_path_csv(net, sigma, sys.stdout)
        print(f"min margin: {rep.min_margin:.6g}", file=sys.stderr)
    return 0


def _margin_grid(net, sigma, phi):
    rr = np.geomspace(1e-6, 1e6, 1000)
    states = sigma(rr)
    image = eval_operator_ext(net, states, phi(rr))
    return rr, states - image


def cmd_certify(cfg: LoadedConfig, args) -> int:
    if cfg.design is not None:
        cl = _certificate(cfg, args)
        net, sigma, phi = cl.net, cl.sigma, cl.phi
    else:
        net = cfg.effective_net
        mode = MODE_NAMES[args.mode] if args.mode else MAX
        sigma = construct_path(net, homogeneous=cfg.homogeneous,
                               r_max=args.rmax or R_MAX_DEFAULT,
                               seed=_resolve_seed(args))
        if isinstance(sigma, ReduciblePath):
            phi = sigma.phi
            sigma = sigma.sigma
        else:
            phi = derive_phi(net, sigma, mode, cfg.alpha)
    rr, margins = _margin_grid(net, sigma, phi)
    worst = float(np.min(margins))
    if worst <= 0.0:
        radius = float(rr[int(np.argmax(np.min(margins, axis=1) <= 0.0))])
        print(f"GeneralCondFails: margin {worst:.6g} at radius {radius:.6g}")
        return 1
    if all(g.is_zero for g in net.gamma_u):
        print("phi: identity (no external gains)")
    sup_u = _sup_input(cfg)
    if sup_u > 0.0:
        try:
            level = float(phi.inverse(sup_u))
            print(f"input level {sup_u:.6g} covered at threshold {level:.6g}")
        except OutOfRange as exc:
            print(f"OutOfRange: {exc} (restricted input range)")
            return 1
    print(f"certificate margins: min {worst:.6g} over {len(rr)} radii")
    if args.out:
        export_path_csv(net, sigma, f"{args.out}.path.csv")
        lines = ["r,phi"]
        for r, p in zip(rr, phi(rr)):
            lines.append(f"{r:.12g},{p:.12g}")
        _emit("\n".join(lines) + "\n", f"{args.out}.phi.csv")
        head = ",".join(f"margin_{i + 1}" for i in range(net.n))
        lines = [f"r,{head},margin_min"]
        for k, r in enumerate(rr):
            row = ",".join(f"{m:.12g}" for m in margins[k])
            lines.append(f"{r:.12g},{row},{np.min(margins[k]):.12g}")
        _emit("\n".join(lines) + "\n", f"{args.out}.margins.csv")
        print(f"bundle written: {args.out}.path.csv, {args.out}.phi.csv, "
              f"{args.out}.margins.csv")
    return 0


def cmd_simulate(cfg: LoadedConfig, args) -> int:
    if cfg.model is None:
        raise ConfigError("simulate needs a model family", pointer="/model")
    if cfg.x0 is None:
        raise ConfigError("simulate needs an initial state", pointer="/simulation/x0")
    if cfg.x0.shape != (cfg.model.state_dim,):
        raise ConfigError(f"x0 must have length {cfg.model.state_dim}",
                          pointer="/simulation/x0")
    if cfg.signal is not None and cfg.signal.dim != cfg.model.input_dim:
        raise ConfigError(f"input must have {cfg.model.input_dim} channels",
                          pointer="/simulation/input")
    cl = None
    try:
        cl = _certificate(cfg, args)
        if args.scale_sigma is not None:
            cl = _scaled(cl, args.scale_sigma)
    except SmallGainError as exc:
        print(f"certificate unavailable: {type(exc).__name__}: {exc}",
              file=sys.stderr)
    traj = integrate(cfg.model, cfg.x0, signal=cfg.signal, T=cfg.T, dt=cfg.dt,
                     certificate=cl)
    if args.out:
        export_trajectory_csv(traj, args.out)
        print(f"final state norm: {np.linalg.norm(traj.x[-1]):.6g}")
    else:
        export_trajectory_csv(traj, sys.stdout)
        print(f"final state norm: {np.linalg.norm(traj.x[-1]):.6g}",
              file=sys.stderr)
    return 0


def cmd_verify(cfg: LoadedConfig, args) -> int:
    if cfg.model is None:
        raise ConfigError("verify needs a model family", pointer="/model")
    if cfg.signal is not None and cfg.signal.dim != cfg.model.input_dim:
        raise ConfigError(f"input must have {cfg.model.input_dim} channels",
                          pointer="/simulation/input")
    seed = _resolve_seed(args)
    cl = _certificate(cfg, args)
    if args.scale_sigma is not None:
        cl = _scaled(cl, args.scale_sigma)
    u_norms = (0.0,)
    sup_u = _sup_input(cfg)
    if sup_u > 0.0:
        u_norms = (0.0, sup_u)
    reports = []
    dec = check_decrease(cfg.model, cl,
                         DecreaseSpec(samples=10000, u_norms=u_norms, seed=seed))
    print(dec.text())
    reports.append(dec)
    x0_scale = float(np.linalg.norm(cfg.x0)) if cfg.x0 is not None else 1.0
    iss0 = check_iss_bound(cfg.model, cl,
                           IssRunSpec(runs=50, T=cfg.T, dt=cfg.dt,
                                      x0_scale=x0_scale or 1.0, seed=seed))
    print(iss0.text())
    reports.append(iss0)
    if cfg.has_input:
        drv = check_iss_bound(cfg.model, cl,
                              IssRunSpec(runs=50, T=cfg.T, dt=cfg.dt,
                                         x0_scale=x0_scale or 1.0,
                                         signal=cfg.signal, seed=seed))
        print(drv.text())
        reports.append(drv)
    return 0 if all(r.verdict == "pass" for r in reports) else 1


# ---------------------------------------------------------------------------
# Entry point


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="smallgain",
        description="Small-gain certification for networks of nonlinear "
                    "subsystems: condition checks, decay paths, composite "
                    "certificates, and simulation-based verification.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("config", help="JSON network config")
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (SMALLGAIN_SEED overrides)")

    sp = sub.add_parser("check", help="run the applicable small-gain checks")
    common(sp)
    sp.add_argument("--grid", type=int, default=97,
                    help="radii per cycle for the grid criterion")
    sp = sub.add_parser("path", help="construct a decay path, emit CSV")
    common(sp)
    sp.add_argument("--out", help="CSV output path (default stdout)")
    sp.add_argument("--rmax", type=float, default=None,
                    help="guaranteed path coverage radius")
    sp = sub.add_parser("certify", help="build a certificate bundle")
    common(sp)
    sp.add_argument("--out", help="bundle file prefix")
    sp.add_argument("--rmax", type=float, default=None)
    sp.add_argument("--mode", choices=sorted(MODE_NAMES),
                    help="composition mode (default by model family)")
    sp = sub.add_parser("simulate", help="integrate the model, emit trajectory CSV")
    common(sp)
    sp.add_argument("--out", help="CSV output path (default stdout)")
    sp.add_argument("--rmax", type=float, default=None)
    sp.add_argument("--mode", choices=sorted(MODE_NAMES))
    sp.add_argument("--scale-sigma", type=float, default=None,
                    help="test hook: rescale the certificate path")
    sp = sub.add_parser("verify", help="run decrease and boundedness checks")
    common(sp)
    sp.add_argument("--rmax", type=float, default=None)
    sp.add_argument("--mode", choices=sorted(MODE_NAMES))
    sp.add_argument("--scale-sigma", type=float, default=None,
                    help="test hook: rescale the certificate path")
    return p


_DISPATCH = {
    "check": cmd_check,
    "path": cmd_path,
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _DISPATCH[args.cmd](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SmallGainError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
