"""Command-line entry point: kernel, frac, forcing, evolve, solve, probe, verify.

Every JSON document carries ``schema_version``; wall-clock data (timestamps,
elapsed seconds, version) lives under ``metadata`` so the rest of the
document is reproducible byte for byte.  Failures print an error JSON on
stderr: exit 2 for configuration and input-file problems, 1 for numerical
errors raised by a module.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Unparseable or inconsistent experiment configuration."""


class InputFileError(ConfigError):
    def __init__(self, path, message=None):
        super().__init__(message or f"input file not found: {path}")
        self.path = str(path)


# ------------------------------------------------------------------ output


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(doc):
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def document(kind, payload, started=None):
    meta = {"version": __version__, "created": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    if started is not None:
        meta["elapsed_seconds"] = round(time.perf_counter() - started, 3)
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **payload, "metadata": meta}


def _emit(doc, path=None):
    text = dumps(doc)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _error(kind, message, code, **extra):
    doc = {"schema_version": SCHEMA_VERSION, "error": {"kind": kind, "message": message, **extra}}
    sys.stderr.write(dumps(doc))
    return code


# ------------------------------------------------------------------ inputs


def _need_file(path):
    p = Path(path)
    if not p.is_file():
        raise InputFileError(p)
    return p


def load_config(path):
    """TOML (by default) or JSON (.json suffix) experiment configuration."""
    p = _need_file(path)
    try:
        if p.suffix.lower() == ".json":
            return json.loads(p.read_text())
        return tomllib.loads(p.read_text())
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc


def read_csv_column(path, column=None):
    """Numeric column of an RFC 4180 CSV with a header row (name or 0-based index)."""
    p = _need_file(path)
    with p.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ConfigError(f"{p} needs a header row and at least one data row")
    header = rows[0]
    if column is None:
        k = len(header) - 1
    elif str(column).lstrip("-").isdigit():
        k = int(column)
    elif column in header:
        k = header.index(column)
    else:
        raise ConfigError(f"column {column!r} not in {p} (columns: {header})")
    try:
        return header[k], np.array([float(r[k]) for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"non-numeric or missing entry in column {k} of {p}") from exc


def profile(spec, x):
    """Built-in initial profiles: {"profile": "gaussian"|"sech2"|"file:<csv>", ...}."""
    if isinstance(spec, str):
        spec = {"profile": spec}
    name = spec.get("profile", "gaussian")
    amp = float(spec.get("amplitude", 1.0))
    c = float(spec.get("center", 0.0))
    w = float(spec.get("width", 1.0))
    if w <= 0:
        raise ConfigError("profile width must be positive")
    if name == "gaussian":
        return amp * np.exp(-(((x - c) / w) ** 2))
    if name == "sech2":
        return amp / np.cosh((x - c) / w) ** 2
    if name.startswith("file:"):
        path = name[5:]
        _, xs = read_csv_column(path, spec.get("x_column", 0))
        _, vs = read_csv_column(path, spec.get("column", 1))
        return np.interp(x, xs, vs, left=0.0, right=0.0)
    raise ConfigError(f"unknown profile {name!r} (gaussian, sech2, file:<csv>)")


def _positive(name, v):
    v = float(v)
    if not v > 0:
        raise ConfigError(f"{name} must be positive, got {v}")
    return v


def _jobs(arg):
    if arg:
        return max(1, int(arg))
    env = os.environ.get("KAWAHARA_THREADS")
    return max(1, int(env)) if env else 1


# ----------------------------------------------------------------- kernel


def cmd_kernel(args):
    from .special_kernel import KernelEvaluator, eval_kernel

    if args.action == "eval":
        xs = [float(v) for v in args.x.split(",")]
        cfg = KernelEvaluator(method=args.method)
        vals = [eval_kernel(x, args.order, cfg) for x in xs]
        _emit(document("kernel_eval", {"order": args.order, "method": args.method, "x": xs, "value": vals}))
        return 0
    started = time.perf_counter()
    report = kernel_selftest()
    _emit(document("kernel_selftest", report, started), args.report)
    return 0 if report["passed"] else 1


def kernel_selftest():
    """All special-kernel invariants with achieved errors."""
    import mpmath as mp

    from .acceptance import check_kernel_constants, check_mellin
    from .special_kernel import KernelEvaluator, eval_kernel, kernel_constants, taylor_coefficients

    checks = {}
    ok1, v1 = check_kernel_constants()
    checks["constants_and_halfline_integral"] = {"passed": ok1, **v1}
    ok2, v2 = check_mellin()
    checks["mellin"] = {"passed": ok2, **v2}
    kc = kernel_constants()
    with mp.workdps(30):
        via_gamma = mp.cos(mp.pi / 10) * mp.gamma(mp.mpf(1) / 5) / (5 * mp.pi)
        via_reflection = mp.cos(mp.pi / 10) * mp.pi / (5 * mp.pi * mp.sin(mp.pi / 5) * mp.gamma(mp.mpf(4) / 5))
        refl = float(abs(via_gamma - via_reflection))
    checks["gamma_reflection"] = {"passed": refl <= 1e-12, "error": refl}
    m_err = abs(kc.M * kc.B0 * float(mp.gamma(0.8)) - 1)
    checks["normalization"] = {"passed": m_err <= 1e-12, "M": kc.M, "error": m_err}
    q = KernelEvaluator(method="quadrature", check=False)
    xs = np.linspace(-1, 1, 9)
    tay = max(
        abs(float(np.polynomial.polynomial.polyval(x, taylor_coefficients(n))) - eval_kernel(x, n, q))
        for x in xs
        for n in range(3)
    )
    checks["taylor_vs_quadrature"] = {"passed": tay <= 1e-10, "max_error": tay}
    xs = np.array([-8.0, -3.0, -0.5, 0.7, 2.0, 6.0])
    ode = float(np.max(np.abs(eval_kernel(xs, 4, q) + xs / 5 * eval_kernel(xs, 0, q))))
    checks["ode_residual"] = {"passed": ode <= 1e-9, "max_residual": ode, "x": xs.tolist()}
    decay = abs(eval_kernel(25.0, 0, q))
    checks["right_decay"] = {"passed": decay <= 1e-10, "abs_B_at_25": decay}
    return {"passed": all(c["passed"] for c in checks.values()), "checks": checks}


# ------------------------------------------------------------------- frac


def cmd_frac(args):
    from .fractional import CausalSignal, TimeGrid, fractional_integral

    name, vals = read_csv_column(args.input, args.column)
    if args.dt is not None:
        dt = _positive("dt", args.dt)
    else:
        _, t = read_csv_column(args.input, args.time_column)
        steps = np.diff(t)
        if steps.size == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ConfigError("time column must be uniformly spaced (or pass --dt)")
        dt = _positive("dt", steps[0])
    if vals.size < 2:
        raise ConfigError("need at least two samples")
    out = fractional_integral(CausalSignal(TimeGrid(dt, vals.size), vals), args.alpha).samples
    t = dt * np.arange(vals.size)
    rows = zip(t, vals, out)
    _write_csv_rows(args.output, ["t", name, f"I_{args.alpha}[{name}]"], rows)
    return 0


def _write_csv_rows(path, header, rows):
    from .plotting import write_csv

    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        write_csv(path, header, rows)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


# ---------------------------------------------------------------- forcing


def _bump(t, a, b):
    from .acceptance import _bump

    return _bump(t, a, b)


def cmd_forcing(args):
    from .forcing import SIDES, apply_forcing, derivative_sign, trace_coefficient

    if args.side not in SIDES:
        raise ConfigError(f"side must be one of {SIDES}")
    if args.action == "constants":
        lam = args.lam
        payload = {"side": args.side, "lambda": lam, "a": trace_coefficient(lam, args.side, 0)}
        payload["b"] = trace_coefficient(lam, args.side, 1)
        payload["derivative_signs"] = [derivative_sign(args.side, j) for j in range(3)]
        if args.side == "left":
            payload["c"] = trace_coefficient(lam, args.side, 2)
        _emit(document("forcing_constants", payload))
        return 0
    from .fractional import CausalSignal, TimeGrid

    tg = TimeGrid.covering(_positive("T", args.T), args.n)
    if args.signal == "bump":
        g = CausalSignal.from_function(tg, lambda t: _bump(t, 0.1 * tg.T, 0.9 * tg.T))
    elif args.signal.startswith("file:"):
        _, vals = read_csv_column(args.signal[5:], args.column)
        if vals.size != tg.n:
            raise ConfigError(f"signal has {vals.size} samples, the grid has {tg.n}")
        g = CausalSignal(tg, vals)
    else:
        raise ConfigError("signal must be 'bump' or 'file:<csv>'")
    xs = [float(v) for v in args.x.split(",")]
    F = apply_forcing(g, args.lam, args.side, xs, deriv=args.deriv)
    header = ["t"] + [f"x={x!r}" for x in xs]
    rows = ([tv, *row] for tv, row in zip(tg.t, F.values))
    _write_csv_rows(args.output, header, rows)
    return 0


# ----------------------------------------------------------------- evolve


def cmd_evolve(args):
    from .plotting import snapshot_indices, snapshot_svg, write_snapshots_csv
    from .spectral import ReferenceConfig, SpaceGrid, reference_solve

    started = time.perf_counter()
    cfg = load_config(args.config) if args.config else {}
    ev = {
        "profile": args.profile,
        "T": args.T,
        "dt": args.dt,
        "L": args.L,
        "N": args.N,
        "snapshots": args.snapshots,
        "linear": args.linear,
    }
    ev.update({k: v for k, v in cfg.get("evolve", cfg).items() if k in ev or k == "data"})
    space = SpaceGrid(_positive("L", ev["L"]), int(ev["N"]))
    phi = profile(ev.get("data", ev["profile"]), space.x)
    T, dt = _positive("T", ev["T"]), _positive("dt", ev["dt"])
    nsteps = max(1, int(round(T / dt)))
    every = max(1, nsteps // max(1, int(ev["snapshots"])))
    while nsteps % every:
        every -= 1
    F, rep = reference_solve(phi, T, space, ReferenceConfig(dt=T / nsteps, snapshot_every=every), not ev["linear"])
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    t = F.time.t
    idx = list(range(t.size))
    write_snapshots_csv(out / "snapshots.csv", t, space.x, F.values, idx)
    snapshot_svg(out / "snapshots.svg", t, space.x, F.values, snapshot_indices(t.size), "whole-line evolution")
    payload = {"config": ev, "conservation": asdict(rep), "files": ["snapshots.csv", "snapshots.svg"]}
    _emit(document("evolve", payload, started), out / "conservation.json")
    return 0


# ------------------------------------------------------------------ solve


@dataclass
class SolveSpec:
    side: str = "right"
    T: float = 1.0
    n: int = 201
    nonlinear: bool = False
    L: float = 40.0
    N: int = 1024
    s: float = 0.0
    data: dict = field(default_factory=lambda: {"profile": "gaussian", "center": 0.0, "width": 1.0})
    boundary: str = "manufactured"  # or "zero"
    lambdas: list | None = None
    field_extent: float = 10.0
    window: float = 5.0
    tolerance: float | None = None  # 1e-3 linear, 1e-2 nonlinear
    energy: bool = False
    output: str = "out"
    name: str = "solve"

    @classmethod
    def from_dict(cls, d, side=None):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known - {"experiment", "solve"}
        if extra:
            raise ConfigError(f"unknown solve keys: {sorted(extra)}")
        spec = cls(**{k: v for k, v in d.items() if k in known})
        if side:
            spec.side = side
        if spec.side not in ("right", "left"):
            raise ConfigError(f"side must be right or left, got {spec.side!r}")
        if spec.boundary not in ("manufactured", "zero"):
            raise ConfigError("boundary must be 'manufactured' or 'zero'")
        if spec.tolerance is None:
            spec.tolerance = 1e-2 if spec.nonlinear else 1e-3
        for k in ("T", "L", "field_extent", "window", "tolerance"):
            _positive(k, getattr(spec, k))
        if spec.n < 9:
            raise ConfigError("n must be at least 9")
        return spec


def _reference(spec: SolveSpec, space, tg, x_eval, phi_fn):
    """Whole-line reference on [0, T] and its x = 0 traces.

    Linear solves use the non-periodic kernel convolution; nonlinear ones the
    pseudospectral solver on the periodic grid (data must be wide enough not
    to wrap)."""
    from .acceptance import convolution_oracle
    from .spectral import ReferenceConfig, reference_solve, spectral_derivative

    nt = 2 if spec.side == "right" else 3
    if not spec.nonlinear:
        c = float(spec.data.get("center", 0.0)) if isinstance(spec.data, dict) else 0.0
        w = float(spec.data.get("width", 1.0)) if isinstance(spec.data, dict) else 1.0
        lo, hi = c - 8 * w, c + 8 * w
        tr = [convolution_oracle(phi_fn, lo, hi, tg.t, [0.0], d)[:, 0] for d in range(nt)]
        # t = 0 traces are data derivatives
        from .fractional import fd_weights

        offs = np.arange(-4, 5)
        h = 1e-2
        for d in range(1, nt):
            tr[d][0] = fd_weights(offs, d) @ phi_fn(h * offs) / h**d
        return tr, convolution_oracle(phi_fn, lo, hi, tg.t, x_eval)
    dt_ref = tg.dt / max(1, math.ceil(tg.dt / 1e-3))
    every = int(round(tg.dt / dt_ref))
    F, _ = reference_solve(phi_fn(space.x), tg.T, space, ReferenceConfig(dt=dt_ref, snapshot_every=every))
    o = space.origin
    tr = [spectral_derivative(F.values, space, d, axis=1)[:, o] if d else F.values[:, o] for d in range(nt)]
    cols = o + np.rint(np.asarray(x_eval) / space.dx).astype(int)
    return tr, F.values[:, cols]


def run_solve(spec: SolveSpec):
    from .fractional import CausalSignal, TimeGrid
    from .ibvp import IBVPProblem, SolverConfig, energy_identity_residual, half_line_x, solve_linear, solve_nonlinear
    from .plotting import convergence_svg, snapshot_indices, snapshot_svg, write_snapshots_csv

    started = time.perf_counter()
    from .spectral import SpaceGrid

    space = SpaceGrid(spec.L, int(spec.N))
    tg = TimeGrid.covering(spec.T, int(spec.n))

    def phi_fn(y):
        return profile(spec.data, np.asarray(y, dtype=float))

    x = half_line_x(space, spec.side)
    cfg = SolverConfig(field_extent=spec.field_extent, lambdas=tuple(spec.lambdas) if spec.lambdas else None)
    m_eval = np.abs(x) <= spec.window + 1e-9
    if spec.boundary == "manufactured":
        tr, ref = _reference(spec, space, tg, x[m_eval], phi_fn)
    else:
        tr, ref = [np.zeros(tg.n) for _ in range(2 if spec.side == "right" else 3)], None
    p = IBVPProblem(spec.side, space, phi_fn(x), *[CausalSignal(tg, v) for v in tr], s=spec.s)
    b = solve_nonlinear(p, cfg) if spec.nonlinear else solve_linear(p, cfg)
    m = np.abs(b.u.x) <= spec.window + 1e-9
    diag = {"name": spec.name, "config": asdict(spec), "solver": b.diagnostics}
    if ref is not None:
        err = float(np.linalg.norm(b.u.values[:, m] - ref) / np.linalg.norm(ref))
        diag["relative_error"] = err
        diag["passed"] = err <= spec.tolerance
    if spec.energy and not spec.nonlinear:
        diag["energy"] = energy_identity_residual(b, details=True)
    diag["picard_history"] = list(b.history)
    out = Path(spec.output)
    out.mkdir(parents=True, exist_ok=True)
    idx = snapshot_indices(tg.n, 6)
    write_snapshots_csv(out / "snapshots.csv", tg.t, b.u.x, b.u.values, idx)
    snapshot_svg(out / "snapshots.svg", tg.t, b.u.x, b.u.values, idx, f"{spec.side} half-line")
    files = ["snapshots.csv", "snapshots.svg"]
    if spec.nonlinear:
        from .plotting import write_csv

        write_csv(out / "convergence.csv", ["iteration", "update"], enumerate(b.history, 1))
        convergence_svg(out / "convergence.svg", b.history)
        files += ["convergence.csv", "convergence.svg"]
    diag["files"] = files
    doc = document("solve", diag, started)
    _emit(doc, out / "diagnostics.json")
    return doc


def _run_solve_dict(d):
    return run_solve(SolveSpec.from_dict(d))


def cmd_solve(args):
    cfg = load_config(args.config)
    batch = cfg.get("experiment")
    if batch is None:
        d = dict(cfg.get("solve", cfg))
        if args.output:
            d["output"] = args.output
        doc = run_solve(SolveSpec.from_dict(d, args.side))
        sys.stdout.write(dumps({k: v for k, v in doc.items() if k != "solver"}))
        return 0 if doc.get("passed", True) else 1
    specs = []
    for i, d in enumerate(batch):
        d = dict(d)
        d.setdefault("name", f"experiment_{i}")
        base = Path(args.output or cfg.get("output", "out"))
        d["output"] = str(base / d["name"])
        if args.side:
            d["side"] = args.side
        SolveSpec.from_dict(d)  # validate all before running any
        specs.append(d)
    jobs = _jobs(args.jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            docs = list(ex.map(_run_solve_dict, specs))
    else:
        docs = [_run_solve_dict(d) for d in specs]
    summary = [{"name": d["name"], "relative_error": d.get("relative_error"), "passed": d.get("passed")} for d in docs]
    sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "kind": "solve_batch", "experiments": summary}))
    return 0 if all(s["passed"] is not False for s in summary) else 1


# ------------------------------------------------------------------ probe


def cmd_probe(args):
    from .probe import NormParams, ProbeConfig, bilinear_probe, block_regressions, block_samples

    started = time.perf_counter()
    jobs = _jobs(args.jobs) if (args.jobs or os.environ.get("KAWAHARA_THREADS")) else None
    if args.action == "bilinear":
        p = NormParams(args.s, args.b, args.alpha)
        cfg = ProbeConfig(samples=args.samples, seed=args.seed, lemma_samples=args.lemma_samples, jobs=jobs)
        rep = bilinear_probe(p, cfg)
        rep["config"].pop("jobs", None)  # parallelism does not change the report
        _emit(document("probe_bilinear", rep, started), args.output)
        return 0
    recs = block_samples(args.samples, args.seed, jobs=jobs)
    rows = block_regressions(recs)
    body = ([r["part"], r["regressor"], r["fitted"], "" if r["claimed"] is None else r["claimed"]] for r in rows)
    if args.output:
        from .plotting import write_csv

        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        write_csv(args.output, ["part", "regressor", "fitted", "claimed"], body)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["part", "regressor", "fitted", "claimed"])
        for r in body:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return 0


# ----------------------------------------------------------------- verify


def cmd_verify(args):
    from .acceptance import verify_all

    started = time.perf_counter()
    only = {int(v) for v in args.only.split(",")} if args.only else None
    echo = (lambda line: print(line, file=sys.stderr, flush=True)) if not args.quiet else None
    results = verify_all(args.suite, only, echo)
    payload = {
        "suite": args.suite,
        "passed": all(r.passed for r in results),
        "criteria": [r.as_dict() for r in results],
    }
    doc = document("verify", payload, started)
    doc["metadata"]["seconds"] = {str(r.number): round(r.seconds, 2) for r in results}
    _emit(doc, args.report)
    return 0 if payload["passed"] else 1


# ------------------------------------------------------------------- main


def build_parser():
    ap = argparse.ArgumentParser(prog="kawahara", description="Kawahara half-line toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="oscillatory kernel B")
    ksub = k.add_subparsers(dest="action", required=True)
    ke = ksub.add_parser("eval")
    ke.add_argument("--x", required=True, help="comma-separated points")
    ke.add_argument("--order", type=int, default=0)
    ke.add_argument("--method", default="auto", choices=["auto", "quadrature", "taylor"])
    ks = ksub.add_parser("selftest")
    ks.add_argument("--report")

    fr = sub.add_parser("frac", help="Riemann-Liouville integral of a CSV column")
    fr.add_argument("--input", required=True)
    fr.add_argument("--column", default=None)
    fr.add_argument("--time-column", default="t")
    fr.add_argument("--alpha", type=float, required=True)
    fr.add_argument("--dt", type=float)
    fr.add_argument("--output")

    fo = sub.add_parser("forcing", help="boundary forcing fields and trace constants")
    fsub = fo.add_subparsers(dest="action", required=True)
    for name in ("constants", "fields"):
        q = fsub.add_parser(name)
        q.add_argument("--side", default="right")
        q.add_argument("--lambda", dest="lam", type=float, default=0.0)
    fl = fsub.choices["fields"]
    fl.add_argument("--signal", default="bump", help="bump or file:<csv>")
    fl.add_argument("--column", default=None)
    fl.add_argument("--T", type=float, default=1.0)
    fl.add_argument("--n", type=int, default=201)
    fl.add_argument("--x", default="0.0", help="comma-separated positions")
    fl.add_argument("--deriv", type=int, default=0)
    fl.add_argument("--output")

    ev = sub.add_parser("evolve", help="whole-line reference evolution")
    ev.add_argument("--config")
    ev.add_argument("--profile", default="gaussian")
    ev.add_argument("--T", type=float, default=0.05)
    ev.add_argument("--dt", type=float, default=1e-4)
    ev.add_argument("--L", type=float, default=40.0)
    ev.add_argument("--N", type=int, default=1024)
    ev.add_argument("--snapshots", type=int, default=10)
    ev.add_argument("--linear", action="store_true")
    ev.add_argument("--output", default="out/evolve")

    so = sub.add_parser("solve", help="half-line IBVP from a TOML/JSON config")
    so.add_argument("--config", required=True)
    so.add_argument("--side", choices=["right", "left"])
    so.add_argument("--output")
    so.add_argument("--jobs", type=int)

    pr = sub.add_parser("probe", help="bilinear-estimate probes")
    psub = pr.add_subparsers(dest="action", required=True)
    pb = psub.add_parser("bilinear")
    pb.add_argument("--s", type=float, default=0.0)
    pb.add_argument("--b", type=float, default=0.45)
    pb.add_argument("--alpha", type=float, default=0.55)
    pb.add_argument("--samples", type=int, default=100)
    pb.add_argument("--lemma-samples", type=int, default=200)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--output")
    pb.add_argument("--jobs", type=int)
    pk = psub.add_parser("blocks")
    pk.add_argument("--samples", type=int, default=200)
    pk.add_argument("--seed", type=int, default=0)
    pk.add_argument("--output")
    pk.add_argument("--jobs", type=int)

    ve = sub.add_parser("verify", help="acceptance suite")
    ve.add_argument("suite", choices=["quick", "full"])
    ve.add_argument("--only", help="comma-separated criterion numbers")
    ve.add_argument("--report")
    ve.add_argument("--quiet", action="store_true")
    return ap


COMMANDS = {
    "kernel": cmd_kernel,
    "frac": cmd_frac,
    "forcing": cmd_forcing,
    "evolve": cmd_evolve,
    "solve": cmd_solve,
    "probe": cmd_probe,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputFileError as exc:
        return _error("missing_file", str(exc), 2, path=exc.path)
    except (ConfigError, KeyError, TypeError) as exc:
        return _error("config", f"{type(exc).__name__}: {exc}", 2)
    except Exception as exc:
        module = type(exc).__module__.split(".")[-1]
        return _error("runtime", str(exc), 1, module=module, exception=type(exc).__name__, command=args.command)


if __name__ == "__main__":
    sys.exit(main())
