"""Command-line interface: ``bismut-flow {simulate,validate,asymptotics,blowdown,sweep}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import blowdown_limit, blowdown_sample_times, estimate_asymptotics, gh_limit, soliton_check
from .catalog import GeometryError, GeometryId, GeometryParams, build_geometry
from .curvature import InadmissibleMetricError, MetricCoefficients
from .flow import ConventionError, IntegratorOptions, Trajectory, integrate
from .integrator import IntegrationError

SCHEMA_VERSION = 1
CSV_COLUMNS = ("t", "x", "y", "re_z", "im_z", "D")
THREADS_ENV = "BISMUT_FLOW_THREADS"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    geometry: str = ""
    alpha: float | None = None
    a: float | None = None
    b: float | None = None
    epsilon: int | None = None
    lambda_quotient: float | None = None
    inoue_type: str = "plus"
    x0: float = 1.0
    y0: float = 1.0
    re_z0: float = 0.0
    im_z0: float = 0.0
    t_end: float | None = None  # per-command default when unset
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 500_000
    samples: int = 200
    rhs: str = "closed"
    s_values: list = field(default_factory=lambda: [1e1, 1e2, 1e3, 1e4])
    t_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    output: str | None = None
    report: str | None = None

    def geometry_params(self) -> GeometryParams:
        return GeometryParams(alpha=self.alpha, a=self.a, b=self.b, epsilon=self.epsilon)

    def spec(self):
        if not self.geometry:
            raise ConfigError("--geometry is required")
        try:
            return build_geometry(GeometryId.parse(self.geometry), self.geometry_params())
        except (GeometryError, ValueError) as err:
            raise ConfigError(str(err)) from err

    def initial(self) -> MetricCoefficients:
        try:
            return MetricCoefficients(self.x0, self.y0, complex(self.re_z0, self.im_z0))
        except InadmissibleMetricError as err:
            raise ConfigError(str(err)) from err

    def options(self, default_t_end: float = 100.0, t_end: float | None = None,
                sample_times=None) -> IntegratorOptions:
        if t_end is None:
            t_end = self.t_end if self.t_end is not None else default_t_end
        if sample_times is None:
            if self.samples < 2:
                raise ConfigError("--samples must be at least 2")
            sample_times = tuple(np.geomspace(min(1e-2, t_end / 10), t_end, self.samples))
        try:
            return IntegratorOptions(t_end=t_end, rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                     max_steps=self.max_steps, sample_times=sample_times, rhs=self.rhs)
        except ValueError as err:
            raise ConfigError(str(err)) from err


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def load_config(args: argparse.Namespace) -> RunConfig:
    """JSON file values first, then any flag given on the command line."""
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        values.update(data)
    for name in _CONFIG_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    try:
        return RunConfig(**values)
    except TypeError as err:
        raise ConfigError(str(err)) from err


# ---------------------------------------------------------------------------
# output


def write_csv(path, traj: Trajectory) -> None:
    """``t,x,y,re_z,im_z,D`` with 17 significant digits, so values round-trip exactly."""
    fh = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t, u, d in zip(traj.t, traj.states, traj.det):
            w.writerow(["%.17g" % v for v in (t, *u, d)])
    finally:
        if fh is not sys.stdout:
            fh.close()


def read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_csv`: ``(t, states)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: expected header {','.join(CSV_COLUMNS)}")
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(CSV_COLUMNS))
    return data[:, 0], data[:, 1:5]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict, stream=None) -> None:
    text = json.dumps(_jsonable({"schema_version": SCHEMA_VERSION, **payload}), indent=2)
    if path in (None, "-"):
        print(text, file=stream or sys.stdout)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _run_header(cfg: RunConfig, spec) -> dict:
    return {
        "geometry": spec.name,
        "params": {k: v for k, v in asdict(spec.params).items() if v is not None},
        "initial": {"x0": cfg.x0, "y0": cfg.y0, "re_z0": cfg.re_z0, "im_z0": cfg.im_z0},
    }


# ---------------------------------------------------------------------------
# commands


def _integrate(cfg: RunConfig, spec, g0, opts):
    """Returns ``(trajectory, error message or None)``."""
    try:
        return integrate(spec, g0, opts), None
    except IntegrationError as err:
        return err.trajectory, str(err)
    except InadmissibleMetricError as err:
        raise ConfigError(str(err)) from err


def cmd_simulate(cfg: RunConfig) -> int:
    spec, g0, opts = cfg.spec(), cfg.initial(), cfg.options()
    traj, failure = _integrate(cfg, spec, g0, opts)
    write_csv(cfg.output, traj)
    if cfg.report or failure:
        report = {
            **_run_header(cfg, spec),
            "t_end": opts.t_end,
            "t_reached": float(traj.t[-1]) if len(traj.t) else 0.0,
            "truncated": traj.truncated,
            "error": failure,
            "final": traj.states[-1] if len(traj.t) else None,
            "stats": traj.stats,
        }
        # without a report path the failure report goes to stderr; stdout may hold the CSV
        write_json(cfg.report, report, stream=sys.stderr)
    if failure:
        print(f"error: {failure}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_validate(samples: int, seed: int, report: str | None) -> int:
    from .validation import run_validation

    checks = run_validation(samples, seed)
    ok = all(c.passed for c in checks)
    write_json(report, {"passed": ok, "checks": [c.as_dict() for c in checks]})
    for c in checks:
        if not c.passed:
            print(f"FAIL {c.name}: residual {c.residual:.3e} {c.detail}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_asymptotics(cfg: RunConfig) -> int:
    spec, g0 = cfg.spec(), cfg.initial()
    traj, failure = _integrate(cfg, spec, g0, cfg.options(default_t_end=1e4))
    if failure:
        print(f"error: {failure}", file=sys.stderr)
        write_json(cfg.report, {**_run_header(cfg, spec), "truncated": True, "error": failure})
        return EXIT_NUMERICAL
    try:
        rep = estimate_asymptotics(traj)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    payload = {
        **_run_header(cfg, spec),
        "truncated": False,
        "window": rep.window,
        "fits": {k: asdict(v) for k, v in rep.fits.items()},
        "final": traj.states[-1],
    }
    try:
        payload["gh_limit"] = asdict(gh_limit(traj, cfg.lambda_quotient, cfg.inoue_type))
    except ValueError as err:
        payload["gh_limit"] = None
        payload["gh_note"] = str(err)
    write_json(cfg.report, payload)
    return EXIT_OK


def cmd_blowdown(cfg: RunConfig) -> int:
    spec, g0 = cfg.spec(), cfg.initial()
    try:
        samples = blowdown_sample_times(cfg.s_values, cfg.t_grid)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad s_values / t_grid: {err}") from err
    traj, failure = _integrate(cfg, spec, g0, cfg.options(t_end=samples[-1], sample_times=samples))
    if failure:
        print(f"error: {failure}", file=sys.stderr)
        write_json(cfg.report, {**_run_header(cfg, spec), "truncated": True, "error": failure})
        return EXIT_NUMERICAL
    try:
        res = blowdown_limit(traj, cfg.s_values, cfg.t_grid)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    try:
        soliton = soliton_check(res, 2.0)
    except ValueError:
        soliton = None
    write_json(cfg.report, {
        **_run_header(cfg, spec),
        "truncated": False,
        "weights": res.weights.w,
        "columns": ["s12", "s34", "s13", "s24", "s14", "s23"],
        "t_grid": res.t_grid,
        "s_values": res.s_values,
        "errors": {repr(s): e for s, e in res.errors.items()},
        "off_diagonal": {repr(s): e for s, e in res.off_diagonal.items()},
        "limit": res.limit,
        "target": res.target,
        "soliton_residual": soliton,
    })
    return EXIT_OK


def _sweep_one(job):
    index, cfg, out_dir = job
    path = Path(out_dir) / f"run_{index:04d}.csv"
    spec, g0 = cfg.spec(), cfg.initial()
    try:
        traj = integrate(spec, g0, cfg.options())
        failure = None
    except IntegrationError as err:
        traj, failure = err.trajectory, str(err)
    write_csv(path, traj)
    return {
        **_run_header(cfg, spec),
        "file": path.name,
        "truncated": traj.truncated,
        "error": failure,
        "final": traj.states[-1] if len(traj.t) else None,
    }


def parse_grid(items) -> list[dict]:
    """``["alpha=0,1,2", "x0=1,2"]`` -> cartesian product of assignments."""
    axes = []
    for item in items or []:
        name, sep, vals = item.partition("=")
        name = name.strip().replace("-", "_")
        if not sep or name not in _CONFIG_FIELDS:
            raise ConfigError(f"bad grid axis {item!r}; use name=v1,v2,...")
        try:
            axes.append([(name, _coerce(name, v)) for v in vals.split(",") if v.strip()])
        except ValueError as err:
            raise ConfigError(f"bad value in {item!r}: {err}") from err
    return [dict(combo) for combo in itertools.product(*axes)]


def _coerce(name: str, text: str):
    if name in ("geometry", "rhs", "inoue_type"):
        return text.strip()
    if name in ("epsilon", "max_steps", "samples"):
        return int(text)
    return float(text)


def sweep_workers(n_jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError as err:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from err
    return max(1, min(limit, n_jobs))


def cmd_sweep(cfg: RunConfig, grid, out_dir: str) -> int:
    combos = parse_grid(grid) or [{}]
    configs = [replace(cfg, **c) for c in combos]
    for c in configs:  # fail fast on bad configs before any work
        c.spec(), c.initial(), c.options()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(i, c, str(out)) for i, c in enumerate(configs)]
    workers = sweep_workers(len(jobs))
    if workers == 1:
        runs = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_sweep_one, jobs))
    for r, combo in zip(runs, combos):
        r["grid"] = combo
    write_json(out / "manifest.json", {"runs": runs, "workers": workers})
    failed = [r for r in runs if r["error"]]
    for r in failed:
        print(f"error in {r['file']}: {r['error']}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_run_args(p: argparse.ArgumentParser, output: bool = True) -> None:
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    g = p.add_argument_group("geometry")
    g.add_argument("--geometry", help=f"one of {', '.join(m.value for m in GeometryId)}")
    g.add_argument("--alpha", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--epsilon", type=int, choices=(1, -1))
    g.add_argument("--lambda-quotient", dest="lambda_quotient", type=float,
                   help="monodromy eigenvalue for sol1 / sol1-prime circle lengths")
    g.add_argument("--inoue-type", dest="inoue_type", choices=("plus", "minus"))
    m = p.add_argument_group("initial metric")
    m.add_argument("--x0", type=float)
    m.add_argument("--y0", type=float)
    m.add_argument("--re-z0", dest="re_z0", type=float)
    m.add_argument("--im-z0", dest="im_z0", type=float)
    i = p.add_argument_group("integrator")
    i.add_argument("--t-end", dest="t_end", type=float)
    i.add_argument("--rel-tol", dest="rel_tol", type=float)
    i.add_argument("--abs-tol", dest="abs_tol", type=float)
    i.add_argument("--max-steps", dest="max_steps", type=int)
    i.add_argument("--samples", type=int, help="number of log-spaced output times")
    i.add_argument("--rhs", choices=("closed", "generic"))
    if output:
        p.add_argument("--output", "-o", help="CSV path (default: standard output)")
    p.add_argument("--report", help="JSON report path (default: standard output)")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bismut-flow", description="Pluriclosed flow of left-invariant metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate one run and write its trajectory as CSV")
    _add_run_args(p)

    p = sub.add_parser("validate", help="run the built-in consistency checks")
    p.add_argument("--samples", type=int, default=1000, help="random metrics per geometry")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="JSON report path (default: standard output)")

    p = sub.add_parser("asymptotics", help="fit long-time behaviour and the rescaled limit")
    _add_run_args(p, output=False)

    p = sub.add_parser("blowdown", help="evaluate the rescaled blowdown limit")
    _add_run_args(p, output=False)
    p.add_argument("--s-values", dest="s_values", type=_float_list, help="comma-separated rescalings")
    p.add_argument("--t-grid", dest="t_grid", type=_float_list, help="comma-separated limit times")

    p = sub.add_parser("sweep", help="run a grid of configurations")
    _add_run_args(p, output=False)
    p.add_argument("--grid", action="append", metavar="NAME=V1,V2,...",
                   help="parameter axis; repeat for a cartesian product")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exit_:  # usage errors, --help and --version
        return int(exit_.code or 0)
    try:
        if args.command == "validate":
            if args.samples < 1:
                raise ConfigError("--samples must be positive")
            return cmd_validate(args.samples, args.seed, args.report)
        cfg = load_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "asymptotics":
            return cmd_asymptotics(cfg)
        if args.command == "blowdown":
            return cmd_blowdown(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.grid, args.out_dir)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConventionError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
