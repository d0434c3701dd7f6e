import argparse
import json
import logging
import math
import os
import sys
import tempfile

import attrs
import numpy as np

from core.utilities.config_manager import RunConfig, load_config, parse_config
from spectral_operations.errors import ConfigError, ConfigurationError, MTCError, SnapshotFormatError
from spectral_operations.harness import EXAMPLES, convergence_sweep, run_case, translation_error, write_errors_csv
from spectral_operations.model import l2_norm
from spectral_operations.snapshot_io import Snapshot, list_snapshots, snapshot_name, write_snapshot
from spectral_operations.travelwave import WaveSolver, eps_n, even_project, wave_residual

logger = logging.getLogger("run_app")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_summary(summary: dict, out_dir: str) -> None:
    path = os.path.join(out_dir, "summary.json")
    fd, tmp = tempfile.mkstemp(prefix=".summary-", suffix=".json", dir=out_dir)
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(_jsonable(summary), f, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info("wrote %s", path)


def _prepare_out(cfg: RunConfig, out_override) -> str:
    out_dir = out_override or cfg.output.directory
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def run_experiment(cfg: RunConfig, out_dir: str) -> int:
    if cfg.mode == "travelwave":
        return run_travelwave(cfg, out_dir)
    if cfg.n_list:
        if cfg.example is None:
            raise ConfigError("harness.n_list", "sweeps need an example id")
        return run_sweep(cfg, out_dir)

    case = cfg.case
    counter = {"index": 0}

    def sink(t, Y):
        path = os.path.join(out_dir, snapshot_name(counter["index"]))
        write_snapshot(Snapshot(p=case.p, ell=case.ell, t=t, params=case.params, coeffs=Y), path)
        counter["index"] += 1

    report = run_case(
        case,
        snapshot_sink=sink if cfg.output.snapshots else None,
        record_wall_time=cfg.output.record_wall_time,
    )
    if "csv" in cfg.output.formats:
        write_errors_csv(report, os.path.join(out_dir, "errors.csv"))
    if "json" in cfg.output.formats:
        write_summary({**report.summary, "snapshots": counter["index"]}, out_dir)
    print(f"[run_app] Example {case.example}: linf {report.summary['linf_error_max']:.3e}, "
          f"l2 {report.summary['l2_error_max']:.3e}", flush=True)
    return EXIT_OK


def run_travelwave(cfg: RunConfig, out_dir: str) -> int:
    spec = cfg.wave
    prob = spec.problem()
    solver = WaveSolver(prob)
    v = solver.solve()

    residual = float(np.linalg.norm(even_project(wave_residual(v, prob.sigma, prob))))
    summary = {
        "mode": "travelwave",
        "alpha": prob.alpha,
        "beta": prob.beta,
        "gamma": prob.gamma,
        "delta": prob.delta,
        "c": prob.c,
        "sigma": prob.sigma,
        "n": prob.grid.n,
        "ell": prob.grid.ell,
        "residual": residual,
        "eps_n": eps_n(prob.sigma, prob.grid.n, prob.tol_scale),
        **solver.stats,
    }
    if spec.translate_T > 0:
        summary["translate_T"] = spec.translate_T
        summary["translation_error"] = translation_error(prob, v, spec.translate_T, spec.tau)

    if cfg.output.snapshots:
        write_snapshot(
            Snapshot(p=prob.grid.p, ell=prob.grid.ell, t=0.0, params=prob.params, coeffs=v),
            os.path.join(out_dir, "profile.txt"),
        )
    if "json" in cfg.output.formats:
        write_summary(summary, out_dir)
    print(f"[run_app] Profile c={prob.c}, sigma={prob.sigma}: residual {residual:.3e} "
          f"(eps_n {summary['eps_n']:.3e})", flush=True)
    return EXIT_OK


def run_sweep(cfg: RunConfig, out_dir: str, tau=None) -> int:
    report = convergence_sweep(
        cfg.example,
        cfg.n_list,
        tau=tau,
        overrides=_case_overrides(cfg),
        workers=cfg.workers,
        record_wall_time=cfg.output.record_wall_time,
    )
    if "csv" in cfg.output.formats:
        write_errors_csv(report, os.path.join(out_dir, "errors.csv"))
    if "json" in cfg.output.formats:
        write_summary(report.summary, out_dir)
    for row in report.rows:
        print(f"[run_app] n={row.t_or_n}: l2 {row.l2_error:.3e}, linf {row.linf_error:.3e}", flush=True)
    if report.partial:
        print(f"[run_app] Sweep incomplete: {report.failure}", file=sys.stderr, flush=True)
        return EXIT_SOLVER
    return EXIT_OK


def show_snapshots(directory: str) -> int:
    snapshots = list_snapshots(directory)
    if not snapshots:
        print(f"[run_app] No snapshots in {directory}", flush=True)
        return EXIT_OK
    for name, snap in snapshots:
        print(f"[run_app] {name}: t={snap.t:g}, p={snap.p}, ell={snap.ell:g}, "
              f"l2 {l2_norm(snap.coeffs):.6e}", flush=True)
    return EXIT_OK


def _case_overrides(cfg: RunConfig) -> dict:
    """Fields of the parsed case that differ from the example defaults, minus the grid size."""
    base = attrs.asdict(EXAMPLES[cfg.example], recurse=False)
    case = attrs.asdict(cfg.case, recurse=False)
    return {k: v for k, v in case.items() if k != "p" and v != base[k]}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="MTC spectral solver for the Benjamin equation")
    parser.add_argument("--log-level", default="INFO", help="Logging level (DEBUG, INFO, WARNING, ...)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Run one experiment from a JSON config")
    p_run.add_argument("--config", "-c", required=True, help="Path to the JSON run configuration")
    p_run.add_argument("--out", "-o", help="Output directory (overrides output.directory)")

    p_sweep = sub.add_parser("sweep", help="Error-vs-n sweep of one example")
    p_sweep.add_argument("--example", "-e", type=int, required=True, help="Example id 1..6")
    p_sweep.add_argument("--n-list", required=True, help="Comma separated truncations, e.g. 15,31,63,127")
    p_sweep.add_argument("--tau", type=float, help="Time step (defaults to the example's)")
    p_sweep.add_argument("--workers", type=int, default=1, help="Parallel runs")
    p_sweep.add_argument("--out", "-o", help="Output directory")

    p_wave = sub.add_parser("travelwave", help="Compute a traveling-wave profile")
    p_wave.add_argument("--config", "-c", help="JSON config with a travelwave section (Example-5 wave if omitted)")
    p_wave.add_argument("--out", "-o", help="Output directory")

    p_snap = sub.add_parser("snapshots", help="List the snapshots written by a run")
    p_snap.add_argument("directory", help="Output directory of a run")

    p_self = sub.add_parser("selftest", help="Run the property test suites")
    p_self.add_argument("--all", action="store_true", help="Include slow acceptance runs")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="[%(name)s] %(message)s",
        stream=sys.stderr,
    )

    if args.command == "selftest":
        from test_app import run_selftest

        return run_selftest(include_slow=args.all)

    try:
        if args.command == "run":
            cfg = load_config(args.config)
            out_dir = _prepare_out(cfg, args.out)
            return run_experiment(cfg, out_dir)
        if args.command == "travelwave":
            text = '{"travelwave": {}}'
            if args.config:
                with open(args.config, "r") as f:
                    text = f.read()
            cfg = parse_config(text)
            if cfg.mode != "travelwave":
                cfg = parse_config(json.dumps({**json.loads(text), "travelwave": {}}))
            out_dir = _prepare_out(cfg, args.out)
            return run_travelwave(cfg, out_dir)
        if args.command == "sweep":
            try:
                n_list = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
            except ValueError:
                print(f"[run_app] --n-list must be comma separated integers: {args.n_list}", file=sys.stderr)
                return EXIT_CONFIG
            cfg = parse_config(json.dumps(
                {"example": args.example, "harness": {"n_list": n_list, "workers": args.workers}}
            ))
            out_dir = _prepare_out(cfg, args.out)
            return run_sweep(cfg, out_dir, tau=args.tau)
        if args.command == "snapshots":
            return show_snapshots(args.directory)
    except ConfigurationError as exc:
        print(f"[run_app] Configuration error: {exc}", file=sys.stderr, flush=True)
        return EXIT_CONFIG
    except (OSError, SnapshotFormatError) as exc:
        print(f"[run_app] I/O error: {exc}", file=sys.stderr, flush=True)
        return EXIT_IO
    except MTCError as exc:
        print(f"[run_app] Solver failure: {exc}", file=sys.stderr, flush=True)
        return EXIT_SOLVER
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
