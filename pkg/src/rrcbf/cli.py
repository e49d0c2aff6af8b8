"""Command-line front end.

    rrcbf run CONFIG [--out DIR] [--set section.key=value ...]
    rrcbf reproduce {fig3,fig4,fig5} [--out DIR] [--jobs N]
    rrcbf sweep CONFIG --param section.key --values v1,v2,... [--out DIR]

Output goes to ``--out`` when given, else to ``$RRCBF_OUTPUT_DIR``, else
to ``./rrcbf_out``. Exit codes: 0 on completion (unsafe runs included),
2 on configuration errors, 3 on I/O errors.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .config import ScenarioConfig, config_to_text, load_config, parse_config
from .exceptions import ConfigError
from .sim_engine import SafetyMetrics, Trajectory, compute_metrics, max_estimation_error, run_scenario

OUTPUT_ENV = "RRCBF_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

log = logging.getLogger("rrcbf")

# starts for the undisturbed linear grid: three inside {h >= sqrt 2}, three below it
FIG3_STARTS = ((3.0, 0.0), (2.0, -1.0), (1.0, -1.0), (0.5, 0.0), (0.0, -0.3), (-1.0, -1.2))
FIG4_STARTS = ((3.0, 0.0), (1.0, -1.0))

SUITES: Dict[str, Tuple[Tuple[str, Sequence[Optional[Tuple[float, ...]]]], ...]] = {
    "fig3": tuple((f"linear_{v}.ini", FIG3_STARTS) for v in ("zcbf", "rcbf", "rrcbf")),
    "fig4": tuple((f"linear_{v}_sine.ini", FIG4_STARTS) for v in ("zcbf", "rcbf", "rrcbf")),
    "fig5": tuple((f"acc_{v}.ini", (None,)) for v in ("cbf", "rocbf", "docbf", "rrcbf", "dorrcbf")),
}

METRIC_FIELDS = ("min_h", "first_violation_time", "settling_h", "max_input", "infeasible_steps")


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package."""
    return Path(str(resources.files("rrcbf") / "configs" / name))


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV) or "rrcbf_out")


def suite_configs(figure: str) -> List[ScenarioConfig]:
    """The scenarios a reproduction suite runs, one per trace."""
    if figure not in SUITES:
        raise ConfigError(f"unknown figure {figure!r}; choose from {', '.join(SUITES)}")
    out = []
    for fname, starts in SUITES[figure]:
        base = load_config(bundled_config(fname))
        for i, x0 in enumerate(starts):
            if x0 is None:
                out.append(base)
            else:
                out.append(base.replace(name=f"{base.name}_ic{i}", initial_state=tuple(x0)))
    return out


@dataclass(frozen=True)
class RunRecord:
    name: str
    config: ScenarioConfig
    metrics: SafetyMetrics
    terminated: bool
    estimation_error: float


def _execute(cfg: ScenarioConfig, csv_path: Optional[Path]) -> RunRecord:
    traj = run_scenario(cfg)
    if csv_path is not None:
        traj.write_csv(csv_path)
    return _record(cfg, traj)


def _record(cfg: ScenarioConfig, traj: Trajectory) -> RunRecord:
    est = max_estimation_error(traj) if cfg.observer.enabled and traj.t[-1] >= 1.0 else math.nan
    return RunRecord(cfg.name, cfg, compute_metrics(traj), traj.terminated, est)


def _run_many(configs, out_dir: Optional[Path], jobs: int) -> List[RunRecord]:
    paths = [out_dir / f"{c.name}.csv" if out_dir is not None else None for c in configs]
    if jobs <= 1 or len(configs) <= 1:
        return [_execute(c, p) for c, p in zip(configs, paths)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_execute, configs, paths))


def _metric_row(rec: RunRecord) -> List[str]:
    m = rec.metrics
    fv = "" if m.first_violation_time is None else repr(m.first_violation_time)
    return [repr(m.min_h), fv, repr(m.settling_h), repr(m.max_input), str(m.infeasible_steps)]


def _write_table(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)


def reproduce(figure: str, out_dir: Path, jobs: int = 1) -> List[RunRecord]:
    """Run a reproduction suite; writes one CSV per trace and ``comparison.csv``."""
    configs = suite_configs(figure)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = _run_many(configs, out_dir, jobs)
    rows = []
    for rec in records:
        variant = rec.config.variant.variant.value if rec.config.variant else "none"
        x0 = " ".join(repr(v) for v in rec.config.initial_state)
        rows.append([rec.name, variant, x0, *_metric_row(rec), str(rec.terminated).lower()])
    _write_table(out_dir / "comparison.csv", ["trace", "variant", "initial_state", *METRIC_FIELDS, "terminated"],
                 rows)
    return records


def sweep(config_path, param: str, values: Sequence[str], out_dir: Optional[Path] = None,
          jobs: int = 1) -> List[RunRecord]:
    """One run per value of ``param`` (a ``section.key`` config leaf)."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    if param.count(".") != 1:
        raise ConfigError(f"parameter must look like section.key, got {param!r}")
    text = Path(config_path).read_text()
    configs = []
    for v in values:
        cfg = parse_config(text, source=str(config_path), overrides={param: v})
        configs.append(cfg.replace(name=f"{cfg.name}_{param.split('.')[1]}_{v}"))
    records = _run_many(configs, None, jobs)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        rows = [[v, *_metric_row(r), repr(r.estimation_error), str(r.terminated).lower()]
                for v, r in zip(values, records)]
        _write_table(out_dir / "sweep.csv", ["value", *METRIC_FIELDS, "max_estimation_error", "terminated"], rows)
    return records


def summary_text(cfg: ScenarioConfig, traj: Trajectory) -> str:
    m = compute_metrics(traj)
    lines = ["# resolved configuration", config_to_text(cfg).rstrip(), "", "# safety metrics"]
    lines += [f"{k} = {v}" for k, v in zip(METRIC_FIELDS, (m.min_h, m.first_violation_time, m.settling_h,
                                                           m.max_input, m.infeasible_steps))]
    for j in range(traj.psi.shape[1]):
        lines.append(f"min_psi{j + 1} = {compute_metrics(traj, f'psi{j + 1}').min_h}")
    lines.append(f"safe = {str(m.min_h >= 0).lower()}")
    lines.append(f"records = {len(traj)}")
    lines.append(f"terminated = {str(traj.terminated).lower()}")
    if traj.reason:
        lines.append(f"reason = {traj.reason}")
    if cfg.observer.enabled and traj.t[-1] >= 1.0:
        lines.append(f"max_estimation_error_after_1s = {max_estimation_error(traj)}")
    if traj.out_of_box_steps:
        lines.append(f"out_of_box_steps = {traj.out_of_box_steps}")
    return "\n".join(lines) + "\n"


def run(config_path, out_dir: Optional[Path] = None, overrides=None) -> Tuple[ScenarioConfig, Trajectory, Path]:
    cfg = load_config(config_path, overrides)
    if out_dir is None:
        out_dir = Path(cfg.output_path) if cfg.output_path else default_output_dir() / cfg.name
    out_dir.mkdir(parents=True, exist_ok=True)
    traj = run_scenario(cfg)
    traj.write_csv(out_dir / "trajectory.csv")
    (out_dir / "summary.txt").write_text(summary_text(cfg, traj))
    return cfg, traj, out_dir


def _parse_overrides(items) -> Dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rrcbf", description="Barrier-function safety filter simulations.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings from the simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario config")
    r.add_argument("config")
    r.add_argument("--out", type=Path, help="output directory")
    r.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config leaf")

    rp = sub.add_parser("reproduce", help="run a bundled reproduction suite")
    rp.add_argument("figure", choices=sorted(SUITES))
    rp.add_argument("--out", type=Path)
    rp.add_argument("--jobs", type=int, default=1)

    s = sub.add_parser("sweep", help="vary one config leaf")
    s.add_argument("config")
    s.add_argument("--param", required=True)
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--out", type=Path)
    s.add_argument("--jobs", type=int, default=1)
    return p


def _print_records(records, label) -> None:
    print(f"{label:<40} {'min_h':>12} {'settling_h':>12} {'infeasible':>10}")
    for lab, rec in records:
        print(f"{lab:<40} {rec.metrics.min_h:>12.6g} {rec.metrics.settling_h:>12.6g} "
              f"{rec.metrics.infeasible_steps:>10d}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg, traj, out = run(args.config, args.out, _parse_overrides(args.set))
            m = compute_metrics(traj)
            print(f"{cfg.name}: min_h={m.min_h:.6g} settling_h={m.settling_h:.6g} -> {out}")
        elif args.command == "reproduce":
            out = args.out or default_output_dir() / args.figure
            records = reproduce(args.figure, out, args.jobs)
            _print_records([(r.name, r) for r in records], "trace")
            print(f"wrote {out / 'comparison.csv'}")
        else:
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            records = sweep(args.config, args.param, values, args.out, args.jobs)
            _print_records([(f"{args.param}={v}", r) for v, r in zip(values, records)], "value")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
