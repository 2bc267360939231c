"""Command line entry point: ``stochsense run|validate|list-tasks``.

Exit codes: 0 ok, 2 invalid config, 3 resource cap exceeded, 4 Monte Carlo
averaging did not converge.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__, config
from .protocols import ConvergenceError
from .qsim import ResourceCapError
from .tasks import RUNNERS, Table

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_CONVERGENCE = 0, 2, 3, 4

log = logging.getLogger("stochsense")


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_csv(path: Path, table: Table) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: dict, out_root: Path | None = None, threads: int = 1, figures: bool | None = None) -> Path:
    """Execute a resolved config and write all outputs; returns the run directory."""
    start = time.perf_counter()
    root = Path(out_root if out_root is not None else cfg["output"]["dir"])
    run_dir = root / f"{cfg['task']}_{config.config_hash(cfg)}"
    run_dir.mkdir(parents=True, exist_ok=True)
    log.info("running %s into %s", cfg["task"], run_dir)
    output = RUNNERS[cfg["task"]](cfg["params"], cfg["seed"], threads)

    written = [run_dir / "results.csv"]
    write_csv(written[0], output.results)
    for name, table in output.tables.items():
        write_csv(run_dir / name, table)
        written.append(run_dir / name)
    summary_path = run_dir / "summary.json"
    summary_path.write_text(json.dumps(output.summary, indent=2, sort_keys=True, default=_json_default) + "\n")
    written.append(summary_path)
    if cfg["output"]["figures"] if figures is None else figures:
        for name, draw in output.figures.items():
            written.append(draw(run_dir / name))

    import matplotlib
    import numba
    import scipy
    manifest = {
        "task": cfg["task"],
        "config_hash": config.config_hash(cfg),
        "config": {k: cfg[k] for k in ("task", "seed", "params")},
        "seed": cfg["seed"],
        "threads": threads,
        "versions": {"stochsense": __version__, "python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "numba": numba.__version__, "matplotlib": matplotlib.__version__,
                     "pyyaml": yaml.__version__},
        "wall_time_s": time.perf_counter() - start,
        "outputs": {p.name: _sha256(p) for p in written},
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return run_dir


def _load_with_seed(path: str, seed: int | None) -> dict:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise config.ConfigError([f"{path}: cannot read config ({exc.strerror})"]) from exc
    except yaml.YAMLError as exc:
        raise config.ConfigError([f"{path}: invalid YAML ({exc})"]) from exc
    if seed is not None and isinstance(raw, dict):
        raw = {**raw, "seed": seed}
    return config.validate(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochsense",
                                     description="Entangled vs unentangled sensing of stochastic parameters.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a YAML config")
    p_run.add_argument("--config", required=True, help="path to the YAML config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="output root directory (default from config or ./results)")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads")
    p_run.add_argument("--no-figures", action="store_true", help="skip SVG output")

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("--config", required=True)

    sub.add_parser("list-tasks", help="list tasks and their parameters")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "list-tasks":
        print(config.catalog())
        return EXIT_OK

    try:
        cfg = _load_with_seed(args.config, getattr(args, "seed", None))
    except config.ConfigError as exc:
        for line in exc.diagnostics:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"{args.config}: ok ({cfg['task']}, hash {config.config_hash(cfg)})")
        return EXIT_OK

    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run_dir = run(cfg, args.out, args.threads, False if args.no_figures else None)
    except ResourceCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConvergenceError as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    print(run_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
