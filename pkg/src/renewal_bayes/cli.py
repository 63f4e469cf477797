"""Command line interface.

``renewal-bayes run <config>`` runs one named experiment from a TOML or JSON
configuration and writes ``manifest.json``, ``summary.json`` and one CSV per
result table into the output directory. ``renewal-bayes list-experiments``
prints the registry.

Exit codes: 0 when every assertion passes, 1 when one fails, 2 for a bad
configuration (only ``error.log`` is written), 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from .errors import ConfigError, DomainError, NumericError
from .experiments import EXPERIMENTS, merge_config

__all__ = ["main", "load_config", "format_number"]

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def format_number(x) -> str:
    """17 significant digits; non-finite values as ``nan``, ``inf``, ``-inf``."""
    return format(float(x), ".17g")


def load_config(path) -> dict:
    """Read a ``.toml`` or ``.json`` file into a dict."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from None
    suffix = p.suffix.lower()
    try:
        if suffix == ".toml":
            if sys.version_info >= (3, 11):
                import tomllib
            else:
                import tomli as tomllib
            data = tomllib.loads(raw.decode("utf-8"))
        elif suffix == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            raise ConfigError("config must be a .toml or .json file")
    except (ValueError, UnicodeDecodeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse {p.name}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a table")
    return data


# -- serialization ------------------------------------------------------------------
def _plain(obj):
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    return obj


def _json(obj, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_number(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    return json.dumps(str(obj))


def write_json(path, obj) -> None:
    Path(path).write_text(_json(_plain(obj)) + "\n", encoding="utf-8")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(v)
    return str(v)


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


# -- commands -----------------------------------------------------------------------
def _versions() -> dict:
    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "renewal_bayes": __version__,
    }


def _positive_int(x, name) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise ConfigError(f"'{name}' must be a positive integer")
    return x


def _prepare(args):
    """Load and validate; returns ``(experiment, cfg, seed, threads, out_dir)``."""
    user = load_config(args.config)
    name = user.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"'experiment' must be one of: {', '.join(EXPERIMENTS)}")
    exp = EXPERIMENTS[name]
    cfg = merge_config(exp.defaults, user)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.reps is not None:
        cfg["reps"] = args.reps
    if args.threads is not None:
        cfg["threads"] = args.threads
    seed = cfg["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("'seed' must be a nonnegative integer")
    _positive_int(cfg["reps"], "reps")
    threads = _positive_int(cfg["threads"], "threads")
    if cfg["output_dir"] is not None and not isinstance(cfg["output_dir"], str):
        raise ConfigError("'output_dir' must be a string")
    return exp, cfg, seed, threads


def _out_dir(args, cfg_or_none, name_or_none) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg_or_none is not None and cfg_or_none.get("output_dir"):
        return Path(cfg_or_none["output_dir"])
    return Path("results") / (name_or_none or Path(args.config).stem)


def _fail_config(out: Path, msg: str) -> int:
    out.mkdir(parents=True, exist_ok=True)
    (out / "error.log").write_text(f"config error: {msg}\n", encoding="utf-8")
    print(f"config error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args) -> int:
    try:
        exp, cfg, seed, threads = _prepare(args)
    except (ConfigError, DomainError) as exc:
        # best effort at locating the output directory of a broken config
        partial = None
        try:
            partial = load_config(args.config)
        except ConfigError:
            pass
        name = partial.get("experiment") if isinstance(partial, dict) and isinstance(partial.get("experiment"), str) else None
        od = partial.get("output_dir") if isinstance(partial, dict) and isinstance(partial.get("output_dir"), str) else None
        return _fail_config(_out_dir(args, {"output_dir": od}, name), str(exc))
    out = _out_dir(args, cfg, exp.name)
    try:
        result = exp.run(cfg, exp.stream(seed), threads)
    except (ConfigError, DomainError) as exc:
        return _fail_config(out, str(exc))
    except NumericError as exc:
        out.mkdir(parents=True, exist_ok=True)
        diag = getattr(exc, "diagnostics", None)
        (out / "error.log").write_text(f"numerical failure: {exc}\n{diag or ''}\n", encoding="utf-8")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out.mkdir(parents=True, exist_ok=True)
    echo = {k: v for k, v in cfg.items() if k not in ("threads", "output_dir")}
    write_json(
        out / "manifest.json",
        {
            "experiment": exp.name,
            "seed": seed,
            "config": echo,
            "versions": _versions(),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        },
    )
    for tname, (header, rows) in result.tables.items():
        write_table(out / f"{tname}.csv", header, rows)
    write_json(
        out / "summary.json",
        {
            "experiment": exp.name,
            "reproduces": exp.reproduces,
            "passed": result.passed,
            "assertions": [{"name": a.name, "passed": a.passed, "detail": a.detail} for a in result.assertions],
            "results": result.results,
        },
    )
    for a in result.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'}  {a.name}" + (f"  [{a.detail}]" if a.detail else ""))
    print(f"{exp.name}: {'all assertions passed' if result.passed else 'assertion failure'}; output in {os.fspath(out)}")
    return EXIT_OK if result.passed else EXIT_ASSERT


def cmd_list(args) -> int:
    for e in EXPERIMENTS.values():
        print(f"{e.name} → {e.reproduces}  ({e.runtime})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="renewal-bayes", description="Bayesian learning from renewal-process observations.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config", help="TOML or JSON configuration")
    r.add_argument("--seed", type=int, default=None, help="root seed (overrides the config)")
    r.add_argument("--reps", type=int, default=None, help="replications (overrides the config)")
    r.add_argument("--out", default=None, help="output directory")
    r.add_argument("--threads", type=int, default=None, help="worker threads; results do not depend on it")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list-experiments", help="list the available experiments")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
