"""Command-line surface: closed-form/Monte-Carlo constants table, replication
runs with manifests, and the two statistical test batteries.

Exit codes: 0 all enabled tests pass, 1 statistical failure, 2 usage or
configuration error.  Bulk records are CSV; test reports are JSON lines.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .geometry import Disk, FullPlane, Rectangle
from .sampling import RegimeSpec, RngStream
from .stats import ExperimentConfig, calibration_suite, clt_battery, \
    poisson_battery, records_to_csv, reports_to_jsonl, run_replications
from .stress import StressWeight
from .theory import c_d_closed, c_d_montecarlo, c_d_prime_closed, \
    c_d_prime_montecarlo, cube_moments, unit_ball_volume

CONFIG_SCHEMA_VERSION = 1

_CONFIG_KEYS = {
    "schema", "window", "dimension", "regime", "t_values", "replications",
    "regions", "seed", "weight", "record_stress", "intensity_budget", "level",
}


class ConfigError(ValueError):
    """Configuration problem; the message names the offending key."""


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"config key '{key}': {message}")


def _parse_region(idx: int, obj) -> Rectangle | Disk | FullPlane:
    key = f"regions[{idx}]"
    _require(isinstance(obj, dict) and "shape" in obj, key,
             "must be an object with a 'shape' field")
    shape = obj["shape"]
    if shape == "rectangle":
        _require("lo" in obj and "hi" in obj, key, "rectangle needs lo and hi")
        return Rectangle(tuple(obj["lo"]), tuple(obj["hi"]))
    if shape == "disk":
        _require("center" in obj and "radius" in obj, key,
                 "disk needs center and radius")
        return Disk(tuple(obj["center"]), float(obj["radius"]))
    if shape == "full_plane":
        return FullPlane()
    raise ConfigError(f"config key '{key}': unknown shape {shape!r}")


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a raw config document and build the experiment config."""
    _require(isinstance(doc, dict), "<root>", "must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"config key '{sorted(unknown)[0]}': unknown key")
    _require(doc.get("schema") == CONFIG_SCHEMA_VERSION, "schema",
             f"must equal {CONFIG_SCHEMA_VERSION}")
    window = doc.get("window", "cube")
    _require(window in ("cube", "ball"), "window", "must be 'cube' or 'ball'")
    dim = doc.get("dimension", 3)
    _require(isinstance(dim, int) and dim >= 3, "dimension",
             "must be an integer >= 3")
    reg = doc.get("regime")
    _require(isinstance(reg, dict) and "kind" in reg, "regime",
             "must be an object with a 'kind' field")
    kind = reg["kind"]
    try:
        if kind in ("sparse", "thermodynamic"):
            _require("c" in reg, "regime", f"{kind} regime needs c")
            _require(float(reg["c"]) > 0, "regime", "c must be > 0")
            regime = RegimeSpec(kind, dim, c=float(reg["c"]))
        elif kind == "explicit":
            _require("delta" in reg, "regime", "explicit regime needs delta")
            regime = RegimeSpec(kind, dim, delta=float(reg["delta"]))
        else:
            raise ConfigError(f"config key 'regime': unknown kind {kind!r}")
    except ValueError as exc:
        raise ConfigError(f"config key 'regime': {exc}") from exc
    ts = doc.get("t_values")
    _require(isinstance(ts, list) and len(ts) > 0, "t_values",
             "must be a non-empty list")
    _require(all(isinstance(t, (int, float)) and t > 0 for t in ts),
             "t_values", "entries must be positive numbers")
    reps = doc.get("replications", 1000)
    _require(isinstance(reps, int) and reps >= 1, "replications",
             "must be an integer >= 1")
    regions = tuple(_parse_region(i, r)
                    for i, r in enumerate(doc.get("regions", [])))
    seed = doc.get("seed", 0)
    _require(isinstance(seed, int), "seed", "must be an integer")
    weight = doc.get("weight", "inverse_sq")
    _require(weight in ("inverse_sq", "unit"), "weight",
             "must be 'inverse_sq' or 'unit'")
    level = float(doc.get("level", 0.01))
    _require(0 < level < 1, "level", "must lie in (0, 1)")
    budget = float(doc.get("intensity_budget", 0.05))
    _require(budget >= 0, "intensity_budget", "must be >= 0")
    return ExperimentConfig(
        regime=regime,
        t_values=tuple(float(t) for t in ts),
        replications=reps,
        window_kind=window,
        regions=regions,
        seed=seed,
        weight=StressWeight(weight),
        record_stress=bool(doc.get("record_stress", True)),
        intensity_budget=budget,
        level=level,
    )


def _canonical_hash(doc: dict) -> str:
    return hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _load_config_file(path: str):
    """Returns (raw config dict, was_manifest)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "manifest" in doc:
        inner = doc.get("config")
        _require(isinstance(inner, dict), "config",
                 "manifest must embed the config object")
        stored = doc.get("config_sha256")
        actual = _canonical_hash(inner)
        _require(stored == actual, "config_sha256",
                 "manifest hash does not match its embedded config")
        return inner, True
    return doc, False


def _out_dir(args) -> str:
    out = args.out_dir or os.environ.get("RGGCROSS_OUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _atomic_write(path: str, write_fn) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=".tmp_", suffix=os.path.basename(path))
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _parse_d_range(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        values = list(range(int(lo), int(hi) + 1))
    else:
        values = [int(v) for v in spec.split(",")]
    if not values or any(d < 3 for d in values):
        raise ConfigError("--d values must be integers >= 3")
    return values


def cmd_constants(args) -> int:
    ds = _parse_d_range(args.d)
    samples = args.mc_samples
    writer = sys.stdout
    print("d,kappa_dm2,c_d_closed,c_d_mc,c_d_mc_se,"
          "c_d_prime_closed,c_d_prime_mc,c_d_prime_mc_se", file=writer)
    for d in ds:
        cd_mc, cd_se = c_d_montecarlo(d, samples, RngStream(args.seed, 2 * d))
        cdp_mc, cdp_se = c_d_prime_montecarlo(
            d, samples, RngStream(args.seed, 2 * d + 1))
        print(f"{d},{unit_ball_volume(d - 2)!r},{c_d_closed(d)!r},"
              f"{cd_mc!r},{cd_se!r},{c_d_prime_closed(d)!r},"
              f"{cdp_mc!r},{cdp_se!r}", file=writer)
    return 0


def _manifest(doc: dict, cfg: ExperimentConfig, args, outputs: dict) -> dict:
    import scipy
    return {
        "manifest": 1,
        "config": doc,
        "config_sha256": _canonical_hash(doc),
        "seed": cfg.seed,
        "threads": args.threads,
        "level": cfg.level,
        "tolerance_scale": getattr(args, "tolerance_scale", 1.0),
        "versions": {
            "rggcross": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "outputs": outputs,
    }


def _apply_overrides(doc: dict, cfg: ExperimentConfig, args):
    if args.seed is not None:
        doc = dict(doc, seed=args.seed)
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.level is not None:
        doc = dict(doc, level=args.level)
        cfg = dataclasses.replace(cfg, level=args.level)
    cfg = dataclasses.replace(cfg, threads=args.threads)
    return doc, cfg


def cmd_simulate(args) -> int:
    doc, _ = _load_config_file(args.config)
    cfg = parse_config(doc)
    doc, cfg = _apply_overrides(doc, cfg, args)
    out = _out_dir(args)
    records = []
    for idx, t in enumerate(cfg.t_values):
        records.extend(run_replications(cfg, t=t, t_index=idx))
    records_path = os.path.join(out, args.prefix + "records.csv")
    manifest_path = os.path.join(out, args.prefix + "manifest.json")
    _atomic_write(records_path, lambda p: records_to_csv(records, p))
    manifest = _manifest(doc, cfg, args,
                         {"records": os.path.basename(records_path)})
    _atomic_write(manifest_path, lambda p: _dump_json(manifest, p))
    print(f"wrote {records_path} ({len(records)} rows) and {manifest_path}")
    return 0


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _print_reports(reports) -> None:
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        if rep.degenerate:
            status = "DEGENERATE"
        extra = f" p={rep.p_value:.4g}" if rep.p_value is not None else ""
        print(f"[{status}] {rep.name}: statistic={rep.statistic:.6g}{extra}")


def cmd_poisson_test(args) -> int:
    if args.calibrate:
        result = calibration_suite(level=args.level or 0.01)
        print(json.dumps(result, indent=1))
        return 0 if result["ok"] else 1
    doc, _ = _load_config_file(args.config)
    cfg = parse_config(doc)
    if cfg.regime.kind != "sparse":
        print("error: poisson-test requires a sparse-regime config",
              file=sys.stderr)
        return 2
    doc, cfg = _apply_overrides(doc, cfg, args)
    if args.tolerance_scale != 1.0:
        cfg = dataclasses.replace(
            cfg, intensity_budget=cfg.intensity_budget * args.tolerance_scale)
    reports = poisson_battery(cfg)
    out = _out_dir(args)
    path = os.path.join(out, args.prefix + "poisson_reports.jsonl")
    _atomic_write(path, lambda p: reports_to_jsonl(reports, p))
    manifest = _manifest(doc, cfg, args, {"reports": os.path.basename(path)})
    _atomic_write(os.path.join(out, args.prefix + "poisson_manifest.json"),
                  lambda p: _dump_json(manifest, p))
    _print_reports(reports)
    return 0 if all(r.passed for r in reports) else 1


def cmd_clt_test(args) -> int:
    if args.calibrate:
        result = calibration_suite(level=args.level or 0.01)
        print(json.dumps(result, indent=1))
        return 0 if result["ok"] else 1
    doc, _ = _load_config_file(args.config)
    cfg = parse_config(doc)
    if cfg.regime.kind != "thermodynamic":
        print("error: clt-test requires a thermodynamic-regime config",
              file=sys.stderr)
        return 2
    doc, cfg = _apply_overrides(doc, cfg, args)
    sigma_ref = None
    if cfg.window_kind == "cube":
        # limiting covariance of (F1, F2); the ball window gets the
        # normality-only battery
        sigma_ref = cube_moments(cfg.t_values[0], cfg.regime.c,
                                 cfg.regime.dimension).sigma
    scale = args.tolerance_scale
    reports = clt_battery(cfg, sigma_ref=sigma_ref,
                          var_rtol=0.10 * scale, cov_rtol=0.15 * scale)
    out = _out_dir(args)
    path = os.path.join(out, args.prefix + "clt_reports.jsonl")
    _atomic_write(path, lambda p: reports_to_jsonl(reports, p))
    manifest = _manifest(doc, cfg, args, {"reports": os.path.basename(path)})
    _atomic_write(os.path.join(out, args.prefix + "clt_manifest.json"),
                  lambda p: _dump_json(manifest, p))
    _print_reports(reports)
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--threads", type=int, default=1,
                   help="worker processes for replications")
    p.add_argument("--out-dir", default=None,
                   help="output directory (default $RGGCROSS_OUT_DIR or .)")
    p.add_argument("--prefix", default="",
                   help="output file name prefix")
    p.add_argument("--level", type=float, default=None,
                   help="override the significance level")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply relative tolerance budgets")
    p.add_argument("--calibrate", action="store_true",
                   help="run the synthetic-null calibration suite instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rggcross",
        description="Crossing statistics of projected random geometric graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants",
                       help="closed-form and Monte Carlo limit constants (CSV)")
    p.add_argument("--d", required=True,
                   help="dimension or range, e.g. 3 or 3..5 or 3,4")
    p.add_argument("--mc-samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("simulate", help="run replications, write records CSV")
    p.add_argument("--config", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("poisson-test",
                       help="sparse-regime Poisson-convergence battery")
    p.add_argument("--config", required=False)
    _add_common(p)
    p.set_defaults(fn=cmd_poisson_test)

    p = sub.add_parser("clt-test",
                       help="thermodynamic-regime CLT battery")
    p.add_argument("--config", required=False)
    _add_common(p)
    p.set_defaults(fn=cmd_clt_test)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command in ("simulate", "poisson-test", "clt-test") \
                and not args.calibrate and not args.config:
            print("error: --config is required", file=sys.stderr)
            return 2
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
