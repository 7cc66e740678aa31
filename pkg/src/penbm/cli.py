"""Command-line interface: ``penbm {sample,partition,verify,list-experiments}``.

Exit codes: 0 success (all checks pass), 1 a verification check failed,
2 usage or configuration error.  ``--workers`` (default ``$PENBM_WORKERS`` or 1)
changes wall-clock time only; every output is byte-identical for a given
configuration and seed.  Report rows with ``"gating": false`` (theorem checks at
horizons below the largest) are informational and do not affect the exit code;
stderr marks them with lower-case ``pass``/``fail``.

``verify`` accepts an INI config with a single ``[verify]`` section::

    [verify]
    suite = identities          # or theorem-1.1, ..., all
    region = L2                 # optional filter for theorem suites
    experiments = pitman, imhof # optional explicit ids (overrides suite)
    seed = 7
    scale = 1.0                 # multiplies all sample sizes
    out = report.json

or, for a custom scaling-limit run::

    [verify]
    theorem = 1.1
    nu = -1
    h = 1
    t_ladder = 25, 50, 100, 200
    n = 10000
    m = 2048
    level = 0.01
    proposal = auto
    seed = 7

Unknown keys are rejected.  Command-line flags override config values.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import __version__
from .experiments import REGISTRY, run_experiments, select
from .gibbs import TheoremSpec, designated_checks, run_theorem_experiment
from .partition import OriginError, partition_table
from .paths import DEFAULT_GRID, write_csv
from .samplers import FragmentKind, generate_batch, resolve_params

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CONFIG_KEYS = {
    "suite": str, "region": str, "experiments": str, "seed": int, "scale": float, "out": str,
    "workers": int, "theorem": str, "nu": float, "h": float, "t_ladder": str, "n": int,
    "m": int, "level": float, "proposal": str,
}


class UsageError(Exception):
    pass


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".penbm-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _workers(args):
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        return args.workers
    return None


# ---------------------------------------------------------------------------
# sample

SAMPLE_FLAGS = ("t", "h", "nu", "a", "b", "T", "x", "y", "eps", "dt_sim")


def cmd_sample(args) -> int:
    kind = FragmentKind(args.kind)
    params = {k: getattr(args, k) for k in SAMPLE_FLAGS if getattr(args, k) is not None}
    if args.method is not None:
        params["method"] = args.method
    if kind is FragmentKind.BM_DRIFT and "h" not in params:
        raise UsageError("bm-drift requires --h")
    try:
        full = resolve_params(kind, params)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.n < 1 or args.m < 2:
        raise UsageError("--n must be >= 1 and --m >= 2")
    path, weights = generate_batch(kind, args.n, args.m, args.seed, _workers(args), **params)
    manifest = {"kind": kind.value, "params": full, "seed": args.seed, "m": args.m,
                "n": args.n, "version": __version__}
    if weights is not None:
        manifest["weights"] = [float(format(w, ".17g")) for w in weights]
    buf = io.StringIO()
    write_csv(path, buf)
    _atomic_write(args.out, buf.getvalue())
    _atomic_write(args.out + ".json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# partition

def cmd_partition(args) -> int:
    try:
        rows = partition_table(args.nu, args.h, args.t)
    except OriginError as e:
        raise UsageError(str(e)) from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "log_exact", "log_asymptotic", "ratio", "region"])
    for r in rows:
        w.writerow([format(r["t"], ".17g"), format(r["log_exact"], ".17g"),
                    format(r["log_asymptotic"], ".17g"), format(r["ratio"], ".17g"), r["region"]])
    if args.out:
        _atomic_write(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def read_config(path: str) -> dict:
    """Parse the ``[verify]`` section of an INI file, rejecting unknown keys."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    extra = [s for s in cp.sections() if s != "verify"]
    if extra or not cp.has_section("verify"):
        raise UsageError("config must contain exactly one [verify] section")
    out = {}
    for key, raw in cp.items("verify"):
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](raw)
        except ValueError:
            raise UsageError(f"bad value for {key}: {raw!r}") from None
    return out


def _theorem_spec(cfg: dict) -> TheoremSpec:
    if "nu" not in cfg or "h" not in cfg:
        raise UsageError("a theorem config needs nu and h")
    kw = {}
    if "t_ladder" in cfg:
        try:
            ladder = tuple(float(x) for x in cfg["t_ladder"].split(","))
        except ValueError:
            raise UsageError("t_ladder must be a comma-separated list of numbers") from None
        if not ladder or any(not (t > 0 and math.isfinite(t)) for t in ladder):
            raise UsageError("t_ladder values must be positive")
        kw["t_ladder"] = ladder
    for key in ("n", "m", "level", "proposal"):
        if key in cfg:
            kw[key] = cfg[key]
    if kw.get("n", 100) < 100 or kw.get("m", 2) < 2 or not 0 < kw.get("level", 0.01) < 1:
        raise UsageError("need n >= 100, m >= 2 and 0 < level < 1")
    if kw.get("proposal", "auto") not in ("auto", "drift", "extrema"):
        raise UsageError("proposal must be auto, drift or extrema")
    spec = TheoremSpec(cfg["theorem"], cfg["nu"], cfg["h"], **kw)
    try:
        spec.region
        designated_checks(spec.theorem, spec.nu, spec.h)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return spec


def cmd_verify(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    for key in ("suite", "region", "seed", "scale", "out"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    if args.experiment:
        cfg["experiments"] = ",".join(args.experiment)
    seed = int(cfg.get("seed", 0))
    workers = _workers(args) or cfg.get("workers")
    scale = float(cfg.get("scale", 1.0))
    if not scale > 0:
        raise UsageError("scale must be positive")
    if "theorem" in cfg:
        spec = _theorem_spec(cfg)
        reports = run_theorem_experiment(spec, seed=seed, workers=workers)
    else:
        if "suite" not in cfg and "experiments" not in cfg:
            raise UsageError("give --suite, --experiment or a config with suite/experiments/theorem")
        ids = [s.strip() for s in cfg.get("experiments", "").split(",") if s.strip()]
        try:
            exps = select(cfg.get("suite"), cfg.get("region"), ids or None)
        except (KeyError, ValueError) as e:
            raise UsageError(str(e.args[0]) if e.args else str(e)) from None
        reports = run_experiments(exps, seed, scale, workers)
    passed = all(r.passed for r in reports if r.gating)
    timing = {"reports": [{"experiment": r.experiment, "t": r.t, "runtime_ms": r.runtime_ms}
                          for r in reports]}
    dicts = []
    for r in reports:
        d = r.to_dict()
        d["runtime_ms"] = None  # wall-clock times live in the timing sidecar
        dicts.append(d)
    doc = {"version": __version__, "config": {k: cfg[k] for k in sorted(cfg) if k not in ("out", "workers")}, "seed": seed,
           "pass": passed, "n_reports": len(dicts),
           "n_failed": sum(d["gating"] and not d["pass"] for d in dicts),
           "reports": dicts}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    out = cfg.get("out")
    if out:
        _atomic_write(out, text)
        _atomic_write(out + ".timing.json", json.dumps(timing, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    for d in dicts:
        verdict = ("PASS" if d["pass"] else "FAIL") if d["gating"] else ("pass" if d["pass"] else "fail")
        print(f"{verdict}  {d['experiment']}"
              + (f"  t={d['t']:g}" if d["t"] is not None else ""), file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_list(args) -> int:
    for e in REGISTRY.values():
        print(f"{e.id}\t{e.suite}\t{e.description}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="penbm", description=__doc__.split("\n\n")[0], allow_abbrev=False)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", allow_abbrev=False, help="dump sampled paths as CSV plus a JSON manifest")
    s.add_argument("--kind", required=True, choices=[k.value for k in FragmentKind])
    s.add_argument("--method", choices=["from-meander", "denisov", "co-ascent-reweight"])
    for k in SAMPLE_FLAGS:
        s.add_argument("--" + k.replace("_", "-"), dest=k, type=float)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--m", type=int, default=DEFAULT_GRID)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sample)

    p = sub.add_parser("partition", allow_abbrev=False, help="exact and leading-order partition function table")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--t", type=float, nargs="+", default=[20.0, 40.0, 60.0])
    p.add_argument("--out")
    p.set_defaults(func=cmd_partition)

    v = sub.add_parser("verify", allow_abbrev=False, help="run registered verification experiments")
    v.add_argument("config", nargs="?", help="INI config file with a [verify] section")
    v.add_argument("--suite")
    v.add_argument("--region")
    v.add_argument("--experiment", action="append", help="experiment id (repeatable)")
    v.add_argument("--seed", type=int)
    v.add_argument("--scale", type=float)
    v.add_argument("--out")
    v.add_argument("--workers", type=int)
    v.set_defaults(func=cmd_verify)

    ls = sub.add_parser("list-experiments", allow_abbrev=False, help="list registered experiments")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"penbm: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
