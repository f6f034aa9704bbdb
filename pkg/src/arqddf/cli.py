"""Command-line front end: ``arqddf {curves,verify,simulate,lab}``.

Each run is described by a manifest (TOML, or JSON by extension) with a
``name``, a ``seed`` and one table per subcommand.  Outputs are CSV files
whose first line is a comment carrying the tool version and a hash of the
effective manifest, so reruns with the same inputs are byte-identical.

Exit status: 0 success, 1 verification failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import dmt_analytic as dm
from .curves import DomainError

log = logging.getLogger("arqddf")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PRESETS = {
    "fig-mar-ddf": {
        "name": "fig-mar-ddf",
        "curves": {"step": 0.01, "items": ["mar_upper", "ddf_mar_lower"]},
    },
    "fig-cvma-ddf": {
        "name": "fig-cvma-ddf",
        "curves": {"step": 0.01, "items": [{"id": "cvma_upper", "L": 2}, "cvma_lower_L2"]},
    },
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# manifest handling
# ---------------------------------------------------------------------------

def load_manifest(path: str | os.PathLike) -> dict:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        return tomllib.loads(text.decode("utf-8"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse manifest {path}: {exc}") from None


def manifest_hash(manifest: dict) -> str:
    canon = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def header_line(manifest: dict) -> str:
    return f"# arqddf {__version__} manifest_sha256={manifest_hash(manifest)}\n"


def _field(block: dict, key: str, path: str, kind, default=None, required: bool = False):
    if key not in block:
        if required:
            raise ConfigError(f"{path}.{key}: missing")
        return default
    val = block[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if kind is int and isinstance(val, float) and val.is_integer():
        val = int(val)
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _list(block: dict, key: str, path: str, kind, default=None, required: bool = False) -> list:
    val = block.get(key, default)
    if val is None:
        if required:
            raise ConfigError(f"{path}.{key}: missing")
        return []
    if not isinstance(val, list):
        val = [val]
    out = []
    for i, v in enumerate(val):
        try:
            out.append(_field({key: v}, key, path, kind))
        except ConfigError:
            raise ConfigError(f"{path}.{key}[{i}]: expected {kind.__name__}") from None
    return out


def _block(manifest: dict, name: str) -> dict:
    block = manifest.get(name)
    if not isinstance(block, dict):
        raise ConfigError(f"{name}: missing table")
    return block


def _positive(val, path: str, minimum=1):
    if val < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {val}")
    return val


def _seed(manifest: dict) -> int:
    seed = manifest.get("seed")
    if seed is None:
        raise ConfigError("seed: missing (pass --seed or set it in the manifest)")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed: expected an unsigned 64-bit integer")
    return seed


def _name(manifest: dict) -> str:
    name = manifest.get("name")
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9._-]+", name):
        raise ConfigError("name: expected a filesystem-safe string ([A-Za-z0-9._-]+)")
    return name


def _write(out_dir: Path, filename: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / filename
    path.write_text(text, encoding="utf-8", newline="")
    return path


def _fmt(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{float(x):.12g}"


def _csv(header_comment: str, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(header_comment)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def curve_rows(items: list, step: float) -> list[list[str]]:
    rows = []
    for i, item in enumerate(items):
        if isinstance(item, str):
            cid, L = item, 1
        elif isinstance(item, dict):
            cid = _field(item, "id", f"curves.items[{i}]", str, required=True)
            L = _field(item, "L", f"curves.items[{i}]", int, 1)
        else:
            raise ConfigError(f"curves.items[{i}]: expected a curve id or a table with id and L")
        try:
            curve = dm.curve_by_id(cid, L)
        except KeyError as exc:
            raise ConfigError(f"curves.items[{i}]: {exc.args[0]}") from None
        except DomainError as exc:
            raise ConfigError(f"curves.items[{i}]: {exc}") from None
        xs = {Fraction(x).limit_denominator(10**9) for x in curve.grid(step)}
        xs |= {x for x, _ in curve.breakpoints() if curve.contains(x)}
        for x in sorted(xs):
            rows.append([_fmt(x), _fmt(curve(x)), cid, str(L)])
    return rows


def cmd_curves(manifest: dict, out_dir: Path) -> int:
    name = _name(manifest)
    block = _block(manifest, "curves")
    items = block.get("items")
    if not isinstance(items, list) or not items:
        raise ConfigError("curves.items: expected a nonempty list of curve ids")
    step = _field(block, "step", "curves", float, 0.01)
    if not step > 0:
        raise ConfigError("curves.step: must be positive")
    rows = curve_rows(items, step)
    path = _write(out_dir, f"{name}_curves.csv",
                  _csv(header_line(manifest), ["r", "d", "curve_id", "L"], rows))
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(manifest: dict, out_dir: Path) -> int:
    from .outage_optimizer.verify import verify_closed_forms

    name = _name(manifest)
    block = manifest.get("verify") or {}
    n_points = _positive(_field(block, "n_points", "verify", int, 50), "verify.n_points")
    curves = _list(block, "curves", "verify", str) or None
    r_grid = _list(block, "r_grid", "verify", float) or None
    try:
        report = verify_closed_forms(r_grid=r_grid, n_points=n_points, curves=curves)
    except KeyError as exc:
        raise ConfigError(f"verify.curves: {exc.args[0]}") from None
    text = report.to_csv()
    path = _write(out_dir, f"{name}_verify.csv", header_line(manifest) + text)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: {len(report.rows)} comparisons, max |closed - numeric| = "
          f"{report.max_error:.3e}; wrote {path}")
    if not report.passed:
        for cid, r, closed, numeric, err in report.failures():
            print(f"  {cid} r={r:.6g} closed={closed:.10g} numeric={numeric:.10g} err={err:.3e}",
                  file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def analytic_diversity(scenario: str, L: int, r1: float) -> float:
    """Closed-form diversity the simulated scenario should approach (nan if none)."""
    try:
        if scenario == "relay":
            return float(dm.ddf_relay_dmt(r1) if L == 1 else dm.relay_arq_dmt(r1, L))
        if scenario == "mar":
            return float(dm.ddf_mar_lower(r1) if L == 1 else dm.mar_arq_dmt(r1, L))
        if scenario == "cvma" and L >= 2 and L % 2 == 0:
            return float(dm.cvma_ddf_lower_general(r1, L))
    except DomainError:
        pass
    return float("nan")


def _simulation_config(manifest: dict):
    from .mc_simulator import Campaign, ProtocolConfig

    b = _block(manifest, "simulate")
    p = "simulate"
    scenario = _field(b, "scenario", p, str, required=True)
    if scenario not in ("relay", "mar", "cvma"):
        raise ConfigError(f"{p}.scenario: expected relay, mar or cvma, got {scenario!r}")
    L = _positive(_field(b, "L", p, int, 2), f"{p}.L")
    r1 = _field(b, "r1", p, float, required=True)
    T = _positive(_field(b, "T", p, int, 100), f"{p}.T")
    c = _field(b, "c", p, float, 1.0)
    snrs = _list(b, "snr_db_list", p, float, default=[20.0, 24.0, 28.0, 32.0, 36.0, 40.0])
    if not snrs:
        raise ConfigError(f"{p}.snr_db_list: empty")
    n_trials = _positive(_field(b, "n_trials", p, int, required=True), f"{p}.n_trials")
    min_events = _positive(_field(b, "min_events", p, int, 50), f"{p}.min_events")
    try:
        camp = Campaign(scenario, ProtocolConfig(L, r1, T), tuple(snrs), c, _seed(manifest))
    except ValueError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return camp, n_trials, min_events


def simulation_tables(camp, estimates, min_events: int = 50):
    from .mc_simulator import InsufficientEventsError, estimate_slope

    L = camp.protocol.L
    cols = ["snr_db", "pe", "pe_lo", "pe_hi", "eta"] + [f"p{l}" for l in range(1, L)] + ["n_trials", "errors"]
    rows = []
    for e in estimates:
        lo, hi = e.pe_ci
        rows.append([_fmt(e.snr_db), _fmt(e.pe), _fmt(lo), _fmt(hi), _fmt(e.eta)]
                    + [_fmt(x) for x in e.p] + [str(e.counts.n_trials), str(e.counts.errors)])
    try:
        slope = estimate_slope([(e.snr_db, e.counts.errors, e.counts.n_trials) for e in estimates],
                               min_events)
        s, ci = slope.slope, slope.ci95
    except InsufficientEventsError as exc:
        log.warning("no slope for %s: %s", camp.scenario, exc)
        s = ci = float("nan")
    summary = [[camp.scenario, str(L), _fmt(camp.protocol.r1), _fmt(s), _fmt(ci),
                _fmt(analytic_diversity(camp.scenario, L, camp.protocol.r1))]]
    return (cols, rows), (["scenario", "L", "r1", "slope", "ci95", "analytic_d"], summary)


def cmd_simulate(manifest: dict, out_dir: Path, threads: int) -> int:
    from .mc_simulator import run_campaign

    name = _name(manifest)
    camp, n_trials, min_events = _simulation_config(manifest)
    est = run_campaign(camp, n_trials, workers=threads)
    (cols, rows), (scols, srows) = simulation_tables(camp, est, min_events)
    head = header_line(manifest)
    p1 = _write(out_dir, f"{name}_simulate.csv", _csv(head, cols, rows))
    p2 = _write(out_dir, f"{name}_slope.csv", _csv(head, scols, srows))
    print(f"wrote {p1} and {p2}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# lab
# ---------------------------------------------------------------------------

def cmd_lab(manifest: dict, out_dir: Path) -> int:
    from .codebook_lab import LabConfig, run_arq_lab

    name = _name(manifest)
    seed = _seed(manifest)
    b = _block(manifest, "lab")
    p = "lab"
    scenario = _field(b, "scenario", p, str, "relay")
    Ts = _list(b, "T", p, int, default=[64, 128, 256])
    Ms = _list(b, "M", p, int, default=[16, 64, 256])
    snrs = _list(b, "snr_db", p, float, default=[30.0])
    L = _positive(_field(b, "L", p, int, 2), f"{p}.L")
    delta = _field(b, "delta", p, float, 0.2)
    n_trials = _positive(_field(b, "n_trials", p, int, required=True), f"{p}.n_trials")
    configs = []
    for T in Ts:
        for M in Ms:
            for snr in snrs:
                try:
                    configs.append(LabConfig(scenario, T, M, L, delta, snr))
                except ValueError as exc:
                    raise ConfigError(f"{p} (T={T}, M={M}, snr_db={snr}): {exc}") from None
    cols = ["scenario", "T", "M", "delta", "snr_db"] + [f"accept{l}" for l in range(1, L + 1)] \
        + ["undetected", "final_err", "nack_ml_ratio", "n_trials"]
    rows = []
    for cfg in configs:
        res = run_arq_lab(cfg, n_trials, seed)
        if res.sphere_violations:
            raise RuntimeError(f"{res.sphere_violations} accepts failed the uniqueness recheck")
        rows.append([cfg.scenario, str(cfg.T), str(cfg.M), _fmt(cfg.delta), _fmt(cfg.snr_db)]
                    + [_fmt(a) for a in res.accept_rates]
                    + [_fmt(res.undetected_rate), _fmt(res.final_error_rate),
                       _fmt(res.nack_ml_ratio), str(res.n_trials)])
    path = _write(out_dir, f"{name}_lab.csv", _csv(header_line(manifest), cols, rows))
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arqddf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"arqddf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, helptext in [("curves", "export closed-form tradeoff curves"),
                          ("verify", "check closed forms against the outage optimizer"),
                          ("simulate", "Monte Carlo outage campaign"),
                          ("lab", "codeword-level bounded-distance decoding experiment")]:
        sp = sub.add_parser(cmd, help=helptext)
        sp.add_argument("--manifest", help="TOML or JSON manifest")
        sp.add_argument("--out", help="output directory (default: manifest output_dir or .)")
        sp.add_argument("--seed", type=int, help="override the manifest seed")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker processes for Monte Carlo trials")
        sp.add_argument("--preset", choices=sorted(PRESETS), help="built-in manifest")
        sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_manifest(args) -> dict:
    if args.manifest and args.preset:
        raise ConfigError("pass either --manifest or --preset, not both")
    if args.preset:
        manifest = json.loads(json.dumps(PRESETS[args.preset]))
    elif args.manifest:
        manifest = load_manifest(args.manifest)
    elif args.command == "verify":
        manifest = {"name": "verify", "verify": {}}
    else:
        raise ConfigError("a manifest is required (--manifest or --preset)")
    if not isinstance(manifest, dict):
        raise ConfigError("manifest must be a table")
    if args.seed is not None:
        manifest["seed"] = args.seed
    return manifest


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = resolve_manifest(args)
        out_dir = Path(args.out or manifest.get("output_dir") or ".")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "curves":
            return cmd_curves(manifest, out_dir)
        if args.command == "verify":
            return cmd_verify(manifest, out_dir)
        if args.command == "simulate":
            return cmd_simulate(manifest, out_dir, args.threads)
        return cmd_lab(manifest, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
