"""Command-line front end.

Subcommands ``price``, ``calibrate``, ``mc-validate`` and ``arb-scan``.
Settings are resolved as defaults < config file (TOML or JSON) < flags. The
config file comes from ``--config`` or the ``HJM_SWAPTION_CONFIG``
environment variable.

Exit codes: 0 success, 1 flags raised or validation failed, 2 malformed
input, 3 expiry/tenor off the time grid.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import calibration as cal
from .curves import DEFAULT_DAY_COUNT_FACTOR, SwaptionSpec, unit_spread
from .io import (
    BP,
    InputError,
    read_curve_csv,
    read_quotes_csv,
    read_spread_csv,
    read_surface_csv,
    report_to_json,
    write_fit_csv,
    write_surface_csv,
)
from .mc import DRIFT_SCHEMES, RNG_NAME, price_swaption_mc
from .pricer import CONVENTIONS, atm_price
from .surface import GridError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIG_ENV = "HJM_SWAPTION_CONFIG"

EXIT_OK, EXIT_FLAGS, EXIT_INPUT, EXIT_GRID = 0, 1, 2, 3
ZERO_PRICE_TOL = 1e-10


@dataclass(frozen=True)
class RunConfig:
    dt: float = 0.5
    convention: str = "single"
    day_count_factor: float = DEFAULT_DAY_COUNT_FACTOR
    frequency: int = 2
    n_paths: int = 10_000
    seed: int = 0
    antithetic: bool = False
    drift_scheme: str = "exact"
    workers: int = 1
    k_sigma: float = 3.0
    fit_tolerance: float = 1e-8
    target_tenors: tuple[float, ...] | None = cal.DEFAULT_TENORS
    curve: str | None = None
    curve_mode: str = "df"
    spread: str | None = None
    quotes: str | None = None
    surface: str | None = None
    out_dir: str = "."
    expiries: tuple[float, ...] = ()
    tenors: tuple[float, ...] = ()
    exclude: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError("dt must be positive")
        if not self.day_count_factor > 0:
            raise InputError("day_count_factor must be positive")
        if self.convention not in CONVENTIONS:
            raise InputError(f"convention must be one of {CONVENTIONS}")
        if self.drift_scheme not in DRIFT_SCHEMES:
            raise InputError(f"drift_scheme must be one of {DRIFT_SCHEMES}")
        if self.n_paths < 2:
            raise InputError("n_paths must be at least 2")

    def calibration_config(self) -> cal.CalibrationConfig:
        return cal.CalibrationConfig(
            dt=self.dt,
            frequency=self.frequency,
            day_count_factor=self.day_count_factor,
            target_tenors=self.target_tenors,
            fit_tolerance=self.fit_tolerance,
        )

    def spec(self, expiry: float, tenor: float) -> SwaptionSpec:
        return SwaptionSpec(expiry, tenor, self.frequency, None, self.day_count_factor)


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw)
        else:
            data = tomllib.loads(raw.decode())
    except (ValueError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: cannot parse config: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def _coerce(values: dict) -> dict:
    out = dict(values)
    for key in ("expiries", "tenors", "exclude"):
        if key in out:
            out[key] = _floats(out[key])
    if "target_tenors" in out and out["target_tenors"] is not None:
        out["target_tenors"] = _floats(out["target_tenors"])
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    cfg_path = args.config or os.environ.get(CONFIG_ENV)
    if cfg_path:
        values.update(load_config_file(cfg_path))
    flag_map = {
        "curve": args.curve,
        "spread": args.spread,
        "quotes": args.quotes,
        "surface": args.surface,
        "out_dir": args.out_dir,
        "seed": args.seed,
        "n_paths": args.paths,
        "convention": args.convention,
        "dt": args.dt,
        "day_count_factor": args.day_count_factor,
        "frequency": args.frequency,
        "expiries": args.expiries,
        "tenors": args.tenors,
        "curve_mode": args.curve_mode,
        "k_sigma": args.k,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flag_map.items() if v is not None})
    if args.antithetic:
        values["antithetic"] = True
    if args.no_drift:
        values["drift_scheme"] = "none"
    if args.exclude:
        values["exclude"] = tuple(_parse_exclude(e) for e in args.exclude)
    if args.target_tenors is not None:
        values["target_tenors"] = None if args.target_tenors == "quoted" else args.target_tenors
    try:
        return RunConfig(**_coerce(values))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad configuration: {exc}") from exc


def _parse_exclude(text: str) -> float:
    key, _, value = text.partition("=")
    if key.strip() != "expiry" or not value:
        raise InputError(f"--exclude expects expiry=<years>, got {text!r}")
    try:
        return float(value)
    except ValueError as exc:
        raise InputError(f"--exclude expects expiry=<years>, got {text!r}") from exc


def _require(cfg: RunConfig, *names: str) -> None:
    for n in names:
        if getattr(cfg, n) is None:
            raise InputError(f"missing required input --{n.replace('_', '-')}")


def _spread(cfg: RunConfig):
    if cfg.spread:
        return read_spread_csv(cfg.spread)
    return unit_spread() if cfg.convention == "dual" else None


def _quotes(cfg: RunConfig) -> list[cal.SwaptionQuote]:
    quotes = read_quotes_csv(cfg.quotes)
    excl = set(cfg.exclude)
    return [replace(q, excluded=True) if q.expiry in excl else q for q in quotes]


def _grid_pairs(cfg: RunConfig) -> list[tuple[float, float]]:
    if cfg.expiries and cfg.tenors:
        return [(e, m) for e in cfg.expiries for m in cfg.tenors]
    if cfg.quotes:
        return [q.key for q in _quotes(cfg) if not q.excluded]
    raise InputError("no swaptions requested: give --expiries and --tenors, or --quotes")


def _check_grid(cfg: RunConfig, pairs, surface) -> None:
    """Reject off-grid or out-of-range swaptions before any output is written."""
    for e, m in pairs:
        for t in [e, *cfg.spec(e, m).payment_times]:
            surface.index(float(t), "expiry/payment time")


def _dump(obj) -> str:
    return json.dumps(obj, allow_nan=False)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_price(cfg: RunConfig) -> int:
    _require(cfg, "curve", "surface")
    curve = read_curve_csv(cfg.curve, cfg.curve_mode)
    surface = read_surface_csv(cfg.surface)
    spread = _spread(cfg)
    pairs = _grid_pairs(cfg)
    _check_grid(cfg, pairs, surface)
    for e, m in pairs:
        res = atm_price(surface, curve, cfg.spec(e, m), spread, cfg.convention)
        rec = res.to_record()
        rec["normal_iv"] = res.normal_iv / BP
        print(_dump(rec))
    return EXIT_OK


def _calibrate(cfg: RunConfig):
    _require(cfg, "curve", "quotes")
    curve = read_curve_csv(cfg.curve, cfg.curve_mode)
    spread = _spread(cfg)
    quotes = _quotes(cfg)
    conf = cfg.calibration_config()
    report = cal.bootstrap_surface(quotes, curve, spread, cfg.convention, conf)
    report.flags = cal.suggest_exclusions(report, quotes, curve, spread, cfg.convention, conf)
    return report


def cmd_calibrate(cfg: RunConfig) -> int:
    report = _calibrate(cfg)
    out = _out_dir(cfg)
    write_surface_csv(out / "surface.csv", report.surface)
    (out / "report.json").write_text(_dump(report_to_json(report, "surface.csv")) + "\n")
    write_fit_csv(out / "fit.csv", report)
    for f in report.flags:
        print(
            f"flag: expiry={f.expiry:g}y tenor={f.tenor:g}y kind={f.kind} "
            f"suggested_exclusions={list(f.suggested_exclusions)}",
            file=sys.stderr,
        )
    if report.max_relative_residual > cfg.fit_tolerance:
        print(f"warning: max relative residual {report.max_relative_residual:.3e}", file=sys.stderr)
    return EXIT_FLAGS if report.flags else EXIT_OK


def cmd_mc_validate(cfg: RunConfig) -> int:
    _require(cfg, "curve", "surface")
    curve = read_curve_csv(cfg.curve, cfg.curve_mode)
    surface = read_surface_csv(cfg.surface)
    spread = _spread(cfg)
    ok = True
    lines = []
    pairs = _grid_pairs(cfg)
    _check_grid(cfg, pairs, surface)
    for e, m in pairs:
        spec = cfg.spec(e, m)
        cf = atm_price(surface, curve, spec, spread, cfg.convention)
        mc = price_swaption_mc(
            surface, curve, spec, spread, cfg.convention, cfg.n_paths, cfg.seed,
            cfg.antithetic, cfg.drift_scheme, cfg.workers,
        )
        # price-level floor so a zero-vol run is not failed by roundoff
        floor = ZERO_PRICE_TOL / (mc.annuity * math.sqrt(e / (2.0 * math.pi)))
        diff = abs(mc.normal_iv - cf.normal_iv)
        ok &= diff <= cfg.k_sigma * mc.iv_std_error + floor
        rec = {
            "expiry": e,
            "tenor": m,
            "mc_iv": mc.normal_iv / BP,
            "cf_iv": cf.normal_iv / BP,
            "std_err": mc.iv_std_error / BP,
            "n_paths": cfg.n_paths,
            "seed": cfg.seed,
            "antithetic": cfg.antithetic,
            "drift_scheme": cfg.drift_scheme,
            "rng": RNG_NAME,
        }
        lines.append(_dump(rec))
        print(lines[-1])
    with (_out_dir(cfg) / "validation.jsonl").open("a") as fh:
        fh.write("".join(line + "\n" for line in lines))
    return EXIT_OK if ok else EXIT_FLAGS


def cmd_arb_scan(cfg: RunConfig) -> int:
    report = _calibrate(cfg)
    payload = [f.to_record() for f in report.flags]
    text = _dump(payload)
    (_out_dir(cfg) / "flags.json").write_text(text + "\n")
    print(text)
    return EXIT_FLAGS if report.flags else EXIT_OK


COMMANDS = {
    "price": cmd_price,
    "calibrate": cmd_calibrate,
    "mc-validate": cmd_mc_validate,
    "arb-scan": cmd_arb_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"TOML or JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--curve", help="discount curve CSV (maturity,value)")
    common.add_argument("--curve-mode", choices=["rate", "df"], help="curve values if no sidecar")
    common.add_argument("--spread", help="Libor-OIS spread CSV (time,spread_factor)")
    common.add_argument("--quotes", help="quote CSV (expiry,tenor,normal_iv_bp)")
    common.add_argument("--surface", help="surface CSV (i,j,sigma)")
    common.add_argument("--out-dir", help="directory for output files")
    common.add_argument("--seed", type=int)
    common.add_argument("--paths", type=int, help="Monte-Carlo path count")
    common.add_argument("--convention", choices=CONVENTIONS)
    common.add_argument("--dt", type=float)
    common.add_argument("--day-count-factor", type=float)
    common.add_argument("--frequency", type=int)
    common.add_argument("--expiries", type=_floats, help="comma-separated years")
    common.add_argument("--tenors", type=_floats, help="comma-separated years")
    common.add_argument(
        "--target-tenors",
        type=lambda s: s if s == "quoted" else _floats(s),
        help="tenor grid to fill per expiry, or 'quoted'",
    )
    common.add_argument("--exclude", action="append", metavar="expiry=<y>")
    common.add_argument("--antithetic", action="store_true")
    common.add_argument("--no-drift", action="store_true", help="debug: zero HJM drift")
    common.add_argument("--k", type=float, help="mc-validate tolerance in standard errors")
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="hjm-swaption", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except GridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
