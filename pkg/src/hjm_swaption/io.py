"""CSV/JSON readers and writers for curves, quotes, surfaces and reports.

Metadata that does not fit a flat CSV lives in a JSON sidecar next to it:
``curve.csv`` -> ``curve.meta.json``. Volatilities in quote and plot files
are in basis points per sqrt(year); everything in memory is absolute.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .calibration import CalibrationReport, SwaptionQuote
from .curves import CurveError, DiscountCurve, SpreadCurve, build_discount_curve, build_spread_curve
from .surface import ForwardVolSurface

BP = 1e-4


class InputError(ValueError):
    """Malformed or unreadable input file."""


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def read_sidecar(path: str | Path) -> dict:
    meta = sidecar_path(path)
    if not meta.exists():
        return {}
    try:
        data = json.loads(meta.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{meta}: cannot read metadata: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{meta}: metadata must be a JSON object")
    return data


def _read_rows(path: str | Path, required: Sequence[str]) -> list[dict]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            header = [h.strip() for h in (reader.fieldnames or [])]
            missing = [c for c in required if c not in header]
            if missing:
                raise InputError(f"{path}: missing column(s) {missing}; header is {header}")
            rows = [{k.strip(): (v or "").strip() for k, v in row.items() if k} for row in reader]
    except OSError as exc:
        raise InputError(f"{path}: cannot read file: {exc.strerror or exc}") from exc
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def _float(row: dict, key: str, path) -> float:
    try:
        value = float(row[key])
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: bad value for {key!r} in row {row}") from exc
    if not math.isfinite(value):
        raise InputError(f"{path}: non-finite {key!r} in row {row}")
    return value


def read_curve_csv(path: str | Path, mode: str | None = None) -> DiscountCurve:
    """Discount curve from ``maturity,value``; ``mode`` comes from the sidecar,
    then the argument, then defaults to ``"df"``."""
    rows = _read_rows(path, ["maturity", "value"])
    meta = read_sidecar(path)
    mode = meta.get("mode", mode or "df")
    compounding = meta.get("compounding", "continuous")
    if compounding != "continuous":
        raise InputError(f"{path}: only continuous compounding is supported, got {compounding!r}")
    pillars = [(_float(r, "maturity", path), _float(r, "value", path)) for r in rows]
    try:
        return build_discount_curve(pillars, mode=mode)
    except CurveError as exc:
        raise InputError(f"{path}: {exc}") from exc


def read_spread_csv(path: str | Path) -> SpreadCurve:
    rows = _read_rows(path, ["time", "spread_factor"])
    pillars = [(_float(r, "time", path), _float(r, "spread_factor", path)) for r in rows]
    try:
        return build_spread_curve(pillars)
    except CurveError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _truthy(text: str) -> bool:
    return text.strip().lower() in {"1", "true", "yes", "y"}


def read_quotes_csv(path: str | Path) -> list[SwaptionQuote]:
    """Quotes from ``expiry,tenor,normal_iv_bp`` (optional ``weight``, ``excluded``)."""
    rows = _read_rows(path, ["expiry", "tenor", "normal_iv_bp"])
    out = []
    for r in rows:
        try:
            out.append(
                SwaptionQuote(
                    expiry=_float(r, "expiry", path),
                    tenor=_float(r, "tenor", path),
                    normal_iv=_float(r, "normal_iv_bp", path) * BP,
                    weight=_float(r, "weight", path) if r.get("weight") else 1.0,
                    excluded=_truthy(r.get("excluded", "")),
                )
            )
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"{path}: {exc}") from exc
    return out


def write_quotes_csv(path: str | Path, quotes: Iterable[SwaptionQuote]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["expiry", "tenor", "normal_iv_bp"])
        for q in quotes:
            w.writerow([repr(q.expiry), repr(q.tenor), repr(q.normal_iv / BP)])


def write_curve_csv(path: str | Path, curve: DiscountCurve) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["maturity", "value"])
        for t, df in curve.pillars[1:]:
            w.writerow([repr(t), repr(df)])
    sidecar_path(path).write_text(json.dumps({"mode": "df", "compounding": "continuous"}) + "\n")


def write_spread_csv(path: str | Path, spread: SpreadCurve) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["time", "spread_factor"])
        for t, l in zip(spread.times[1:], spread.log_factors[1:]):
            w.writerow([repr(float(t)), repr(math.exp(l))])


def write_surface_csv(path: str | Path, surface: ForwardVolSurface) -> None:
    """Sparse ``i,j,sigma`` triples plus a ``{dt, max_index}`` sidecar."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["i", "j", "sigma"])
        ii, jj = np.nonzero(surface.vols)
        for i, j in zip(ii, jj):
            w.writerow([int(i), int(j), repr(float(surface.vols[i, j]))])
    meta = {"dt": surface.dt, "max_index": surface.max_index}
    sidecar_path(path).write_text(json.dumps(meta) + "\n")


def read_surface_csv(path: str | Path, dt: float | None = None, max_index: int | None = None):
    path = Path(path)
    meta = read_sidecar(path)
    dt = meta.get("dt", dt)
    max_index = meta.get("max_index", max_index)
    if dt is None or max_index is None:
        raise InputError(f"{path}: surface needs dt and max_index (sidecar {sidecar_path(path)})")
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if [h.strip() for h in reader.fieldnames or []][:3] != ["i", "j", "sigma"]:
                raise InputError(f"{path}: header must be i,j,sigma")
            rows = list(reader)
    except OSError as exc:
        raise InputError(f"{path}: cannot read file: {exc.strerror or exc}") from exc
    vols = np.zeros((int(max_index), int(max_index)))
    for r in rows:
        try:
            i, j, s = int(r["i"]), int(r["j"]), float(r["sigma"])
        except (TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad row {r}") from exc
        if not (0 <= i <= j < max_index) or not math.isfinite(s):
            raise InputError(f"{path}: cell ({i}, {j}) outside the grid or non-finite")
        vols[i, j] = s
    return ForwardVolSurface(vols, float(dt))


def report_to_json(report: CalibrationReport, surface_ref: str) -> dict:
    def bp_record(rec):
        rec = dict(rec)
        for key in ("market_iv", "model_iv", "diff"):
            rec[key + "_bp"] = rec.pop(key) / BP
        return rec

    return {
        "surface_ref": surface_ref,
        "max_relative_residual": report.max_relative_residual,
        "residuals": [bp_record(r.to_record()) for r in report.residuals],
        "flags": [f.to_record() for f in report.flags],
        "filled_quotes": [
            {"expiry": q.expiry, "tenor": q.tenor, "normal_iv_bp": q.normal_iv / BP}
            for q in report.filled_quotes
        ],
    }


def write_fit_csv(path: str | Path, report: CalibrationReport) -> None:
    """Plot-ready ``expiry,tenor,market_iv,model_iv`` in bp."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["expiry", "tenor", "market_iv", "model_iv"])
        for r in sorted(report.residuals, key=lambda r: (r.expiry, r.tenor)):
            w.writerow([repr(r.expiry), repr(r.tenor), repr(r.market_iv / BP), repr(r.model_iv / BP)])
