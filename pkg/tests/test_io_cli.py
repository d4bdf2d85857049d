import csv
import json

import numpy as np
import pytest

from hjm_swaption.calibration import SwaptionQuote, quotes_from_surface
from hjm_swaption.cli import main
from hjm_swaption.curves import build_discount_curve, build_spread_curve, discount, flat_curve
from hjm_swaption.io import (
    InputError,
    read_curve_csv,
    read_quotes_csv,
    read_spread_csv,
    read_surface_csv,
    write_curve_csv,
    write_quotes_csv,
    write_spread_csv,
    write_surface_csv,
)
from hjm_swaption.surface import ForwardVolSurface
from hjm_swaption.synthetic import arbitrage_fixture, bucket_surface

EXPIRIES = (1.0, 2.0, 3.0, 5.0, 7.0, 10.0)
TENORS = (1.0, 2.0, 5.0, 10.0, 20.0)


# --- files -----------------------------------------------------------------------

def test_curve_round_trip(tmp_path):
    curve = build_discount_curve([(1, 0.01), (5, 0.025), (30, 0.03)], mode="rate")
    write_curve_csv(tmp_path / "c.csv", curve)
    back = read_curve_csv(tmp_path / "c.csv")
    t = np.linspace(0, 40, 81)
    np.testing.assert_allclose(discount(back, t), discount(curve, t), rtol=1e-15)


def test_curve_rate_mode_from_sidecar(tmp_path):
    (tmp_path / "c.csv").write_text("maturity,value\n1,0.02\n10,0.02\n")
    (tmp_path / "c.meta.json").write_text('{"mode": "rate", "compounding": "continuous"}')
    assert discount(read_curve_csv(tmp_path / "c.csv"), 5.0) == pytest.approx(np.exp(-0.1), rel=1e-14)
    (tmp_path / "c.meta.json").write_text('{"mode": "rate", "compounding": "annual"}')
    with pytest.raises(InputError):
        read_curve_csv(tmp_path / "c.csv")


@pytest.mark.parametrize(
    "text",
    ["", "maturity,value\n", "maturity,rate\n1,0.02\n", "maturity,value\n1,abc\n", "maturity,value\n1,nan\n", "maturity,value\n1,-0.5\n"],
)
def test_bad_curve_files(tmp_path, text):
    (tmp_path / "c.csv").write_text(text)
    with pytest.raises(InputError):
        read_curve_csv(tmp_path / "c.csv")


def test_missing_file_names_path(tmp_path):
    with pytest.raises(InputError, match="nope.csv"):
        read_curve_csv(tmp_path / "nope.csv")


def test_spread_round_trip(tmp_path):
    spread = build_spread_curve([(1, 0.999), (10, 0.985)])
    write_spread_csv(tmp_path / "s.csv", spread)
    back = read_spread_csv(tmp_path / "s.csv")
    t = np.linspace(0, 20, 41)
    np.testing.assert_allclose(back(t), spread(t), rtol=1e-15)


def test_quotes_round_trip(tmp_path):
    quotes = [SwaptionQuote(1, 1, 0.0061), SwaptionQuote(10, 30, 0.00873)]
    write_quotes_csv(tmp_path / "q.csv", quotes)
    back = read_quotes_csv(tmp_path / "q.csv")
    assert [(x.expiry, x.tenor) for x in back] == [(1, 1), (10, 30)]
    assert [x.normal_iv for x in back] == pytest.approx([0.0061, 0.00873], rel=1e-15)


def test_quotes_optional_columns(tmp_path):
    (tmp_path / "q.csv").write_text("expiry,tenor,normal_iv_bp,weight,excluded\n1,1,60,2,\n2,1,61,,yes\n")
    a, b = read_quotes_csv(tmp_path / "q.csv")
    assert a.weight == 2.0 and not a.excluded
    assert b.weight == 1.0 and b.excluded
    (tmp_path / "q.csv").write_text("expiry,tenor,normal_iv_bp\n1,1,-5\n")
    with pytest.raises(InputError):
        read_quotes_csv(tmp_path / "q.csv")


def test_surface_round_trip(tmp_path, random_surface):
    write_surface_csv(tmp_path / "s.csv", random_surface)
    back = read_surface_csv(tmp_path / "s.csv")
    assert back.dt == random_surface.dt
    assert np.array_equal(back.vols, random_surface.vols)
    with open(tmp_path / "s.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["i", "j", "sigma"] and len(rows) == 1 + 60 * 61 // 2


def test_surface_rejects_bad_cells(tmp_path):
    (tmp_path / "s.csv").write_text("i,j,sigma\n3,1,0.01\n")
    (tmp_path / "s.meta.json").write_text('{"dt": 0.5, "max_index": 10}')
    with pytest.raises(InputError):
        read_surface_csv(tmp_path / "s.csv")
    (tmp_path / "t.csv").write_text("i,j,sigma\n")
    with pytest.raises(InputError, match="dt"):
        read_surface_csv(tmp_path / "t.csv")


# --- CLI ---------------------------------------------------------------------------

@pytest.fixture
def files(tmp_path):
    curve = flat_curve(0.02)
    write_curve_csv(tmp_path / "curve.csv", curve)
    write_surface_csv(tmp_path / "zero.csv", ForwardVolSurface.zeros(60))
    write_surface_csv(tmp_path / "flat.csv", ForwardVolSurface.flat(0.01, 60))
    rng = np.random.default_rng(3)
    truth = bucket_surface(EXPIRIES, TENORS, rng.uniform(0.006, 0.012, size=(6, 5)))
    write_quotes_csv(tmp_path / "roundtrip.csv", quotes_from_surface(truth, curve, EXPIRIES, TENORS))
    write_quotes_csv(tmp_path / "zeroq.csv", [SwaptionQuote(e, m, 0.0) for e in EXPIRIES for m in TENORS])
    write_quotes_csv(tmp_path / "arb.csv", arbitrage_fixture(curve)[1])
    (tmp_path / "empty.csv").write_text("expiry,tenor,normal_iv_bp\n")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_price_zero_surface(files, capsys):
    code, out, _ = run(capsys, "price", "--curve", files / "curve.csv", "--surface", files / "zero.csv",
                       "--expiries", "1,5,10", "--tenors", "1,10")
    assert code == 0
    recs = records(out)
    assert len(recs) == 6 and all(r["price"] == 0.0 for r in recs)


def test_price_reproduces_calibrated_quotes(files, capsys):
    out_dir = files / "cal"
    code, _, _ = run(capsys, "calibrate", "--curve", files / "curve.csv", "--quotes", files / "roundtrip.csv",
                     "--target-tenors", "quoted", "--out-dir", out_dir)
    assert code == 0
    code, out, _ = run(capsys, "price", "--curve", files / "curve.csv", "--surface", out_dir / "surface.csv",
                       "--quotes", files / "roundtrip.csv")
    assert code == 0
    quotes = {x.key: x.normal_iv * 1e4 for x in read_quotes_csv(files / "roundtrip.csv")}
    for r in records(out):
        assert r["normal_iv"] == pytest.approx(quotes[(r["expiry"], r["tenor"])], rel=1e-8)


def test_price_missing_curve(files, capsys):
    code, _, err = run(capsys, "price", "--curve", files / "absent.csv", "--surface", files / "zero.csv",
                       "--expiries", "1", "--tenors", "1")
    assert code == 2
    assert "absent.csv" in err


def test_price_off_grid(files, capsys):
    code, out, err = run(capsys, "price", "--curve", files / "curve.csv", "--surface", files / "zero.csv",
                         "--expiries", "1.3", "--tenors", "1")
    assert code == 3 and out == "" and "1.3" in err


def test_price_beyond_horizon(files, capsys):
    code, _, _ = run(capsys, "price", "--curve", files / "curve.csv", "--surface", files / "zero.csv",
                     "--expiries", "20", "--tenors", "15")
    assert code == 3


def test_calibrate_zero_quotes(files, capsys):
    code, _, _ = run(capsys, "calibrate", "--curve", files / "curve.csv", "--quotes", files / "zeroq.csv",
                     "--out-dir", files / "z")
    assert code == 0
    assert np.all(read_surface_csv(files / "z" / "surface.csv").vols == 0)


def test_calibrate_round_trip_outputs(files, capsys):
    code, _, err = run(capsys, "calibrate", "--curve", files / "curve.csv", "--quotes", files / "roundtrip.csv",
                       "--out-dir", files / "rt")
    assert code == 0 and err == ""
    report = json.loads((files / "rt" / "report.json").read_text())
    assert report["surface_ref"] == "surface.csv"
    assert report["flags"] == []
    assert report["max_relative_residual"] <= 1e-8
    with open(files / "rt" / "fit.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"expiry", "tenor", "market_iv", "model_iv"}
    assert len(rows) == len(report["residuals"])


def test_calibrate_arbitrage_fixture(files, capsys):
    code, _, err = run(capsys, "calibrate", "--curve", files / "curve.csv", "--quotes", files / "arb.csv",
                       "--out-dir", files / "arb")
    assert code == 1
    assert "expiry=30y tenor=1y" in err
    report = json.loads((files / "arb" / "report.json").read_text())
    assert [(f["expiry"], f["tenor"]) for f in report["flags"]] == [(30.0, 1.0)]
    assert (files / "arb" / "surface.csv").exists()


def test_arb_scan(files, capsys):
    base = ["arb-scan", "--curve", files / "curve.csv", "--out-dir", files / "scan"]
    code, out, _ = run(capsys, *base, "--quotes", files / "roundtrip.csv")
    assert code == 0 and json.loads(out) == []
    code, out, _ = run(capsys, *base, "--quotes", files / "arb.csv")
    flags = json.loads(out)
    assert code == 1 and len(flags) == 1
    assert flags[0]["suggested_exclusions"] == [25.0]
    assert json.loads((files / "scan" / "flags.json").read_text()) == flags
    code, out, _ = run(capsys, *base, "--quotes", files / "arb.csv", "--exclude", "expiry=25")
    assert code == 0 and json.loads(out) == []


def test_arb_scan_empty_quotes(files, capsys):
    code, _, err = run(capsys, "arb-scan", "--curve", files / "curve.csv", "--quotes", files / "empty.csv",
                       "--out-dir", files / "scan")
    assert code == 2 and "empty.csv" in err


def test_bad_exclude(files, capsys):
    code, _, _ = run(capsys, "arb-scan", "--curve", files / "curve.csv", "--quotes", files / "arb.csv",
                     "--exclude", "tenor=5")
    assert code == 2


MC_ARGS = ("--expiries", "1,2,5,10", "--tenors", "1,2,5,10", "--paths", "10000", "--seed", "42")


def test_mc_validate_zero_surface(files, capsys):
    code, out, _ = run(capsys, "mc-validate", "--curve", files / "curve.csv", "--surface", files / "zero.csv",
                       "--out-dir", files / "v", *MC_ARGS)
    assert code == 0
    # zero-vol paths reproduce the curve up to roundoff (1e-10 in price)
    assert all(abs(r["mc_iv"]) < 1e-8 and r["cf_iv"] == 0.0 for r in records(out))


def test_mc_validate_flat_and_negative_control(files, capsys):
    args = ["mc-validate", "--curve", files / "curve.csv", "--surface", files / "flat.csv",
            "--out-dir", files / "v", *MC_ARGS]
    code, out, _ = run(capsys, *args)
    assert code == 0
    recs = records(out)
    assert len(recs) == 16
    assert set(recs[0]) == {"expiry", "tenor", "mc_iv", "cf_iv", "std_err", "n_paths", "seed",
                            "antithetic", "drift_scheme", "rng"}
    code, _, _ = run(capsys, *args, "--no-drift")
    assert code == 1
    lines = (files / "v" / "validation.jsonl").read_text().splitlines()
    assert len(lines) == 32


def test_config_file_and_env(files, capsys, monkeypatch):
    (files / "run.toml").write_text(
        f'curve = "{files / "curve.csv"}"\nsurface = "{files / "zero.csv"}"\n'
        'expiries = [1.0, 2.0]\ntenors = [1.0]\n'
    )
    code, out, _ = run(capsys, "price", "--config", files / "run.toml")
    assert code == 0 and len(records(out)) == 2
    (files / "run.json").write_text(json.dumps(
        {"curve": str(files / "curve.csv"), "surface": str(files / "zero.csv"), "expiries": [5], "tenors": [5]}
    ))
    monkeypatch.setenv("HJM_SWAPTION_CONFIG", str(files / "run.json"))
    code, out, _ = run(capsys, "price")
    assert code == 0 and [(r["expiry"], r["tenor"]) for r in records(out)] == [(5, 5)]
    # flags override the file
    code, out, _ = run(capsys, "price", "--expiries", "3", "--tenors", "2")
    assert [(r["expiry"], r["tenor"]) for r in records(out)] == [(3, 2)]


def test_config_unknown_key(files, capsys):
    (files / "bad.toml").write_text("paths = 10\n")
    code, _, err = run(capsys, "price", "--config", files / "bad.toml")
    assert code == 2 and "paths" in err


def test_byte_identical_outputs(files, capsys):
    for name in ("a", "b"):
        run(capsys, "calibrate", "--curve", files / "curve.csv", "--quotes", files / "arb.csv",
            "--out-dir", files / name)
        run(capsys, "mc-validate", "--curve", files / "curve.csv", "--surface", files / "flat.csv",
            "--out-dir", files / name, "--expiries", "2", "--tenors", "5", "--paths", "5000", "--seed", "9")
    for f in ("surface.csv", "surface.meta.json", "report.json", "fit.csv", "validation.jsonl"):
        assert (files / "a" / f).read_bytes() == (files / "b" / f).read_bytes()
