"""End-to-end CLI tests: YAML config in, CSV / report out, exit codes.

Everything runs in-process through linkplan.cli.main so exit codes and
stdout/stderr behavior are exercised exactly as a shell user would see them.
"""

import copy
import math

import pytest
import yaml

from linkplan.channel import RicianFading
from linkplan.hardware import PaConfig
from linkplan.analysis import rf_ergodic_rate
from linkplan.cli import main

BASE = {
    "rf_hops": [{"K": 0.01, "omega": 1.0, "N": 20, "M": 1, "C": 10, "R": 2.0,
                 "pa": {"epsilon": 1.0, "theta_pa": 0.0, "p_cons_db": -7.0}}],
    "fso_hops": [{"model": "exponential", "lambda": 1.0, "M": 1,
                  "C_tilde": 20, "R": 2.0}],
    "routes": [["rf:0", "fso:0"]],
    "sweep": {"variable": "snr_db", "grid": [-3.5, -3.0, -2.5]},
    "evaluators": ["rf_piecewise_clt", "fso_clt", "monte_carlo"],
    "mc": {"trials": 20000, "seed": 5},
    "analysis": {"theta": 2.0},
}


def write_config(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def run_to_file(tmp_path, command, cfg_path, extra=(), name="out.csv"):
    out = tmp_path / name
    code = main([command, "--config", cfg_path, "--out", str(out), *extra])
    text = out.read_text() if out.exists() else ""
    return code, text


def data_rows(text):
    """CSV body rows (skip provenance comments and the header row)."""
    lines = [l for l in text.strip().splitlines() if not l.startswith("#")]
    return [l.split(",") for l in lines[1:]]


# ----------------------------------------------------------------------------
# determinism / provenance
# ----------------------------------------------------------------------------

def test_outage_sweep_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path, BASE)
    code1, text1 = run_to_file(tmp_path, "outage-sweep", cfg, name="a.csv")
    code2, text2 = run_to_file(tmp_path, "outage-sweep", cfg, name="b.csv")
    assert code1 == code2 == 0
    assert text1 == text2
    assert text1  # not empty


def test_outage_sweep_stdout_equals_file(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE)
    _, from_file = run_to_file(tmp_path, "outage-sweep", cfg)
    capsys.readouterr()
    code = main(["outage-sweep", "--config", cfg])
    assert code == 0
    assert capsys.readouterr().out == from_file


def test_provenance_header(tmp_path):
    cfg = write_config(tmp_path, BASE)
    _, text = run_to_file(tmp_path, "outage-sweep", cfg)
    lines = text.splitlines()
    assert lines[0].startswith("# linkplan ")
    assert lines[1].startswith("# config_sha256: ")
    digest = lines[1].split(": ")[1]
    assert len(digest) == 64 and all(c in "0123456789abcdef" for c in digest)
    assert lines[2] == "# seed: 5"
    assert lines[3] == "sweep_var,method,outage,ci_halfwidth,error"


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, BASE)
    _, base_text = run_to_file(tmp_path, "outage-sweep", cfg)
    _, seeded = run_to_file(tmp_path, "outage-sweep", cfg, extra=("--seed", "9"))
    assert "# seed: 9" in seeded
    mc_base = [r for r in data_rows(base_text) if r[1] == "monte_carlo"]
    mc_new = [r for r in data_rows(seeded) if r[1] == "monte_carlo"]
    assert any(a[2] != b[2] for a, b in zip(mc_base, mc_new))


def test_outage_csv_schema(tmp_path):
    cfg = write_config(tmp_path, BASE)
    code, text = run_to_file(tmp_path, "outage-sweep", cfg)
    assert code == 0
    rows = data_rows(text)
    # grid-major ordering, one row per evaluator
    assert len(rows) == 3 * 3
    grid = [-3.5, -3.0, -2.5]
    for gi, g in enumerate(grid):
        chunk = rows[3 * gi:3 * gi + 3]
        assert [r[1] for r in chunk] == BASE["evaluators"]
        for r in chunk:
            assert float(r[0]) == g
            outage = float(r[2])
            assert 0.0 <= outage <= 1.0
            assert r[4] == ""  # no evaluator errors
        # closed forms carry no interval; MC does
        assert float(chunk[0][3]) == 0.0
        assert float(chunk[2][3]) > 0.0


# ----------------------------------------------------------------------------
# rate sweeps
# ----------------------------------------------------------------------------

def test_rate_sweep_nondecreasing_in_snr(tmp_path):
    cfg = write_config(tmp_path, BASE)
    code, text = run_to_file(tmp_path, "rate-sweep", cfg)
    assert code == 0
    rows = data_rows(text)
    rates = [float(r[1]) for r in rows]
    assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
    assert all(r[2] in ("rf:0", "fso:0") for r in rows)


def test_rate_sweep_n_grid_single_antenna_point(tmp_path):
    doc = copy.deepcopy(BASE)
    doc.pop("fso_hops")
    doc["routes"] = [["rf:0"]]
    doc["sweep"] = {"variable": "N", "grid": [1, 4, 16]}
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "rate-sweep", cfg)
    assert code == 0
    rows = data_rows(text)
    expect = rf_ergodic_rate(RicianFading(0.01, 1.0, 1),
                             PaConfig.ideal(10.0 ** -0.7))
    assert float(rows[0][1]) == pytest.approx(expect, rel=1e-9)
    rates = [float(r[1]) for r in rows]
    assert rates == sorted(rates)


def test_m_sweep_outage_nonincreasing(tmp_path):
    doc = copy.deepcopy(BASE)
    doc["sweep"] = {"variable": "M", "grid": [1, 2, 3]}
    doc["evaluators"] = ["rf_linearized_clt"]
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "outage-sweep", cfg)
    assert code == 0
    vals = [float(r[2]) for r in data_rows(text)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[0] > vals[-1]


# ----------------------------------------------------------------------------
# config rejection (exit 2, field-path messages)
# ----------------------------------------------------------------------------

def _expect_config_error(tmp_path, capsys, doc, fragment, command="outage-sweep"):
    cfg = write_config(tmp_path, doc)
    code = main([command, "--config", cfg])
    err = capsys.readouterr().err
    assert code == 2
    assert fragment in err, err


def test_negative_omega_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["rf_hops"][0]["omega"] = -1.0
    _expect_config_error(tmp_path, capsys, doc, "rf_hops[0].omega")


def test_empty_grid_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["sweep"]["grid"] = []
    _expect_config_error(tmp_path, capsys, doc, "sweep.grid")


def test_unsorted_grid_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["sweep"]["grid"] = [0.0, -1.0]
    _expect_config_error(tmp_path, capsys, doc, "sweep.grid")


def test_unknown_evaluator_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["evaluators"] = ["does_not_exist"]
    _expect_config_error(tmp_path, capsys, doc, "evaluators[0]")


def test_unknown_section_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["plotting"] = {"style": "dark"}
    _expect_config_error(tmp_path, capsys, doc, "plotting")


def test_missing_p_cons_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    del doc["rf_hops"][0]["pa"]["p_cons_db"]
    _expect_config_error(tmp_path, capsys, doc, "rf_hops[0].pa.p_cons_db")


def test_dangling_route_ref_rejected(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["routes"] = [["rf:0", "fso:3"]]
    _expect_config_error(tmp_path, capsys, doc, "routes[0][1]")


def test_fso_only_config_requires_p_tx(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc.pop("rf_hops")
    doc["routes"] = [["fso:0"]]
    _expect_config_error(tmp_path, capsys, doc, "fso_hops[0].p_tx_db")


def test_missing_config_file(capsys):
    code = main(["outage-sweep", "--config", "/nonexistent/cfg.yaml"])
    assert code == 2
    assert "cannot read" in capsys.readouterr().err


def test_trials_flag_below_minimum_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE)
    code = main(["outage-sweep", "--config", cfg, "--trials", "10"])
    assert code == 2
    assert "mc:" in capsys.readouterr().err


# ----------------------------------------------------------------------------
# min-antennas
# ----------------------------------------------------------------------------

MINANT = {
    "rf_hops": [
        {"K": 0.01, "omega": 1.0, "N": 2, "R": 1.0,
         "pa": {"epsilon": 0.75, "theta_pa": 0.0, "p_cons_db": 0.0}},
        {"K": 0.01, "omega": 1.0, "N": 2, "R": 1.0,
         "pa": {"epsilon": 0.5, "theta_pa": 0.0, "p_cons_db": 0.0}},
        {"K": 0.01, "omega": 1.0, "N": 2, "R": 1.0,
         "pa": {"epsilon": 0.25, "theta_pa": 0.0, "p_cons_db": 0.0}},
    ],
    "fso_hops": [{"model": "exponential", "lambda": 1.0, "p_tx_db": 17.0,
                  "C_tilde": 1, "R": 1.0}],
    "routes": [["rf:0", "fso:0"]],
    "sweep": {"variable": "snr_db", "grid": [0.0]},
    "evaluators": ["rf_linearized_clt"],
    "mc": {"trials": 20000, "seed": 5},
}


def test_min_antennas_counts_scale_with_efficiency(tmp_path):
    cfg = write_config(tmp_path, MINANT)
    code, text = run_to_file(tmp_path, "min-antennas", cfg)
    assert code == 0
    rows = data_rows(text)
    assert [r[1] for r in rows] == ["rf:0", "rf:1", "rf:2"]
    counts = {float(r[2]): int(r[3]) for r in rows}
    # halving the PA efficiency halves P', roughly doubling the antenna count
    assert counts == {0.75: 40, 0.5: 60, 0.25: 120}


def test_min_antennas_requires_explicit_fso_power(tmp_path, capsys):
    doc = copy.deepcopy(MINANT)
    del doc["fso_hops"][0]["p_tx_db"]
    _expect_config_error(tmp_path, capsys, doc, "fso_hops[0].p_tx_db",
                         command="min-antennas")


def test_min_antennas_requires_snr_sweep(tmp_path, capsys):
    doc = copy.deepcopy(MINANT)
    doc["sweep"] = {"variable": "N", "grid": [2, 4]}
    _expect_config_error(tmp_path, capsys, doc, "sweep.variable",
                         command="min-antennas")


def test_min_antennas_rf_only_uses_own_rate_target(tmp_path):
    doc = copy.deepcopy(MINANT)
    doc.pop("fso_hops")
    doc["rf_hops"] = [{"K": 0.01, "omega": 1.0, "N": 2, "R": 0.1,
                       "pa": {"epsilon": 1.0, "theta_pa": 0.0, "p_cons_db": 10.0}}]
    doc["routes"] = [["rf:0"]]
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "min-antennas", cfg)
    assert code == 0
    assert int(data_rows(text)[0][3]) == 1  # R=0.1 at 10 dB: one antenna is enough


# ----------------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------------

def _validate_doc(n_ant, p_cons_db, evaluators, theta=2.0, trials=200_000):
    return {
        "rf_hops": [{"K": 0.01, "omega": 1.0, "N": n_ant, "M": 1, "C": 10,
                     "R": 2.0,
                     "pa": {"epsilon": 1.0, "theta_pa": 0.0,
                            "p_cons_db": p_cons_db}}],
        "routes": [["rf:0"]],
        "sweep": {"variable": "snr_db", "grid": [p_cons_db]},
        "evaluators": evaluators,
        "mc": {"trials": trials, "seed": 6},
        "analysis": {"theta": theta},
    }


def test_validate_pass_exit0(tmp_path):
    # tangent-anchored piecewise evaluator at N=80 sits within factor 1.5
    doc = _validate_doc(80, -10.6038, ["rf_piecewise_clt", "monte_carlo"])
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "validate", cfg, name="report.txt")
    assert code == 0, text
    assert "status=PASS" in text
    assert "status=FAIL" not in text
    assert "summary: checked=1 passed=1 failed=0 skipped=0" in text


def test_validate_fail_exit1(tmp_path):
    # ramp-CDF evaluator carries a variance deficit: factor ~5.7 at this point
    doc = _validate_doc(40, -7.5707, ["rf_linearized_clt"])
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "validate", cfg, name="report.txt")
    assert code == 1, text
    assert "status=FAIL" in text
    assert "class=clt_factor_1.5" in text


def test_validate_skip_outside_window(tmp_path):
    # drive well past the outage knee: MC sees no failures, window test skipped
    doc = _validate_doc(80, -9.2, ["rf_piecewise_clt"], trials=20_000)
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "validate", cfg, name="report.txt")
    assert code == 0, text
    assert "status=SKIP" in text
    assert "mc_outside_[1e-3,0.5]" in text


def test_validate_bound_classes(tmp_path):
    doc = {
        "rf_hops": [{"K": 0.01, "omega": 1.0, "N": 4, "M": 2, "C": 1, "R": 1.0,
                     "pa": {"epsilon": 1.0, "theta_pa": 0.0, "p_cons_db": -3.0}}],
        "routes": [["rf:0"]],
        "sweep": {"variable": "snr_db", "grid": [-3.0]},
        "evaluators": ["rf_jensen_lower", "rf_jensen_upper"],
        "mc": {"trials": 200_000, "seed": 7},
    }
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "validate", cfg, name="report.txt")
    assert code == 0, text
    assert "class=lower_bound" in text
    assert "class=upper_bound" in text
    assert "status=FAIL" not in text


# ----------------------------------------------------------------------------
# evaluator errors / worker plumbing
# ----------------------------------------------------------------------------

def test_evaluator_error_rows_exit3(tmp_path):
    doc = copy.deepcopy(BASE)
    doc["rf_hops"][0]["M"] = 2
    doc["evaluators"] = ["rf_single_shot"]
    doc["sweep"]["grid"] = [-7.0]
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "outage-sweep", cfg)
    assert code == 3
    row = data_rows(text)[0]
    assert row[2] == "nan"
    assert "single-shot" in row[4]


def test_workers_env_invalid_exit2(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LINKPLAN_WORKERS", "many")
    cfg = write_config(tmp_path, BASE)
    code = main(["outage-sweep", "--config", cfg])
    assert code == 2
    assert "LINKPLAN_WORKERS" in capsys.readouterr().err


def test_workers_never_change_counts(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, BASE)
    _, base_text = run_to_file(tmp_path, "outage-sweep", cfg, name="w1.csv")
    monkeypatch.setenv("LINKPLAN_WORKERS", "3")
    _, env_text = run_to_file(tmp_path, "outage-sweep", cfg, name="w3.csv")
    monkeypatch.delenv("LINKPLAN_WORKERS")
    _, flag_text = run_to_file(tmp_path, "outage-sweep", cfg,
                               extra=("--workers", "2"), name="w2.csv")
    assert base_text == env_text == flag_text


def test_default_route_spans_all_hops(tmp_path):
    doc = copy.deepcopy(BASE)
    doc.pop("routes")
    cfg = write_config(tmp_path, doc)
    code, text = run_to_file(tmp_path, "rate-sweep", cfg)
    assert code == 0
    assert all(r[2] in ("rf:0", "fso:0") for r in data_rows(text))
