import csv
import io
import json
import subprocess
import sys

import pytest

from fblrelay.cli import BLER_HEADER, DELAY_HEADER, SELECT_HEADER, VALIDATE_HEADER, main, render
from fblrelay.config import (
    ScenarioConfig,
    config_from_dict,
    db_to_linear,
    dbm_to_watts,
    emit_config,
    parse_config,
    watts_to_dbm,
)
from fblrelay.errors import ConfigError


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_unit_conversions():
    assert db_to_linear(-80) == pytest.approx(1e-8, rel=1e-15)
    assert dbm_to_watts(30) == pytest.approx(1.0, rel=1e-15)
    assert dbm_to_watts(-90) == pytest.approx(1e-12, rel=1e-15)
    assert watts_to_dbm(dbm_to_watts(27.5)) == pytest.approx(27.5, abs=1e-12)


def test_default_config_system():
    sys_ = ScenarioConfig().system(30, 20)
    assert sys_.omega_rr == pytest.approx(1e-11, rel=1e-14)
    assert sys_.power_r == pytest.approx(0.1, rel=1e-14)
    assert ScenarioConfig(omega_rr_db=None).system().omega_rr == 0.0


def test_config_round_trip(tmp_path):
    cfg = parse_config(overrides=["sweep={\"variable\": \"power_s_dbm\", \"start\": 10, \"stop\": 30, \"step\": 5}",
                                  "monte_carlo.seed=99", "omega_rr_db=null"])
    path = tmp_path / "cfg.json"
    path.write_text(emit_config(cfg))
    assert parse_config(str(path)) == cfg


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"blocklength": 0}, "blocklength"),
        ({"payload_bits": 2.5}, "payload_bits"),
        ({"omega_sr_db": "loud"}, "omega_sr_db"),
        ({"target_bler": 1.0}, "target_bler"),
        ({"monte_carlo": {"samples": 10}}, "monte_carlo.samples"),
        ({"sweep": {"variable": "snr", "start": 0, "stop": 1, "step": 1}}, "sweep.variable"),
        ({"sweep": {"variable": "power_s_dbm", "start": 5, "stop": 1, "step": 1}}, "sweep.stop"),
        ({"format": "xml"}, "format"),
    ],
)
def test_config_errors_name_the_field(patch, field):
    raw = ScenarioConfig().to_dict()
    raw.update(patch)
    with pytest.raises(ConfigError) as info:
        config_from_dict(raw)
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_missing_and_unknown_fields():
    raw = ScenarioConfig().to_dict()
    del raw["omega_rd_db"]
    with pytest.raises(ConfigError, match="omega_rd_db"):
        config_from_dict(raw)
    with pytest.raises(ConfigError, match="gain"):
        config_from_dict({**ScenarioConfig().to_dict(), "gain": 3})


def test_cli_config_error_exit_code(capsys, tmp_path):
    code, out, err = run_cli(capsys, "select", "--set", "blocklength=0")
    assert code == 2 and out == "" and "blocklength" in err
    code, _, err = run_cli(capsys, "select", "--config", str(tmp_path / "missing.json"))
    assert code == 2 and "--config" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(capsys, "validate", "--config", str(bad))[0] == 2
    assert run_cli(capsys, "bler-sweep")[0] == 2


def sweep_args(*extra):
    return ["bler-sweep", "--samples", "20000", "--seed", "3",
            "--set", 'sweep={"variable": "power_s_dbm", "start": 10, "stop": 30, "step": 10}', *extra]


def test_bler_sweep_csv(capsys):
    code, out, _ = run_cli(capsys, *sweep_args())
    assert code == 0
    rows = csv_rows(out)
    assert rows[0] == BLER_HEADER
    assert [r[0] for r in rows[1:]] == ["10", "20", "30"]
    eps_f = [float(r[1]) for r in rows[1:]]
    assert eps_f == sorted(eps_f, reverse=True)
    assert all(0 <= float(v) <= 1 for r in rows[1:] for v in r[1:5])


def test_bler_sweep_reruns_identical(capsys):
    first = run_cli(capsys, *sweep_args())[1]
    second = run_cli(capsys, *sweep_args())[1]
    assert first == second


def test_bler_sweep_single_point_and_no_monte_carlo(capsys):
    code, out, _ = run_cli(capsys, "bler-sweep", "--samples", "0",
                           "--set", 'sweep={"variable": "blocklength", "start": 256, "stop": 256, "step": 1}')
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 2
    assert rows[1][0] == "256"
    assert rows[1][5] == "nan"


def test_bler_sweep_jsonl(capsys, tmp_path):
    target = tmp_path / "out.jsonl"
    code, out, _ = run_cli(capsys, *sweep_args("--format", "jsonl", "--samples", "0", "--out", str(target)))
    assert code == 0 and out == ""
    records = [json.loads(line) for line in target.read_text().splitlines()]
    assert len(records) == 3
    assert list(records[0]) == BLER_HEADER
    assert records[0]["eps_f_mc"] is None
    assert isinstance(records[0]["eps_f_cf"], float)


def test_render_formats():
    assert render(["a", "b"], [[0.1, True]], "csv") == "a,b\n0.10000000000000001,1\n"
    assert render(["a"], [[float("nan")]], "jsonl") == '{"a": null}\n'


def delay_args(*extra):
    return ["delay-sweep", "--set", "payload_bits=800",
            "--set", 'sweep={"variable": "log10_bler", "start": -7, "stop": -1, "step": 0.25}', *extra]


def test_delay_sweep_single_flip_at_critical_bler(capsys):
    code, out, _ = run_cli(capsys, *delay_args())
    rows = csv_rows(out)
    assert code == 0 and rows[0] == DELAY_HEADER
    winners = [r[4] for r in rows[1:]]
    flips = sum(1 for x, y in zip(winners, winners[1:]) if x != y)
    assert flips == 1 and winners[0] == "HDR" and winners[-1] == "FDR"
    first_fdr = next(float(r[0]) for r in rows[1:] if r[4] == "FDR")
    assert 7.9e-4 < first_fdr < 7.9e-4 * 10**0.25


def test_delay_sweep_always_fdr_with_strong_cancellation(capsys):
    code, out, _ = run_cli(capsys, *delay_args("--set", "omega_rr_db=-120", "--set", "power_c_dbm=30"))
    rows = csv_rows(out)[1:]
    assert code == 0
    assert all(r[4] == "FDR" and float(r[3]) < 0 for r in rows)


def test_delay_sweep_rejects_nonnegative_exponent(capsys):
    code, _, err = run_cli(capsys, "delay-sweep",
                           "--set", 'sweep={"variable": "log10_bler", "start": -2, "stop": 0, "step": 1}')
    assert code == 2 and "sweep" in err


def test_select_report(capsys):
    code, out, _ = run_cli(capsys, "select", "--target", "1e-2", "--set", "payload_bits=800")
    rows = csv_rows(out)
    assert code == 0 and rows[0] == SELECT_HEADER
    row = dict(zip(rows[0], rows[1]))
    assert row["mode"] == "FDR"
    assert float(row["eps_star"]) == pytest.approx(7.896e-4, rel=1e-3)
    assert float(row["p_r_fdr"]) == pytest.approx(0.5623, rel=1e-4)
    code, out, _ = run_cli(capsys, "select", "--target", "1e-5")
    assert dict(zip(*csv_rows(out)))["mode"] == "HDR"


def test_select_verify_hits_target(capsys):
    code, out, _ = run_cli(capsys, "select", "--target", "1e-3", "--verify", "--set", "payload_bits=800")
    header, row = csv_rows(out)
    rec = dict(zip(header, row))
    assert code == 0
    # closed forms at the implied blocklengths stay close to the target
    assert float(rec["eps_f_cf_at_delta_f"]) == pytest.approx(1e-3, rel=0.2)
    assert float(rec["eps_h_cf_at_delta_h"]) == pytest.approx(1e-3, rel=0.2)


def test_select_target_out_of_range(capsys):
    assert run_cli(capsys, "select", "--target", "1.5")[0] == 2


def test_validate_default_passes(capsys):
    code, out, _ = run_cli(capsys, "validate", "--samples", "100000")
    rows = csv_rows(out)
    assert rows[0] == VALIDATE_HEADER
    assert code == 0
    assert {r[3] for r in rows[1:]} <= {"pass", "skip"}


def test_validate_without_loop_interference(capsys):
    code, out, _ = run_cli(capsys, "validate", "--samples", "100000", "--set", "omega_rr_db=null")
    statuses = [r[3] for r in csv_rows(out)[1:]]
    assert code == 0 and "skip" in statuses and "fail" not in statuses


def test_validate_impossible_tolerance_is_numerical_error(capsys):
    code, out, _ = run_cli(capsys, "validate", "--samples", "0", "--set", "quad_tol=1e-18")
    assert code == 3
    assert "error" in [r[3] for r in csv_rows(out)[1:]]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fblrelay", "select"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("eps_target,")
