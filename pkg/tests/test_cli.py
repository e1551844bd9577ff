from __future__ import annotations

import subprocess
import sys

import pytest

from noisy_sdc import __version__
from noisy_sdc import reference as ref
from noisy_sdc.cli import main
from noisy_sdc.sweep import SweepResult, format_value, parse_csv, parallel_map


def run(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(-0.0) == "0"
    assert format_value(3) == "3"
    assert format_value(None) == ""
    assert format_value(True) == "true"


def test_csv_round_trip():
    res = SweepResult(("a", "b"), meta={"command": "x"}, footer={"n": 2})
    res.append((1, 0.5))
    parsed = parse_csv(res.to_csv())
    assert parsed.columns == ("a", "b")
    assert parsed.rows == [("1", "0.5")]
    assert parsed.meta == {"command": "x"} and parsed.footer == {"n": "2"}
    with pytest.raises(ValueError):
        res.append((1,))


def test_parallel_map_preserves_order():
    assert parallel_map(abs, [-3, 2, -1], jobs=2) == [3, 2, 1]


def test_evolve_csv(capsys):
    code, out = run(capsys, "evolve", "--kind", "XZ", "--gamma", "1", "--t", "0.5")
    assert code == 0
    csv = parse_csv(out)
    assert csv.meta["command"] == "evolve" and csv.meta["version"] == __version__
    assert csv.columns == ("row", "col", "re", "im")
    assert len(csv.rows) == 16
    assert float(csv.footer["analytic_max_dev"]) < 1e-9


def test_negativity_sweep(capsys):
    code, out = run(capsys, "negativity-sweep", "--kind", "DEPOL", "--gamma", "1", "--t-max", "0.5", "--samples", "11")
    csv = parse_csv(out)
    assert code == 0 and len(csv.rows) == 11
    for _, n, closed in csv.rows:
        assert abs(float(n) - float(closed)) < 1e-8


def test_esd_time_verdicts(capsys):
    _, out = run(capsys, "esd-time", "--kind", "XZ", "--gamma", "2")
    csv = parse_csv(out)
    assert float(csv.rows[0][2]) == pytest.approx(ref.ESD_XZ / 2, abs=1e-6)
    _, out = run(capsys, "esd-time", "--kind", "Z", "--gamma", "1")
    csv = parse_csv(out)
    assert csv.rows[0][2] == "" and csv.footer["verdict"] == "no-death-within-horizon"


def test_tables(capsys):
    code, out = run(capsys, "tables", "--jobs", "1")
    csv = parse_csv(out)
    assert code == 0
    assert len(csv.rows) == 24
    status = {(r[0], float(r[1]), float(r[2])): r[6] for r in csv.rows}
    assert status[("II", 0.2, 1000.0)] == "FLAGGED"
    assert sum(s == "PASS" for s in status.values()) == 23
    assert csv.footer["table_I_gamma_monotone"] == "true"
    cell = next(r for r in csv.rows if r[0] == "I" and float(r[1]) == 0.1 and float(r[2]) == 1.0)
    assert float(cell[3]) == pytest.approx(8.82654, abs=1e-3)


def test_tables_failed_cell_gives_exit_one(capsys, monkeypatch):
    import noisy_sdc.cli as cli

    def broken(gamma, omega0):
        raise RuntimeError("solver diverged")

    monkeypatch.setattr(cli, "rotation_esd_root_phase_x", broken)
    code, out = run(capsys, "tables", "--which", "I", "--jobs", "1")
    assert code == 1
    rows = parse_csv(out).rows
    assert all(r[6] == "FAILED" and "solver diverged" in r[7] for r in rows)


def test_capacity_sweep(capsys):
    code, out = run(capsys, "capacity-sweep", "--family", "XZ", "--gamma", "1", "--t0-max", "0.2", "--samples", "5")
    csv = parse_csv(out)
    assert code == 0
    for row in csv.rows:
        assert float(row[2]) == pytest.approx(float(row[3]), abs=1e-8)
        assert float(row[2]) == pytest.approx(float(row[4]), abs=1e-8)
    assert float(csv.footer["critical_total_time"]) == pytest.approx(ref.CRITICAL_XZ, abs=1e-4)


def test_capacity_sweep_rejects_negative_rate():
    assert main(["capacity-sweep", "--family", "XZ", "--gamma", "-1", "--t0-max", "1"]) == 2


def test_holevo_encode(capsys):
    code, out = run(capsys, "holevo-encode", "--gamma", "0.1", "--omega0", "1", "--t-max", "20", "--samples", "2000")
    csv = parse_csv(out)
    assert code == 0 and csv.columns == ("t", "H", "negativity")
    assert float(csv.footer["first_max_holevo"]) == pytest.approx(1.23928, abs=2e-3)
    assert float(csv.footer["first_max_t"]) == pytest.approx(2.75085, abs=5e-3)
    assert float(csv.footer["later_maxima_max"]) < 1
    _, out = run(capsys, "holevo-encode", "--gamma", "0.1", "--omega0", "0.5", "--t-max", "20")
    assert float(parse_csv(out).footer["first_max_holevo"]) < 1


def test_holevo_encode_faster_decay(capsys):
    for w in ("1", "2"):
        code, out = run(capsys, "holevo-encode", "--gamma", "0.2", "--omega0", w, "--t-max", "10", "--samples", "500")
        assert code == 0 and parse_csv(out).footer["first_max_holevo"] != ""


def test_critical(capsys):
    code, out = run(capsys, "critical", "--jobs", "1")
    csv = parse_csv(out)
    assert code == 0
    assert {r[0] for r in csv.rows} >= {"esd_time_XZ", "critical_omega", "critical_time_AZ_BZ"}
    assert all(r[5] == "PASS" for r in csv.rows)


def test_validate_pass_and_fail(capsys):
    code, out = run(capsys, "validate", "--seed", "0")
    assert code == 0 and "ALL SUITES PASS" in out
    code, out = run(capsys, "validate", "--tolerance", "1e-30")
    assert code == 1 and "offending case" in out


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nkind = XZ\ngamma = 0.5\n")
    _, out = run(capsys, "esd-time", "--config", str(cfg))
    assert float(parse_csv(out).rows[0][2]) == pytest.approx(ref.ESD_XZ / 0.5, abs=1e-6)
    _, out = run(capsys, "esd-time", "--config", str(cfg), "--gamma", "1")
    assert float(parse_csv(out).rows[0][2]) == pytest.approx(ref.ESD_XZ, abs=1e-6)


def test_output_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["negativity-sweep", "--kind", "BX", "--gamma", "1", "--t-max", "1", "--samples", "21"]
    assert main(argv + ["--output", str(a)]) == 0
    assert main(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["evolve", "--gamma", "1"],
        ["evolve", "--kind", "QQ", "--gamma", "1", "--t", "1"],
        ["negativity-sweep", "--kind", "Z", "--gamma", "1", "--t-max", "1", "--samples", "1"],
        ["holevo-encode", "--gamma", "0.1", "--omega0", "1", "--t-min", "3", "--t-max", "2"],
        ["esd-time", "--config", "/nonexistent/file"],
    ],
)
def test_argument_errors_exit_two(argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "noisy_sdc", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
