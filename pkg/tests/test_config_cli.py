import configparser

import pytest

from rotary_pcr.cli import main
from rotary_pcr.config import SCHEMA, parse_config
from rotary_pcr.errors import ConfigurationError
from rotary_pcr.scenario import Scenario


def write(tmp_path, text, name="scenario.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_defaults_build_the_reference_scenario():
    sc = parse_config("").scenario()
    ref = Scenario()
    assert sc.schedule == ref.schedule
    assert sc.efficiency == ref.efficiency
    assert sc.control.setpoints == (95.0, 55.0, 72.0)
    assert sc.optimizer.y_min == 1e6
    assert sc.plant.chamber_capacity == pytest.approx(0.008344708362158029, rel=1e-9)


def test_trace_ratio_is_normalized():
    sc = parse_config("[protocol]\ntrace_ratio = 1, 1, 1\n").scenario()
    assert sc.schedule.trace.fractions == pytest.approx((1 / 3, 1 / 3, 1 / 3))


def test_unknown_key_reports_its_line():
    with pytest.raises(ConfigurationError) as info:
        parse_config("[protocol]\ncycles = 30\nspin = 3\n")
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_unknown_section():
    with pytest.raises(ConfigurationError) as info:
        parse_config("\n[turbo]\nx = 1\n")
    assert info.value.line == 2


def test_bad_number_reports_its_line():
    with pytest.raises(ConfigurationError) as info:
        parse_config("[plant]\nambient = 25\ndt = fast\n")
    assert info.value.line == 3


def test_stride_must_divide_the_control_period():
    cfg = parse_config("[output]\nstride = 0.03\n")
    with pytest.raises(ConfigurationError) as info:
        cfg.scenario()
    assert info.value.line == 2


def test_overrides_win_over_file():
    cfg = parse_config("[protocol]\ncycles = 10\n", ["protocol.cycles=5"])
    assert cfg.scenario().schedule.cycles == 5
    with pytest.raises(ConfigurationError):
        parse_config("", ["protocol.spin=3"])
    with pytest.raises(ConfigurationError):
        parse_config("", ["cycles=3"])


def test_effective_config_round_trip():
    cfg = parse_config("[protocol]\nrotation_rate = 2\n[kinetics]\ne_nominal = 0.9\n")
    again = parse_config(cfg.dump())
    assert again.values == cfg.values
    assert again.dump() == cfg.dump()
    parsed = configparser.ConfigParser(interpolation=None)
    parsed.read_string(cfg.dump())
    assert set(parsed.sections()) == set(SCHEMA)


def test_manual_gains():
    cfg = parse_config("[control]\nautotune = false\nkp = 1, 1, 1\nki = 0.01, 0.01, 0.01\n"
                       "kd = 0, 0, 0\n")
    gains = cfg.scenario().control.gains
    assert gains is not None and gains[0].kp == 1.0


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["simulate", "--out", str(out), "--set", "protocol.cycles=2",
                 "--set", "protocol.initial_hold=10", "--set", "protocol.final_hold=10"])
    assert code == 0
    for name in ("timeseries.csv", "cycles.csv", "summary.txt", "effective_config.ini"):
        assert (out / name).exists()
    header = (out / "timeseries.csv").read_text().splitlines()[0]
    assert header.startswith("time_s,power_95_W")
    assert "fold" in capsys.readouterr().out.lower()


def test_simulate_is_byte_identical(tmp_path):
    args = ["simulate", "--set", "protocol.cycles=2", "--set", "protocol.initial_hold=5",
            "--set", "protocol.final_hold=5"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for name in ("timeseries.csv", "cycles.csv", "summary.txt", "effective_config.ini"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_effective_config_replays(tmp_path):
    main(["simulate", "--out", str(tmp_path / "a"), "--set", "plant.coupling=ideal"])
    eff = str(tmp_path / "a" / "effective_config.ini")
    main(["simulate", "--out", str(tmp_path / "b"), "--config", eff])
    assert ((tmp_path / "a" / "timeseries.csv").read_bytes()
            == (tmp_path / "b" / "timeseries.csv").read_bytes())


def test_bad_stride_exits_2_with_line(tmp_path, capsys):
    cfg = write(tmp_path, "[protocol]\ncycles = 3\n\n[output]\nstride = 0.03\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "line 5" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.ini")]) == 2


def test_calibrate(tmp_path, capsys):
    assert main(["calibrate", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "calibration.txt").read_text()
    assert "0.064429" in text and "0.045000" in text and "0.079574" in text


def test_calibrate_rejects_setpoint_below_ambient(tmp_path, capsys):
    cfg = write(tmp_path, "[plant]\ncalibration_temps = 95, 20, 72\n")
    assert main(["calibrate", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_geometry_command(tmp_path, capsys):
    assert main(["geometry", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "geometry.txt").read_text()
    assert "3.4097" in text and "DISCREPANCY" in text


def test_geometry_self_termination_exits_2(tmp_path):
    assert main(["geometry", "--top-length", "0.4", "--top-width", "0.4",
                 "--out", str(tmp_path)]) == 2


def test_sweep_ideal(tmp_path, capsys):
    code = main(["sweep", "--out", str(tmp_path), "--set", "plant.coupling=ideal",
                 "--set", "optimizer.rates=0.5, 1, 2", "--set", "optimizer.lattice=4"])
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1 + 3 * 3


def test_optimize_ideal(tmp_path, capsys):
    code = main(["optimize", "--out", str(tmp_path), "--set", "plant.coupling=ideal",
                 "--set", "optimizer.rates=0.5, 1", "--set", "optimizer.lattice=4",
                 "--set", "optimizer.max_evals=15"])
    assert code == 0
    for name in ("grid.csv", "refine.csv", "optimize.txt"):
        assert (tmp_path / name).exists()


def test_optimize_infeasible_exits_3(tmp_path):
    code = main(["optimize", "--out", str(tmp_path), "--set", "plant.coupling=ideal",
                 "--set", "optimizer.rates=1", "--set", "optimizer.lattice=4",
                 "--set", "optimizer.y_min=1e12"])
    assert code == 3


def test_unstable_step_exits_4(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path), "--set", "plant.dt=0.1",
                 "--set", "protocol.cycles=1"])
    assert code == 4
    assert "numerical failure" in capsys.readouterr().err
