import subprocess
import sys

import pytest
import yaml

from ghzsim.cli import main
from ghzsim.config import dump_config, load_config, parse_config, with_overrides
from ghzsim.errors import ConfigFileNotFound, MalformedConfig, OutOfRangeValue, UnknownConfigKey


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write(tmp_path, "experiment: histogram\n"))
    assert cfg.seed == 0
    assert cfg.output.format == "csv"
    assert cfg.rates.pulse_rate_hz == 7.6e7
    assert cfg.ghz.coherence_sigma_fs == 250.0
    assert len(cfg.scan.delays()) == 41


def test_out_of_range_names_key():
    with pytest.raises(OutOfRangeValue) as info:
        parse_config({"experiment": "rates", "rates": {"pair_mean": -1}})
    assert info.value.key == "rates.pair_mean"
    assert "rates.pair_mean" in str(info.value)


def test_unknown_key():
    with pytest.raises(UnknownConfigKey) as info:
        parse_config({"experiment": "rates", "ghz": {"pump_width": 3}})
    assert info.value.key == "ghz.pump_width"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigFileNotFound):
        load_config(tmp_path / "absent.yaml")


@pytest.mark.parametrize(
    "text",
    ["experiment: [unclosed\n", "- just\n- a list\n", "seed: 3\n", "experiment: teleport\n", "experiment: rates\nseed: many\n"],
)
def test_malformed(tmp_path, text):
    with pytest.raises((MalformedConfig, OutOfRangeValue)):
        load_config(write(tmp_path, text))


def test_empty_scan_list_rejected():
    with pytest.raises(MalformedConfig):
        parse_config({"experiment": "delay-scan", "scan": {"delays_fs": []}})


def test_round_trip(tmp_path):
    cfg = parse_config(
        {"experiment": "delay-scan", "seed": 4, "ghz": {"delay_fs": 12.5, "noise_w": 0.1}, "scan": {"delays_fs": [0, 100]}}
    )
    again = load_config(write(tmp_path, dump_config(cfg)))
    assert again == cfg


def test_overrides():
    cfg = with_overrides(parse_config({"experiment": "delay-scan", "scan": {"delays_fs": [1.0]}}), "x.csv", 9, "yaml", 5)
    assert (cfg.output.path, cfg.seed, cfg.output.format) == ("x.csv", 9, "yaml")
    assert len(cfg.scan.delays()) == 5


EXPECTED_HEADERS = {
    "evolve": "modes,real,imag",
    "histogram": "combination,probability",
    "delay-scan": "delay_fs,p_plus45,p_minus45",
    "control-scan": "delay_fs,p_plus45,p_minus45",
    "entanglement-check": "modes,real,imag",
    "rates": "quantity,value,unit",
}


@pytest.mark.parametrize("experiment", sorted(EXPECTED_HEADERS))
def test_cli_outputs(tmp_path, experiment, capsys):
    cfg = write(tmp_path, f"experiment: {experiment}\nghz: {{mc_samples: 2}}\nscan: {{points: 5}}\n")
    out = tmp_path / "out.csv"
    assert main(["--config", str(cfg), "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == EXPECTED_HEADERS[experiment]
    assert len(lines) > 1
    assert experiment in capsys.readouterr().out


def test_cli_yaml_output(tmp_path):
    cfg = write(tmp_path, "experiment: histogram\nghz: {noise_w: 0.1025641025641026, pump_sigma_fs: 0}\n")
    out = tmp_path / "h.yaml"
    assert main(["--config", str(cfg), "--output", str(out), "--format", "yaml"]) == 0
    data = yaml.safe_load(out.read_text())
    assert data["summed_ratio"] == pytest.approx(12.0, abs=1e-9)


def test_cli_rerun_byte_identical(tmp_path):
    cfg = write(tmp_path, "experiment: delay-scan\nseed: 5\nghz: {mc_samples: 8}\nscan: {points: 7}\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["--config", str(cfg), "--output", str(a)]) == 0
    assert main(["--config", str(cfg), "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_error_leaves_no_file(tmp_path, capsys):
    cfg = write(tmp_path, "experiment: rates\nrates: {efficiency: 2.0}\n")
    out = tmp_path / "never.csv"
    assert main(["--config", str(cfg), "--output", str(out)]) != 0
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [cfg]
    assert "rates.efficiency" in capsys.readouterr().err


def test_cli_missing_config(tmp_path):
    assert main(["--config", str(tmp_path / "nope.yaml")]) == 2


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "experiment: evolve\nghz: {pump_sigma_fs: 0}\n")
    out = tmp_path / "e.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "ghzsim", "--config", str(cfg), "--output", str(out)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "fidelity with GHZ 1.000000000000" in proc.stdout
