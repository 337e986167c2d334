import json
from pathlib import Path

import pytest

from fiolab.cli import main
from fiolab.config import KINDS, ExperimentConfig, from_mapping, load, parse_overrides, parse_text
from fiolab.errors import ConfigurationError

FAST = {
    "apply": ["N=64"],
    "kernel": ["L=64", "N_list=512,1024"],
    "sweep": ["n=2", "phase=wave", "p=1.1", "N_list=16,32", "L=2", "probes=gaussian_bumps:2"],
    "ce2": ["m=0", "mu=0.5"],
    "weights": ["weight=power", "alpha=-0.5", "N=256", "kmin=-4", "kmax=1"],
    "bmo": ["N=256", "kmin=-4", "kmax=1"],
    "stationary": ["lam_list=8,16,32,64,128"],
    "wave": ["N=128", "L=16", "N_list=64,128", "probes=gaussian_bumps:2"],
    "commutator": ["weight=log", "m=-1.1", "N_list=64,128", "probes=gaussian_bumps:2"],
    "substitution": ["N=128"],
}


def run_cli(command, out, *extra):
    sets = [a for s in FAST.get(command, []) for a in ("--set", s)]
    return main([command, "--out", str(out), *sets, *extra])


@pytest.mark.parametrize("command", sorted(FAST))
def test_subcommand_runs_and_is_deterministic(tmp_path, command, capsys):
    assert run_cli(command, tmp_path / "a") == 0
    assert run_cli(command, tmp_path / "b") == 0
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert set(summary) == {"kind", "inputs", "seed", "results", "timings", "outputs"}
    assert summary["outputs"]
    for name in summary["outputs"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert "wrote" in capsys.readouterr().out


def test_echoed_config_reproduces_run(tmp_path):
    assert run_cli("ce2", tmp_path / "a") == 0
    echo = tmp_path / "a" / "config.txt"
    assert main(["run", "--config", str(echo), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "ce2.csv").read_bytes() == (tmp_path / "b" / "ce2.csv").read_bytes()
    assert load(echo) == load(tmp_path / "b" / "config.txt")


def test_identity_artifact(tmp_path):
    assert run_cli("apply", tmp_path) == 0
    results = json.loads((tmp_path / "summary.json").read_text())["results"]
    assert results["check"] == "identity" and results["max_error"] <= 1e-10
    assert (tmp_path / "output.csv").exists()


def test_ce2_slope_column(tmp_path):
    assert run_cli("ce2", tmp_path) == 0
    lines = (tmp_path / "ce2.csv").read_text().splitlines()
    assert lines[0].split(",")[3] == "fitted_slope"
    assert abs(float(lines[1].split(",")[3]) + 0.5) <= 0.1


def test_malformed_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("kind = apply\nrho = 1.5\n")
    assert main(["apply", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "rho" in capsys.readouterr().err


def test_unknown_kind_lists_valid_kinds(tmp_path, capsys):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("kind = fourier\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert all(k in err for k in KINDS)


def test_mismatched_kind_and_missing_file(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("kind = bmo\n")
    assert main(["apply", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert main(["apply", "--config", str(tmp_path / "missing.txt")]) == 2
    assert main(["run", "--out", str(tmp_path / "o")]) == 2
    assert main(["apply", "--threads", "0", "--out", str(tmp_path / "o")]) == 2


def test_precondition_failure_exits_3(tmp_path, capsys):
    assert main(["ce2", "--set", "m=-0.5", "--set", "mu=0.6", "--out", str(tmp_path)]) == 3
    assert "precondition" in capsys.readouterr().err


def test_seed_flag_overrides(tmp_path):
    assert run_cli("substitution", tmp_path, "--seed", "11") == 0
    assert json.loads((tmp_path / "summary.json").read_text())["seed"] == 11


def test_unknown_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


# --------------------------------------------------------------------------- config


def test_empty_config_is_valid():
    assert from_mapping(parse_text("# nothing here\n\n")) == ExperimentConfig()


def test_text_round_trip():
    cfg = ExperimentConfig(kind="normest-sweep", n=2, m_list=(-0.5, 0.25), probes=(("f_mu", 1),), dense=True,
                           maps=("sine",), L=2.5)
    assert from_mapping(parse_text(cfg.to_text())) == cfg


@pytest.mark.parametrize("text,field", [
    ("rho = 1.5", "rho"), ("N = many", "N"), ("colour = red", "colour"), ("phase = spiral", "phase"),
    ("p = 0.5", "p"), ("kmin = 4\nkmax = 1", "kmin"), ("n = 4", "n"), ("dense = perhaps", "dense"),
    ("probes = gaussian_bumps:-1", "probes"), ("m = 1\nm = 2", "m"),
])
def test_validation_names_the_field(text, field):
    with pytest.raises(ConfigurationError, match=f"^{field}"):
        from_mapping(parse_text(text))


def test_overrides():
    assert parse_overrides(["m=0.5", "N_list=16,32"]) == {"m": 0.5, "N_list": (16, 32)}
    with pytest.raises(ConfigurationError):
        parse_overrides(["m"])
    with pytest.raises(ConfigurationError):
        parse_text("just words")


def test_integer_fields_reject_fractions():
    with pytest.raises(ConfigurationError, match="^N"):
        ExperimentConfig(N=64.5)
    assert ExperimentConfig(N=64.0).N == 64


def test_shipped_configs_load():
    shipped = sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.txt"))
    assert len(shipped) >= len(KINDS)
    assert {load(p).kind for p in shipped} == set(KINDS)
