import math

import pytest

from manetsim.cli import (
    ConfigError,
    ExperimentConfig,
    main,
    parse_config,
    run_experiment,
)


def test_defaults_match_reference_parameter_set():
    cfg = parse_config(None)
    assert cfg.M == 200
    assert cfg.r_ex == 0.05
    assert cfg.r_g == 0.15
    assert cfg.T == 1.0 and cfg.T_e == 1.2 and cfg.T_d == 0.1
    assert cfg.beta_db == 0.0 and cfg.gamma_db == 0.0
    assert cfg.alpha == 3.5 and cfg.g_over_h == 96.0
    assert cfg.B == 4 and cfg.r_f == 0.2
    assert cfg.mu == 0.4 and cfg.p == 0.3
    assert cfg.sigma_s_db == 8.0
    assert cfg.topologies == 200 and cfg.k1 == cfg.k2 == cfg.k3 == 10
    assert cfg.protocols == ("aodv", "gf", "mp")


def test_db_conversions():
    cfg = parse_config(None)
    params = cfg.channel_params()
    assert params.beta == pytest.approx(1.0)
    assert params.gamma == pytest.approx(1.0)
    params = parse_config(None, {"beta_db": "3", "gamma_db": "10"}).channel_params()
    assert params.beta == pytest.approx(10 ** 0.3)
    assert params.gamma == pytest.approx(10.0)


def test_validation_errors_are_config_errors():
    with pytest.raises(ConfigError):
        parse_config(None, {"mu": "1.5"})
    with pytest.raises(ConfigError):
        parse_config(None, {"nonsense": "1"})
    with pytest.raises(ConfigError):
        parse_config(None, {"protocols": "aodv,olsr"})
    with pytest.raises(ConfigError):
        parse_config(None, {"B": "0"})
    with pytest.raises(ConfigError):
        parse_config(None, {"seed": "-1"})


def test_sweep_parsing(tmp_path):
    cfg = parse_config(None, {"dest_distance": "0.1, 0.2, 0.3"})
    assert cfg.sweep_var == "dest_distance"
    assert cfg.sweep_values == (0.1, 0.2, 0.3)
    points = cfg.points()
    assert [v for v, _ in points] == [0.1, 0.2, 0.3]
    assert points[1][1].dest_distance == 0.2
    assert points[1][1].sweep_var is None

    with pytest.raises(ConfigError):
        parse_config(None, {"dest_distance": "0.1,0.2", "mu": "0.3,0.4"})
    with pytest.raises(ConfigError):
        parse_config(None, {"T": "1,2"})  # not sweepable

    path = tmp_path / "cfg.txt"
    path.write_text("mu = 0.2,0.4\nM = 50\n")
    cfg = parse_config(path)
    assert cfg.sweep_var == "mu" and cfg.M == 50


def test_file_and_override_precedence(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\nM = 50\np = 0.2\n")
    cfg = parse_config(path, {"p": "0.25"})
    assert cfg.M == 50
    assert cfg.p == 0.25
    bad = tmp_path / "bad.txt"
    bad.write_text("M 50\n")
    with pytest.raises(ConfigError):
        parse_config(bad)


def _tiny_overrides(extra=None):
    base = {
        "M": "12",
        "topologies": "3",
        "k1": "1",
        "k2": "1",
        "k3": "2",
        "seed": "5",
        "dest_distance": "0.4,0.6",
    }
    base.update(extra or {})
    return base


def test_run_experiment_rows_and_determinism(tmp_path):
    cfg = parse_config(None, _tiny_overrides())
    res1, man1 = run_experiment(cfg, tmp_path / "a")
    res2, _ = run_experiment(cfg, tmp_path / "b")
    text1 = res1.read_text()
    assert text1 == res2.read_text()
    lines = text1.strip().splitlines()
    assert lines[0].startswith("dest_distance,protocol,reliability")
    assert len(lines) == 1 + 2 * 3  # 2 sweep points x 3 protocols

    # The manifest reparses into an identical configuration and reproduces
    # the results byte for byte.
    back = parse_config(man1)
    assert back == cfg
    res3, _ = run_experiment(back, tmp_path / "c")
    assert res3.read_text() == text1


def test_run_experiment_worker_invariance(tmp_path):
    cfg = parse_config(None, _tiny_overrides({"dest_distance": "0.5", "protocols": "mp"}))
    res1, _ = run_experiment(cfg, tmp_path / "w1", workers=1)
    res2, _ = run_experiment(cfg, tmp_path / "w2", workers=2)
    assert res1.read_text() == res2.read_text()


def test_main_end_to_end(tmp_path, capsys):
    rc = main(
        [
            "--out",
            str(tmp_path / "out"),
            "--seed",
            "9",
            "--topologies",
            "2",
            "--trials-per-layer",
            "1,1,2",
            "--protocol",
            "gf",
            "--set",
            "M=10",
            "--sweep",
            "dest_distance=0.3,0.5",
            "--quiet",
        ]
    )
    assert rc == 0
    results = (tmp_path / "out" / "results.csv").read_text().strip().splitlines()
    assert len(results) == 1 + 2
    assert (tmp_path / "out" / "manifest.txt").exists()


def test_main_rejects_bad_flags(tmp_path):
    assert main(["--set", "nonsense", "--quiet", "--out", str(tmp_path)]) == 2
    assert main(["--sweep", "dest_distance", "--quiet", "--out", str(tmp_path)]) == 2
    assert main(["--set", "mu=2", "--quiet", "--out", str(tmp_path)]) == 2


def test_config_round_trip_via_text():
    cfg = parse_config(None, {"dest_distance": "0.25,0.75", "seed": "11"})
    lines = cfg.to_text().splitlines()
    parsed = dict(line.split(" = ") for line in lines)
    assert parsed["dest_distance"] == "0.25,0.75"
    assert parsed["seed"] == "11"
