import os

import numpy as np
import pytest

from gibbschain import cli, csvio
from gibbschain.config import ExperimentConfig, load_config, parse_config_text
from gibbschain.errors import ConfigError
from gibbschain.experiments import run_experiment


def test_parse_config_text():
    raw = parse_config_text("""
# comment
experiment = lr_sweep
n = 8            # trailing comment
beta_list = 0.5, 1.0
""")
    assert raw == {"experiment": "lr_sweep", "n": "8", "beta_list": "0.5, 1.0"}
    with pytest.raises(ConfigError):
        parse_config_text("just a line without equals")


def test_load_config_round_trip(tmp_path):
    cfg = ExperimentConfig(experiment="clustering_sweep", n=6, beta_list=(0.4, 0.9),
                           r_list=(1, 2, 3), coupling=0.7)
    path = tmp_path / "run.cfg"
    path.write_text("\n".join(cfg.as_lines()))
    assert load_config(path, environ={}) == cfg


def test_env_and_cli_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("experiment = clustering_sweep\nn = 6\nseed = 1\n")
    cfg = load_config(path, environ={"GIBBSCHAIN_SEED": "5"})
    assert cfg.seed == 5
    cfg2 = load_config(path, overrides={"seed": 9}, environ={"GIBBSCHAIN_SEED": "5"})
    assert cfg2.seed == 9


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        load_config(None, overrides={"experiment": "nope"}, environ={})
    with pytest.raises(ConfigError):
        load_config(None, overrides={"n": 1}, environ={})
    with pytest.raises(ConfigError):
        load_config(None, overrides={"bogus_key": 1}, environ={})
    # interior width 7 with block_len 2 is not an even block count
    with pytest.raises(ConfigError):
        load_config(None, overrides={"experiment": "qbp_locality", "n": 9,
                                     "block_len": 2}, environ={})
    with pytest.raises(ConfigError):
        load_config(None, overrides={"n": 14}, environ={})  # above dim cap


def test_csv_format_and_body_bytes(tmp_path):
    path = tmp_path / "x.csv"
    csvio.write_csv(path, ["header text"], ("a", "b"), [(1.5, True), (0.1, False)])
    text = path.read_text()
    assert text.startswith("# header text\na,b\n1.5,1\n")
    body = csvio.csv_body_bytes(path)
    assert b"header" not in body


def test_lr_sweep_empty_grid(tmp_path):
    cfg = ExperimentConfig(experiment="lr_sweep", n=6, generator="ising_zz",
                           profile="finite_range", range_cutoff=1, t_grid=())
    m = run_experiment(cfg, output_dir=str(tmp_path))
    assert m.all_passed
    body = csvio.csv_body_bytes(tmp_path / "lr_sweep.csv")
    assert body.strip().count(b"\n") == 0  # header row only
    assert (tmp_path / "manifest.txt").exists()


def test_truncation_sweep_experiment(tmp_path):
    cfg = ExperimentConfig(experiment="truncation_sweep", n=10,
                           generator="heisenberg_xxz", profile="power_law",
                           alpha=3.0, coupling=0.01, beta_list=(0.3,),
                           block_len_list=(1, 2))
    m = run_experiment(cfg, output_dir=str(tmp_path))
    assert m.all_passed
    assert any(name == "truncation_sweep.csv" for name, _, _ in m.files)


def test_gamma_decay_experiment(tmp_path):
    cfg = ExperimentConfig(experiment="gamma_decay", generator="ising_zz",
                           profile="finite_range", range_cutoff=1, coupling=1.0,
                           beta_list=(0.6, 1.0), m_list=(0, 1, 2), half_width=1,
                           tau_steps=8)
    m = run_experiment(cfg, output_dir=str(tmp_path))
    assert m.all_passed
    taus = {label: v for label, v in m.fitted if label.startswith("tau")}
    assert len(taus) == 2
    assert all(v > 0 for v in taus.values())


def test_qbp_locality_experiment(tmp_path):
    cfg = ExperimentConfig(experiment="qbp_locality", n=10,
                           generator="heisenberg_xxz", profile="power_law",
                           alpha=3.0, coupling=0.25, seed=4, beta_list=(0.5,),
                           block_len=1, bond_index=1, radius_list=(7,),
                           tau_steps=8, integrator="midpoint")
    m = run_experiment(cfg, output_dir=str(tmp_path))
    assert m.all_passed
    fits = dict(m.fitted)
    assert "theta0" in fits and "theta1" in fits


def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "ok.cfg"
    cfg_path.write_text(
        "experiment = clustering_sweep\nn = 6\ngenerator = ising_zz\n"
        "profile = finite_range\nrange_cutoff = 1\nbeta_list = 0.5,0.9\n"
    )
    out = tmp_path / "out"
    code = cli.main(["run", str(cfg_path), "--output-dir", str(out)])
    assert code == 0
    assert (out / "clustering_sweep.csv").exists()
    assert (out / "manifest.txt").exists()

    bad = tmp_path / "bad.cfg"
    bad.write_text("experiment = not_an_experiment\n")
    assert cli.main(["run", str(bad)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_determinism_same_seed(tmp_path):
    cfg = ExperimentConfig(experiment="clustering_sweep", n=8, generator="ising_zz",
                           profile="finite_range", range_cutoff=1,
                           beta_list=(0.4, 0.8), seed=3)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_experiment(cfg, output_dir=str(d1))
    run_experiment(cfg, output_dir=str(d2))
    assert csvio.csv_body_bytes(d1 / "clustering_sweep.csv") == csvio.csv_body_bytes(
        d2 / "clustering_sweep.csv"
    )


def test_threads_do_not_change_output(tmp_path):
    base = ExperimentConfig(experiment="clustering_sweep", n=8, generator="ising_zz",
                            profile="finite_range", range_cutoff=1,
                            beta_list=(0.4, 0.8, 1.2), seed=3)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_experiment(base, output_dir=str(d1))
    import dataclasses
    run_experiment(dataclasses.replace(base, threads=2), output_dir=str(d2))
    assert csvio.csv_body_bytes(d1 / "clustering_sweep.csv") == csvio.csv_body_bytes(
        d2 / "clustering_sweep.csv"
    )


def test_bundled_configs_parse():
    import glob
    paths = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "..", "configs", "*.cfg")))
    assert len(paths) >= 6
    for path in paths:
        cfg = load_config(path, environ={})
        assert cfg.experiment
