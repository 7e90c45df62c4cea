import pytest

from src.config import ConfigError, ExperimentConfig, coerce, load_config


def write(tmp_path, text):
    path = tmp_path / "experiment.conf"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_and_derived_q():
    cfg = load_config(env={})
    assert cfg.grid == 48
    assert cfg.taus == (1.0,)
    assert cfg.q == pytest.approx(1.5)
    assert cfg.describe()["q"] == pytest.approx(1.5)


def test_layering_file_env_overrides(tmp_path):
    path = write(tmp_path, "grid = 24\nlambdas = 1/2, 1, 2\nout = from_file\n")
    cfg = load_config(path, env={"KINVERIFY_OUT_DIR": "from_env", "KINVERIFY_WORKERS": "3"},
                      overrides={"grid": "16", "p": None})
    assert cfg.grid == 16
    assert cfg.lambdas == (0.5, 1.0, 2.0)
    assert cfg.out_dir == "from_env"
    assert cfg.workers == 3
    assert cfg.p == 2.0


def test_quick_profile_caps_resolution():
    cfg = load_config(env={}, overrides={"quick": True, "grid": "48", "kernel_nodes": "32"})
    assert cfg.quick
    assert cfg.grid == 32
    assert cfg.kernel_nodes == 12
    assert cfg.sample_stride == 8
    assert cfg.lambdas == (0.5, 1.0, 2.0)


def test_bad_value_reports_path_and_line(tmp_path):
    path = write(tmp_path, "# comment\ngrid = 48\np = three\n")
    with pytest.raises(ConfigError) as info:
        load_config(path, env={})
    assert info.value.line == 3
    assert str(info.value).startswith(f"{path}:3: ")


def test_missing_equals_reports_line(tmp_path):
    path = write(tmp_path, "grid = 48\n\ngrid 32\n")
    with pytest.raises(ConfigError) as info:
        load_config(path, env={})
    assert info.value.line == 3


def test_q_cannot_be_set(tmp_path):
    path = write(tmp_path, "q = 2\n")
    with pytest.raises(ConfigError, match="derived from p"):
        load_config(path, env={})


def test_unknown_key_and_invalid_values():
    with pytest.raises(ValueError, match="unknown key"):
        coerce("colour", "red")
    with pytest.raises(ConfigError):
        load_config(env={}, overrides={"taus": "1, -1"})
    with pytest.raises(ConfigError):
        load_config(env={"KINVERIFY_WORKERS": "many"})
    with pytest.raises(ConfigError):
        load_config("does/not/exist.conf", env={})


def test_sample_cloud_is_strided_subgrid():
    cfg = ExperimentConfig(grid=12, sample_stride=4)
    cloud = cfg.sample_cloud()
    assert cloud.t.shape == (27,)
    assert cloud.x.shape == (27, 1)
    assert cloud.is_finite()


def test_cloud_coverage_matches_the_cloud():
    cfg = ExperimentConfig()
    coverage = cfg.cloud_coverage()
    assert cfg.sample_stride == 3
    assert coverage["grid_shape"] == [48, 48, 48]
    assert coverage["offset"] == 1
    assert coverage["points"] == cfg.sample_cloud().t.size == 16**3
    assert coverage["fraction"] == pytest.approx(1 / 27)

    thinned = ExperimentConfig(grid=12, sample_stride=4).cloud_coverage(thin=8)
    assert thinned["points"] == len(range(0, 27, 8))


def test_spectral_grid_raises_x_axis_to_power_of_two():
    grid = ExperimentConfig(grid=24).spectral_grid()
    assert grid.shape == (24, 32, 24)
    assert grid.x_is_power_of_two


def test_post_init_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(grid=4)
    with pytest.raises(ValueError):
        ExperimentConfig(p=0.5)
    with pytest.raises(ValueError):
        ExperimentConfig(r_nodes=8)
