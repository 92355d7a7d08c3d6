import pytest

from concrete_fatigue.config import load_config, rng
from concrete_fatigue.errors import ConfigError


def test_defaults():
    cfg = load_config()
    assert cfg.get("simulation.levels") == (0.65, 0.70, 0.75, 0.80, 0.85, 0.90)
    assert cfg.material().youngs_modulus == pytest.approx(45000.0)
    assert cfg.discretization().substeps == 20


def test_file_and_overrides(tmp_path, monkeypatch):
    path = tmp_path / "c.ini"
    path.write_text("[material]\nK = 0.005\n[simulation]\nlevels = 0.8, 0.9\n")
    cfg = load_config(path, ["run.seed=7", "material.clamp_yield=yes"])
    assert cfg.get("material.K") == 0.005
    assert cfg.get("simulation.levels") == (0.8, 0.9)
    assert cfg.seed == 7 and cfg.material().clamp_yield
    monkeypatch.setenv("CONCRETE_FATIGUE_CONFIG", str(path))
    assert load_config().get("material.K") == 0.005


@pytest.mark.parametrize("override", ["nosection=1", "run.bogus=1", "run.seed=abc", "run.seed"])
def test_bad_overrides(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_bad_material():
    with pytest.raises(ConfigError):
        load_config(overrides=["material.mu=-1"]).material()


def test_fingerprint_ignores_threads():
    a = load_config(overrides=["run.threads=1"])
    b = load_config(overrides=["run.threads=8"])
    c = load_config(overrides=["run.seed=1"])
    assert a.fingerprint() == b.fingerprint() != c.fingerprint()
    assert "[material]" in a.to_text()


def test_streams_are_independent():
    a = rng(0, "split").random(3)
    assert (a == rng(0, "split").random(3)).all()
    assert not (a == rng(0, "nn-init").random(3)).all()
    assert not (a == rng(1, "split").random(3)).all()
