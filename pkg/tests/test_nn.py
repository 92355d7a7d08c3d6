import math

import numpy as np
import pytest

from concrete_fatigue import nn
from concrete_fatigue.errors import CorruptFile, VersionMismatch, ZeroVariance


def _zero_model(bias=0.0):
    m = nn.init_model(seed=0)
    for w, b in zip(m.weights, m.biases):
        w[...] = 0.0
        b[...] = 0.0
    m.biases[-1][...] = bias
    return m


def test_scaler():
    sc = nn.Scaler()
    assert np.allclose(sc.transform([0.60, -0.30, 0.0]), 0.0)
    assert np.allclose(sc.transform([0.95, 0.30, 1.0]), 1.0)
    assert np.allclose(sc.transform([0.775, 0.0, 0.5]), 0.5)
    assert np.allclose(sc.inverse(sc.transform([0.7, 0.1, 0.3])), [0.7, 0.1, 0.3])
    with pytest.raises(ValueError):
        nn.Scaler(lo=(1, 0, 0), hi=(0, 1, 1))


def test_elu():
    assert nn.elu(np.array([0.0, 2.0])).tolist() == [0.0, 2.0]
    assert nn.elu(np.array([-1.0]))[0] == pytest.approx(math.exp(-1) - 1)


def test_zero_network():
    m = _zero_model()
    assert np.all(nn.predict_raw(m, [[0.8, 0.1, 0.2], [0.7, -0.2, 0.9]]) == 0.0)


def test_predict_clamp():
    assert nn.predict(_zero_model(0.4), 0.8, 0.1, 0.75) == 0.75
    assert nn.predict(_zero_model(1.2), 0.8, 0.1, 0.3) == 1.2
    m = nn.init_model(seed=5)
    x = np.random.default_rng(0).uniform([0.65, -0.25, 0], [0.9, 0.25, 1], size=(200, 3))
    assert np.all(nn.predict_many(m, x) >= x[:, 2])


def test_loss_examples():
    w = nn.LossWeights()
    m = _zero_model(1.0)
    total, _ = nn.loss_total(m, [[0.8, 0.1, 0.3]], [1.0], nn.make_collocation(), w)
    assert total == 0.0
    _, c = nn.loss_total(_zero_model(0.9), [[0.8, 0.1, 0.3]], [0.9], None, w)
    assert c["l_const"] == 0.0
    _, c = nn.loss_total(_zero_model(1.2), [[0.8, 0.1, 0.3]], [1.2], None, w)
    assert c["l_const"] == pytest.approx(0.5 * 0.04)
    _, c = nn.loss_total(_zero_model(0.8), [[0.7, -0.1, 0.3]], [0.8], None, w)
    assert c["l_const"] == pytest.approx(0.5 * 0.04)


def test_data_only_loss_is_mse():
    m = nn.init_model(seed=2)
    x = np.array([[0.8, 0.1, 0.3], [0.7, -0.15, 0.6]])
    t = np.array([0.9, 1.2])
    total, c = nn.loss_total(m, x, t, nn.make_collocation(), nn.LossWeights.data_only())
    assert total == c["l_data"]
    assert total == pytest.approx(np.mean((nn.predict_raw(m, x) - t) ** 2))


def _flat(model):
    return np.concatenate([p.ravel() for p in model.params()])


@pytest.mark.parametrize("weights", [nn.LossWeights.data_only(), nn.LossWeights()])
def test_gradient_check(weights):
    g = np.random.default_rng(4)
    m = nn.init_model(seed=3)
    x = g.uniform([0.65, -0.25, 0], [0.9, 0.25, 1], size=(24, 3))
    t = g.uniform(0.4, 1.6, size=24)
    colloc = nn.make_collocation()
    gw, gb = nn.gradients(m, x, t, colloc, weights)
    analytic = np.concatenate([a.ravel() for pair in zip(gw, gb) for a in pair])
    params = m.params()
    sizes = np.cumsum([0] + [p.size for p in params])
    worst = 0.0
    for k in g.choice(sizes[-1], size=100, replace=False):
        j = np.searchsorted(sizes, k, side="right") - 1
        flat = params[j].reshape(-1)
        i = k - sizes[j]
        h = 1e-6
        orig = flat[i]
        flat[i] = orig + h
        up, _ = nn.loss_total(m, x, t, colloc, weights)
        flat[i] = orig - h
        down, _ = nn.loss_total(m, x, t, colloc, weights)
        flat[i] = orig
        fd = (up - down) / (2 * h)
        worst = max(worst, abs(fd - analytic[k]) / max(abs(fd), abs(analytic[k]), 1e-7))
    assert worst < 1e-4


def test_training_reduces_loss_and_is_deterministic():
    g = np.random.default_rng(0)
    x = g.uniform([0.65, -0.25, 0], [0.9, 0.25, 1], size=(40, 3))
    t = 1 - 0.5 * x[:, 1] * np.sin(np.pi * x[:, 2])
    cfg = nn.TrainingConfig(max_epochs=60, batch_size=8, learning_rate=1e-3, seed=7)
    m1, h1 = nn.train(x, t, train_cfg=cfg)
    m2, h2 = nn.train(x, t, train_cfg=cfg)
    assert h1.rows == h2.rows
    assert all(np.array_equal(a, b) for a, b in zip(m1.params(), m2.params()))
    assert h1.rows[-1]["l_total"] < h1.rows[0]["l_total"]
    assert h1.stop_reason == "max_epochs"


def test_early_stopping_restores_best():
    g = np.random.default_rng(1)
    x = g.uniform([0.65, -0.25, 0], [0.9, 0.25, 1], size=(20, 3))
    t = np.ones(20)
    cfg = nn.TrainingConfig(max_epochs=500, patience=3, learning_rate=5e-2, seed=1)
    m, h = nn.train(x, t, train_cfg=cfg, x_val=x[:5], t_val=t[:5])
    best = h.rows[h.best_epoch - 1]["l_val"]
    assert best == min(r["l_val"] for r in h.rows)
    assert np.mean((nn.predict_raw(m, x[:5]) - t[:5]) ** 2) == pytest.approx(best, rel=1e-12)


def test_history_csv(tmp_path):
    x = np.array([[0.8, 0.1, 0.3], [0.7, -0.1, 0.5]])
    _, h = nn.train(x, [0.9, 1.1], train_cfg=nn.TrainingConfig(max_epochs=3))
    path = tmp_path / "h.csv"
    h.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == nn.HISTORY_HEADER and len(lines) == 4


def test_r2():
    assert nn.r2_score([1, 2, 3], [1, 2, 3]) == 1.0
    assert nn.r2_score([2, 2, 2], [1, 2, 3]) == 0.0
    assert nn.r2_score([1, 2, 3], [1, 2, 4]) == pytest.approx(1 - 1 / (14 / 3))
    with pytest.raises(ZeroVariance):
        nn.r2_score([1, 1], [2, 2])


def test_save_load(tmp_path):
    m = nn.init_model(seed=9)
    m.biases[3][...] = 0.123456789012345
    path = tmp_path / "m.txt"
    nn.save(m, path)
    back = nn.load(path)
    x = np.random.default_rng(0).uniform([0.65, -0.25, 0], [0.9, 0.25, 1], size=(50, 3))
    assert np.array_equal(nn.predict_raw(m, x), nn.predict_raw(back, x))
    text = path.read_text()
    (tmp_path / "t.txt").write_text(text[: len(text) // 2])
    with pytest.raises(CorruptFile):
        nn.load(tmp_path / "t.txt")
    (tmp_path / "v.txt").write_text(text.replace(f"version {nn.FORMAT_VERSION}", "version 99"))
    with pytest.raises(VersionMismatch):
        nn.load(tmp_path / "v.txt")
