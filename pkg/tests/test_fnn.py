import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wheelflat import fnn
from wheelflat.dataset import Dataset


def toy_dataset(rng, n_per=40, level=0):
    """Four well separated clusters, one per wheel, with two flat heights each."""
    width = 4 * 2**level
    feats, labels = [], []
    for p in range(4):
        for y in (0.4, 1.0):
            centre = np.zeros(width)
            centre[p * 2**level : (p + 1) * 2**level] = 3.0 * y
            feats.append(centre + 0.05 * rng.standard_normal((n_per, width)))
            lab = np.zeros((n_per, 4))
            lab[:, p] = y
            labels.append(lab)
    return Dataset(np.vstack(feats), np.vstack(labels), level)


def test_zero_weights_give_zero_output():
    model = fnn.init_model(8)
    model.set_params(np.zeros_like(model.params()))
    np.testing.assert_array_equal(fnn.forward(model, np.ones((3, 8))), 0.0)


def test_linear_regime_matches_product_of_weights(rng):
    model = fnn.init_model(4, seed=1)
    for b in model.biases:
        b[:] = 0.0
    model.weights = [w * 1e-3 for w in model.weights]
    x = rng.standard_normal((5, 4))
    linear = x @ model.weights[0].T @ model.weights[1].T @ model.weights[2].T
    np.testing.assert_allclose(fnn.forward(model, x), linear, rtol=1e-5, atol=0)


def test_forward_accepts_single_vector(rng):
    model = fnn.init_model(16, seed=2)
    x = rng.standard_normal((3, 16))
    np.testing.assert_allclose(fnn.forward(model, x[1]), fnn.forward(model, x)[1], rtol=1e-12, atol=1e-15)
    with pytest.raises(ValueError, match="expected 16"):
        fnn.forward(model, x[:, :8])


def test_layer_sizes():
    model = fnn.init_model(256)
    assert model.layer_sizes == [256, 32, 16, 4]
    assert model.params().size == 256 * 32 + 32 + 32 * 16 + 16 + 16 * 4 + 4


@pytest.mark.parametrize("seed", range(20))
def test_gradient_against_central_differences(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice([4, 8, 16]))
    model = fnn.init_model(d, seed=seed)
    sizes = model.layer_sizes
    z = rng.standard_normal((12, d))
    y = rng.random((12, 4))
    theta = model.params()
    _, grad = fnn.loss_and_grad(theta, sizes, z, y)
    delta = 1e-5
    num = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = delta
        fp, _ = fnn.loss_and_grad(theta + e, sizes, z, y, want_grad=False)
        fm, _ = fnn.loss_and_grad(theta - e, sizes, z, y, want_grad=False)
        num[i] = (fp - fm) / (2 * delta)
    rel = np.linalg.norm(grad - num) / max(np.linalg.norm(grad), np.linalg.norm(num))
    assert rel < 1e-5


def test_scg_solves_separable_toy(rng):
    data = toy_dataset(rng)
    model, report = fnn.train(data, fnn.TrainConfig(max_iter=500, val_fraction=0.0, seed=3))
    assert report.final_mse < 1e-3
    assert report.iterations <= 500
    pred = fnn.forward(model, data.features)
    assert np.all(np.argmax(pred, axis=1) == data.positions)


def test_mse_history_is_monotone(rng):
    _, report = fnn.train(toy_dataset(rng), fnn.TrainConfig(max_iter=60, val_fraction=0.0))
    h = np.array(report.mse_history)
    assert np.all(np.diff(h) <= 1e-15)
    assert report.final_mse == h[-1]


def test_scg_on_quadratic_converges():
    a = np.diag(np.arange(1.0, 11.0))
    fun = lambda th: (0.5 * th @ a @ th, a @ th)  # noqa: E731
    theta, history, iters, reason = fnn.scg(fun, np.ones(10), fnn.TrainConfig(max_iter=200))
    assert np.abs(theta).max() < 1e-5
    assert reason == "grad_tol"


def test_zero_variance_column_is_harmless(rng):
    data = toy_dataset(rng)
    feats = data.features.copy()
    feats[:, 2] = 7.0
    model, report = fnn.train(Dataset(feats, data.labels, 0), fnn.TrainConfig(max_iter=20))
    assert model.sigma[2] == 1.0 and model.mu[2] == 7.0
    assert np.isfinite(report.final_mse)
    assert np.all(np.isfinite(fnn.forward(model, feats)))


def test_duplicated_dataset_gives_same_model(rng):
    data = toy_dataset(rng, n_per=10)
    doubled = Dataset(np.vstack([data.features] * 2), np.vstack([data.labels] * 2), 0)
    cfg = fnn.TrainConfig(max_iter=15, val_fraction=0.0)
    m1, r1 = fnn.train(data, cfg)
    m2, r2 = fnn.train(doubled, cfg)
    np.testing.assert_allclose(m1.params(), m2.params(), rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(r1.mse_history, r2.mse_history, rtol=1e-9)


def test_normalization_uses_training_rows_only(rng):
    data = toy_dataset(rng)
    model, report = fnn.train(data, fnn.TrainConfig(max_iter=1, val_fraction=0.2))
    z = (data.features[report.train_idx] - model.mu) / model.sigma
    assert np.abs(z.mean(axis=0)).max() < 1e-9
    np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-9)


def test_training_is_deterministic(rng):
    data = toy_dataset(rng)
    cfg = fnn.TrainConfig(max_iter=25, seed=9)
    m1, r1 = fnn.train(data, cfg)
    m2, r2 = fnn.train(data, cfg)
    np.testing.assert_array_equal(m1.params(), m2.params())
    np.testing.assert_array_equal(r1.val_idx, r2.val_idx)


def test_different_seeds_differ(rng):
    data = toy_dataset(rng)
    m1, _ = fnn.train(data, fnn.TrainConfig(max_iter=5, seed=1))
    m2, _ = fnn.train(data, fnn.TrainConfig(max_iter=5, seed=2))
    assert not np.array_equal(m1.params(), m2.params())


def test_stratified_split_proportions(rng):
    data = toy_dataset(rng, n_per=25)
    train_idx, val_idx = fnn.stratified_split(data, 0.2, seed=0)
    assert len(val_idx) == 40 and len(train_idx) == 160
    assert not set(train_idx) & set(val_idx)
    for p in range(4):
        for b in np.unique(data.height_bins):
            group = (data.positions == p) & (data.height_bins == b)
            assert np.sum(group[val_idx]) == 5


@settings(max_examples=20)
@given(st.floats(0.05, 0.5), st.integers(0, 1000))
def test_split_partitions_rows(fraction, seed):
    data = toy_dataset(np.random.default_rng(0), n_per=7)
    train_idx, val_idx = fnn.stratified_split(data, fraction, seed)
    np.testing.assert_array_equal(np.sort(np.concatenate([train_idx, val_idx])), np.arange(len(data)))


def test_save_load_round_trip(tmp_path, rng):
    model, _ = fnn.train(toy_dataset(rng), fnn.TrainConfig(max_iter=5, seed=4))
    path = tmp_path / "m.json"
    fnn.save(model, path)
    back = fnn.load(path)
    np.testing.assert_array_equal(back.params(), model.params())
    np.testing.assert_array_equal(back.mu, model.mu)
    np.testing.assert_array_equal(back.sigma, model.sigma)
    assert back.config == model.config and back.seed == 4
    x = rng.standard_normal((10, 4))
    np.testing.assert_array_equal(fnn.forward(back, x), fnn.forward(model, x))


def test_load_truncated_file(tmp_path):
    path = tmp_path / "m.json"
    fnn.save(fnn.init_model(4), path)
    path.write_text(path.read_text()[:200])
    with pytest.raises(fnn.ModelFormatError, match="m.json"):
        fnn.load(path)


def test_load_version_mismatch(tmp_path):
    path = tmp_path / "m.json"
    fnn.save(fnn.init_model(4), path)
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(fnn.ModelFormatError, match="expected 1, found 99"):
        fnn.load(path)


def test_load_wrong_parameter_count(tmp_path):
    path = tmp_path / "m.json"
    fnn.save(fnn.init_model(4), path)
    doc = json.loads(path.read_text())
    doc["weights"][1] = doc["weights"][1][:-1]
    path.write_text(json.dumps(doc))
    with pytest.raises(fnn.ModelFormatError, match="wrong parameter count"):
        fnn.load(path)


def test_train_rejects_bad_input(rng):
    data = toy_dataset(rng)
    feats = data.features.copy()
    feats[0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        fnn.train(Dataset(feats, data.labels, 0))
    with pytest.raises(ValueError):
        fnn.TrainConfig(val_fraction=1.0)
    with pytest.raises(ValueError):
        replace(fnn.TrainConfig(), max_iter=-1)


def test_report_round_trip(tmp_path, rng):
    _, report = fnn.train(toy_dataset(rng), fnn.TrainConfig(max_iter=3))
    report.save(tmp_path / "r.json")
    back = fnn.TrainReport.load(tmp_path / "r.json")
    np.testing.assert_array_equal(back.val_idx, report.val_idx)
    assert back.mse_history == report.mse_history
