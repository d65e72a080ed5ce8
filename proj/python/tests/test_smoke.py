import math

import numpy as np
import pytest

import sibp


@pytest.fixture(scope="module")
def task():
    X, y = sibp.generate_synthetic(num_points=60, num_classes=4, seed=3)
    T = sibp.generate_triplets(y, L=5, seed=4)
    return np.asarray(X), np.asarray(y), T


def small_config(seed=1):
    c = sibp.ChainConfig()
    c.sweeps = 60
    c.burn_in = 30
    c.thin = 5
    c.seed = seed
    return c


def test_synthetic_shapes(task):
    X, y, T = task
    assert X.shape == (60, 2)
    assert sorted(set(y.tolist())) == [0, 1, 2, 3]
    assert T.shape == (60 * 5, 3)
    assert all(y[i] == y[j] and y[i] != y[l] for i, j, l in T)


def test_preference_prob_is_normalized():
    rng = np.random.default_rng(0)
    for _ in range(200):
        zi, zj, zl = rng.integers(0, 2, size=(3, 6), dtype=np.uint8)
        w = rng.gamma(1.0, 1.0, size=6)
        assert sibp.preference_prob(zi, zj, zl, w) + sibp.preference_prob(zi, zl, zj, w) == pytest.approx(1.0, abs=1e-12)


def test_preference_prob_example():
    # Toward mass 2 (bit 0), away mass 5 (bit 1).
    zi = np.array([1, 1], dtype=np.uint8)
    zj = np.array([1, 0], dtype=np.uint8)
    zl = np.array([0, 1], dtype=np.uint8)
    assert sibp.preference_prob(zi, zj, zl, [2.0, 5.0]) == pytest.approx(2.0 / 7.0)


def test_collapsed_evidence_matches_marginal_gaussian():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(4, 2))
    Z = np.array([[1, 0], [1, 1], [0, 1], [0, 0]], dtype=np.uint8)
    sx, sv = 0.8, 1.3
    C = sx**2 * np.eye(4) + sv**2 * Z @ Z.T
    _, logdet = np.linalg.slogdet(C)
    expected = sum(-0.5 * (4 * math.log(2 * math.pi) + logdet + x @ np.linalg.solve(C, x)) for x in X.T)
    assert sibp.collapsed_log_evidence(X, Z, sx, sv) == pytest.approx(expected, rel=1e-10)


def test_activation_with_zero_regression():
    for b in [1e-6, 0.2, 0.5, 0.9]:
        assert sibp.feature_activation_prob(np.array([3.0, -1.0]), np.zeros(2), b) == pytest.approx(b, abs=1e-12)


def test_hamming_and_knn():
    db = np.array([[0, 0, 0], [1, 1, 1], [1, 1, 0]], dtype=np.uint8)
    assert sibp.hamming(db[0], db[1]) == 3
    assert sibp.knn_classify(np.array([1, 1, 1], dtype=np.uint8), db, [0, 1, 2], k=1) == 1


@pytest.mark.parametrize("model", ["gaussian", "probit"])
def test_train_predict_evaluate(task, model):
    X, y, T = task
    trace = sibp.train(model, X, T, config=small_config())
    assert trace.model == model
    assert len(trace) == 1 + 60 // 5
    last = trace.samples[-1]
    assert last.Z.shape[0] == 60
    codes = sibp.predict_codes(trace, X, X)
    assert codes.shape == (60, last.Z.shape[1])
    report = sibp.evaluate(trace, X, y, X, y, k_list=[1, 3], mode="average", num_samples=5)
    assert set(report) == {1, 3}
    assert all(0.0 <= mean <= 1.0 for mean, _ in report.values())
    sat = sibp.triplet_satisfaction(last.Z, T)
    assert 0.0 <= sat <= 1.0


def test_training_is_deterministic(task):
    X, _, T = task
    a = sibp.train("probit", X, T, config=small_config(seed=9))
    b = sibp.train("probit", X, T, config=small_config(seed=9))
    assert np.array_equal(a.samples[-1].Z, b.samples[-1].Z)
    assert a.samples[-1].log_posterior == b.samples[-1].log_posterior


def test_hash_extension(task):
    X, y, T = task
    H = sibp.class_hash_fixture(y.tolist())
    assert H.shape == (60, 5)
    trace = sibp.train("gaussian", X, T, hash=H, config=small_config())
    assert len(trace.samples[-1].wH) == 5


def test_trace_round_trip(task, tmp_path):
    X, _, T = task
    trace = sibp.train("gaussian", X, T, config=small_config())
    path = str(tmp_path / "trace.jsonl")
    trace.save(path)
    loaded = sibp.load_trace(path)
    assert len(loaded) == len(trace)
    assert np.array_equal(loaded.samples[-1].Z, trace.samples[-1].Z)


def test_invalid_config_raises(task):
    X, _, T = task
    c = small_config()
    c.init_features = c.max_features + 1
    with pytest.raises(ValueError):
        sibp.train("gaussian", X, T, config=c)
