import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobshift.bench import (
    BenchError,
    EVAL_SPLITS,
    LinearModel,
    evaluate,
    fit_ridge,
    predict_persistence,
    rmse,
    run_bench,
)
from lobshift.cli import main as cli_main
from lobshift.kernel import derive_stream


# -- rmse --------------------------------------------------------------------


def test_rmse_zero_when_equal():
    assert rmse(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0


def test_rmse_unit_case():
    assert rmse(np.zeros(2), np.ones(2)) == 1.0


def test_rmse_hand_value():
    assert rmse(np.zeros(2), np.array([3.0, 4.0])) == pytest.approx(math.sqrt(12.5))


def test_rmse_rejects_mismatch_and_empty():
    with pytest.raises(BenchError):
        rmse(np.zeros(2), np.zeros(3))
    with pytest.raises(BenchError):
        rmse(np.zeros(0), np.zeros(0))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=40))
def test_rmse_permutation_invariant(pairs):
    preds = np.array([p for p, _ in pairs])
    truths = np.array([t for _, t in pairs])
    base = rmse(preds, truths)
    rng = np.random.default_rng(0)
    perm = rng.permutation(len(pairs))
    assert rmse(preds[perm], truths[perm]) == pytest.approx(base, rel=1e-12)


# -- persistence -------------------------------------------------------------------


def test_persistence_repeats_last_mid():
    assert predict_persistence(np.array([0.5, -1.0])).tolist() == [0.5, -1.0]


def test_persistence_rmse_on_random_walk_matches_increment_std():
    # h-step-ahead persistence error on a random walk = h-step increment
    rng = derive_stream(3, 0, 0, "walk")
    steps = rng.normal(0, 1.0, size=40_000)
    walk = np.cumsum(steps)
    h = 10
    last = walk[:-h]
    future = walk[h:]
    got = rmse(predict_persistence(last), future)
    want = float(np.std(future - last))
    assert abs(got - want) / want < 0.05


# -- ridge -------------------------------------------------------------------------


def planted_problem(n=60, shape=(2, 3), seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    d = int(np.prod(shape))
    X = rng.normal(0, 1, size=(n, *shape))
    w_true = rng.normal(0, 1, size=d)
    b_true = 0.7
    y = X.reshape(n, -1) @ w_true + b_true + noise * rng.normal(size=n)
    return X, y, w_true, b_true


def test_ridge_recovers_planted_weights_at_lambda_zero():
    X, y, w_true, b_true = planted_problem()
    model = fit_ridge(X, y, ridge_lambda=0.0)
    assert np.allclose(model.weights[:-1], w_true, atol=1e-6)
    assert model.weights[-1] == pytest.approx(b_true, abs=1e-6)
    assert np.allclose(model.predict(X), y, atol=1e-6)


def test_ridge_infinite_lambda_predicts_train_mean():
    X, y, *_ = planted_problem(seed=2)
    model = fit_ridge(X, y, ridge_lambda=1e12)
    assert np.all(np.abs(model.weights[:-1]) < 1e-9)
    assert model.weights[-1] == pytest.approx(float(y.mean()), rel=1e-6)


def test_ridge_duplicated_training_set_identical_model():
    X, y, *_ = planted_problem(seed=3)
    a = fit_ridge(X, y, ridge_lambda=0.5)
    b = fit_ridge(np.concatenate([X, X]), np.concatenate([y, y]), ridge_lambda=0.5)
    assert np.allclose(a.weights, b.weights, rtol=1e-10, atol=1e-12)


def test_ridge_rank_deficient_lambda_zero_errors():
    X, y, *_ = planted_problem(n=3)  # 3 samples, 6 features + bias
    with pytest.raises(BenchError, match="lambda > 0"):
        fit_ridge(X, y, ridge_lambda=0.0)


def test_ridge_objective_decreases_with_lambda():
    X, y, *_ = planted_problem(n=80, seed=4, noise=0.5)
    losses = []
    for lam in (10.0, 1.0, 0.1, 0.01):
        m = fit_ridge(X, y, ridge_lambda=lam)
        losses.append(float(np.mean((m.predict(X) - y) ** 2)))
    assert losses == sorted(losses, reverse=True)


def test_ridge_negative_lambda_and_empty_rejected():
    X, y, *_ = planted_problem()
    with pytest.raises(BenchError):
        fit_ridge(X, y, ridge_lambda=-1.0)
    with pytest.raises(BenchError):
        fit_ridge(X[:0], y[:0], 1.0)


# -- evaluation on a real mini export ------------------------------------------------


@pytest.fixture(scope="module")
def mini_export(tmp_path_factory, mini_dataset_dir):
    out = tmp_path_factory.mktemp("export")
    rc = cli_main([
        "dataset", "--in", str(mini_dataset_dir), "--out", str(out),
        "--horizon", "10", "--stride", "2", "--holdout", "0.5", "--normalize",
    ])
    assert rc == 0
    return out


def test_evaluate_persistence_report_shape(mini_export):
    report = run_bench(mini_export, model="persistence")
    assert set(report.rmse) == set(EVAL_SPLITS)
    for name in EVAL_SPLITS:
        assert math.isfinite(report.rmse[name]) and report.rmse[name] >= 0
        assert report.counts[name] > 0
    assert report.label_domain == "zscore-of-train-mid"
    table = report.to_table()
    assert "persistence" in table and "Large Shock" in table


def test_evaluate_ridge_and_report_determinism(mini_export, tmp_path):
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    f1 = tmp_path / "fig1.csv"
    run_bench(mini_export, model="ridge", ridge_lambda=1.0, report_path=p1, figure_csv=f1)
    run_bench(mini_export, model="ridge", ridge_lambda=1.0, report_path=p2)
    assert p1.read_bytes() == p2.read_bytes()
    report = json.loads(p1.read_text())
    assert report["model"] == "ridge" and report["ridge_lambda"] == 1.0
    assert report["source_root_seed"] == 99  # mini dataset's root seed
    lines = f1.read_text().splitlines()
    assert lines[0] == "day_index,scenario,regime,n_windows,rmse"
    assert any(",small," in l for l in lines[1:])
    assert any(",large," in l for l in lines[1:])


def test_unknown_model_rejected(mini_export):
    with pytest.raises(BenchError):
        run_bench(mini_export, model="oracle")
