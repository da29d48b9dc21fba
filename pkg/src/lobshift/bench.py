"""Classical forecasting baselines and per-split RMSE evaluation.

Two models run without any learning framework: persistence (repeat the
window's last mid) and ridge-regularized linear autoregression on the
flattened 100x40 window. Reports carry the RMSE per evaluation split in the
same three-column shape as the deep harness.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import EXPORT_DESCRIPTOR, SplitTensors, load_split

EVAL_SPLITS = ("test_iid", "test_small", "test_large")
_CHUNK = 512  # windows per normal-equation accumulation block


class BenchError(ValueError):
    pass


@dataclass
class LinearModel:
    """Flattened-window linear predictor; the last weight is the bias."""

    weights: np.ndarray  # (n_features_flat + 1,)
    ridge_lambda: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        flat = X.reshape(X.shape[0], -1).astype(np.float64)
        return flat @ self.weights[:-1] + self.weights[-1]


@dataclass
class EvalReport:
    model: str
    label_domain: str
    rmse: dict[str, float]  # split name -> rmse
    counts: dict[str, int]
    config_fingerprint: str
    ridge_lambda: float | None = None
    source_root_seed: int | None = None

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "label_domain": self.label_domain,
            "rmse": self.rmse,
            "counts": self.counts,
            "config_fingerprint": self.config_fingerprint,
        }
        if self.ridge_lambda is not None:
            out["ridge_lambda"] = self.ridge_lambda
        if self.source_root_seed is not None:
            out["source_root_seed"] = self.source_root_seed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        """Three-column text table: IID / small shock / large shock."""
        header = f"{'model':<14}{'IID':>12}{'Small Shock':>14}{'Large Shock':>14}"
        row = (
            f"{self.model:<14}"
            f"{self.rmse['test_iid']:>12.4f}"
            f"{self.rmse['test_small']:>14.4f}"
            f"{self.rmse['test_large']:>14.4f}"
        )
        return header + "\n" + row


def rmse(preds: np.ndarray, truths: np.ndarray) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if preds.shape != truths.shape or preds.size == 0:
        raise BenchError("rmse needs equal-length, non-empty inputs")
    return float(np.sqrt(np.mean(np.square(preds - truths))))


def predict_persistence(last_mid: np.ndarray) -> np.ndarray:
    """Forecast = the window's final mid, in whatever domain labels live in."""
    return np.asarray(last_mid, dtype=np.float64)


def fit_ridge(X: np.ndarray, y: np.ndarray, ridge_lambda: float = 1.0) -> LinearModel:
    """Solve the ridge normal equations on flattened windows.

    The objective is mean squared error plus lambda * ||w||^2, so duplicating
    the training set leaves the solution unchanged. The bias column is never
    penalized, so lambda -> inf drives predictions to the training mean.
    lambda = 0 on a rank-deficient design fails the Cholesky factorization
    and raises with advice.
    """
    if len(X) < 1:
        raise BenchError("need at least one training sample")
    if ridge_lambda < 0:
        raise BenchError("lambda must be non-negative")
    n = X.shape[0]
    d = int(np.prod(X.shape[1:])) + 1
    gram = np.zeros((d, d), dtype=np.float64)
    rhs = np.zeros(d, dtype=np.float64)
    for lo in range(0, n, _CHUNK):
        block = X[lo : lo + _CHUNK].reshape(-1, d - 1).astype(np.float64)
        block = np.hstack([block, np.ones((block.shape[0], 1))])
        gram += block.T @ block
        rhs += block.T @ np.asarray(y[lo : lo + _CHUNK], dtype=np.float64)
    gram /= n
    rhs /= n
    penalty = np.full(d, ridge_lambda)
    penalty[-1] = 0.0  # free bias
    gram[np.diag_indices(d)] += penalty
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as err:
        raise BenchError(
            "normal equations are rank-deficient; refit with lambda > 0"
        ) from err
    w = _cho_solve(chol, rhs)
    if not np.all(np.isfinite(w)):
        raise BenchError("ridge solution is not finite")
    return LinearModel(weights=w, ridge_lambda=ridge_lambda)


def _cho_solve(chol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_triangular

    z = solve_triangular(chol, rhs, lower=True)
    return solve_triangular(chol.T, z, lower=False)


def evaluate(
    predict_fn,
    splits: dict[str, SplitTensors],
    model_name: str,
    label_domain: str,
    fingerprint: str,
    ridge_lambda: float | None = None,
    source_root_seed: int | None = None,
) -> EvalReport:
    """RMSE of `predict_fn(split) -> predictions` on every evaluation split."""
    rmses: dict[str, float] = {}
    counts: dict[str, int] = {}
    for name in EVAL_SPLITS:
        split = splits[name]
        if split.y.size == 0:
            raise BenchError(f"split {name} is empty")
        preds = predict_fn(split)
        rmses[name] = rmse(preds, split.y.astype(np.float64))
        counts[name] = int(split.y.size)
    return EvalReport(
        model=model_name,
        label_domain=label_domain,
        rmse=rmses,
        counts=counts,
        config_fingerprint=fingerprint,
        ridge_lambda=ridge_lambda,
        source_root_seed=source_root_seed,
    )


def run_bench(
    dataset_dir,
    model: str = "persistence",
    ridge_lambda: float = 1.0,
    report_path=None,
    figure_csv=None,
) -> EvalReport:
    """Load an export, fit/evaluate the requested model, optionally persist
    the report and a per-day pre/post-shock RMSE CSV."""
    dataset_dir = Path(dataset_dir)
    descriptor = json.loads((dataset_dir / EXPORT_DESCRIPTOR).read_text())
    splits = {
        name: load_split(dataset_dir, name)
        for name in ("train", "test_iid", "test_small", "test_large")
    }
    fingerprint = _fingerprint(descriptor, model, ridge_lambda)
    label_domain = descriptor.get("label_domain", "unknown")
    source_seed = descriptor.get("source_root_seed")

    if model == "persistence":
        predict_fn = lambda split: predict_persistence(split.last_mid)
        report = evaluate(
            predict_fn, splits, "persistence", label_domain, fingerprint,
            source_root_seed=source_seed,
        )
    elif model == "ridge":
        train = splits["train"]
        fitted = fit_ridge(train.X, train.y.astype(np.float64), ridge_lambda)
        predict_fn = lambda split: fitted.predict(split.X)
        report = evaluate(
            predict_fn, splits, "ridge", label_domain, fingerprint,
            ridge_lambda=ridge_lambda, source_root_seed=source_seed,
        )
    else:
        raise BenchError(f"unknown model {model!r}")

    if report_path is not None:
        Path(report_path).write_text(report.to_json())
    if figure_csv is not None:
        _write_figure_csv(Path(figure_csv), predict_fn, splits)
    return report


def _fingerprint(descriptor: dict, model: str, ridge_lambda: float) -> str:
    payload = json.dumps(
        {"descriptor": descriptor, "model": model, "lambda": ridge_lambda}, sort_keys=True
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _write_figure_csv(path: Path, predict_fn, splits: dict[str, SplitTensors]) -> None:
    """Per shock day: RMSE before vs after the shock, by shock scenario."""
    per_day: dict[tuple[int, str, str], list[float]] = {}
    for name in EVAL_SPLITS:
        split = splits[name]
        preds = np.asarray(predict_fn(split), dtype=np.float64)
        errs = np.square(preds - split.y.astype(np.float64))
        for err, day, scenario, regime in zip(
            errs, split.meta["day_index"], split.meta["scenario"], split.meta["regime"]
        ):
            if scenario == "ordinary":
                continue
            per_day.setdefault((day, scenario, regime), []).append(float(err))
    lines = ["day_index,scenario,regime,n_windows,rmse"]
    for (day, scenario, regime), errs in sorted(per_day.items()):
        lines.append(
            f"{day},{scenario},{regime},{len(errs)},{np.sqrt(np.mean(errs)):.6f}"
        )
    path.write_text("\n".join(lines) + "\n")
