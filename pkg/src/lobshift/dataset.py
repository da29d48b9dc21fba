"""Dataset builder: 40-feature records, sliding windows with regression
labels, regime flags around the shock instant, train-only normalization,
splits, and the binary tensor export consumed by external model harnesses.

Day files are CSV with header time,pa1,va1,pb1,vb1,...,pa10,va10,pb10,vb10,mid
(times integer ns, prices integer cents, mid in cents with one decimal).
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .book import LobSnapshot, mid_price
from .kernel import SimTime, derive_stream
from .scenario import DayRecord

N_LEVELS = 10
N_FEATURES = 4 * N_LEVELS
WINDOW = 100

DAY_CSV_HEADER = "time," + ",".join(
    f"{name}{level}" for level in range(1, N_LEVELS + 1) for name in ("pa", "va", "pb", "vb")
) + ",mid"

REGIMES = ("no_shock", "pre_shock", "post_shock")


class DatasetError(ValueError):
    pass


def extract_features(snapshot: LobSnapshot) -> np.ndarray:
    """40-vector [pa1, va1, pb1, vb1, ..., pa10, va10, pb10, vb10] in cents/units."""
    mid_price(snapshot)  # raises on a padded best level; caller counts the drop
    out = np.empty(N_FEATURES, dtype=np.float64)
    for i in range(N_LEVELS):
        ap, av = snapshot.asks[i]
        bp, bv = snapshot.bids[i]
        out[4 * i : 4 * i + 4] = (ap, av, bp, bv)
    return out


def day_arrays(day: DayRecord) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times int64[N], features float64[N,40], mids float64[N]) for one day."""
    n = len(day.snapshots)
    times = np.empty(n, dtype=np.int64)
    feats = np.empty((n, N_FEATURES), dtype=np.float64)
    mids = np.empty(n, dtype=np.float64)
    for row, snap in enumerate(day.snapshots):
        times[row] = snap.time
        feats[row] = extract_features(snap)
        mids[row] = (snap.asks[0][0] + snap.bids[0][0]) / 2.0
    return times, feats, mids


def write_day_csv(path, times: np.ndarray, feats: np.ndarray, mids: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(DAY_CSV_HEADER + "\n")
        for t, row, mid in zip(times, feats, mids):
            cells = [str(int(t))] + [str(int(v)) for v in row] + [f"{mid:.1f}"]
            fh.write(",".join(cells) + "\n")


def read_day_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.empty((0, N_FEATURES), dtype=np.float64),
            np.empty(0, dtype=np.float64),
        )
    if data.shape[1] != N_FEATURES + 2:
        raise DatasetError(f"{path}: expected {N_FEATURES + 2} columns, got {data.shape[1]}")
    times = data[:, 0].astype(np.int64)
    feats = data[:, 1 : 1 + N_FEATURES]
    mids = data[:, -1]
    return times, feats, mids


@dataclass
class WindowSample:
    """One forecasting sample: trailing window, future-mid label, regime tag.

    X is a zero-copy view into the day's feature matrix.
    """

    X: np.ndarray  # (100, 40)
    y: float  # mid h records after the window's last record
    last_mid: float  # mid of the window's last record (persistence anchor)
    day_index: int
    scenario: str
    regime: str
    end_time: SimTime
    trend: int | None = None  # -1 down / 0 stationary / +1 up, when requested


def window_regime(end_time: SimTime, scenario: str, t_s: SimTime | None) -> str:
    if scenario == "ordinary" or t_s is None:
        return "no_shock"
    return "post_shock" if end_time >= t_s else "pre_shock"


def build_windows(
    times: np.ndarray,
    feats: np.ndarray,
    mids: np.ndarray,
    day_index: int,
    scenario: str,
    t_s: SimTime | None,
    h: int = 10,
    stride: int = 1,
    trend_alpha: float | None = None,
) -> list[WindowSample]:
    """Sliding windows of 100 records with the mid h records ahead as label.

    A day shorter than 100 + h records yields no windows. The regime flag is
    keyed to the window's final record time vs the shock instant.
    """
    if h < 1 or stride < 1:
        raise DatasetError("h and stride must be >= 1")
    n = len(times)
    out: list[WindowSample] = []
    last = n - WINDOW - h  # last valid window start
    for start in range(0, last + 1, stride):
        end = start + WINDOW - 1
        end_time = int(times[end])
        trend = None
        if trend_alpha is not None:
            trend = trend_label(mids, end, h, trend_alpha).as_int
        out.append(
            WindowSample(
                X=feats[start : start + WINDOW],
                y=float(mids[end + h]),
                last_mid=float(mids[end]),
                day_index=day_index,
                scenario=scenario,
                regime=window_regime(end_time, scenario, t_s),
                end_time=end_time,
                trend=trend,
            )
        )
    return out


def windows_from_day(
    day: DayRecord, h: int = 10, stride: int = 1, trend_alpha: float | None = None
) -> list[WindowSample]:
    times, feats, mids = day_arrays(day)
    t_s = day.shock.t_s if day.shock else None
    return build_windows(
        times, feats, mids, day.day_index, day.scenario, t_s, h, stride, trend_alpha
    )


# -- normalization ---------------------------------------------------------------


@dataclass
class NormStats:
    """Train-split z-score statistics; stds below eps are clamped to eps so a
    constant column normalizes to exactly zero."""

    feature_mean: np.ndarray  # (40,)
    feature_std: np.ndarray  # (40,)
    y_mean: float
    y_std: float
    eps: float = 1e-9

    def to_dict(self) -> dict:
        return {
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "eps": self.eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(
            feature_mean=np.asarray(d["feature_mean"], dtype=np.float64),
            feature_std=np.asarray(d["feature_std"], dtype=np.float64),
            y_mean=float(d["y_mean"]),
            y_std=float(d["y_std"]),
            eps=float(d.get("eps", 1e-9)),
        )


def fit_norm(train_windows: list[WindowSample], eps: float = 1e-9) -> NormStats:
    """Per-feature and label z-score statistics over the training windows."""
    if not train_windows:
        raise DatasetError("cannot fit normalization on an empty training set")
    count = 0
    s1 = np.zeros(N_FEATURES, dtype=np.float64)
    s2 = np.zeros(N_FEATURES, dtype=np.float64)
    for w in train_windows:
        s1 += w.X.sum(axis=0)
        s2 += np.square(w.X).sum(axis=0)
        count += w.X.shape[0]
    mean = s1 / count
    var = np.maximum(s2 / count - mean * mean, 0.0)
    std = np.sqrt(var)
    std = np.where(std < eps, eps, std)
    ys = np.array([w.y for w in train_windows], dtype=np.float64)
    y_std = float(ys.std())
    return NormStats(
        feature_mean=mean,
        feature_std=std,
        y_mean=float(ys.mean()),
        y_std=y_std if y_std >= eps else eps,
        eps=eps,
    )


def normalize_features(stats: NormStats, X: np.ndarray) -> np.ndarray:
    return (X - stats.feature_mean) / stats.feature_std


def denormalize_features(stats: NormStats, Xn: np.ndarray) -> np.ndarray:
    return Xn * stats.feature_std + stats.feature_mean


def normalize_label(stats: NormStats, y) -> np.ndarray | float:
    return (y - stats.y_mean) / stats.y_std


def denormalize_label(stats: NormStats, yn) -> np.ndarray | float:
    return yn * stats.y_std + stats.y_mean


# -- trend labels ------------------------------------------------------------------


@dataclass(frozen=True)
class TrendLabel:
    cls: str  # up | stationary | down
    alpha: float

    @property
    def as_int(self) -> int:
        return {"down": -1, "stationary": 0, "up": 1}[self.cls]


def trend_label(mid_series: np.ndarray, t: int, h: int, alpha: float) -> TrendLabel:
    """Direction of the mean future mid relative to the current one.

    The future mean over (t, t+h] is compared to mid[t]; moves beyond
    +-alpha (relative) are labeled up/down, anything inside stationary.
    """
    if t < 0 or t + h >= len(mid_series):
        raise DatasetError("t + h must stay inside the series")
    future = float(np.mean(mid_series[t + 1 : t + h + 1]))
    r = (future - float(mid_series[t])) / float(mid_series[t])
    if r > alpha:
        cls = "up"
    elif r < -alpha:
        cls = "down"
    else:
        cls = "stationary"
    return TrendLabel(cls=cls, alpha=alpha)


# -- splits ------------------------------------------------------------------------


@dataclass
class Splits:
    train: list[WindowSample]
    test_iid: list[WindowSample]
    test_small: list[WindowSample]
    test_large: list[WindowSample]

    def counts(self) -> dict[str, int]:
        return {
            "train": len(self.train),
            "test_iid": len(self.test_iid),
            "test_small": len(self.test_small),
            "test_large": len(self.test_large),
        }


def make_splits(
    day_windows: dict[int, list[WindowSample]],
    scenarios: dict[int, str],
    root_seed: int,
    holdout_fraction: float = 0.2,
) -> Splits:
    """Partition windows into train / IID test / small-shock / large-shock.

    Training data comes from ordinary days minus a held-out subset (chosen
    deterministically from the seed) that joins the IID test set together
    with the pre-shock windows of shock days. Post-shock windows land in the
    split of their shock scenario.
    """
    ordinary_days = sorted(d for d, s in scenarios.items() if s == "ordinary")
    n_holdout = int(round(holdout_fraction * len(ordinary_days)))
    rng = derive_stream(root_seed, 0, 0, "ordinary-holdout")
    perm = rng.permutation(len(ordinary_days))
    held_out = {ordinary_days[i] for i in perm[:n_holdout]}

    splits = Splits(train=[], test_iid=[], test_small=[], test_large=[])
    for day_index in sorted(day_windows):
        scenario = scenarios[day_index]
        for w in day_windows[day_index]:
            if scenario == "ordinary":
                (splits.test_iid if day_index in held_out else splits.train).append(w)
            elif w.regime == "pre_shock":
                splits.test_iid.append(w)
            elif scenario == "small":
                splits.test_small.append(w)
            else:
                splits.test_large.append(w)
    empty = [name for name, n in splits.counts().items() if n == 0]
    if empty:
        raise DatasetError(f"empty splits {empty}; counts={splits.counts()}")
    return splits


# -- binary tensor export ------------------------------------------------------------
#
# Layout: one little-endian float32 file per array, sample-major. For a split
# with n samples, <split>.X.f32 holds n*100*40 values (row-major windows),
# <split>.y.f32 and <split>.m.f32 hold n values (label and last-record mid).
# tensors.json describes shapes, byte sizes, crc32 checksums, and per-sample
# metadata files (<split>.meta.json with day/scenario/regime/end_time).

EXPORT_DESCRIPTOR = "tensors.json"
EXPORT_FORMAT = "lob-windows-v1"


def _write_f32(path: Path, arr: np.ndarray) -> tuple[int, int]:
    data = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    path.write_bytes(data)
    return len(data), zlib.crc32(data)


def _digest_indices(windows: list[WindowSample]) -> str:
    h = hashlib.sha256()
    for w in windows:
        h.update(f"{w.day_index}:{w.end_time};".encode())
    return h.hexdigest()


def export_tensors(
    out_dir,
    splits: Splits,
    stats: NormStats | None,
    h: int,
    stride: int,
    trend_alpha: float | None = None,
    source_root_seed: int | None = None,
) -> dict:
    """Write the split tensors plus descriptor; returns the descriptor dict.

    When `stats` is given, features and labels are z-scored with it (labels
    and last-mids share the label statistics, so persistence forecasts stay
    comparable). Raw export otherwise.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    descriptor: dict = {
        "format": EXPORT_FORMAT,
        "dtype": "<f4",
        "layout": "sample-major",
        "window": WINDOW,
        "features": N_FEATURES,
        "horizon": h,
        "stride": stride,
        "normalized": stats is not None,
        "label_domain": "zscore-of-train-mid" if stats is not None else "cents",
        "splits": {},
    }
    if source_root_seed is not None:
        descriptor["source_root_seed"] = source_root_seed
    if stats is not None:
        (out / "norm_stats.json").write_text(
            json.dumps(stats.to_dict(), sort_keys=True, indent=2) + "\n"
        )
        descriptor["norm_stats_file"] = "norm_stats.json"
    for name, windows in (
        ("train", splits.train),
        ("test_iid", splits.test_iid),
        ("test_small", splits.test_small),
        ("test_large", splits.test_large),
    ):
        n = len(windows)
        X = np.empty((n, WINDOW, N_FEATURES), dtype=np.float64)
        for i, w in enumerate(windows):
            X[i] = w.X
        y = np.array([w.y for w in windows], dtype=np.float64)
        m = np.array([w.last_mid for w in windows], dtype=np.float64)
        if stats is not None:
            X = normalize_features(stats, X)
            y = normalize_label(stats, y)
            m = normalize_label(stats, m)
        x_bytes, x_crc = _write_f32(out / f"{name}.X.f32", X)
        y_bytes, y_crc = _write_f32(out / f"{name}.y.f32", y)
        m_bytes, m_crc = _write_f32(out / f"{name}.m.f32", m)
        meta = {
            "day_index": [w.day_index for w in windows],
            "scenario": [w.scenario for w in windows],
            "regime": [w.regime for w in windows],
            "end_time": [w.end_time for w in windows],
        }
        if trend_alpha is not None:
            meta["trend"] = [0 if w.trend is None else w.trend for w in windows]
            descriptor["trend_alpha"] = trend_alpha
        (out / f"{name}.meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
        descriptor["splits"][name] = {
            "n": n,
            "x_file": f"{name}.X.f32",
            "y_file": f"{name}.y.f32",
            "m_file": f"{name}.m.f32",
            "meta_file": f"{name}.meta.json",
            "x_bytes": x_bytes,
            "y_bytes": y_bytes,
            "m_bytes": m_bytes,
            "x_crc32": x_crc,
            "y_crc32": y_crc,
            "m_crc32": m_crc,
            "index_digest": _digest_indices(windows),
        }
    (out / EXPORT_DESCRIPTOR).write_text(
        json.dumps(descriptor, sort_keys=True, indent=2) + "\n"
    )
    return descriptor


@dataclass
class SplitTensors:
    X: np.ndarray  # (n, 100, 40) float32
    y: np.ndarray  # (n,) float32
    last_mid: np.ndarray  # (n,) float32
    meta: dict


def load_split(export_dir, name: str) -> SplitTensors:
    """Load one exported split, verifying byte sizes and checksums."""
    out = Path(export_dir)
    descriptor = json.loads((out / EXPORT_DESCRIPTOR).read_text())
    if descriptor.get("format") != EXPORT_FORMAT:
        raise DatasetError(f"unknown export format {descriptor.get('format')!r}")
    entry = descriptor["splits"].get(name)
    if entry is None:
        raise DatasetError(f"split {name!r} not present in export")
    n = entry["n"]
    window, feats = descriptor["window"], descriptor["features"]

    def read(file_key: str, bytes_key: str, crc_key: str, shape) -> np.ndarray:
        raw = (out / entry[file_key]).read_bytes()
        if len(raw) != entry[bytes_key]:
            raise DatasetError(f"{entry[file_key]}: truncated ({len(raw)} != {entry[bytes_key]})")
        if zlib.crc32(raw) != entry[crc_key]:
            raise DatasetError(f"{entry[file_key]}: checksum mismatch")
        return np.frombuffer(raw, dtype="<f4").reshape(shape)

    X = read("x_file", "x_bytes", "x_crc32", (n, window, feats))
    y = read("y_file", "y_bytes", "y_crc32", (n,))
    m = read("m_file", "m_bytes", "m_crc32", (n,))
    meta = json.loads((out / entry["meta_file"]).read_text())
    return SplitTensors(X=X, y=y, last_mid=m, meta=meta)
