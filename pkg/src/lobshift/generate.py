"""Disk-level generation pipeline: run every configured day, write one CSV
per day plus a manifest with scenario and shock metadata.

Days are independent simulations sharing only the immutable config, so they
can run in parallel; outputs are byte-identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .dataset import day_arrays, write_day_csv
from .scenario import DayRecord, ScenarioConfig, assign_scenarios, config_to_dict, run_day

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class ManifestDay:
    day_index: int
    scenario: str
    status: str  # ok | failed
    file: str | None
    n_records: int
    skipped_snapshots: int
    t_s: int | None
    direction: int | None
    magnitude: float | None

    def to_dict(self) -> dict:
        return {
            "day_index": self.day_index,
            "scenario": self.scenario,
            "status": self.status,
            "file": self.file,
            "n_records": self.n_records,
            "skipped_snapshots": self.skipped_snapshots,
            "t_s": self.t_s,
            "direction": self.direction,
            "magnitude": self.magnitude,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestDay":
        return cls(
            day_index=d["day_index"],
            scenario=d["scenario"],
            status=d["status"],
            file=d.get("file"),
            n_records=d["n_records"],
            skipped_snapshots=d.get("skipped_snapshots", 0),
            t_s=d.get("t_s"),
            direction=d.get("direction"),
            magnitude=d.get("magnitude"),
        )


def day_filename(day_index: int) -> str:
    return f"day_{day_index:04d}.csv"


def _produce_day(config: ScenarioConfig, scenario: str, day_index: int, out_dir: str) -> dict:
    record = run_day(config, scenario, day_index)
    return _write_day(record, Path(out_dir)).to_dict()


def _write_day(record: DayRecord, out_dir: Path) -> ManifestDay:
    status = "failed" if record.failed else "ok"
    fname = None
    if not record.failed:
        fname = day_filename(record.day_index)
        times, feats, mids = day_arrays(record)
        write_day_csv(out_dir / fname, times, feats, mids)
    return ManifestDay(
        day_index=record.day_index,
        scenario=record.scenario,
        status=status,
        file=fname,
        n_records=len(record.snapshots),
        skipped_snapshots=record.skipped_snapshots,
        t_s=record.shock.t_s if record.shock else None,
        direction=record.shock.direction if record.shock else None,
        magnitude=record.shock.magnitude if record.shock else None,
    )


def generate_dataset(config: ScenarioConfig, out_dir, parallel: int = 1) -> dict:
    """Run all days of the config and write day files plus the manifest.

    Returns the manifest dict. Failed days (no valid snapshot) appear in the
    manifest with status "failed" and no file, never silently vanish.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = assign_scenarios(config)
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(
                pool.map(
                    _produce_day,
                    [config] * len(labels),
                    labels,
                    range(len(labels)),
                    [str(out)] * len(labels),
                )
            )
    else:
        rows = [
            _produce_day(config, scenario, day_index, str(out))
            for day_index, scenario in enumerate(labels)
        ]
    rows.sort(key=lambda r: r["day_index"])
    manifest = {
        "format": "lob-days-v1",
        "root_seed": config.root_seed,
        "n_days": config.n_days,
        "config": config_to_dict(config),
        "days": rows,
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def load_manifest(dataset_dir) -> dict:
    return json.loads((Path(dataset_dir) / MANIFEST_NAME).read_text())


def manifest_days(manifest: dict) -> list[ManifestDay]:
    return [ManifestDay.from_dict(d) for d in manifest["days"]]
