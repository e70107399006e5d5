"""Batch-evaluation records, manifests and error statistics.

Relative error is (estimate - truth) / truth in percent, so overestimates
come out positive. Group statistics are the five-number summary with
quartiles by linear interpolation between order statistics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

ALGORITHMS = ("base", "dct", "oct", "subband")
NUM_BANDS = 30

_BAND_COLUMNS = [f"t60_band_{i:02d}" for i in range(1, NUM_BANDS + 1)]
MANIFEST_COLUMNS = ["file", "t60_s", *_BAND_COLUMNS, "snr_db", "noise"]


@dataclass(frozen=True)
class ManifestRow:
    """Ground truth for one generated file."""

    file: str
    t60: float
    band_t60: tuple[float, ...]
    snr_db: float
    noise: str


@dataclass(frozen=True)
class EstimateRecord:
    """One estimation outcome; exactly one of t60 / t60_bands is set."""

    file: str
    algo: str
    t60: float | None = None
    t60_bands: tuple[float, ...] | None = None
    frames_used: int = 0

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"algo must be one of {ALGORITHMS}")
        if (self.t60 is None) == (self.t60_bands is None):
            raise ValueError("exactly one of t60 / t60_bands must be set")
        if self.t60_bands is not None:
            object.__setattr__(self, "t60_bands", tuple(float(v) for v in self.t60_bands))


@dataclass(frozen=True)
class ErrorStats:
    """Five-number summary of relative errors (percent) for one group."""

    noise: str
    snr_db: float
    algo: str
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    band_mse_mean: float | None = None

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError("count must be positive")
        ord_ok = self.min <= self.q1 <= self.median <= self.q3 <= self.max
        if not ord_ok:
            raise ValueError("quartile ordering violated")


def relative_error_percent(estimate: float, truth: float) -> float:
    if truth <= 0:
        raise ValueError("truth must be positive")
    return 100.0 * (estimate - truth) / truth


def five_number_summary(values) -> tuple[float, float, float, float, float]:
    """min, q1, median, q3, max with linearly interpolated quartiles."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values to summarize")
    q = np.percentile(arr, [0, 25, 50, 75, 100], method="linear")
    return tuple(float(v) for v in q)


def band_mse(estimates, truths) -> float:
    """Mean-square error across band estimates, NaN entries excluded."""
    est = np.asarray(estimates, dtype=np.float64)
    tru = np.asarray(truths, dtype=np.float64)
    if est.shape != tru.shape:
        raise ValueError("band arrays must have the same shape")
    mask = ~(np.isnan(est) | np.isnan(tru))
    if not np.any(mask):
        raise ValueError("no valid band pairs")
    diff = est[mask] - tru[mask]
    return float(np.mean(diff**2))


def group_error_stats(
    records: list[EstimateRecord], manifest: dict[str, ManifestRow]
) -> list[ErrorStats]:
    """Per-(noise, snr, algo) five-number summaries of relative errors.

    Fullband records contribute one error each; subband records contribute
    one error per band (against the per-band truth) plus a mean per-file MSE
    across bands. Records without a manifest entry are skipped.
    """
    groups: dict[tuple[str, float, str], list[float]] = {}
    mses: dict[tuple[str, float, str], list[float]] = {}
    for rec in records:
        row = manifest.get(rec.file)
        if row is None:
            continue
        key = (row.noise, row.snr_db, rec.algo)
        if rec.t60 is not None:
            groups.setdefault(key, []).append(relative_error_percent(rec.t60, row.t60))
        else:
            errs = [
                relative_error_percent(e, t)
                for e, t in zip(rec.t60_bands, row.band_t60)
                if not (np.isnan(e) or np.isnan(t))
            ]
            groups.setdefault(key, []).extend(errs)
            mses.setdefault(key, []).append(band_mse(rec.t60_bands, row.band_t60))
    stats = []
    for key in sorted(groups):
        lo, q1, med, q3, hi = five_number_summary(groups[key])
        mse_mean = float(np.mean(mses[key])) if key in mses else None
        stats.append(
            ErrorStats(
                noise=key[0],
                snr_db=key[1],
                algo=key[2],
                count=len(groups[key]),
                min=lo,
                q1=q1,
                median=med,
                q3=q3,
                max=hi,
                band_mse_mean=mse_mean,
            )
        )
    return stats


# ---------------------------------------------------------------------------
# serialization

def write_manifest(path: str | Path, rows: list[ManifestRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.file, repr(row.t60), *[repr(v) for v in row.band_t60],
                 repr(row.snr_db), row.noise]
            )


def read_manifest(path: str | Path) -> list[ManifestRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                ManifestRow(
                    file=rec["file"],
                    t60=float(rec["t60_s"]),
                    band_t60=tuple(float(rec[c]) for c in _BAND_COLUMNS),
                    snr_db=float(rec["snr_db"]),
                    noise=rec["noise"],
                )
            )
    return rows


def record_to_dict(rec: EstimateRecord) -> dict:
    d = {"file": rec.file, "algo": rec.algo, "frames_used": rec.frames_used}
    if rec.t60 is not None:
        d["t60"] = rec.t60
    else:
        d["t60_bands"] = list(rec.t60_bands)
    return d


def record_from_dict(d: dict) -> EstimateRecord:
    return EstimateRecord(
        file=d["file"],
        algo=d["algo"],
        t60=d.get("t60"),
        t60_bands=tuple(d["t60_bands"]) if "t60_bands" in d else None,
        frames_used=int(d.get("frames_used", 0)),
    )


def write_records_json(path: str | Path, records: list[EstimateRecord]) -> None:
    with open(path, "w") as fh:
        json.dump([record_to_dict(r) for r in records], fh, indent=2)
        fh.write("\n")


def read_records_json(path: str | Path) -> list[EstimateRecord]:
    with open(path) as fh:
        return [record_from_dict(d) for d in json.load(fh)]


def records_to_csv_lines(records: list[EstimateRecord]) -> list[list[str]]:
    """Rows (with header) for the CSV record format; lossless for floats."""
    header = ["file", "algo", "t60", *_BAND_COLUMNS, "frames_used"]
    lines = [header]
    for rec in records:
        bands = rec.t60_bands if rec.t60_bands is not None else [None] * NUM_BANDS
        lines.append(
            [
                rec.file,
                rec.algo,
                repr(rec.t60) if rec.t60 is not None else "",
                *[repr(float(b)) if b is not None else "" for b in bands],
                str(rec.frames_used),
            ]
        )
    return lines


def records_from_csv_lines(lines: list[list[str]]) -> list[EstimateRecord]:
    header = lines[0]
    records = []
    for row in lines[1:]:
        d = dict(zip(header, row))
        bands = [d[c] for c in _BAND_COLUMNS]
        has_bands = any(v != "" for v in bands)
        records.append(
            EstimateRecord(
                file=d["file"],
                algo=d["algo"],
                t60=float(d["t60"]) if d["t60"] != "" else None,
                t60_bands=tuple(float(v) for v in bands) if has_bands else None,
                frames_used=int(d["frames_used"]),
            )
        )
    return records


def stats_to_dicts(stats: list[ErrorStats]) -> list[dict]:
    return [asdict(s) for s in stats]
