"""Reproducible data streams: synthetic generators and CSV ingestion.

Both generators draw y = sin(x) + noise with x ~ U(0, 10); they differ only
in the noise schedule.  Draws are consumed in two blocks (all x uniforms,
then all noise normals) from a single PCG64 stream, using the documented
inverse-CDF transform in :mod:`osgpcp.rng`, so a stream is a pure function
of (n, seed).  With equal seeds the shifted stream is bitwise identical to
the i.i.d. one up to the change point.

CSV rows are treated purely as an ordered stream: the row order is the slot
order and no timestamp parsing happens.  Columns other than the selected
feature and target columns are ignored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .rng import make_rng, standard_normals, uniforms

SHIFT_SLOT = 5000  # noise std switches from 0.1 to 0.2 after this slot
IID_NOISE_STD = 0.1
SHIFTED_NOISE_STD = 0.2


@dataclass(frozen=True)
class StreamRecord:
    """One slot of a stream: 1-based index, input vector, scalar target."""

    t: int
    x: np.ndarray
    y: float


def _sin_stream(n: int, seed: int, noise_std: np.ndarray) -> list[StreamRecord]:
    rng = make_rng(seed)
    x = 10.0 * uniforms(rng, n)
    noise = noise_std * standard_normals(rng, n)
    y = np.sin(x) + noise
    return [StreamRecord(t=i + 1, x=np.array([x[i]]), y=float(y[i])) for i in range(n)]


def gen_iid(n: int, seed: int) -> list[StreamRecord]:
    """n records of y = sin(x) + N(0, 0.1^2), x ~ U(0, 10)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _sin_stream(n, seed, np.full(n, IID_NOISE_STD))

def gen_shift(n: int, seed: int) -> list[StreamRecord]:
    """Same model as gen_iid, but the noise std doubles after slot 5000."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    std = np.where(np.arange(1, n + 1) <= SHIFT_SLOT, IID_NOISE_STD, SHIFTED_NOISE_STD)
    return _sin_stream(n, seed, std)


def load_csv(
    path,
    feature_columns: list[str] | tuple[str, ...],
    target_column: str,
    delimiter: str = ",",
) -> list[StreamRecord]:
    """Load an ordered stream from a header-ed CSV file.

    Parameters
    ----------
    path : path-like
        CSV file with a header row.
    feature_columns : sequence of str
        Names of the input columns, in the order they form the input vector.
    target_column : str
        Name of the target column.
    delimiter : str
        Field delimiter, comma by default.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ValueError
        If the file is empty, a named column is missing, or a selected cell
        is not numeric (the message names the offending column and row).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such CSV file: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty CSV file: {path}") from None
        header = [h.strip() for h in header]
        missing = [c for c in (*feature_columns, target_column) if c not in header]
        if missing:
            raise ValueError(f"missing column(s) {missing} in {path}; header has {header}")
        feat_idx = [header.index(c) for c in feature_columns]
        targ_idx = header.index(target_column)

        records = []
        for row_num, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue

            def cell(idx: int, name: str) -> float:
                try:
                    return float(row[idx])
                except (ValueError, IndexError):
                    raise ValueError(
                        f"non-numeric or missing value for column {name!r} at data row {row_num} of {path}"
                    ) from None

            x = np.array([cell(i, c) for i, c in zip(feat_idx, feature_columns)])
            y = cell(targ_idx, target_column)
            records.append(StreamRecord(t=len(records) + 1, x=x, y=y))
    if not records:
        raise ValueError(f"CSV file has a header but no data rows: {path}")
    return records


def write_csv(
    records: list[StreamRecord],
    path,
    feature_columns: list[str] | tuple[str, ...],
    target_column: str,
) -> None:
    """Write a stream to CSV so it round-trips exactly through load_csv."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*feature_columns, target_column])
        for rec in records:
            if rec.x.size != len(feature_columns):
                raise ValueError(f"record t={rec.t} has {rec.x.size} features, expected {len(feature_columns)}")
            writer.writerow([repr(float(v)) for v in rec.x] + [repr(float(rec.y))])


def sample_csv_path() -> Path:
    """Path to the bundled synthetic OHLC sample (open/high/low/close columns)."""
    return Path(resources.files("osgpcp").joinpath("data/sample_ohlc.csv"))
