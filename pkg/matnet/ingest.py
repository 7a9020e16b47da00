"""Loading subject recordings from CSV.

Two layouts are accepted:

* a directory with one CSV per subject, ``q`` rows (time points) by ``p``
  columns (locations), the header naming the locations and the file stem
  giving the subject id. CSVs inside a sub-directory get the sub-directory
  name as their group label.
* a single long CSV with columns ``subject_id``, ``time_index``, an optional
  ``group`` column, then one column per location.

Files are stored time-major; records hold the ``p x q`` matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from matnet.errors import DataFormatError, DataParseError, InvalidInputError, InvalidParameterError
from matnet.simulate import SpatioTemporalSample

logger = logging.getLogger(__name__)

ID_COLUMN = "subject_id"
TIME_COLUMN = "time_index"
GROUP_COLUMN = "group"


@dataclass(frozen=True)
class SubjectRecord:
    id: str
    matrix: np.ndarray  # p x q
    group: Optional[str] = None

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def q(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class Dataset:
    records: List[SubjectRecord]
    node_labels: List[str]
    source: Optional[Path] = None
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.records:
            raise DataFormatError("dataset has no subjects")
        p, q = self.records[0].matrix.shape
        for rec in self.records:
            if rec.matrix.shape != (p, q):
                raise DataFormatError(
                    f"subject {rec.id} is {rec.p}x{rec.q} but {self.records[0].id} is {p}x{q}", subject=rec.id
                )
        if len(self.node_labels) != p:
            raise DataFormatError(f"{len(self.node_labels)} node labels for p={p} locations")

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def p(self) -> int:
        return self.records[0].p

    @property
    def q(self) -> int:
        return self.records[0].q

    def groups(self) -> List[str]:
        return sorted({r.group for r in self.records if r.group is not None})

    def select_group(self, group: Optional[str]) -> "Dataset":
        if group is None:
            return self
        chosen = [r for r in self.records if r.group == group]
        if not chosen:
            raise InvalidInputError(f"no subjects in group {group!r}; groups are {self.groups()}")
        return replace(self, records=chosen)

    def downsample(self, window: int) -> "Dataset":
        if window == 1:
            return self
        return replace(self, records=[temporal_downsample(r, window) for r in self.records])

    def to_sample(self) -> SpatioTemporalSample:
        return SpatioTemporalSample(np.stack([r.matrix for r in self.records]))


def _to_float(cell) -> float:
    try:
        return float(cell)
    except (TypeError, ValueError):
        return math.nan


def _numeric_block(frame: pd.DataFrame, columns: Sequence[str], source: str, header_lines: int = 1) -> np.ndarray:
    """Values of ``columns`` as floats; the first bad cell raises with its file row and column."""
    block = frame.loc[:, list(columns)]
    values = block.map(_to_float).to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        cell = block.iat[r, c]
        row = int(r) + header_lines + 1  # 1-based line in the file
        raise DataParseError(
            f"{source}: non-numeric value {cell!r} at row {row}, column {columns[c]!r}",
            row=row,
            column=str(columns[c]),
        )
    return values


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, skipinitialspace=True, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"cannot read {path}: {exc}", subject=path.stem) from exc


def _load_directory(path: Path) -> Dataset:
    files = sorted(path.glob("*.csv")) + sorted(path.glob("*/*.csv"))
    if not files:
        raise DataFormatError(f"no CSV files under {path}")
    records, labels, warnings = [], None, []
    for file in files:
        frame = _read_csv(file)
        header = [str(c) for c in frame.columns]
        if labels is None:
            labels = header
        elif sorted(header) != sorted(labels):
            raise DataFormatError(
                f"subject {file.stem} has locations {header} but {records[0].id} has {labels}",
                subject=file.stem,
            )
        elif len(frame) != records[0].q:
            raise DataFormatError(
                f"subject {file.stem} has {len(frame)} time points but {records[0].id} has {records[0].q}",
                subject=file.stem,
            )
        elif header != labels:
            warnings.append(f"subject {file.stem}: location columns reordered to match {records[0].id}")
        values = _numeric_block(frame, labels, file.name)
        group = file.parent.name if file.parent != path else None
        records.append(SubjectRecord(id=file.stem, matrix=values.T.copy(), group=group))
    for msg in warnings:
        logger.warning("[ingest] %s", msg)
    logger.info("[ingest] %d subjects from %s", len(records), path)
    return Dataset(records=records, node_labels=list(labels), source=path, warnings=warnings)


def _load_long(path: Path) -> Dataset:
    frame = _read_csv(path)
    missing = {ID_COLUMN, TIME_COLUMN} - set(frame.columns)
    if missing:
        raise DataFormatError(f"{path.name} lacks column(s) {sorted(missing)}")
    labels = [c for c in frame.columns if c not in (ID_COLUMN, TIME_COLUMN, GROUP_COLUMN)]
    if not labels:
        raise DataFormatError(f"{path.name} has no value columns")
    values = _numeric_block(frame, labels, path.name)
    times = _numeric_block(frame, [TIME_COLUMN], path.name)[:, 0]

    records, grid = [], None
    for subject, idx in frame.groupby(ID_COLUMN, sort=False).indices.items():
        order = idx[np.argsort(times[idx], kind="stable")]
        stamps = times[order]
        if np.any(np.diff(stamps) == 0):
            dup = stamps[1:][np.diff(stamps) == 0][0]
            raise DataFormatError(f"subject {subject} repeats time_index {dup:g}", subject=str(subject))
        if grid is None:
            grid = stamps
        elif len(stamps) != len(grid) or np.any(stamps != grid):
            raise DataFormatError(
                f"subject {subject} has time indices {stamps.tolist()} but {records[0].id} has {grid.tolist()}",
                subject=str(subject),
            )
        group = None
        if GROUP_COLUMN in frame.columns:
            group = str(frame[GROUP_COLUMN].iloc[order[0]]) or None
        records.append(SubjectRecord(id=str(subject), matrix=values[order].T.copy(), group=group))
    logger.info("[ingest] %d subjects from %s", len(records), path)
    return Dataset(records=records, node_labels=labels, source=path)


def load_dataset(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"path not found: {path}")
    return _load_directory(path) if path.is_dir() else _load_long(path)


def temporal_downsample(rec: SubjectRecord, window: int) -> SubjectRecord:
    """Average consecutive blocks of ``window`` time points."""
    if window < 1 or rec.q % window:
        raise InvalidParameterError(f"window {window} must be a positive divisor of q={rec.q}")
    if window == 1:
        return rec
    matrix = rec.matrix.reshape(rec.p, rec.q // window, window).mean(axis=2)
    return replace(rec, matrix=matrix)


def read_matrix_csv(path) -> np.ndarray:
    """Headerless numeric matrix, e.g. a known temporal covariance."""
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"matrix file not found: {path}")
    frame = pd.read_csv(path, header=None, dtype=str, skipinitialspace=True, keep_default_na=False)
    return _numeric_block(frame, list(frame.columns), path.name, header_lines=0)


def write_subject_csv(rec: SubjectRecord, node_labels: Sequence[str], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rec.matrix.T, columns=list(node_labels)).to_csv(path, index=False, float_format="%.17g")
    return path
