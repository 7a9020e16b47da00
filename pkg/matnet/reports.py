"""Experiment reports: a versioned JSON document plus a flat per-replication CSV."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field, PrivateAttr

from matnet.errors import MatnetError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"


class RateSummary(BaseModel):
    scenario: str  # "null" or "alternative"
    metric: str  # "size", "power", "fdr"
    method: str
    alpha: float
    rate: Optional[float] = Field(None, ge=0.0, le=1.0)
    se: Optional[float] = None
    replications: int


class ExperimentReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    experiment: str
    seed: int
    config: Dict[str, Any]
    wall_clock_seconds: float
    aggregates: List[RateSummary] = Field(default_factory=list)
    gumbel_ks: Dict[str, float] = Field(default_factory=dict)
    dominance_violations: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)

    _outcomes: pd.DataFrame = PrivateAttr(default_factory=pd.DataFrame)

    @property
    def outcomes(self) -> pd.DataFrame:
        return self._outcomes

    def attach_outcomes(self, frame: pd.DataFrame) -> "ExperimentReport":
        self._outcomes = frame
        return self

    def rate(self, metric: str, method: str, alpha: float) -> Optional[float]:
        for row in self.aggregates:
            if row.metric == metric and row.method == method and abs(row.alpha - alpha) < 1e-12:
                return row.rate
        raise KeyError(f"no {metric} aggregate for method={method} alpha={alpha}")

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.aggregates])


def atomic_write_text(path: Path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise MatnetError(f"cannot write {path}: {exc}") from exc
    return path


def write_json(doc: Dict[str, Any], path: Path) -> Path:
    return atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=False) + "\n")


def write_report(report: ExperimentReport, out_dir: Path, stem: Optional[str] = None) -> Dict[str, Path]:
    """``<stem>.json`` with the aggregates and ``<stem>_replications.csv`` with the raw outcomes."""
    stem = stem or f"{report.experiment}_seed{report.seed}"
    out_dir = Path(out_dir)
    paths = {
        "json": write_json(report.model_dump(mode="json"), out_dir / f"{stem}.json"),
        "csv": atomic_write_text(out_dir / f"{stem}_replications.csv", report.outcomes.to_csv(index=False)),
    }
    logger.info("[reports] wrote %s and %s", paths["json"], paths["csv"])
    return paths


def read_report(path: Path) -> ExperimentReport:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    report = ExperimentReport.model_validate(data)
    csv_path = Path(path).with_name(Path(path).stem + "_replications.csv")
    if csv_path.exists():
        report.attach_outcomes(pd.read_csv(csv_path))
    return report
