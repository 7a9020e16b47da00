"""
Idempotent seeding of a simulated demo dataset.
Safe to call at startup; writes subject files only when the directory holds none.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from matnet.ingest import SubjectRecord, write_subject_csv
from matnet.rng import Rng
from matnet.simulate import KroneckerModel, ModelKind, build_model, null_spatial, sample_matrix_normal, temporal_model

logger = logging.getLogger(__name__)

SIGMA_T_FILE = "sigma_t.csv"
SUBJECT_DIR = "subjects"


def _has_subjects(directory: Path) -> bool:
    return any((directory / SUBJECT_DIR).glob("*.csv"))


def node_labels(p: int):
    return [f"ch{k:02d}" for k in range(1, p + 1)]


def seed_demo_dataset(
    directory,
    model: Optional[ModelKind] = ModelKind.MODEL1,
    p: int = 10,
    q: int = 20,
    n: int = 30,
    seed: int = 7,
    rho_t: float = 0.4,
) -> bool:
    """Write ``n`` subject CSVs (``q`` rows by ``p`` columns) under ``subjects/`` and
    the true temporal covariance as ``sigma_t.csv`` next to it.

    ``model=None`` draws from the diagonal null. Returns True when files were written.
    """
    directory = Path(directory)
    if _has_subjects(directory):
        logger.info("[seed] demo data already present in %s; skipping seed.", directory)
        return False

    rng = Rng(seed)
    omega = null_spatial(p) if model is None else build_model(ModelKind(model), p, rng.spawn(0))
    sigma_t = temporal_model(q, rho_t)
    sample = sample_matrix_normal(KroneckerModel.from_precision(omega, sigma_t), n, rng.spawn(1))

    labels = node_labels(p)
    subjects = directory / SUBJECT_DIR
    for k in range(n):
        write_subject_csv(SubjectRecord(id=f"s{k + 1:03d}", matrix=sample.data[k]), labels, subjects / f"s{k + 1:03d}.csv")
    np.savetxt(directory / SIGMA_T_FILE, sigma_t, delimiter=",", fmt="%.17g")
    logger.info("[seed] wrote %d demo subjects (%s, p=%d, q=%d) to %s",
                n, "null" if model is None else ModelKind(model).value, p, q, subjects)
    return True
