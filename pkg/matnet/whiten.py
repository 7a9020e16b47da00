"""Temporal whitening: ``Y_k = X_k S`` with ``S`` an inverse square root of the
temporal covariance (known, estimated, or the identity for the vector-normal
baseline)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from matnet.errors import InvalidInputError
from matnet.linalg import SymMatrix, as_symmetric, inv_sqrt
from matnet.simulate import SpatioTemporalSample

logger = logging.getLogger(__name__)


class WhiteningMode(str, Enum):
    ORACLE = "oracle"
    DATA_DRIVEN = "data_driven"
    VECTOR_NORMAL = "vector_normal"


@dataclass(frozen=True)
class WhitenedData:
    y: np.ndarray
    mode: WhiteningMode
    warnings: List[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[2]

    @property
    def nq(self) -> int:
        return self.n * self.q

    @property
    def stacked(self) -> np.ndarray:
        return self.y.transpose(0, 2, 1).reshape(self.nq, self.p)


def temporal_covariance(x: SpatioTemporalSample) -> SymMatrix:
    """``(1 / n p) sum_k X_k' X_k``."""
    cov = np.einsum("kil,kim->lm", x.data, x.data) / (x.n * x.p)
    return 0.5 * (cov + cov.T)


def _apply(x: SpatioTemporalSample, sigma_t: np.ndarray, mode: WhiteningMode) -> WhitenedData:
    root = inv_sqrt(sigma_t)
    for msg in root.warnings:
        logger.warning("[whiten] %s whitening: %s", mode.value, msg)
    return WhitenedData(y=x.data @ root.matrix, mode=mode, warnings=list(root.warnings))


def whiten_oracle(x: SpatioTemporalSample, sigma_t: SymMatrix) -> WhitenedData:
    sigma_t = as_symmetric(sigma_t, "sigma_t")
    if sigma_t.shape[0] != x.q:
        raise InvalidInputError(f"sigma_t is {sigma_t.shape[0]}x{sigma_t.shape[0]} but the sample has q={x.q}")
    return _apply(x, sigma_t, WhiteningMode.ORACLE)


def whiten_data_driven(x: SpatioTemporalSample) -> WhitenedData:
    # no trace normalization: a constant factor in sigma_t cancels in W
    return _apply(x, temporal_covariance(x), WhiteningMode.DATA_DRIVEN)


def no_whitening(x: SpatioTemporalSample) -> WhitenedData:
    return WhitenedData(y=x.data.copy(), mode=WhiteningMode.VECTOR_NORMAL)
