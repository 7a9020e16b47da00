"""Penalty selection for the node-wise regressions.

Two policies: the fixed ``kappa`` rule and the data-adaptive grid search that
matches the number of large ``|W_ij|`` to its normal-tail expectation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from matnet import normal
from matnet.errors import InvalidParameterError
from matnet.lasso import default_lambda
from matnet.statistics import NodeRegressions, PairStatistics, fit_nodes, pair_statistics, spatial_covariance
from matnet.whiten import WhitenedData

logger = logging.getLogger(__name__)

GRID_SIZE = 40
GRID_STEP = 20.0
N_LEVELS = 10


class LambdaPolicy(str, Enum):
    KAPPA = "kappa"
    TUNED = "tuned"


@dataclass(frozen=True)
class TuningResult:
    lambdas: np.ndarray
    b_hat: int
    objective: np.ndarray  # objective[b - 1] for b = 1..GRID_SIZE


def lambda_unit(w: WhitenedData) -> np.ndarray:
    """``default_lambda`` at ``kappa = 1`` per location; zero-variance locations get 0."""
    variances = np.diag(spatial_covariance(w))
    return np.array([default_lambda(v, w.p, w.nq, kappa=1.0) if v > 0 else 0.0 for v in variances])


def kappa_lambdas(w: WhitenedData, kappa: float = 2.0) -> np.ndarray:
    if kappa <= 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    return kappa * lambda_unit(w)


def tail_levels(p: int) -> Tuple[np.ndarray, np.ndarray]:
    """Thresholds ``Phi^{-1}(1 - s a / 10)`` and tail masses ``s a / 10`` for s = 1..10,
    where ``a = 1 - Phi(sqrt(log p))``."""
    base = float(normal.sf(math.sqrt(math.log(p))))
    mass = np.arange(1, N_LEVELS + 1) * base / N_LEVELS
    return normal.isf(mass), mass


def tuning_objective(w_values: np.ndarray, p: int) -> float:
    thresholds, mass = tail_levels(p)
    abs_w = np.abs(np.asarray(w_values))
    counts = (abs_w[None, :] >= thresholds[:, None]).sum(axis=1)
    ratios = counts / (mass * p * (p - 1)) - 1.0
    return float(np.sum(ratios**2))


def select_tuning(
    w: WhitenedData,
    n_jobs: Optional[int] = None,
    node_labels: Optional[Sequence[str]] = None,
) -> TuningResult:
    """Evaluate ``lambda_i = (b / 20) * unit_i`` for b = 40 down to 1 (warm starts),
    and keep the b with the smallest objective; ties go to the smaller b."""
    if w.p < 3:
        raise InvalidParameterError(f"tuning needs p >= 3, got {w.p}")
    unit = lambda_unit(w)
    objective = np.empty(GRID_SIZE)
    warm = None
    for b in range(GRID_SIZE, 0, -1):
        reg = fit_nodes(w, b / GRID_STEP * unit, warm_start=warm, n_jobs=n_jobs, node_labels=node_labels)
        warm = reg.u_hat
        stats = pair_statistics(reg, node_labels=node_labels)
        objective[b - 1] = tuning_objective(stats.w_values(), w.p)
    b_hat = int(np.argmin(objective)) + 1
    logger.info("[tuning] selected b=%d (objective %.4g)", b_hat, objective[b_hat - 1])
    return TuningResult(lambdas=b_hat / GRID_STEP * unit, b_hat=b_hat, objective=objective)


def tune_lambda(w: WhitenedData, n_jobs: Optional[int] = None) -> np.ndarray:
    return select_tuning(w, n_jobs=n_jobs).lambdas


def compute_statistics(
    w: WhitenedData,
    policy: LambdaPolicy = LambdaPolicy.KAPPA,
    kappa: float = 2.0,
    n_jobs: Optional[int] = None,
    node_labels: Optional[Sequence[str]] = None,
) -> Tuple[PairStatistics, NodeRegressions]:
    """Choose penalties by ``policy``, fit the nodes and standardize."""
    if LambdaPolicy(policy) is LambdaPolicy.TUNED:
        lambdas = select_tuning(w, n_jobs=n_jobs, node_labels=node_labels).lambdas
    else:
        lambdas = kappa_lambdas(w, kappa)
    reg = fit_nodes(w, lambdas, n_jobs=n_jobs, node_labels=node_labels)
    return pair_statistics(reg, node_labels=node_labels), reg
