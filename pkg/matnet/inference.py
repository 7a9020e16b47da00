"""Decisions built on the standardized statistics: the Gumbel-calibrated global
test of a diagonal spatial precision matrix and the FDR-controlled edge test."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Tuple

import numpy as np
from scipy import stats as sps

from matnet import normal
from matnet.errors import InvalidParameterError, UnsupportedDimensionError
from matnet.statistics import PairStatistics

_GUMBEL_SCALE = 1.0 / math.sqrt(8.0 * math.pi)


@dataclass(frozen=True)
class GlobalTestResult:
    m_stat: float
    threshold: float
    alpha: float
    reject: bool
    p_value: float
    argmax_pair: Tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "m_stat": self.m_stat,
            "threshold": self.threshold,
            "alpha": self.alpha,
            "reject": self.reject,
            "p_value": self.p_value,
            "argmax_pair": list(self.argmax_pair),
        }


@dataclass(frozen=True)
class RejectedPair:
    i: int
    j: int
    w: float
    p_value: float


@dataclass(frozen=True)
class FdrResult:
    t_hat: float
    alpha: float
    t_hat_capped: bool
    rejected: List[RejectedPair] = field(default_factory=list)

    def rejected_mask(self, p: int) -> np.ndarray:
        mask = np.zeros((p, p), dtype=bool)
        for pair in self.rejected:
            mask[pair.i, pair.j] = True
        return mask

    def to_dict(self) -> dict:
        return {
            "t_hat": self.t_hat,
            "alpha": self.alpha,
            "t_hat_capped": self.t_hat_capped,
            "n_rejected": len(self.rejected),
            "rejected": [asdict(r) for r in self.rejected],
        }


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")


def gumbel_cdf(t):
    """Limit law ``exp{-(8 pi)^{-1/2} exp(-t / 2)}`` of ``M - 4 log p + log log p``."""
    return np.exp(-_GUMBEL_SCALE * np.exp(-np.asarray(t, dtype=float) / 2.0))


def gumbel_quantile(alpha: float) -> float:
    """``q_alpha = -log(8 pi) - 2 log log (1 - alpha)^{-1}``."""
    _check_alpha(alpha)
    return -math.log(8.0 * math.pi) - 2.0 * math.log(math.log(1.0 / (1.0 - alpha)))


def centering(p: int) -> float:
    """``4 log p - log log p``."""
    if p <= 2:
        raise UnsupportedDimensionError(f"the global test needs p >= 3 (log log p > 0), got p={p}")
    return 4.0 * math.log(p) - math.log(math.log(p))


def global_threshold(p: int, alpha: float) -> float:
    return gumbel_quantile(alpha) + centering(p)


def global_p_value(m_stat: float, p: int) -> float:
    value = 1.0 - float(gumbel_cdf(m_stat - centering(p)))
    return min(max(value, 0.0), 1.0)


def global_test(stats: PairStatistics, p: int, alpha: float = 0.05) -> GlobalTestResult:
    """Reject a diagonal spatial precision matrix when ``max W_ij^2`` reaches
    ``q_alpha + 4 log p - log log p``."""
    if p != stats.p:
        raise InvalidParameterError(f"p={p} does not match the statistics (p={stats.p})")
    threshold = global_threshold(p, alpha)
    rows, cols = stats.pairs()
    squared = stats.w_stat[rows, cols] ** 2
    k = int(np.argmax(squared))
    m_stat = float(squared[k])
    return GlobalTestResult(
        m_stat=m_stat,
        threshold=threshold,
        alpha=alpha,
        reject=bool(m_stat >= threshold),
        p_value=global_p_value(m_stat, p),
        argmax_pair=(int(rows[k]), int(cols[k])),
    )


def gumbel_ks_distance(centered_maxima) -> float:
    """Kolmogorov-Smirnov distance between centered maxima and the Gumbel limit."""
    return float(sps.kstest(np.asarray(centered_maxima, dtype=float), gumbel_cdf).statistic)


def _fdr_cutoff(abs_w: np.ndarray, p: int, alpha: float) -> Tuple[float, bool]:
    """Smallest ``t`` in ``[0, 2 sqrt(log p)]`` with
    ``2 (1 - Phi(t)) (p^2 - p) / 2 / max(R(t), 1) <= alpha``.

    ``R`` is constant on each interval between consecutive observed ``|W|``,
    so the infimum is found interval by interval in closed form.
    """
    n_null = (p * p - p) / 2.0
    cap = 2.0 * math.sqrt(math.log(p))
    sorted_w = np.sort(abs_w)
    knots = np.unique(np.concatenate(([0.0], sorted_w[sorted_w < cap], [cap])))

    def rejections(t):
        return sorted_w.size - np.searchsorted(sorted_w, t, side="left")

    if 2.0 * normal.sf(0.0) * n_null / max(rejections(0.0), 1) <= alpha:
        return 0.0, False
    for left, right in zip(knots[:-1], knots[1:]):
        count = max(rejections(right), 1)
        # on (left, right] the criterion is decreasing in t with R fixed at R(right)
        t_star = float(normal.isf(alpha * count / (2.0 * n_null)))
        if t_star <= right:
            return max(left, t_star), False
    return cap, True


def fdr_threshold(stats: PairStatistics, p: int, alpha: float = 0.1) -> FdrResult:
    """Threshold ``|W_ij|`` at the smallest level whose estimated false discovery
    proportion is at most ``alpha``; falls back to ``2 sqrt(log p)``."""
    _check_alpha(alpha)
    if p != stats.p:
        raise InvalidParameterError(f"p={p} does not match the statistics (p={stats.p})")
    rows, cols = stats.pairs()
    w = stats.w_stat[rows, cols]
    abs_w = np.abs(w)
    t_hat, capped = _fdr_cutoff(abs_w, p, alpha)

    keep = np.flatnonzero(abs_w >= t_hat)
    keep = keep[np.argsort(-abs_w[keep], kind="stable")]
    pvals = normal.two_sided_pvalue(w[keep])
    rejected = [
        RejectedPair(i=int(rows[k]), j=int(cols[k]), w=float(w[k]), p_value=float(pv))
        for k, pv in zip(keep, pvals)
    ]
    return FdrResult(t_hat=float(t_hat), alpha=alpha, t_hat_capped=capped, rejected=rejected)
