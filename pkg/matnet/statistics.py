"""Node-wise lasso regressions and the standardized pair statistics ``W_ij``.

For every location ``i`` the whitened observations ``Y_{k,i,l}`` are regressed
on the remaining locations over the ``n q`` stacked rows. The residual
covariances, bias-corrected with the fitted coefficients, estimate
``omega_ij / (omega_ii omega_jj)`` and are standardized by their estimated
standard error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from matnet import settings
from matnet.errors import DegenerateDataError, InvalidParameterError
from matnet.lasso import fit_gram
from matnet.whiten import WhitenedData

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeRegressions:
    beta_hat: np.ndarray  # p x (p - 1); row i holds the coefficients of the other locations in order
    residuals: np.ndarray  # n x p x q
    lambda_used: np.ndarray
    converged: np.ndarray
    u_hat: Optional[np.ndarray] = None  # scaled coordinates, for warm starts
    warnings: List[str] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.beta_hat.shape[0]

    @property
    def nq(self) -> int:
        return self.residuals.shape[0] * self.residuals.shape[2]

    def coefficient_matrix(self) -> np.ndarray:
        return expand_coefficients(self.beta_hat)


@dataclass(frozen=True)
class PairStatistics:
    """Upper-triangular (``i < j``) arrays; entries on and below the diagonal are zero."""

    r_tilde: np.ndarray  # full residual covariance matrix
    r_hat: np.ndarray
    t_stat: np.ndarray
    theta_hat: np.ndarray
    w_stat: np.ndarray
    nq: int

    @property
    def p(self) -> int:
        return self.w_stat.shape[0]

    @property
    def r_tilde_diag(self) -> np.ndarray:
        return np.diag(self.r_tilde).copy()

    def pairs(self):
        return np.triu_indices(self.p, k=1)

    def w_values(self) -> np.ndarray:
        return self.w_stat[self.pairs()]

    def uncorrected_t(self) -> np.ndarray:
        """``-r~_ij / (r~_ii r~_jj)``, the estimator without bias correction."""
        d = self.r_tilde_diag
        return np.triu(-self.r_tilde / np.outer(d, d), k=1)


def expand_coefficients(beta_hat: np.ndarray) -> np.ndarray:
    """``p x p`` matrix ``B`` with zero diagonal and ``B[i, j]`` the coefficient of location ``j`` for node ``i``."""
    p = beta_hat.shape[0]
    full = np.zeros((p, p))
    off = ~np.eye(p, dtype=bool)
    full[off] = beta_hat.ravel()
    return full


def spatial_covariance(w: WhitenedData) -> np.ndarray:
    """Sample covariance of the ``n q`` stacked whitened rows."""
    return np.atleast_2d(np.cov(w.stacked, rowvar=False))


def compute_residuals(y: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """``Y_{k,i,l} - Ybar_{i,l} - (Y_{k,-i,l} - Ybar_{.,-i,l})' beta_i`` with per-time-point means."""
    centered = y - y.mean(axis=0, keepdims=True)
    return centered - np.einsum("ij,kjl->kil", coef, centered)


def _fit_one(i, cov, scale, lam, u0, tol, max_iter):
    others = np.delete(np.arange(cov.shape[0]), i)
    s = scale[others]
    gram = cov[np.ix_(others, others)] / np.outer(s, s)
    xty = cov[others, i] / s
    sol = fit_gram(gram, xty, lam, u0=u0, tol=tol, max_iter=max_iter)
    return sol.coefficients, sol.converged


def fit_nodes(
    w: WhitenedData,
    lambdas: Sequence[float],
    warm_start: Optional[np.ndarray] = None,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    n_jobs: Optional[int] = None,
    node_labels: Optional[Sequence[str]] = None,
) -> NodeRegressions:
    """Lasso of each location on the others over the stacked, grand-mean-centered rows.

    Columns are scaled by the standard deviations from the stacked sample
    covariance; ``warm_start`` is a ``p x (p - 1)`` array in scaled coordinates.
    """
    p = w.p
    lambdas = np.broadcast_to(np.asarray(lambdas, dtype=float), (p,)).copy()
    if np.any(lambdas < 0):
        raise InvalidParameterError("lambdas must be non-negative")

    stacked = w.stacked
    centered = stacked - stacked.mean(axis=0)
    cov_m = centered.T @ centered / w.nq
    variances = np.diag(spatial_covariance(w))
    bad = np.flatnonzero(~(variances > 0))
    if bad.size:
        node = node_labels[bad[0]] if node_labels is not None else str(bad[0])
        raise DegenerateDataError(f"location {node} has zero variance after whitening", node=node)
    scale = np.sqrt(variances)

    n_jobs = settings.N_JOBS if n_jobs is None else n_jobs
    starts = [None if warm_start is None else warm_start[i] for i in range(p)]
    if n_jobs == 1:
        fits = [_fit_one(i, cov_m, scale, lambdas[i], starts[i], tol, max_iter) for i in range(p)]
    else:
        fits = Parallel(n_jobs=n_jobs)(
            delayed(_fit_one)(i, cov_m, scale, lambdas[i], starts[i], tol, max_iter) for i in range(p)
        )

    u_hat = np.vstack([u for u, _ in fits])
    converged = np.array([ok for _, ok in fits])
    beta_hat = np.vstack([u_hat[i] / np.delete(scale, i) for i in range(p)])

    warnings = list(w.warnings)
    if not converged.all():
        msg = f"lasso did not converge for {int((~converged).sum())} of {p} nodes"
        warnings.append(msg)
        logger.warning("[statistics] %s", msg)

    residuals = compute_residuals(w.y, expand_coefficients(beta_hat))
    return NodeRegressions(
        beta_hat=beta_hat,
        residuals=residuals,
        lambda_used=lambdas,
        converged=converged,
        u_hat=u_hat,
        warnings=warnings,
    )


def pair_statistics(reg: NodeRegressions, node_labels: Optional[Sequence[str]] = None) -> PairStatistics:
    eps = reg.residuals
    nq = reg.nq
    r_tilde = np.einsum("kil,kjl->ij", eps, eps) / nq
    d = np.diag(r_tilde).copy()
    bad = np.flatnonzero(~(d > 0))
    if bad.size:
        node = node_labels[bad[0]] if node_labels is not None else str(bad[0])
        raise DegenerateDataError(f"residual variance of location {node} is not positive", node=node)

    b = reg.coefficient_matrix()
    # r_hat_ij = -(r~_ij + r~_ii b_ij + r~_jj b_ji): b_ij is location j inside beta_i,
    # b_ji is location i inside beta_j
    r_hat = -(r_tilde + d[:, None] * b + d[None, :] * b.T)
    dd = np.outer(d, d)
    t_stat = r_hat / dd
    theta = (1.0 + b**2 * d[:, None] / d[None, :]) / (nq * dd)
    w_stat = t_stat / np.sqrt(theta)

    upper = np.triu(np.ones_like(dd, dtype=bool), k=1)
    return PairStatistics(
        r_tilde=r_tilde,
        r_hat=np.where(upper, r_hat, 0.0),
        t_stat=np.where(upper, t_stat, 0.0),
        theta_hat=np.where(upper, theta, 0.0),
        w_stat=np.where(upper, w_stat, 0.0),
        nq=nq,
    )
