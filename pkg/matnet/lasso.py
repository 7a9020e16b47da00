"""l1-penalized least squares by cyclic coordinate descent.

The solver minimizes ``(1/2m) |A_s u - y|^2 + lam |u|_1`` with
``A_s = A diag(scale)^{-1}`` and reports ``beta = u / scale``. It works on the
Gram form ``G = A_s' A_s / m``, ``c = A_s' y / m`` so node-wise regressions can
share one covariance matrix. Centering is the caller's job.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from matnet.errors import InvalidParameterError

logger = logging.getLogger(__name__)

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        def decorator(func):
            return func
        return decorator(args[0]) if args and callable(args[0]) else decorator

    HAS_NUMBA = False
    logger.info("[lasso] numba not available, coordinate descent runs in pure NumPy")

KKT_TOL = 1e-6


@dataclass(frozen=True)
class LassoProblem:
    design: np.ndarray
    response: np.ndarray
    lam: float
    scale: Optional[np.ndarray] = None

    def __post_init__(self):
        design = np.atleast_2d(np.asarray(self.design, dtype=float))
        response = np.asarray(self.response, dtype=float).ravel()
        scale = np.ones(design.shape[1]) if self.scale is None else np.asarray(self.scale, dtype=float).ravel()
        if design.shape[0] < 1 or design.shape[0] != response.shape[0]:
            raise InvalidParameterError(f"design has {design.shape[0]} rows but response has {response.shape[0]}")
        if scale.shape[0] != design.shape[1] or np.any(scale <= 0):
            raise InvalidParameterError("scale must be a positive vector with one entry per column")
        if not self.lam >= 0:
            raise InvalidParameterError(f"lambda must be non-negative, got {self.lam}")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "response", response)
        object.__setattr__(self, "scale", scale)

    @property
    def m(self) -> int:
        return self.design.shape[0]

    def gram(self) -> Tuple[np.ndarray, np.ndarray]:
        scaled = self.design / self.scale
        return scaled.T @ scaled / self.m, scaled.T @ self.response / self.m

    def objective(self, beta: np.ndarray) -> float:
        resid = self.design @ beta - self.response
        return float(resid @ resid / (2 * self.m) + self.lam * np.sum(np.abs(self.scale * beta)))


@dataclass(frozen=True)
class LassoSolution:
    coefficients: np.ndarray
    iterations: int
    kkt_gap: float
    converged: bool


@njit(cache=True)
def _cd_sweeps(gram, xty, lam, u, tol, max_iter):
    d = u.shape[0]
    grad = xty.copy()
    for j in range(d):
        if u[j] != 0.0:
            grad -= gram[j] * u[j]
    for it in range(max_iter):
        max_change = 0.0
        for j in range(d):
            gjj = gram[j, j]
            old = u[j]
            if gjj <= 0.0:
                new = 0.0
            else:
                z = grad[j] + gjj * old
                if z > lam:
                    new = (z - lam) / gjj
                elif z < -lam:
                    new = (z + lam) / gjj
                else:
                    new = 0.0
            if new != old:
                delta = new - old
                grad -= gram[j] * delta
                u[j] = new
                if abs(delta) > max_change:
                    max_change = abs(delta)
        if max_change < tol:
            return u, it + 1, True
    return u, max_iter, False


def kkt_gap(gram: np.ndarray, xty: np.ndarray, lam: float, u: np.ndarray) -> float:
    """Largest violation of the lasso stationarity conditions at ``u``."""
    if u.size == 0:
        return 0.0
    grad = xty - gram @ u
    active = u != 0.0
    gap_active = np.abs(grad[active] - lam * np.sign(u[active]))
    gap_inactive = np.maximum(np.abs(grad[~active]) - lam, 0.0)
    return float(max(gap_active.max(initial=0.0), gap_inactive.max(initial=0.0)))


def fit_gram(
    gram: np.ndarray,
    xty: np.ndarray,
    lam: float,
    u0: Optional[np.ndarray] = None,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> LassoSolution:
    """Coordinate descent in scaled coordinates; returns ``u`` (not ``beta``).

    Sweeps continue with a tighter change tolerance until the KKT gap is at
    most ``KKT_TOL`` or the sweep budget is spent.
    """
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    gram = np.ascontiguousarray(gram, dtype=float)
    xty = np.ascontiguousarray(xty, dtype=float)
    u = np.zeros(xty.shape[0]) if u0 is None else np.array(u0, dtype=float)

    total, step_tol, converged = 0, tol, False
    gap = math.inf
    while total < max_iter:
        u, sweeps, converged = _cd_sweeps(gram, xty, float(lam), u, step_tol, max_iter - total)
        total += sweeps
        gap = kkt_gap(gram, xty, lam, u)
        if not converged or gap <= KKT_TOL or step_tol < 1e-15:
            break
        step_tol /= 10.0
    converged = converged and gap <= KKT_TOL
    return LassoSolution(coefficients=u, iterations=total, kkt_gap=gap, converged=converged)


def lasso_fit(
    problem: LassoProblem,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    warm_start: Optional[np.ndarray] = None,
) -> LassoSolution:
    gram, xty = problem.gram()
    u0 = None if warm_start is None else np.asarray(warm_start, dtype=float) * problem.scale
    sol = fit_gram(gram, xty, problem.lam, u0=u0, tol=tol, max_iter=max_iter)
    if not sol.converged:
        logger.warning("[lasso] no convergence after %d sweeps (kkt gap %.2e)", sol.iterations, sol.kkt_gap)
    return LassoSolution(
        coefficients=sol.coefficients / problem.scale,
        iterations=sol.iterations,
        kkt_gap=sol.kkt_gap,
        converged=sol.converged,
    )


def default_lambda(sigma_ii: float, p: int, nq: int, kappa: float = 2.0) -> float:
    """``kappa * sqrt(sigma_ii * log p / (n q))``."""
    if sigma_ii <= 0 or p <= 1 or nq <= 0 or kappa <= 0:
        raise InvalidParameterError("default_lambda needs positive sigma_ii, kappa, nq and p > 1")
    return kappa * math.sqrt(sigma_ii * math.log(p) / nq)
