"""Matrix-normal sampling and the ground-truth spatial precision models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from matnet.errors import InvalidInputError, InvalidParameterError
from matnet.linalg import (
    SymMatrix,
    ar1_covariance,
    as_symmetric,
    lambda_min,
    psd_sqrt,
    spd_inverse,
)
from matnet.rng import Rng, normal_variates


class ModelKind(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    MODEL3 = "model3"


@dataclass(frozen=True)
class KroneckerModel:
    """Matrix-normal law with ``Cov{vec(X)} = sigma_l (x) sigma_t``."""

    sigma_l: np.ndarray
    sigma_t: np.ndarray
    omega_l: np.ndarray
    omega_t: np.ndarray

    def __post_init__(self):
        for name in ("sigma_l", "sigma_t", "omega_l", "omega_t"):
            object.__setattr__(self, name, as_symmetric(getattr(self, name), name))
        for cov, prec, side in ((self.sigma_l, self.omega_l, "spatial"), (self.sigma_t, self.omega_t, "temporal")):
            if cov.shape != prec.shape:
                raise InvalidInputError(f"{side} covariance and precision shapes differ")
            if np.max(np.abs(cov @ prec - np.eye(cov.shape[0]))) > 1e-6:
                raise InvalidInputError(f"{side} precision is not the inverse of the covariance")
            if lambda_min(cov) <= 0:
                raise InvalidInputError(f"{side} covariance is not positive definite")

    @classmethod
    def from_precision(cls, omega_l: SymMatrix, sigma_t: SymMatrix) -> "KroneckerModel":
        omega_l = as_symmetric(omega_l, "omega_l")
        sigma_t = as_symmetric(sigma_t, "sigma_t")
        return cls(sigma_l=spd_inverse(omega_l), sigma_t=sigma_t, omega_l=omega_l, omega_t=spd_inverse(sigma_t))

    @classmethod
    def from_covariances(cls, sigma_l: SymMatrix, sigma_t: SymMatrix) -> "KroneckerModel":
        sigma_l = as_symmetric(sigma_l, "sigma_l")
        sigma_t = as_symmetric(sigma_t, "sigma_t")
        return cls(sigma_l=sigma_l, sigma_t=sigma_t, omega_l=spd_inverse(sigma_l), omega_t=spd_inverse(sigma_t))

    @property
    def p(self) -> int:
        return self.sigma_l.shape[0]

    @property
    def q(self) -> int:
        return self.sigma_t.shape[0]

    def edges(self) -> np.ndarray:
        """Boolean upper-triangular mask of the nonzero off-diagonal precision entries."""
        return np.triu(self.omega_l != 0.0, k=1)


@dataclass(frozen=True)
class SpatioTemporalSample:
    """``n`` observations of a ``p x q`` (locations x time points) matrix."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 3:
            raise InvalidInputError(f"sample must be an n x p x q array, got shape {data.shape}")
        n, p, q = data.shape
        if n < 2 or p < 2 or q < 1:
            raise InvalidInputError(f"sample needs n >= 2, p >= 2, q >= 1; got n={n}, p={p}, q={q}")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("sample has non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    @property
    def q(self) -> int:
        return self.data.shape[2]

    def stacked(self) -> np.ndarray:
        """``(n q) x p`` matrix whose rows are the columns ``X_{k, ., l}``."""
        return self.data.transpose(0, 2, 1).reshape(self.n * self.q, self.p)

    def scaled(self, factor: float) -> "SpatioTemporalSample":
        return SpatioTemporalSample(self.data * factor)


def sample_matrix_normal(model: KroneckerModel, n: int, rng: Rng) -> SpatioTemporalSample:
    """Draw ``X_k = sigma_l^{1/2} Z_k sigma_t^{1/2}`` with standard normal ``Z_k``."""
    if n < 2:
        raise InvalidParameterError(f"need at least 2 samples, got {n}")
    left = psd_sqrt(model.sigma_l)
    right = psd_sqrt(model.sigma_t)
    z = normal_variates(rng.generator(), (n, model.p, model.q))
    return SpatioTemporalSample(left @ z @ right)


def _shift_to_pd(omega_star: np.ndarray) -> np.ndarray:
    delta = abs(lambda_min(omega_star)) + 0.05
    p = omega_star.shape[0]
    return (omega_star + delta * np.eye(p)) / (1.0 + delta)


def build_model(kind: ModelKind, p: int, rng: Rng) -> SymMatrix:
    """Spatial precision matrix of one of the three banded/hub/random models."""
    kind = ModelKind(kind)
    if p < 4:
        raise InvalidParameterError(f"models need p >= 4, got {p}")

    if kind is ModelKind.MODEL1:
        omega = np.eye(p)
        idx = np.arange(p - 1)
        omega[idx, idx + 1] = omega[idx + 1, idx] = 0.6
        idx = np.arange(p - 2)
        omega[idx, idx + 2] = omega[idx + 2, idx] = 0.3
        return omega

    if kind is ModelKind.MODEL2:
        if p % 10:
            raise InvalidParameterError(f"model2 needs p divisible by 10, got {p}")
        star = np.zeros((p, p))
        for hub in range(0, p, 10):
            star[hub, hub + 1:hub + 10] = 0.5
            star[hub + 1:hub + 10, hub] = 0.5
        return _shift_to_pd(star)

    gen = rng.generator()
    upper = np.triu(gen.random((p, p)) < 2.0 / p, k=1) * 0.8
    star = upper + upper.T + np.eye(p)
    return _shift_to_pd(star)


def build_global_alternative(p: int, n: int, q: int, rng: Rng) -> SymMatrix:
    """Identity perturbed in four random symmetric pairs of magnitude
    between 2 and 4 times ``sqrt(log p / (n q))``, then shifted to be PD."""
    if p < 8:
        raise InvalidParameterError(f"the eight-entry alternative needs p >= 8, got {p}")
    gen = rng.generator()
    rows, cols = np.triu_indices(p, k=1)
    chosen = gen.choice(rows.size, size=4, replace=False)
    unit = math.sqrt(math.log(p) / (n * q))
    magnitude = gen.uniform(2.0 * unit, 4.0 * unit, size=4)
    sign = gen.choice(np.array([-1.0, 1.0]), size=4)

    u = np.zeros((p, p))
    u[rows[chosen], cols[chosen]] = sign * magnitude
    u = u + u.T
    base = np.eye(p) + u
    delta = abs(lambda_min(base)) + 0.05
    return (base + delta * np.eye(p)) / (1.0 + delta)


def build_power_class_alternative(p: int, n: int, q: int, c: float, rng: Rng) -> SymMatrix:
    """``I + u (e_i e_j' + e_j e_i')`` at one random pair, with ``u`` chosen so
    the standardized signal ``|omega_ij| / theta_ij^{1/2}`` equals ``c sqrt(log p)``."""
    if p < 3:
        raise InvalidParameterError(f"need p >= 3, got {p}")
    a = c * c * math.log(p) / (n * q)
    if not 0 < a < 0.5:
        raise InvalidParameterError(
            f"c^2 log p / (n q) = {a:.3g} must lie in (0, 1/2) for a positive definite alternative"
        )
    gen = rng.generator()
    rows, cols = np.triu_indices(p, k=1)
    pick = int(gen.integers(rows.size))
    u = math.sqrt(a / (1.0 - a)) * (1.0 if gen.random() < 0.5 else -1.0)
    omega = np.eye(p)
    omega[rows[pick], cols[pick]] = omega[cols[pick], rows[pick]] = u
    return omega


def standardized_signal(omega: SymMatrix, n: int, q: int) -> float:
    """``max_{i<j} |omega_ij| / theta_ij^{1/2}`` for a precision matrix."""
    omega = as_symmetric(omega, "omega")
    d = np.diag(omega)
    r_diag = 1.0 / d
    beta = -omega / d[:, None]
    theta = (1.0 + beta**2 * r_diag[:, None] / r_diag[None, :]) / (n * q * np.outer(r_diag, r_diag))
    rows, cols = np.triu_indices(omega.shape[0], k=1)
    return float(np.max(np.abs(omega[rows, cols]) / np.sqrt(theta[rows, cols])))


def null_spatial(p: int) -> SymMatrix:
    return np.eye(p)


def temporal_model(q: int, rho: float = 0.4) -> SymMatrix:
    return ar1_covariance(q, rho)
