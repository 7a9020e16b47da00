"""Dense symmetric linear algebra: eigendecomposition, inverse square roots,
AR(1) covariances and Kronecker products.

Matrices are plain ``numpy`` float arrays; ``SymMatrix`` is a documentation
alias, and :func:`as_symmetric` is the single place that validates one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.linalg import toeplitz

from matnet import settings
from matnet.errors import InvalidInputError, InvalidParameterError, ResourceError

logger = logging.getLogger(__name__)

SymMatrix = np.ndarray


@dataclass(frozen=True)
class EigenDecomp:
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns are eigenvectors

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


@dataclass(frozen=True)
class InvSqrt:
    """Inverse square root together with what the eigenvalue floor did."""

    matrix: np.ndarray
    floor: float
    n_floored: int = 0
    warnings: List[str] = field(default_factory=list)


def as_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite, exactly symmetric float array.

    Asymmetry at rounding level is removed by averaging with the transpose;
    anything larger is an input error.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    scale = max(float(np.max(np.abs(arr))), 1.0)
    if np.max(np.abs(arr - arr.T)) > 1e-8 * scale:
        raise InvalidInputError(f"{name} is not symmetric")
    return 0.5 * (arr + arr.T)


def ar1_covariance(dim: int, rho: float) -> SymMatrix:
    """Covariance with entries ``rho ** |i - j|``."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    if not abs(rho) < 1:
        raise InvalidParameterError(f"AR(1) coefficient must lie in (-1, 1), got {rho}")
    return toeplitz(float(rho) ** np.arange(dim))


def sym_eigendecomp(a: SymMatrix) -> EigenDecomp:
    a = as_symmetric(a)
    values, vectors = np.linalg.eigh(a)
    return EigenDecomp(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())


def inv_sqrt(a: SymMatrix, floor: Optional[float] = None) -> InvSqrt:
    """``V diag(max(lambda, floor))^{-1/2} V^T``.

    With ``floor=None`` the floor is ``settings.EIG_FLOOR * lambda_max``.
    """
    eig = sym_eigendecomp(a)
    if floor is None:
        top = float(eig.values[0])
        floor = settings.EIG_FLOOR * top if top > 0 else settings.EIG_FLOOR
    if floor <= 0:
        raise InvalidParameterError(f"eigenvalue floor must be positive, got {floor}")

    floored = eig.values < floor
    n_floored = int(np.count_nonzero(floored))
    warnings: List[str] = []
    if n_floored:
        msg = f"{n_floored} of {eig.dim} eigenvalues raised to the floor {floor:.3g}"
        warnings.append(msg)
        logger.warning("[linalg] %s", msg)

    values = np.maximum(eig.values, floor)
    matrix = (eig.vectors / np.sqrt(values)) @ eig.vectors.T
    return InvSqrt(matrix=0.5 * (matrix + matrix.T), floor=float(floor), n_floored=n_floored, warnings=warnings)


def psd_sqrt(a: SymMatrix) -> SymMatrix:
    """Symmetric square root of a positive semi-definite matrix."""
    eig = sym_eigendecomp(a)
    root = (eig.vectors * np.sqrt(np.clip(eig.values, 0.0, None))) @ eig.vectors.T
    return 0.5 * (root + root.T)


def spd_inverse(a: SymMatrix) -> SymMatrix:
    a = as_symmetric(a)
    inverse = np.linalg.inv(a)
    return 0.5 * (inverse + inverse.T)


def lambda_min(a: SymMatrix) -> float:
    return float(np.linalg.eigvalsh(as_symmetric(a))[0])


def kron(a: SymMatrix, b: SymMatrix, max_dim: Optional[int] = None) -> SymMatrix:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    cap = settings.MAX_KRON_DIM if max_dim is None else max_dim
    dim = a.shape[0] * b.shape[0]
    if dim > cap:
        raise ResourceError(f"Kronecker product of size {dim} exceeds the configured cap {cap}")
    return np.kron(a, b)
