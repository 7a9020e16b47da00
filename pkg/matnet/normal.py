"""Standard normal distribution functions (``scipy.special`` erf-based)."""

import numpy as np
from scipy.special import ndtr, ndtri


def cdf(x):
    return ndtr(x)


def sf(x):
    return ndtr(-np.asarray(x, dtype=float))


def ppf(u):
    return ndtri(u)


def isf(u):
    return -ndtri(u)


def two_sided_pvalue(w):
    return 2.0 * sf(np.abs(w))
