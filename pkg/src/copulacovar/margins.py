"""Univariate loss distributions.

Every margin is an immutable value with ``cdf``, ``quantile``, ``pdf`` and
``mean``. ``cdf``/``quantile`` accept scalars or arrays. Losses use the
positive-loss convention: larger values are worse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import numerics as nx
from .errors import DomainError, UndefinedMomentError

MIN_EMPIRICAL_SAMPLES = 30


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise DomainError("normal parameters must be finite")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def cdf(self, x):
        return nx.std_normal_cdf((np.asarray(nx._finite(x)) - self.mu) / self.sigma)

    def quantile(self, p):
        return nx._out(self.sigma * np.asarray(nx.std_normal_quantile(p)) + self.mu)

    def pdf(self, x):
        return nx._out(np.asarray(nx.std_normal_pdf((nx._finite(x) - self.mu) / self.sigma)) / self.sigma)

    def mean(self) -> float:
        return self.mu

    def describe(self) -> dict:
        return {"kind": "normal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class StudentT:
    """Location-scale Student t with ``nu`` degrees of freedom."""

    nu: float
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.loc) and math.isfinite(self.scale)):
            raise DomainError("t parameters must be finite")
        nx._check_nu(self.nu)
        if self.scale <= 0:
            raise DomainError(f"scale must be > 0, got {self.scale}")

    def cdf(self, x):
        return nx.student_t_cdf((nx._finite(x) - self.loc) / self.scale, self.nu)

    def quantile(self, p):
        return nx._out(self.scale * np.asarray(nx.student_t_quantile(p, self.nu)) + self.loc)

    def pdf(self, x):
        return nx._out(np.asarray(nx.student_t_pdf((nx._finite(x) - self.loc) / self.scale, self.nu)) / self.scale)

    def mean(self) -> float:
        if self.nu <= 1:
            raise UndefinedMomentError(f"Student t mean is undefined for nu <= 1 (nu={self.nu})")
        return self.loc

    def describe(self) -> dict:
        return {"kind": "student_t", "nu": self.nu, "loc": self.loc, "scale": self.scale}


def interp_quantile(samples: np.ndarray, p):
    """Linear interpolation between order statistics at position ``p*(n-1)``."""
    s = np.asarray(samples, dtype=float)
    h = np.asarray(p, dtype=float) * (len(s) - 1)
    k = np.clip(np.floor(h).astype(int), 0, len(s) - 2)
    return nx._out(s[k] + (h - k) * (s[k + 1] - s[k]))


def interp_cdf(samples: np.ndarray, x):
    """Inverse of :func:`interp_quantile` on ``[s[0], s[-1]]``.

    Ties resolve to the largest position, which keeps the function
    right-continuous.
    """
    s = np.asarray(samples, dtype=float)
    xa = np.asarray(x, dtype=float)
    if np.any((xa < s[0]) | (xa > s[-1])):
        raise DomainError(f"x outside the empirical sample range [{s[0]}, {s[-1]}]")
    n = len(s)
    k = np.clip(np.searchsorted(s, xa, side="right") - 1, 0, n - 2)
    gap = s[k + 1] - s[k]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(gap > 0, (xa - s[k]) / np.where(gap > 0, gap, 1.0), 1.0)
    pos = np.where(xa >= s[-1], n - 1, k + frac)
    return nx._out(pos / (n - 1))


@dataclass(frozen=True)
class Empirical:
    """Margin defined by a sorted sample, interpolated between order statistics.

    ``cdf`` raises outside the sample range rather than extrapolating.
    """

    samples: tuple = field(repr=False)

    def __init__(self, samples: Sequence[float]):
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 1 or len(arr) < MIN_EMPIRICAL_SAMPLES:
            raise DomainError(f"empirical margin needs at least {MIN_EMPIRICAL_SAMPLES} samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("empirical samples must be finite")
        arr = np.sort(arr)
        if arr[0] == arr[-1]:
            raise DomainError("empirical samples are all equal")
        object.__setattr__(self, "samples", tuple(arr.tolist()))
        object.__setattr__(self, "_arr", arr)
        self._arr.setflags(write=False)

    @property
    def values(self) -> np.ndarray:
        return self._arr

    def cdf(self, x):
        nx._finite(x)
        return interp_cdf(self._arr, x)

    def quantile(self, p):
        nx._open_prob(p)
        return interp_quantile(self._arr, p)

    def pdf(self, x):
        # slope of the piecewise-linear cdf
        s = self._arr
        xa = np.asarray(x, dtype=float)
        n = len(s)
        k = np.clip(np.searchsorted(s, xa, side="right") - 1, 0, n - 2)
        gap = s[k + 1] - s[k]
        inside = (xa >= s[0]) & (xa <= s[-1]) & (gap > 0)
        with np.errstate(divide="ignore"):
            dens = np.where(inside, 1.0 / ((n - 1) * np.where(gap > 0, gap, 1.0)), 0.0)
        return nx._out(dens)

    def mean(self) -> float:
        return float(np.mean(self._arr))

    def describe(self) -> dict:
        s = self._arr
        return {"kind": "empirical", "n": len(s), "min": float(s[0]), "max": float(s[-1]), "mean": self.mean()}


Margin = Union[Normal, StudentT, Empirical]
