"""Monte-Carlo brute-force estimators used to cross-check the analytic results.

Samples are drawn in fixed-size chunks; chunk ``k`` uses the random stream
``(seed, k)``. Chunks can be spread over worker threads, and since results are
merged in chunk order the estimate does not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special, stats

from .copulas import Copula
from .covar import SystemModel
from .errors import DomainError, InsufficientDataError

CHUNK_SIZE = 1 << 20
MIN_IN_BAND = 100


@dataclass(frozen=True)
class OracleConfig:
    n_samples: int = 10_000_000
    band_halfwidth: float = 0.005
    seed: int = 0
    confidence: float = 0.99
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 10_000:
            raise InsufficientDataError(f"oracle needs at least 10^4 samples, got {self.n_samples}")
        if not 0.0 < self.band_halfwidth < 0.1:
            raise DomainError(f"band_halfwidth must lie in (0, 0.1), got {self.band_halfwidth}")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")

    @property
    def z(self) -> float:
        return float(special.ndtri(0.5 + self.confidence / 2.0))


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    half_width: float
    n_in_band: int

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return abs(x - self.value) <= self.half_width + slack


def _collect(copula: Copula, cfg: OracleConfig, select: Callable[[np.ndarray], np.ndarray]) -> list:
    """Apply ``select`` to every sample chunk, returning per-chunk results in order."""
    sizes = [CHUNK_SIZE] * (cfg.n_samples // CHUNK_SIZE)
    if cfg.n_samples % CHUNK_SIZE:
        sizes.append(cfg.n_samples % CHUNK_SIZE)

    def run(k):
        return select(copula.sample(sizes[k], cfg.seed, stream=k))

    if cfg.workers == 1:
        return [run(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(run, range(len(sizes))))


def _quantile_estimate(v: np.ndarray, alpha: float, cfg: OracleConfig, transform) -> OracleEstimate:
    """Empirical alpha-quantile with a distribution-free order-statistic interval.

    ``transform`` is monotone, so order statistics are taken on the uniform
    scale and only the three needed ones are mapped to loss units.
    """
    m = len(v)
    if m < MIN_IN_BAND:
        raise InsufficientDataError(f"only {m} samples in the conditioning region (need {MIN_IN_BAND})")
    v = np.sort(v)
    tail = (1.0 - cfg.confidence) / 2.0
    rank = max(math.ceil(m * alpha), 1)
    lo = int(stats.binom.ppf(tail, m, alpha))
    hi = int(stats.binom.ppf(1.0 - tail, m, alpha)) + 1
    lo, hi = min(max(lo, 1), m), min(max(hi, 1), m)
    est, x_lo, x_hi = (float(x) for x in transform(v[[rank - 1, lo - 1, hi - 1]]))
    return OracleEstimate(est, max(est - x_lo, x_hi - est, 0.0), m)


def mc_covar(model: SystemModel, alpha: float, u_star: float, cfg: OracleConfig) -> OracleEstimate:
    """Band-conditional estimate of the system's alpha-quantile given ``U`` near ``u_star``."""
    band = cfg.band_halfwidth
    if not band < u_star < 1.0 - band:
        raise DomainError(f"u_star must lie in ({band}, {1 - band}), got {u_star}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    kept = _collect(model.copula, cfg, lambda uv: uv[np.abs(uv[:, 0] - u_star) <= band, 1])
    return _quantile_estimate(np.concatenate(kept), alpha, cfg, model.margin_s.quantile)


def mc_covar_leq(model: SystemModel, alpha: float, beta: float, cfg: OracleConfig) -> OracleEstimate:
    """Estimate of the system's alpha-quantile given ``U <= beta``."""
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError("alpha and beta must lie in (0, 1)")
    kept = _collect(model.copula, cfg, lambda uv: uv[uv[:, 0] <= beta, 1])
    return _quantile_estimate(np.concatenate(kept), alpha, cfg, model.margin_s.quantile)


def mc_tail_dep(copula: Copula, level: float, side: str, cfg: OracleConfig) -> OracleEstimate:
    """Empirical joint exceedance (or shortfall) frequency at ``level``."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    if side == "upper":
        select = lambda uv: (int(np.sum(uv[:, 0] > level)), int(np.sum((uv[:, 0] > level) & (uv[:, 1] > level))))
    elif side == "lower":
        select = lambda uv: (int(np.sum(uv[:, 0] < level)), int(np.sum((uv[:, 0] < level) & (uv[:, 1] < level))))
    else:
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    counts = _collect(copula, cfg, select)
    m = sum(c[0] for c in counts)
    hits = sum(c[1] for c in counts)
    if m < MIN_IN_BAND:
        raise InsufficientDataError(f"only {m} conditioning exceedances (need {MIN_IN_BAND})")
    p = hits / m
    return OracleEstimate(p, cfg.z * math.sqrt(p * (1.0 - p) / m), m)


def mc_conditional_correlation(
    model: SystemModel, u_lo: float, u_hi: float, cfg: OracleConfig
) -> OracleEstimate:
    """Pearson correlation of the losses restricted to ``F_i(L_i)`` in ``[u_lo, u_hi]``.

    The interval uses Fisher's z-transform; ``half_width`` is its larger side.
    """
    if not 0.0 <= u_lo < u_hi <= 1.0:
        raise DomainError(f"need 0 <= u_lo < u_hi <= 1, got [{u_lo}, {u_hi}]")

    def select(uv):
        keep = uv[(uv[:, 0] >= u_lo) & (uv[:, 0] <= u_hi)]
        return np.asarray(model.margin_i.quantile(keep[:, 0])), np.asarray(model.margin_s.quantile(keep[:, 1]))

    parts = _collect(model.copula, cfg, select)
    xi = np.concatenate([p[0] for p in parts])
    xs = np.concatenate([p[1] for p in parts])
    m = len(xi)
    if m < MIN_IN_BAND:
        raise InsufficientDataError(f"only {m} samples in [{u_lo}, {u_hi}] (need {MIN_IN_BAND})")
    r = float(np.corrcoef(xi, xs)[0, 1])
    zr = math.atanh(max(min(r, 1 - 1e-15), -1 + 1e-15))
    d = cfg.z / math.sqrt(m - 3)
    hw = max(math.tanh(zr + d) - r, r - math.tanh(zr - d))
    return OracleEstimate(r, hw, m)
