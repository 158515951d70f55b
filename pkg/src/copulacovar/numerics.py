"""Special functions and bracketed root finding.

The distribution functions accept Python floats or NumPy arrays and return
the same shape (a plain ``float`` for scalar input). Inputs outside the
domain raise :class:`~copulacovar.errors.DomainError`; quantile functions
reject the endpoints 0 and 1 instead of returning infinities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import BracketError, ConvergenceError, DomainError

PROB_TOL = 1e-12
REAL_TOL = 1e-10


@dataclass(frozen=True)
class NumericTolerance:
    abs_tol: float = PROB_TOL
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = NumericTolerance()


@dataclass(frozen=True)
class Bracket:
    """An interval ``[lo, hi]`` over which ``f`` changes sign."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if np.sign(self.f_lo) * np.sign(self.f_hi) > 0:
            raise BracketError(
                f"no sign change on [{self.lo}, {self.hi}]: f(lo)={self.f_lo:.3e}, f(hi)={self.f_hi:.3e}"
            )

    @classmethod
    def around(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, float(f(lo)), float(f(hi)))


def _finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def _open_prob(p, name="p"):
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {p!r}")
    return arr


def _check_nu(nu):
    if not (np.isfinite(nu) and nu > 0):
        raise DomainError(f"degrees of freedom must be > 0, got {nu!r}")


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def std_normal_cdf(x):
    return _out(special.ndtr(_finite(x)))


def std_normal_pdf(x):
    arr = _finite(x)
    return _out(np.exp(-0.5 * arr * arr) / math.sqrt(2.0 * math.pi))


def std_normal_quantile(p):
    return _out(special.ndtri(_open_prob(p)))


def student_t_cdf(x, nu: float):
    _check_nu(nu)
    x = _finite(x)
    # upper half through the lower tail: stdtr itself can step back by an ulp near 1
    return _out(np.where(x > 0, 1.0 - special.stdtr(nu, -np.abs(x)), special.stdtr(nu, x)))


def student_t_pdf(x, nu: float):
    _check_nu(nu)
    arr = _finite(x)
    log_norm = special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)
    return _out(np.exp(log_norm - (nu + 1) / 2 * np.log1p(arr * arr / nu)))


def student_t_quantile(p, nu: float):
    _check_nu(nu)
    p = _open_prob(p)
    x = special.stdtrit(nu, p)
    # one Newton step; the residual is taken in the nearer tail to avoid cancellation
    resid = np.where(p > 0.5, (1.0 - p) - special.stdtr(nu, -x), special.stdtr(nu, x) - p)
    dens = np.asarray(student_t_pdf(x, nu))
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(dens > 0, resid / dens, 0.0)
    return _out(np.where(np.isfinite(step), x - step, x))


def find_root(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol: NumericTolerance | None = None,
) -> float:
    """Root of a continuous monotone ``f`` inside ``bracket``.

    Brent's method: inverse-quadratic/secant steps, falling back to bisection
    whenever a step fails to shrink the bracket. Deterministic for fixed inputs.
    """
    tol = tol or DEFAULT_TOL
    if not isinstance(bracket, Bracket):
        bracket = Bracket.around(f, *bracket)
    if bracket.f_lo == 0:
        return float(bracket.lo)
    if bracket.f_hi == 0:
        return float(bracket.hi)
    root, info = optimize.brentq(
        f, bracket.lo, bracket.hi, xtol=tol.abs_tol, maxiter=tol.max_iter,
        full_output=True, disp=False,
    )
    if not info.converged:
        raise ConvergenceError(
            f"root finding did not converge in {tol.max_iter} iterations", root, float(f(root))
        )
    return float(root)


def bisect_array(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    n_iter: int = 60,
) -> np.ndarray:
    """Elementwise bisection for an increasing vectorised ``f`` with f(lo) <= 0 <= f(hi)."""
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = f(mid) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)
