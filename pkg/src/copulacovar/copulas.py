"""Bivariate copulas and their conditional distributions.

For a copula ``C(u, v)`` the conditional distribution of ``V`` given ``U = u``
is the partial derivative ``h(v | u) = dC(u, v)/du``. CoVaR needs its inverse
in ``v``: :meth:`Copula.cond_quantile`. Scalar public methods validate their
arguments; the underscored ``_h`` / ``_h_inv`` work elementwise on arrays and
back the samplers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, special

from . import numerics as nx
from .errors import BracketError, DomainError

RHO_MAX = 0.999
THETA_MAX = 50.0
ROOT_EPS = 1e-12

_TINY = np.nextafter(0.0, 1.0)
_ONE_MINUS = np.nextafter(1.0, 0.0)


def _unit(x: float, name: str) -> float:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return float(x)


def _open_unit(x: float, name: str) -> float:
    if not (0.0 < x < 1.0):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {x!r}")
    return float(x)


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    # PCG64 keyed by (seed, stream); the same pair always yields the same stream.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


class Copula:
    """Shared behaviour of the bivariate families."""

    family: str = ""

    def cdf(self, u: float, v: float) -> float:
        u, v = _unit(u, "u"), _unit(v, "v")
        if u == 0.0 or v == 0.0:
            return 0.0
        if u == 1.0:
            return v
        if v == 1.0:
            return u
        return float(min(max(self._cdf(u, v), 0.0), min(u, v)))

    def cond_cdf(self, v: float, u: float) -> float:
        """``P(V <= v | U = u)``."""
        v, u = _open_unit(v, "v"), _open_unit(u, "u")
        return float(np.clip(self._h(v, u), 0.0, 1.0))

    def cond_quantile(self, alpha: float, u: float, tol: nx.NumericTolerance | None = None) -> float:
        """The ``v`` with ``cond_cdf(v, u) == alpha``."""
        alpha, u = _open_unit(alpha, "alpha"), _open_unit(u, "u")
        return self._cond_quantile(alpha, u, tol)

    def _cond_quantile(self, alpha, u, tol):
        return float(self._h_inv(alpha, u))

    def _root_cond_quantile(self, alpha, u, tol):
        f = lambda v: float(self._h(v, u)) - alpha
        try:
            return nx.find_root(f, (ROOT_EPS, 1.0 - ROOT_EPS), tol)
        except BracketError as exc:
            raise BracketError(
                f"conditional quantile for alpha={alpha}, u={u} lies outside [{ROOT_EPS}, {1 - ROOT_EPS}]"
            ) from exc

    def sample(self, n: int, seed: int, stream: int = 0) -> np.ndarray:
        """``n`` iid pairs as an ``(n, 2)`` array of ``(u, v)``."""
        if int(n) != n or n < 1:
            raise DomainError(f"sample size must be a positive integer, got {n!r}")
        uv = self._sample(int(n), _rng(seed, stream))
        return np.clip(uv, _TINY, _ONE_MINUS)

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        w = rng.random(n)
        u = np.clip(u, _TINY, _ONE_MINUS)
        w = np.clip(w, _TINY, _ONE_MINUS)
        return np.column_stack([u, self._h_inv(w, u)])

    def tail_dep_fn(self, level: float, side: str = "upper") -> float:
        """Finite-level quantile-quantile dependence ``lambda(level)``."""
        a = _open_unit(level, "level")
        c = self._cdf(a, a)
        if side == "lower":
            return float(c / a)
        if side == "upper":
            return float((1.0 - 2.0 * a + c) / (1.0 - a))
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")

    def tail_coefficients(self) -> tuple[float, float]:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------- elliptical


def _check_rho(rho: float) -> None:
    if not (math.isfinite(rho) and abs(rho) <= RHO_MAX):
        raise DomainError(f"rho must satisfy |rho| <= {RHO_MAX}, got {rho}")


@dataclass(frozen=True)
class GaussianCopula(Copula):
    rho: float
    family = "gaussian"

    def __post_init__(self):
        _check_rho(self.rho)

    @property
    def _s(self) -> float:
        return math.sqrt(1.0 - self.rho * self.rho)

    def _h(self, v, u):
        return special.ndtr((special.ndtri(v) - self.rho * special.ndtri(u)) / self._s)

    def _h_inv(self, alpha, u):
        return special.ndtr(self.rho * special.ndtri(u) + self._s * special.ndtri(alpha))

    def _cdf(self, u, v):
        if self.rho == 0.0:
            return u * v
        # C(u, v) = integral over t in (0, u) of h(v | t), written in x = Phi^-1(t)
        a, b, rho, s = special.ndtri(u), special.ndtri(v), self.rho, self._s
        f = lambda x: math.exp(-0.5 * x * x) * special.ndtr((b - rho * x) / s)
        norm = 1.0 / math.sqrt(2.0 * math.pi)
        if u <= 0.5:
            val, _ = integrate.quad(f, -np.inf, a, epsabs=1e-15, epsrel=1e-12, limit=200)
            return norm * val
        val, _ = integrate.quad(f, a, np.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
        return v - norm * val

    def _sample(self, n, rng):
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        return np.column_stack([special.ndtr(z1), special.ndtr(self.rho * z1 + self._s * z2)])

    def tail_coefficients(self) -> tuple[float, float]:
        return (0.0, 0.0)

    def describe(self) -> dict:
        return {"family": self.family, "rho": self.rho}


@dataclass(frozen=True)
class StudentTCopula(Copula):
    rho: float
    nu: float
    family = "t"

    def __post_init__(self):
        _check_rho(self.rho)
        nx._check_nu(self.nu)

    @property
    def _s(self) -> float:
        return math.sqrt(1.0 - self.rho * self.rho)

    def _h(self, v, u):
        nu, rho = self.nu, self.rho
        x = special.stdtrit(nu, u)
        y = special.stdtrit(nu, v)
        return special.stdtr(nu + 1, np.sqrt((nu + 1) / (nu + x * x)) * (y - rho * x) / self._s)

    def _h_inv(self, alpha, u):
        nu, rho = self.nu, self.rho
        x = special.stdtrit(nu, u)
        spread = np.sqrt((1.0 - rho * rho) * (nu + x * x) / (nu + 1))
        return special.stdtr(nu, rho * x + spread * special.stdtrit(nu + 1, alpha))

    def _cdf(self, u, v):
        nu, rho, s = self.nu, self.rho, self._s
        a, b = special.stdtrit(nu, u), special.stdtrit(nu, v)
        log_norm = special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)

        def f(x):
            dens = math.exp(log_norm - (nu + 1) / 2 * math.log1p(x * x / nu))
            return dens * special.stdtr(nu + 1, math.sqrt((nu + 1) / (nu + x * x)) * (b - rho * x) / s)

        if u <= 0.5:
            val, _ = integrate.quad(f, -np.inf, a, epsabs=1e-15, epsrel=1e-12, limit=200)
            return val
        val, _ = integrate.quad(f, a, np.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
        return v - val

    def _sample(self, n, rng):
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        w = np.sqrt(rng.chisquare(self.nu, n) / self.nu)
        x = z1 / w
        y = (self.rho * z1 + self._s * z2) / w
        return np.column_stack([special.stdtr(self.nu, x), special.stdtr(self.nu, y)])

    def tail_coefficients(self) -> tuple[float, float]:
        nu, rho = self.nu, self.rho
        lam = 2.0 * special.stdtr(nu + 1, -math.sqrt((nu + 1) * (1 - rho) / (1 + rho)))
        return (float(lam), float(lam))

    def describe(self) -> dict:
        return {"family": self.family, "rho": self.rho, "nu": self.nu}


# --------------------------------------------------------------- archimedean


@dataclass(frozen=True)
class GeneratorSpec:
    """Archimedean generator ``phi`` with its inverse and derivative.

    All callables must accept NumPy arrays. ``phi_prime_inv`` is optional;
    without it conditional quantiles are found numerically.
    """

    phi: Callable
    phi_inv: Callable
    phi_prime: Callable
    phi_prime_inv: Optional[Callable] = None
    name: str = "custom"

    def __post_init__(self):
        grid = np.linspace(0.01, 0.99, 99)
        with np.errstate(all="ignore"):
            at_one = float(self.phi(np.array(1.0)))
            vals = np.asarray(self.phi(grid), dtype=float)
            back = np.asarray(self.phi_inv(vals), dtype=float)
            slope = np.asarray(self.phi_prime(grid), dtype=float)
        if abs(at_one) > 1e-12:
            raise DomainError(f"generator must satisfy phi(1) = 0, got {at_one}")
        if not np.all(np.diff(vals) < 0):
            raise DomainError("generator must be strictly decreasing")
        if not np.all(slope < 0):
            raise DomainError("generator derivative must be negative")
        if np.max(np.abs(back - grid)) > 1e-10:
            raise DomainError("phi_inv does not invert phi on (0, 1)")

    @property
    def phi_at_zero(self) -> float:
        with np.errstate(all="ignore"):
            z = float(self.phi(np.array(0.0)))
        return math.inf if math.isnan(z) else z

    def pseudo_inv(self, s):
        s = np.asarray(s, dtype=float)
        cut = self.phi_at_zero
        with np.errstate(all="ignore"):
            out = np.where(s >= cut, 0.0, self.phi_inv(np.minimum(s, cut)))
        return out


def gumbel_generator(theta: float) -> GeneratorSpec:
    return GeneratorSpec(
        phi=lambda t: (-np.log(t)) ** theta,
        phi_inv=lambda s: np.exp(-np.asarray(s, dtype=float) ** (1.0 / theta)),
        phi_prime=lambda t: -theta * (-np.log(t)) ** (theta - 1.0) / t,
        name=f"gumbel({theta})",
    )


def clayton_generator(theta: float) -> GeneratorSpec:
    return GeneratorSpec(
        phi=lambda t: np.expm1(-theta * np.log(t)),
        phi_inv=lambda s: np.exp(-np.log1p(s) / theta),
        phi_prime=lambda t: -theta * np.asarray(t, dtype=float) ** (-theta - 1.0),
        phi_prime_inv=lambda y: (-np.asarray(y, dtype=float) / theta) ** (-1.0 / (theta + 1.0)),
        name=f"clayton({theta})",
    )


class _Archimedean(Copula):
    """Generator-based formulas; concrete families override for stability."""

    @property
    def generator(self) -> GeneratorSpec:
        raise NotImplementedError

    def _cdf(self, u, v):
        g = self.generator
        with np.errstate(all="ignore"):
            return g.pseudo_inv(g.phi(u) + g.phi(v))

    def _h(self, v, u):
        g = self.generator
        c = self._cdf(u, v)
        with np.errstate(all="ignore"):
            out = np.where(c > 0, g.phi_prime(u) / g.phi_prime(np.where(c > 0, c, 0.5)), 0.0)
        return out

    def _h_inv(self, alpha, u):
        g = self.generator
        if g.phi_prime_inv is not None:
            with np.errstate(all="ignore"):
                w = g.phi_prime_inv(g.phi_prime(u) / alpha)
                return g.pseudo_inv(g.phi(w) - g.phi(u))
        u = np.asarray(u, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        lo = np.zeros(np.broadcast(u, alpha).shape)
        return nx.bisect_array(lambda v: self._h(v, u) - alpha, lo, np.ones_like(lo), n_iter=64)

    def _cond_quantile(self, alpha, u, tol):
        if self.generator.phi_prime_inv is not None:
            return float(self._h_inv(alpha, u))
        return self._root_cond_quantile(alpha, u, tol)

    def tail_coefficients(self) -> tuple[float, float]:
        """Numerical limits of the generator ratios.

        upper = 2 - lim_{x->0+} (1 - phi^-1(2x)) / (1 - phi^-1(x))
        lower = lim_{x->inf} phi^-1(2x) / phi^-1(x)
        """
        g = self.generator

        def settle(xs, ratio):
            prev = None
            for x in xs:
                with np.errstate(all="ignore"):
                    r = ratio(x)
                if not np.isfinite(r):
                    break
                if prev is not None and abs(r - prev) < 1e-9:
                    return r
                prev = r
            return 0.0 if prev is None else prev

        def upper_ratio(x):
            d1 = 1.0 - float(g.pseudo_inv(x))
            if d1 < 1e-9:
                return math.nan
            return (1.0 - float(g.pseudo_inv(2 * x))) / d1

        def lower_ratio(x):
            d = float(g.pseudo_inv(x))
            return 0.0 if d == 0.0 else float(g.pseudo_inv(2 * x)) / d

        upper = 2.0 - settle([10.0 ** -k for k in range(1, 300)], upper_ratio)
        lower = settle([10.0 ** k for k in range(1, 300)], lower_ratio)
        return (float(max(lower, 0.0)), float(min(max(upper, 0.0), 1.0)))


def _check_theta(theta: float, low: float, inclusive: bool) -> None:
    ok = math.isfinite(theta) and (theta >= low if inclusive else theta > low) and theta <= THETA_MAX
    if not ok:
        bound = "≥" if inclusive else ">"
        if math.isfinite(theta) and theta > THETA_MAX:
            raise DomainError(f"theta must be ≤ {THETA_MAX:g}, got {theta}")
        raise DomainError(f"theta must be {bound} {low:g}, got {theta}")


@dataclass(frozen=True)
class GumbelCopula(_Archimedean):
    """``C(u, v) = exp(-((-ln u)^theta + (-ln v)^theta)^(1/theta))``, theta >= 1."""

    theta: float
    family = "gumbel"

    def __post_init__(self):
        _check_theta(self.theta, 1.0, inclusive=True)

    @property
    def generator(self) -> GeneratorSpec:
        return gumbel_generator(self.theta)

    def _log_a(self, lx, ly):
        # log of ((x^theta + y^theta)^(1/theta)) given log x, log y
        return np.logaddexp(self.theta * lx, self.theta * ly) / self.theta

    def _cdf(self, u, v):
        with np.errstate(divide="ignore"):
            lx, ly = np.log(-np.log(u)), np.log(-np.log(v))
        return np.exp(-np.exp(self._log_a(lx, ly)))

    def _h(self, v, u):
        # h = exp(x - A) * (x / A)^(theta - 1) with x = -ln u, A = (x^theta + y^theta)^(1/theta)
        with np.errstate(divide="ignore"):
            x = -np.log(u)
            lx, ly = np.log(x), np.log(-np.log(v))
        la = self._log_a(lx, ly)
        return np.exp(x - np.exp(la) + (self.theta - 1.0) * (lx - la))

    def _h_inv(self, alpha, u):
        # Solve A + k ln A = x + k ln x - ln alpha (k = theta - 1) for A >= x.
        # The left side is concave and increasing, so Newton from A = x rises monotonically.
        k = self.theta - 1.0
        x = -np.log(np.asarray(u, dtype=float))
        c = x + k * np.log(x) - np.log(alpha)
        if k == 0.0:
            a = c
        else:
            a = np.array(x, dtype=float, copy=True)
            for _ in range(200):
                step = (a + k * np.log(a) - c) / (1.0 + k / a)
                a = a - step
                if np.all(np.abs(step) <= 1e-13 * a):
                    break
        y = a * (-np.expm1(self.theta * (np.log(x) - np.log(a)))) ** (1.0 / self.theta)
        return np.exp(-y)

    def _cond_quantile(self, alpha, u, tol):
        return self._root_cond_quantile(alpha, u, tol)

    def tail_coefficients(self) -> tuple[float, float]:
        return (0.0, 2.0 - 2.0 ** (1.0 / self.theta))

    def describe(self) -> dict:
        return {"family": self.family, "theta": self.theta}


@dataclass(frozen=True)
class ClaytonCopula(_Archimedean):
    """``C(u, v) = (u^-theta + v^-theta - 1)^(-1/theta)``, theta > 0."""

    theta: float
    family = "clayton"

    def __post_init__(self):
        _check_theta(self.theta, 0.0, inclusive=False)

    @property
    def generator(self) -> GeneratorSpec:
        return clayton_generator(self.theta)

    def _log_sum(self, u, v):
        # log(u^-theta + v^-theta - 1) without overflow or cancellation
        a = -self.theta * np.log(u)
        b = -self.theta * np.log(v)
        m = np.maximum(a, b)
        with np.errstate(over="ignore"):
            small = np.log1p(np.expm1(a) + np.expm1(b))
        big = m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))
        return np.where(m < 30.0, small, big)

    def _cdf(self, u, v):
        return np.exp(-self._log_sum(u, v) / self.theta)

    def _h(self, v, u):
        t = self.theta
        return np.exp(-(t + 1.0) * np.log(u) - (1.0 / t + 1.0) * self._log_sum(u, v))

    def _h_inv(self, alpha, u):
        t = self.theta
        with np.errstate(divide="ignore"):
            la = np.log(np.expm1(-t / (1.0 + t) * np.log(alpha)))
        return np.exp(-np.logaddexp(la - t * np.log(u), 0.0) / t)

    def tail_coefficients(self) -> tuple[float, float]:
        return (2.0 ** (-1.0 / self.theta), 0.0)

    def describe(self) -> dict:
        return {"family": self.family, "theta": self.theta}


@dataclass(frozen=True)
class ArchimedeanCopula(_Archimedean):
    """Archimedean copula built from a user-supplied generator."""

    spec: GeneratorSpec
    family = "archimedean"

    @property
    def generator(self) -> GeneratorSpec:
        return self.spec

    def describe(self) -> dict:
        return {"family": self.family, "generator": self.spec.name}


CopulaModel = Union[GaussianCopula, StudentTCopula, GumbelCopula, ClaytonCopula, ArchimedeanCopula]

FAMILIES = ("gaussian", "t", "gumbel", "clayton")


def make_copula(family: str, rho: float | None = None, theta: float | None = None, nu: float | None = None) -> Copula:
    """Build one of the named families from flat parameters."""
    family = family.lower()
    if family in ("gaussian", "normal"):
        if rho is None:
            raise DomainError("gaussian copula requires rho")
        return GaussianCopula(rho)
    if family in ("t", "student_t", "student-t"):
        if rho is None:
            raise DomainError("t copula requires rho")
        return StudentTCopula(rho, 5.0 if nu is None else nu)
    if family == "gumbel":
        if theta is None:
            raise DomainError("gumbel copula requires theta")
        return GumbelCopula(theta)
    if family == "clayton":
        if theta is None:
            raise DomainError("clayton copula requires theta")
        return ClaytonCopula(theta)
    raise DomainError(f"unknown copula family {family!r}; expected one of {', '.join(FAMILIES)}")
