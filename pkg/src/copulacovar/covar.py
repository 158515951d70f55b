"""CoVaR and Delta-CoVaR through copula conditional quantiles.

The system's conditional VaR given the institution's loss is a plain quantile
of the system margin taken at a transformed level::

    u           = F_i(l)                      (or the level beta itself)
    tilde_alpha = cond_quantile(copula, alpha, u)
    CoVaR       = F_s^-1(tilde_alpha)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from . import numerics as nx
from .copulas import ROOT_EPS, Copula, GaussianCopula, _check_rho
from .errors import BracketError, DomainError
from .margins import Margin, Normal


@dataclass(frozen=True)
class SystemModel:
    """Joint law of (institution loss, system loss) as copula plus margins."""

    margin_i: Margin
    margin_s: Margin
    copula: Copula


@dataclass(frozen=True)
class AtValue:
    l: float


@dataclass(frozen=True)
class AtQuantile:
    beta: float

    def __post_init__(self):
        nx._open_prob(self.beta, "beta")


@dataclass(frozen=True)
class AtMostQuantile:
    """Condition ``L_i <= F_i^-1(beta)`` instead of equality."""

    beta: float

    def __post_init__(self):
        nx._open_prob(self.beta, "beta")


@dataclass(frozen=True)
class AtMean:
    pass


Condition = Union[AtValue, AtQuantile, AtMostQuantile, AtMean]


@dataclass(frozen=True)
class RiskQuery:
    alpha: float
    condition: Condition

    def __post_init__(self):
        nx._open_prob(self.alpha, "alpha")


@dataclass(frozen=True)
class CoVaRReport:
    covar: float
    tilde_alpha: float
    var_s: float
    delta_covar: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "covar": self.covar,
            "tilde_alpha": self.tilde_alpha,
            "var_s": self.var_s,
            "delta_covar": self.delta_covar,
        }


def value_at_risk(m: Margin, alpha: float) -> float:
    return float(m.quantile(nx._open_prob(alpha, "alpha")))


def conditioning_level(model: SystemModel, condition: Condition) -> float:
    """Uniform-scale position ``u`` of the institution under ``condition``."""
    if isinstance(condition, AtQuantile):
        return condition.beta
    if isinstance(condition, AtValue):
        return float(model.margin_i.cdf(condition.l))
    if isinstance(condition, AtMean):
        return float(model.margin_i.cdf(model.margin_i.mean()))
    raise DomainError(f"no single conditioning level for {condition!r}")


def covar(model: SystemModel, query: RiskQuery, tol: nx.NumericTolerance | None = None) -> CoVaRReport:
    alpha = query.alpha
    if isinstance(query.condition, AtMostQuantile):
        level = covar_leq_level(model, alpha, query.condition.beta, tol)
    else:
        u = conditioning_level(model, query.condition)
        if not 0.0 < u < 1.0:
            raise DomainError(f"conditioning level F_i(l) = {u} is not inside (0, 1)")
        level = model.copula.cond_quantile(alpha, u, tol)
    return CoVaRReport(
        covar=float(model.margin_s.quantile(level)),
        tilde_alpha=level,
        var_s=value_at_risk(model.margin_s, alpha),
    )


def delta_covar(model: SystemModel, alpha: float, beta: float, tol: nx.NumericTolerance | None = None) -> float:
    """CoVaR with the institution at its beta-VaR minus CoVaR at its mean loss."""
    distress = covar(model, RiskQuery(alpha, AtQuantile(beta)), tol)
    at_mean = covar(model, RiskQuery(alpha, AtMean()), tol)
    return distress.covar - at_mean.covar


def covar_report(
    model: SystemModel, alpha: float, beta: float, with_delta: bool = False,
    tol: nx.NumericTolerance | None = None,
) -> CoVaRReport:
    """CoVaR at ``L_i = VaR_beta`` with optional Delta-CoVaR attached."""
    rep = covar(model, RiskQuery(alpha, AtQuantile(beta)), tol)
    if not with_delta:
        return rep
    mean_rep = covar(model, RiskQuery(alpha, AtMean()), tol)
    return CoVaRReport(rep.covar, rep.tilde_alpha, rep.var_s, rep.covar - mean_rep.covar)


def covar_leq_level(model: SystemModel, alpha: float, beta: float, tol: nx.NumericTolerance | None = None) -> float:
    """The ``v`` solving ``C(beta, v) = alpha * beta``."""
    nx._open_prob(alpha, "alpha")
    nx._open_prob(beta, "beta")
    c = model.copula
    target = alpha * beta
    f = lambda v: c.cdf(beta, v) - target
    try:
        return nx.find_root(f, (ROOT_EPS, 1.0 - ROOT_EPS), tol)
    except BracketError as exc:
        raise BracketError(f"no solution of C({beta}, v) = {target} inside the probability bracket") from exc


def covar_leq(model: SystemModel, alpha: float, beta: float, tol: nx.NumericTolerance | None = None) -> float:
    """System VaR at level ``alpha`` given ``L_i <= VaR_beta(L_i)``."""
    return float(model.margin_s.quantile(covar_leq_level(model, alpha, beta, tol)))


def covar_gaussian_closed(
    mu_i: float, sigma_i: float, mu_s: float, sigma_s: float, rho: float, l: float, alpha: float
) -> float:
    """CoVaR for a Gaussian copula joining normal margins, in closed form."""
    if sigma_i <= 0 or sigma_s <= 0:
        raise DomainError("sigma_i and sigma_s must be > 0")
    _check_rho(rho)
    z = nx.std_normal_quantile(alpha)
    return rho * sigma_s / sigma_i * (l - mu_i) + math.sqrt(1.0 - rho * rho) * sigma_s * z + mu_s


def delta_covar_gaussian_transformed(sigma_s: float, rho: float, alpha: float, beta: float) -> float:
    """Delta-CoVaR for normal system losses from the distress and mean transformed levels."""
    if sigma_s <= 0:
        raise DomainError("sigma_s must be > 0")
    _check_rho(rho)
    s = math.sqrt(1.0 - rho * rho)
    za = nx.std_normal_quantile(alpha)
    alpha_d = nx.std_normal_cdf(rho * nx.std_normal_quantile(beta) + s * za)
    alpha_m = nx.std_normal_cdf(s * za)
    return sigma_s * (nx.std_normal_quantile(alpha_d) - nx.std_normal_quantile(alpha_m))


def gaussian_model(mu_i: float, sigma_i: float, mu_s: float, sigma_s: float, rho: float) -> SystemModel:
    return SystemModel(Normal(mu_i, sigma_i), Normal(mu_s, sigma_s), GaussianCopula(rho))
