"""Closed-form CoVaR and Delta-CoVaR from copula conditional distributions."""

from .copulas import (
    ArchimedeanCopula,
    ClaytonCopula,
    GaussianCopula,
    GeneratorSpec,
    GumbelCopula,
    StudentTCopula,
    clayton_generator,
    gumbel_generator,
    make_copula,
)
from .covar import (
    AtMean,
    AtMostQuantile,
    AtQuantile,
    AtValue,
    CoVaRReport,
    RiskQuery,
    SystemModel,
    covar,
    covar_gaussian_closed,
    covar_leq,
    delta_covar,
    delta_covar_gaussian_transformed,
    value_at_risk,
)
from .errors import (
    BracketError,
    ConvergenceError,
    CoVaRError,
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    ParseError,
    UndefinedMomentError,
)
from .margins import Empirical, Normal, StudentT

__version__ = "0.1.0"
