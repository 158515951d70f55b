"""Loss-series CSV input and rank-based model estimation.

CSV schema: header ``date,loss_i,loss_s`` or ``loss_i,loss_s``, UTF-8,
``.`` decimal separator, positive-loss convention (larger = worse).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from .copulas import Copula, make_copula
from .errors import DegenerateDataError, DomainError, InsufficientDataError, ParseError
from .margins import Empirical, Margin, Normal, StudentT

MIN_OBSERVATIONS = 30
MIN_T_NU = 4.5
DEFAULT_T_NU = 5.0


@dataclass
class LossSeries:
    losses_i: np.ndarray
    losses_s: np.ndarray
    timestamps: Optional[list] = None

    def __post_init__(self):
        self.losses_i = np.asarray(self.losses_i, dtype=float)
        self.losses_s = np.asarray(self.losses_s, dtype=float)
        if self.losses_i.shape != self.losses_s.shape or self.losses_i.ndim != 1:
            raise DomainError("loss series must be one-dimensional and of equal length")
        if len(self.losses_i) < MIN_OBSERVATIONS:
            raise InsufficientDataError(
                f"too few observations: {len(self.losses_i)} (need at least {MIN_OBSERVATIONS})"
            )
        if not (np.all(np.isfinite(self.losses_i)) and np.all(np.isfinite(self.losses_s))):
            raise DomainError("losses must be finite")
        if self.timestamps is not None and len(self.timestamps) != len(self.losses_i):
            raise DomainError("timestamps must match the loss series length")

    def __len__(self) -> int:
        return len(self.losses_i)


@dataclass(frozen=True)
class FitReport:
    margin_i: Margin
    margin_s: Margin
    copula: Copula
    kendall_tau: float
    n_obs: int

    def as_dict(self) -> dict:
        return {
            "margin_i": self.margin_i.describe(),
            "margin_s": self.margin_s.describe(),
            "copula": self.copula.describe(),
            "kendall_tau": self.kendall_tau,
            "n_obs": self.n_obs,
        }


def read_loss_csv(path: str | Path) -> LossSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        missing = {"loss_i", "loss_s"} - set(header)
        if missing:
            raise ParseError(f"{path}: missing column(s) {', '.join(sorted(missing))}; header was {header}")
        ci, cs = header.index("loss_i"), header.index("loss_s")
        cd = header.index("date") if "date" in header else None
        li, ls, dates = [], [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row_no)
            try:
                a, b = float(row[ci]), float(row[cs])
            except ValueError:
                raise ParseError(f"non-numeric loss in {row!r}", row_no) from None
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ParseError(f"non-finite loss in {row!r}", row_no)
            li.append(a)
            ls.append(b)
            if cd is not None:
                dates.append(row[cd].strip())
    return LossSeries(np.array(li), np.array(ls), dates if cd is not None else None)


def write_loss_csv(series: LossSeries, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if series.timestamps is not None:
            w.writerow(["date", "loss_i", "loss_s"])
            for d, a, b in zip(series.timestamps, series.losses_i, series.losses_s):
                w.writerow([d, f"{a:.17g}", f"{b:.17g}"])
        else:
            w.writerow(["loss_i", "loss_s"])
            for a, b in zip(series.losses_i, series.losses_s):
                w.writerow([f"{a:.17g}", f"{b:.17g}"])


def kendall_tau(series: LossSeries) -> float:
    """Tie-adjusted (tau-b) rank correlation between the two loss series."""
    tau = stats.kendalltau(series.losses_i, series.losses_s).statistic
    if not np.isfinite(tau):
        raise DegenerateDataError("Kendall's tau is undefined: a series has only tied values")
    return float(tau)


def estimate_copula(tau: float, family: str, nu: float | None = None) -> Copula:
    """Invert Kendall's tau into the family parameter."""
    family = family.lower()
    if not -1.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (-1, 1), got {tau}")
    if family in ("gaussian", "t", "student_t"):
        rho = math.sin(math.pi * tau / 2.0)
        return make_copula(family, rho=rho, nu=DEFAULT_T_NU if nu is None else nu)
    if family == "gumbel":
        if tau < 0:
            raise DomainError(f"gumbel copula cannot represent negative dependence (tau={tau:.4f})")
        return make_copula("gumbel", theta=1.0 / (1.0 - tau))
    if family == "clayton":
        if tau <= 0:
            raise DomainError(f"clayton copula requires tau > 0 (tau={tau:.4f})")
        return make_copula("clayton", theta=2.0 * tau / (1.0 - tau))
    raise DomainError(f"unknown copula family {family!r}")


def _fit_one(x: np.ndarray, kind: str) -> Margin:
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise DegenerateDataError("loss series has zero variance")
    if kind == "normal":
        return Normal(float(np.mean(x)), sd)
    if kind in ("student_t", "t"):
        excess = float(stats.kurtosis(x, fisher=True, bias=False))
        nu = max(MIN_T_NU, 4.0 + 6.0 / excess) if excess > 0 else math.inf
        if math.isinf(nu):
            # no excess kurtosis: the t family degenerates to the normal
            return Normal(float(np.mean(x)), sd)
        return StudentT(nu, float(np.mean(x)), sd * math.sqrt((nu - 2.0) / nu))
    if kind == "empirical":
        return Empirical(x)
    raise DomainError(f"unknown margin kind {kind!r}; expected normal, student_t or empirical")


def fit_margins(series: LossSeries, kind: str = "normal") -> tuple[Margin, Margin]:
    return _fit_one(series.losses_i, kind), _fit_one(series.losses_s, kind)


def fit(series: LossSeries, family: str, margins: str = "normal", nu: float | None = None) -> FitReport:
    tau = kendall_tau(series)
    m_i, m_s = fit_margins(series, margins)
    return FitReport(m_i, m_s, estimate_copula(tau, family, nu), tau, len(series))
