import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from copulacovar.copulas import ClaytonCopula, GaussianCopula, GumbelCopula, StudentTCopula
from copulacovar.errors import DegenerateDataError, DomainError, InsufficientDataError, ParseError
from copulacovar.ingestion import (
    LossSeries,
    estimate_copula,
    fit,
    fit_margins,
    kendall_tau,
    read_loss_csv,
    write_loss_csv,
)
from copulacovar.margins import Empirical, Normal, StudentT


def brute_tau_b(x, y):
    n = len(x)
    conc = disc = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = np.sign(x[i] - x[j]), np.sign(y[i] - y[j])
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif dx == dy:
                conc += 1
            else:
                disc += 1
    return (conc - disc) / math.sqrt((conc + disc + tx) * (conc + disc + ty))


def series_from(copula, n, seed):
    uv = copula.sample(n, seed=seed)
    return LossSeries(uv[:, 0], uv[:, 1])


class TestCsv:
    def test_two_column_file(self, tmp_path):
        p = tmp_path / "losses.csv"
        rows = ["loss_i,loss_s"] + [f"{i * 0.1},{i * 0.2 - 3}" for i in range(100)]
        p.write_text("\n".join(rows) + "\n")
        s = read_loss_csv(p)
        assert len(s) == 100 and s.timestamps is None
        assert s.losses_s[-1] == pytest.approx(99 * 0.2 - 3)

    def test_dated_file_any_column_order(self, tmp_path):
        p = tmp_path / "losses.csv"
        rows = ["loss_s,date,loss_i"] + [f"{i},2020-01-{i % 28 + 1:02d},{-i}" for i in range(40)]
        p.write_text("\n".join(rows) + "\n")
        s = read_loss_csv(p)
        assert s.timestamps[0] == "2020-01-01"
        assert s.losses_i[5] == -5 and s.losses_s[5] == 5

    def test_too_few_rows(self, tmp_path):
        p = tmp_path / "short.csv"
        p.write_text("loss_i,loss_s\n" + "".join(f"{i},{i}\n" for i in range(10)))
        with pytest.raises(InsufficientDataError, match="too few"):
            read_loss_csv(p)

    def test_non_numeric_row_named(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("date,loss_i,loss_s\n2020-01-01,abc,1.2\n" + "".join(f"2020-01-02,{i},{i}\n" for i in range(40)))
        with pytest.raises(ParseError, match="row 1") as info:
            read_loss_csv(p)
        assert info.value.row == 1

    def test_later_bad_row(self, tmp_path):
        p = tmp_path / "bad.csv"
        lines = [f"{i},{i}" for i in range(40)]
        lines[17] = "3.0"
        p.write_text("loss_i,loss_s\n" + "\n".join(lines) + "\n")
        with pytest.raises(ParseError, match="row 18"):
            read_loss_csv(p)

    def test_missing_column(self, tmp_path):
        p = tmp_path / "cols.csv"
        p.write_text("date,loss_i\n" + "".join(f"d,{i}\n" for i in range(40)))
        with pytest.raises(ParseError, match="loss_s"):
            read_loss_csv(p)

    def test_non_finite_rejected(self, tmp_path):
        p = tmp_path / "nan.csv"
        p.write_text("loss_i,loss_s\nnan,1\n" + "".join(f"{i},{i}\n" for i in range(40)))
        with pytest.raises(ParseError, match="row 1"):
            read_loss_csv(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(ParseError):
            read_loss_csv(p)

    @given(arrays(np.float64, 35, elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_is_lossless(self, tmp_path_factory, x):
        p = tmp_path_factory.mktemp("rt") / "rt.csv"
        s = LossSeries(x, x[::-1].copy(), [f"t{i}" for i in range(35)])
        write_loss_csv(s, p)
        back = read_loss_csv(p)
        assert np.array_equal(back.losses_i, s.losses_i)
        assert np.array_equal(back.losses_s, s.losses_s)
        assert back.timestamps == s.timestamps


class TestLossSeries:
    def test_validation(self):
        with pytest.raises(InsufficientDataError):
            LossSeries(np.zeros(29), np.zeros(29))
        with pytest.raises(DomainError):
            LossSeries(np.zeros(30), np.zeros(31))
        with pytest.raises(DomainError):
            LossSeries(np.r_[np.zeros(29), np.inf], np.zeros(30))


class TestKendallTau:
    def test_concordant_and_reversed(self):
        x = np.arange(50.0)
        assert kendall_tau(LossSeries(x, 2 * x + 1)) == pytest.approx(1.0)
        assert kendall_tau(LossSeries(x, -x)) == pytest.approx(-1.0)

    def test_independent_shuffles(self):
        rng = np.random.default_rng(0)
        s = LossSeries(rng.permutation(10_000).astype(float), rng.permutation(10_000).astype(float))
        assert kendall_tau(s) == pytest.approx(0.0, abs=0.02)

    def test_matches_brute_force_with_ties(self):
        rng = np.random.default_rng(1)
        x = rng.integers(0, 5, 60).astype(float)
        y = x + rng.integers(0, 3, 60)
        assert kendall_tau(LossSeries(x, y)) == pytest.approx(brute_tau_b(x, y), abs=1e-12)

    def test_all_ties(self):
        with pytest.raises(DegenerateDataError):
            kendall_tau(LossSeries(np.ones(40), np.arange(40.0)))


class TestEstimateCopula:
    def test_examples(self):
        assert estimate_copula(1 / 3, "gaussian").rho == pytest.approx(0.5, abs=1e-12)
        assert estimate_copula(0.5, "gumbel").theta == pytest.approx(2.0, abs=1e-12)
        assert estimate_copula(0.5, "clayton").theta == pytest.approx(2.0, abs=1e-12)
        with pytest.raises(DomainError):
            estimate_copula(-0.2, "clayton")

    def test_t_family(self):
        c = estimate_copula(1 / 3, "t", nu=7.0)
        assert isinstance(c, StudentTCopula) and c.nu == 7.0 and c.rho == pytest.approx(0.5)
        assert estimate_copula(1 / 3, "t").nu == 5.0

    def test_infeasible(self):
        with pytest.raises(DomainError):
            estimate_copula(-0.1, "gumbel")
        with pytest.raises(DomainError):
            estimate_copula(1.0, "gaussian")
        with pytest.raises(DomainError):
            estimate_copula(0.3, "frank")
        assert estimate_copula(0.0, "gumbel").theta == 1.0

    @pytest.mark.parametrize("copula,attr", [(GaussianCopula(0.5), "rho"), (GumbelCopula(2.0), "theta")])
    def test_round_trip(self, copula, attr):
        s = series_from(copula, 100_000, seed=17)
        family = "gaussian" if attr == "rho" else "gumbel"
        est = estimate_copula(kendall_tau(s), family)
        assert getattr(est, attr) == pytest.approx(getattr(copula, attr), abs=0.02)

    def test_clayton_round_trip(self):
        s = series_from(ClaytonCopula(3.0), 100_000, seed=3)
        assert estimate_copula(kendall_tau(s), "clayton").theta == pytest.approx(3.0, abs=0.1)


class TestFitMargins:
    def test_constant_series(self):
        with pytest.raises(DegenerateDataError):
            fit_margins(LossSeries(np.full(40, 2.0), np.arange(40.0)))

    def test_normal_moments(self):
        rng = np.random.default_rng(0)
        s = LossSeries(rng.standard_normal(100_000), 3 + 2 * rng.standard_normal(100_000))
        mi, ms = fit_margins(s, "normal")
        assert isinstance(mi, Normal)
        assert mi.mu == pytest.approx(0, abs=0.01) and mi.sigma == pytest.approx(1, abs=0.01)
        assert ms.mu == pytest.approx(3, abs=0.02) and ms.sigma == pytest.approx(2, abs=0.02)

    def test_empirical_echoes_sorted_input(self):
        x = np.random.default_rng(2).normal(size=50)
        mi, _ = fit_margins(LossSeries(x, x), "empirical")
        assert isinstance(mi, Empirical)
        assert list(mi.samples) == sorted(x.tolist())

    def test_student_t_method_of_moments(self):
        rng = np.random.default_rng(3)
        x = 1.0 + 2.0 * rng.standard_t(8, 400_000)
        mi, _ = fit_margins(LossSeries(x, x), "student_t")
        assert isinstance(mi, StudentT)
        assert mi.nu == pytest.approx(8.0, abs=1.5)
        assert mi.loc == pytest.approx(1.0, abs=0.02)
        # variance nu/(nu-2)*scale^2 matches the sample variance
        assert mi.scale ** 2 * mi.nu / (mi.nu - 2) == pytest.approx(np.var(x, ddof=1), rel=1e-12)

    def test_student_t_floor(self):
        x = np.random.default_rng(4).standard_cauchy(5000)
        mi, _ = fit_margins(LossSeries(x, x), "t")
        assert mi.nu == 4.5

    def test_light_tails_fall_back_to_normal(self):
        x = np.random.default_rng(5).uniform(size=1000)
        mi, _ = fit_margins(LossSeries(x, x), "student_t")
        assert isinstance(mi, Normal)

    def test_unknown_kind(self):
        x = np.arange(40.0)
        with pytest.raises(DomainError):
            fit_margins(LossSeries(x, x), "gamma")


def test_fit_report():
    s = series_from(GaussianCopula(0.5), 5_000, seed=1)
    rep = fit(s, "gaussian", "empirical")
    d = rep.as_dict()
    assert d["n_obs"] == 5_000
    assert d["copula"]["family"] == "gaussian"
    assert d["margin_i"]["kind"] == "empirical"
    assert abs(rep.kendall_tau) < 1
