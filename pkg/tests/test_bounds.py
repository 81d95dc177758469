"""Unit tests for diqkd_lab.bounds: Holevo bounds, Devetak-Winter rates, thresholds and curves."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from diqkd_lab import bounds
from diqkd_lab.bounds import Scenario, ScenarioKind
from diqkd_lab.common.errors import DomainError, InconsistentParametersError
from diqkd_lab.qmath import binary_entropy

TSIRELSON = 2.0 * math.sqrt(2.0)


class TestHolevoBoundDI:
    def test_tsirelson_gives_zero(self):
        assert bounds.holevo_bound_di(TSIRELSON) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("s", [0.0, 1.5, 2.0])
    def test_local_region_gives_one(self, s):
        assert bounds.holevo_bound_di(s) == 1.0

    def test_formula(self):
        assert bounds.holevo_bound_di(2.5) == pytest.approx(binary_entropy(0.875), abs=1e-14)
        assert bounds.holevo_bound_di(2.5) == pytest.approx(0.54356, abs=1e-5)

    def test_slack_above_tsirelson(self):
        assert bounds.holevo_bound_di(TSIRELSON + 5e-10) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(DomainError):
            bounds.holevo_bound_di(TSIRELSON + 1e-6)

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            bounds.holevo_bound_di(float("nan"))

    def test_monotone_and_vectorized(self):
        s = np.linspace(2.0, TSIRELSON, 200)
        f = bounds.holevo_bound_di(s)
        assert f.shape == s.shape
        assert np.all(np.diff(f) <= 1e-15)

    def test_concave(self):
        s = np.linspace(0.0, TSIRELSON, 401)
        f = bounds.holevo_bound_di(s)
        assert np.all(f[1:-1] >= 0.5 * (f[:-2] + f[2:]) - 1e-12)


class TestOtherBounds:
    def test_standard_bound(self):
        assert bounds.holevo_bound_standard(0.0, TSIRELSON) == pytest.approx(0.0, abs=1e-12)
        assert bounds.holevo_bound_standard(0.1, TSIRELSON * 0.8) == pytest.approx(binary_entropy(0.9))

    def test_standard_bound_domain(self):
        with pytest.raises(DomainError):
            bounds.holevo_bound_standard(0.2, TSIRELSON)

    def test_di_dominates_standard_on_werner_line(self):
        for q in np.linspace(0.0, 0.25, 101):
            s = bounds.werner_line(q)
            assert bounds.holevo_bound_di(max(s, 0.0)) >= bounds.holevo_bound_standard(q, s) - 1e-9

    def test_partial_knowledge_reduces_to_di(self):
        assert bounds.partial_knowledge_bound(0.0, 2.6) == pytest.approx(bounds.holevo_bound_di(2.6))

    def test_partial_knowledge_value(self):
        q, s = 0.1, 2.7
        s_prime = (s - 4 * q) / (1 - q)
        assert bounds.partial_knowledge_bound(q, s) == pytest.approx(q + (1 - q) * bounds.holevo_bound_di(s_prime))

    def test_partial_knowledge_critical_q(self):
        assert bounds.partial_knowledge_critical_q(TSIRELSON) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
        assert bounds.partial_knowledge_bound(math.sqrt(2) - 1, TSIRELSON) == pytest.approx(1.0, abs=1e-6)

    def test_partial_knowledge_inconsistent(self):
        with pytest.raises(InconsistentParametersError):
            bounds.partial_knowledge_bound(0.1, 3.5)

    def test_partial_scenario_requires_q(self):
        with pytest.raises(DomainError):
            Scenario(ScenarioKind.PARTIAL_KNOWLEDGE)


class TestKeyRate:
    def test_ideal_rate_is_one(self):
        report = bounds.keyrate(0.0, TSIRELSON)
        assert report.rate == pytest.approx(1.0, abs=1e-12)
        assert report.secure
        assert report.exact

    def test_rate_identity(self):
        report = bounds.keyrate(0.03, 2.6)
        assert report.rate == pytest.approx(report.mutual_information - report.chi_bound, abs=1e-12)
        assert report.mutual_information == pytest.approx(1 - binary_entropy(0.03))

    def test_explicit_mutual_information(self):
        report = bounds.keyrate(0.03, 2.6, mutual_information=0.5)
        assert report.rate == pytest.approx(0.5 - bounds.holevo_bound_di(2.6))

    def test_negative_rate_is_reported(self):
        report = bounds.keyrate(0.071, 2.2)
        assert report.rate < 0
        assert not report.secure

    @pytest.mark.parametrize("qber", [0.7, 1.0, -0.01, float("nan")])
    def test_qber_outside_half_interval(self, qber):
        with pytest.raises(DomainError):
            bounds.keyrate(qber, 2.5)

    def test_qber_at_half(self):
        assert bounds.keyrate(0.5, 2.0).mutual_information == pytest.approx(0.0, abs=1e-12)

    def test_text_rendering(self):
        text = bounds.keyrate(0.0, TSIRELSON).to_text()
        assert "scenario=device_independent" in text
        assert "r_DW=" in text
        assert "provenance=exact" in text

    def test_werner_correlations(self):
        q, s = bounds.werner_correlations(0.9)
        assert q == pytest.approx(0.05)
        assert s == pytest.approx(TSIRELSON * 0.9)

    def test_detection_efficiency_statistics(self):
        q, s = bounds.detection_efficiency_statistics(0.95)
        assert q == pytest.approx(0.0475)
        assert s == pytest.approx(TSIRELSON * 0.95**2 + 2 * 0.05**2)


class TestThresholds:
    def test_device_independent_qber_threshold(self):
        assert abs(bounds.qber_threshold() - 0.071) <= 1e-3

    def test_standard_qber_threshold(self):
        assert abs(bounds.qber_threshold(Scenario.standard()) - 0.110) <= 1e-3

    def test_detection_efficiency_threshold(self):
        assert abs(bounds.detection_efficiency_threshold() - 0.924) <= 1e-3

    def test_no_sign_change(self):
        with pytest.raises(DomainError):
            bounds.detection_efficiency_threshold(lo=0.95, hi=1.0)


class TestCurves:
    def test_figure_two_curve(self):
        rows = bounds.curve(Scenario.device_independent(), 0.0, 0.12, 121)
        assert len(rows) == 121
        assert rows[0].rate == pytest.approx(1.0, abs=1e-12)
        assert abs(bounds.curve_zero_crossing(rows) - 0.071) <= 1e-3

    def test_standard_curve(self):
        rows = bounds.curve(Scenario.standard(), 0.0, 0.12, 121)
        assert rows[0].rate == pytest.approx(1.0, abs=1e-12)
        assert abs(bounds.curve_zero_crossing(rows) - 0.110) <= 1e-3

    def test_figure_three_curve(self):
        rows = bounds.curve(Scenario.detection_efficiency(), 0.9, 1.0, 101)
        assert rows[-1].rate == pytest.approx(1.0, abs=1e-12)
        assert abs(bounds.curve_zero_crossing(rows) - 0.924) <= 1e-3

    def test_zero_width_range(self):
        rows = bounds.curve(Scenario.device_independent(), 0.05, 0.05, 10)
        assert len(rows) == 1

    def test_steps_must_be_positive(self):
        with pytest.raises(DomainError):
            bounds.curve(Scenario.device_independent(), 0.0, 0.1, 0)

    def test_csv_and_gnuplot(self, tmp_path):
        rows = bounds.curve(Scenario.device_independent(), 0.0, 0.1, 11)
        path = bounds.write_curve_csv(rows, tmp_path / "curve.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "x,Q,S,chi,rate"
        assert len(lines) == 12
        assert_allclose([float(v) for v in lines[1].split(",")], [0.0, 0.0, TSIRELSON, 0.0, 1.0], atol=1e-11)
        assert "curve.csv" in bounds.gnuplot_script(path, "Q", "DI")
