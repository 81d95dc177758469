"""Tests for diqkd_lab.eve: Eve's conditional spectrum, χ, the constructive purification and the optimal attack."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from diqkd_lab import bounds, chsh, eve, qmath
from diqkd_lab.common.errors import DomainError
from diqkd_lab.verify import sample_ordered_lambdas

TSIRELSON = 2.0 * math.sqrt(2.0)


def _view(lam, phi=0.0):
    return eve.EveView(chsh.BellDiagonalState(lam, ordered=True), phi)


class TestConditionalSpectrum:
    @pytest.mark.parametrize("phi", [0.0, 0.7, math.pi / 2, math.pi])
    def test_pure_state(self, phi):
        assert eve.eve_conditional_spectrum(_view([1, 0, 0, 0], phi)) == pytest.approx((1.0, 0.0))

    @pytest.mark.parametrize("phi", [0.0, 1.3])
    def test_uniform_state(self, phi):
        assert eve.eve_conditional_spectrum(_view([0.25] * 4, phi)) == pytest.approx((0.5, 0.5))

    def test_closed_form_matches_purification(self):
        lam = [0.5, 0.2, 0.2, 0.1]
        phi = math.pi / 4
        lam_plus, lam_minus = eve.eve_conditional_spectrum(_view(lam, phi))
        assert lam_plus == pytest.approx(0.5 * (1 + math.sqrt(0.1)), abs=1e-12)
        assert lam_plus == pytest.approx(0.65811, abs=1e-5)
        state = chsh.BellDiagonalState(lam, ordered=True)
        for outcome in (1, -1):
            vals, _ = qmath.hermitian_eigensystem(eve.conditional_eve_state(state, phi, outcome).mat)
            assert_allclose(vals, [lam_plus, lam_minus, 0.0, 0.0], atol=1e-10)

    def test_random_states_both_outcomes(self, rng):
        for lam in sample_ordered_lambdas(rng, 20):
            phi = float(rng.uniform(0, math.pi))
            state = chsh.BellDiagonalState(lam, ordered=True)
            plus = qmath.hermitian_eigensystem(eve.conditional_eve_state(state, phi, 1).mat)[0]
            minus = qmath.hermitian_eigensystem(eve.conditional_eve_state(state, phi, -1).mat)[0]
            assert_allclose(plus, minus, atol=1e-10)
            assert plus[0] == pytest.approx(float(eve.lambda_plus_rows(lam, phi)), abs=1e-10)

    def test_bad_outcome(self):
        state = chsh.BellDiagonalState([1, 0, 0, 0])
        with pytest.raises(DomainError):
            eve.conditional_eve_state(state, 0.0, 0)

    def test_view_requires_order(self):
        with pytest.raises(DomainError):
            eve.EveView(chsh.BellDiagonalState([0.1, 0.4, 0.3, 0.2]))

    def test_view_angle_range(self):
        with pytest.raises(DomainError):
            _view([1, 0, 0, 0], 4.0)

    def test_purification_of_bell_diagonal_state(self):
        state = chsh.BellDiagonalState([0.4, 0.3, 0.2, 0.1])
        psi = eve.bell_purification(state)
        back = qmath.partial_trace(np.outer(psi, psi.conj()), 1, (4, 4))
        assert_allclose(back.mat, state.matrix().mat, atol=1e-14)


class TestChi:
    def test_pure_state(self):
        assert eve.chi_lambda(_view([1, 0, 0, 0])) == pytest.approx(0.0, abs=1e-14)

    def test_equality_family(self):
        assert eve.chi_lambda(_view([0.5, 0, 0.5, 0])) == pytest.approx(1.0, abs=1e-14)

    def test_entropy_composition(self):
        chi = eve.chi_lambda(_view([0.5, 0.2, 0.2, 0.1]))
        expected = qmath.shannon_entropy([0.5, 0.2, 0.2, 0.1]) - qmath.binary_entropy(0.7)
        assert chi == pytest.approx(expected, abs=1e-14)
        assert chi == pytest.approx(0.87967, abs=1e-5)

    def test_chi_rows_shape(self, rng):
        lam = sample_ordered_lambdas(rng, 7)
        out = eve.chi_rows(lam, np.linspace(0, math.pi, 5))
        assert out.shape == (7, 5)
        assert out[3, 0] == pytest.approx(eve.chi_lambda(_view(lam[3])), abs=1e-14)

    def test_mixing_toward_uniform_never_lowers_chi(self, rng):
        t = np.linspace(0.0, 1.0, 101)[:, None]
        for lam in sample_ordered_lambdas(rng, 200):
            mixes = t * lam + (1.0 - t) * 0.25
            chi = eve.chi_rows(mixes, [0.0])[:, 0]
            assert np.all(np.diff(chi) <= 1e-12)
            assert chi[0] == pytest.approx(1.0, abs=1e-12)


class TestOptimalPhi:
    def test_zero_is_optimal(self):
        scan = eve.optimal_phi_check(chsh.BellDiagonalState([0.6, 0.3, 0.08, 0.02], ordered=True))
        assert scan.phi_star == 0.0
        assert scan.chi_at_star == pytest.approx(eve.chi_lambda(_view([0.6, 0.3, 0.08, 0.02])), abs=1e-9)

    def test_zero_gap_is_flat(self):
        scan = eve.optimal_phi_check(chsh.BellDiagonalState([0.3, 0.3, 0.3, 0.1], ordered=True), grid=101)
        assert scan.phi_star == 0.0
        assert scan.chi_at_star == pytest.approx(scan.chi_at_zero, abs=1e-15)

    def test_random_ordered_states(self, rng):
        for lam in sample_ordered_lambdas(rng, 10):
            scan = eve.optimal_phi_check(chsh.BellDiagonalState(lam, ordered=True), grid=1000)
            assert scan.chi_at_star == pytest.approx(scan.chi_at_zero, abs=1e-12)


class TestConcurrence:
    @pytest.mark.parametrize("lam, expected", [([1, 0, 0, 0], 1.0), ([0.25] * 4, 0.0)])
    def test_fixed_points(self, lam, expected):
        state = chsh.BellDiagonalState(lam)
        assert eve.concurrence(state.matrix()) == pytest.approx(expected, abs=1e-7)
        assert eve.concurrence_belldiag(state) == pytest.approx(expected)

    def test_werner(self):
        for p in (0.2, 0.5, 0.9):
            assert eve.concurrence(chsh.werner_state(p)) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-7)

    def test_closed_form_matches_wootters(self, rng):
        for lam in sample_ordered_lambdas(rng, 10):
            state = chsh.BellDiagonalState(lam)
            assert eve.concurrence(state.matrix()) == pytest.approx(eve.concurrence_belldiag(state), abs=1e-7)

    def test_requires_two_qubits(self):
        with pytest.raises(DomainError):
            eve.concurrence(np.eye(2) / 2)


class TestAttack:
    def test_tsirelson_attack_is_phi_plus(self):
        spec = eve.build_attack(TSIRELSON)
        assert spec.c == 1.0
        assert_allclose(spec.state.lam, [1, 0, 0, 0])
        assert eve.attack_saturation(spec)["chi"] == pytest.approx(0.0, abs=1e-12)

    def test_chsh_target_is_reached(self):
        spec = eve.build_attack(2.4)
        assert spec.c == pytest.approx(math.sqrt(0.44))
        assert chsh.chsh_value(spec.density, spec.measurements) == pytest.approx(2.4, abs=1e-9)
        assert eve.concurrence(spec.density) == pytest.approx(math.sqrt(0.44), abs=1e-7)

    def test_attack_saturates_bound(self):
        spec = eve.build_attack(2.5, 0.05)
        check = eve.attack_saturation(spec)
        assert check["saturated"]
        assert check["chi"] == pytest.approx(0.54356, abs=1e-5)
        assert check["qber"] == pytest.approx(0.05, abs=1e-12)
        assert check["bound"] == pytest.approx(bounds.holevo_bound_di(2.5))

    def test_saturation_across_targets(self):
        for s in np.linspace(2.01, TSIRELSON, 50):
            assert eve.attack_saturation(eve.build_attack(float(s), 0.02))["saturated"]

    def test_a0_randomization_probabilities(self):
        spec = eve.build_attack(2.6, 0.02)
        assert spec.prob_sigma_z == pytest.approx(0.96)
        assert spec.prob_random == pytest.approx(0.04)
        assert "lambda_phi_plus=" in spec.to_text()

    @pytest.mark.parametrize("s, q", [(2.0, 0.0), (1.5, 0.0), (3.0, 0.0), (2.5, 0.6), (2.5, -0.1)])
    def test_invalid_targets(self, s, q):
        with pytest.raises(DomainError):
            eve.build_attack(s, q)
