"""Tests for ioncoupler.lumped module."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ioncoupler.config import validate_config
from ioncoupler.core import CODATA
from ioncoupler.errors import ValidationError
from ioncoupler.linear import linear_elements
from ioncoupler.lumped import (
    LumpedElements,
    corrected_capacitance,
    corrected_inductance,
    drive_currents,
    eta_from_zeta,
    gamma_parallel_plate,
    lumped_model,
    method1_capacitance,
    method1_inductance,
    method2_elements,
    plate_drive_contradiction,
    plate_drive_current,
    resolve_eta,
    shockley_current,
)

E = CODATA.elementary_charge
MASS = 6.64e-26
OMEGA = 2 * math.pi * 1e6
D = 5e-5
C_TOTAL = 1.2827e-13


# --- method 1 ---


class TestMethod1:
    def test_ground_state_capacitance(self):
        energy = 0.5 * CODATA.reduced_planck * OMEGA
        assert method1_capacitance(energy) == pytest.approx(3.874e-11, rel=1e-3)

    def test_charge_multiple_scales_quadratically(self):
        assert method1_capacitance(1e-27, 2) == pytest.approx(4 * method1_capacitance(1e-27, 1))

    def test_inductance(self):
        assert method1_inductance(OMEGA, 7.75e-11) == pytest.approx(3.268e-4, rel=1e-3)

    def test_resonates_at_trap_frequency(self):
        c = method1_capacitance(3.3e-28)
        l_ = method1_inductance(OMEGA, c)
        assert 1.0 / math.sqrt(l_ * c) == pytest.approx(OMEGA, rel=1e-12)

    def test_rejects_zero_energy(self):
        with pytest.raises(ValidationError, match="energy"):
            method1_capacitance(0.0)


# --- method 2 ---


class TestMethod2:
    def test_shockley_current(self):
        assert shockley_current(1.0, D, E) == pytest.approx(3.204e-15, rel=1e-3)

    def test_elements(self):
        elements = method2_elements(MASS, OMEGA, D, E)
        assert elements.c_hyb_b == pytest.approx(3.917e-18, rel=1e-3)
        assert elements.l_hyb_b == pytest.approx(6.467e3, rel=1e-3)

    def test_sign_of_charge_ignored(self):
        assert method2_elements(MASS, OMEGA, D, -E) == method2_elements(MASS, OMEGA, D, E)

    @given(
        st.floats(min_value=1e-27, max_value=1e-24),
        st.floats(min_value=1e5, max_value=1e8),
        st.floats(min_value=1e-6, max_value=1e-3),
    )
    def test_resonates_at_trap_frequency(self, mass, omega, d):
        c, l_ = method2_elements(mass, omega, d, E)
        assert 1.0 / math.sqrt(l_ * c) == pytest.approx(omega, rel=1e-12)

    def test_rejects_zero_separation(self):
        with pytest.raises(ValidationError, match="d must be"):
            method2_elements(MASS, OMEGA, 0.0, E)


# --- eta correction ---


class TestEtaCorrection:
    def test_corrected_capacitance(self):
        assert corrected_capacitance(4.0, 0.25) == 1.0

    def test_corrected_pair_still_resonates(self):
        c, l_ = method2_elements(MASS, OMEGA, D, E)
        c_eta = corrected_capacitance(c, 0.3)
        l_eta = corrected_inductance(l_, 0.3)
        assert 1.0 / math.sqrt(l_eta * c_eta) == pytest.approx(OMEGA, rel=1e-12)

    def test_zero_eta_inductance(self):
        with pytest.raises(ValidationError, match="eta = 0"):
            corrected_inductance(1.0, 0.0)

    @pytest.mark.parametrize("eta", [-0.1, 1.1])
    def test_rejects_eta_outside_unit_interval(self, eta):
        with pytest.raises(ValidationError, match="eta must lie"):
            corrected_capacitance(1.0, eta)

    def test_eta_from_zeta(self):
        assert eta_from_zeta(0.138) == 0.138

    def test_lumped_elements_reject_larger_corrected_capacitance(self):
        with pytest.raises(ValidationError, match="exceeds"):
            LumpedElements(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, D, 1e-27)


# --- parallel-plate coupling ---


class TestGammaParallelPlate:
    def _gamma(self, **kwargs):
        c = method2_elements(MASS, OMEGA, D, E).c_hyb_b
        return gamma_parallel_plate(MASS, OMEGA, c, c, C_TOTAL, **kwargs)

    def test_exact(self):
        assert self._gamma().exact == pytest.approx(8.0e-17, rel=2e-3)

    def test_approximation_close_for_large_total(self):
        result = self._gamma()
        assert result.exact < result.approximate
        assert result.exact == pytest.approx(result.approximate, rel=1e-4)

    def test_charge_form_matches_approximation(self):
        result = self._gamma(q=E, d=D)
        assert result.charge_form == pytest.approx(result.approximate, rel=1e-12)

    def test_charge_form_without_charge(self):
        result = self._gamma(gamma_factor=2.0)
        assert result.charge_form == pytest.approx(4.0 * result.approximate)

    def test_corrected_without_correction(self):
        result = self._gamma()
        assert result.corrected == result.exact

    def test_corrected_is_smaller(self):
        result = self._gamma(eta=0.2)
        assert result.corrected < result.exact
        assert result.corrected == pytest.approx(0.2 * result.exact, rel=1e-4)

    def test_rejects_zero_total(self):
        with pytest.raises(ValidationError, match="c_total"):
            gamma_parallel_plate(MASS, OMEGA, 1e-18, 1e-18, 0.0)

    def test_exact_decreases_with_total_capacitance(self):
        c = method2_elements(MASS, OMEGA, D, E).c_hyb_b
        values = [
            gamma_parallel_plate(MASS, OMEGA, c, c, total).exact
            for total in np.geomspace(1e-16, 1e-8, 50)
        ]
        assert np.all(np.diff(values) < 0.0)

    def test_exact_vanishes_for_huge_total(self):
        c = method2_elements(MASS, OMEGA, D, E).c_hyb_b
        exact = gamma_parallel_plate(MASS, OMEGA, c, c, 1e200).exact
        assert 0.0 < exact < 1e-200

    @pytest.mark.parametrize("total", [1e-18, C_TOTAL, 1e-9])
    def test_equal_capacitances_simplify(self, total):
        c = method2_elements(MASS, OMEGA, D, E).c_hyb_b
        expected = MASS * OMEGA**2 * c / (c + total)
        assert gamma_parallel_plate(MASS, OMEGA, c, c, total).exact == pytest.approx(
            expected, rel=1e-12
        )

    def test_tiny_capacitances_do_not_underflow(self):
        result = gamma_parallel_plate(1.0, 1.0, 1e-172, 1e-172, 1e-13)
        assert result.exact > 0.0
        assert result.exact == pytest.approx(1e-159, rel=1e-9)
        assert result.approximate == pytest.approx(1e-159, rel=1e-9)


# --- drive currents ---


class TestDriveCurrents:
    def test_plate_drive_current(self):
        area = 2e-7
        expected = 2 * CODATA.vacuum_permittivity * area * MASS * OMEGA**2 * 1.0 / E
        assert plate_drive_current(MASS, OMEGA, area, 1.0, E) == pytest.approx(expected)

    def test_pair(self):
        currents = drive_currents(MASS, OMEGA, 2e-7, D, 1.0, E)
        assert currents.shockley == pytest.approx(shockley_current(1.0, D, E))
        expected = plate_drive_current(MASS, OMEGA, 2e-7, 1.0, E)
        assert currents.plate_drive == pytest.approx(expected)

    def test_contradiction_for_realistic_plates(self):
        area = math.pi * 2.5e-4**2
        result = plate_drive_contradiction(MASS, OMEGA, area, D)
        assert not result.equal
        assert result.actual_e_squared == pytest.approx(E**2)
        expected = 2 * CODATA.vacuum_permittivity * area * MASS * OMEGA**2 * D
        assert result.implied_e_squared == pytest.approx(expected)

    def test_currents_agree_when_charges_agree(self):
        area = E**2 / (2 * CODATA.vacuum_permittivity * MASS * OMEGA**2 * D)
        result = plate_drive_contradiction(MASS, OMEGA, area, D)
        assert result.equal
        currents = drive_currents(MASS, OMEGA, area, D, 1.0, E)
        assert currents.plate_drive == pytest.approx(currents.shockley, rel=1e-9)


# --- per-configuration model ---


class TestLumpedModel:
    def test_example(self, example_config):
        model = lumped_model(example_config)
        assert model.ion1.c_hyb_a == pytest.approx(3.874e-11, rel=1e-3)
        assert model.ion1.c_hyb_b == pytest.approx(3.917e-18, rel=1e-3)
        assert model.ion1.plate_separation == 5e-5
        assert model.ion1.eta == 1.0
        assert model.ion1.c_hyb_b_actual == model.ion1.c_hyb_b
        assert model.gamma_plate.exact == pytest.approx(8.0e-17, rel=2e-3)
        assert model.gamma_factor == 1.0

    def test_plate_separation_override(self, example_document):
        example_document["lumped"] = {"plate_separation1_m": 1e-4}
        model = lumped_model(validate_config(example_document))
        assert model.ion1.plate_separation == 1e-4
        assert model.ion2.plate_separation == 5e-5

    def test_oscillation_energy_override(self, example_document):
        example_document["lumped"] = {"oscillation_energy_j": 1e-26}
        model = lumped_model(validate_config(example_document))
        assert model.ion2.oscillation_energy == 1e-26
        assert model.ion2.c_hyb_a == pytest.approx(E**2 / 2e-26)

    def test_explicit_eta(self, example_document):
        example_document["lumped"] = {"eta": 0.5}
        model = lumped_model(validate_config(example_document))
        assert model.ion1.c_hyb_b_actual == pytest.approx(0.5 * model.ion1.c_hyb_b)

    def test_eta_from_zeta(self, example_document):
        example_document["lumped"] = {"eta_from_zeta": True}
        config = validate_config(example_document)
        assert resolve_eta(config) == pytest.approx(linear_elements(config).zeta)
        assert lumped_model(config).ion2.eta == pytest.approx(0.13806, rel=1e-4)

    def test_default_eta(self, example_config):
        assert resolve_eta(example_config) == 1.0

    def test_plate_gamma_far_exceeds_linear_gamma(self, example_config):
        plate = lumped_model(example_config).gamma_plate.exact
        assert plate > 100 * linear_elements(example_config).gamma


class TestRandomDraws:
    def test_corrected_capacitance_never_exceeds_uncorrected(self):
        rng = np.random.default_rng(7)
        etas = rng.uniform(0.0, 1.0, 1000)
        for eta, c in zip(etas, 10 ** rng.uniform(-20.0, -8.0, 1000), strict=True):
            assert corrected_capacitance(c, eta) <= c

    def test_drive_currents_never_agree_for_physical_plates(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            mass = 10 ** rng.uniform(-27.0, -24.0)
            omega = 2 * math.pi * 10 ** rng.uniform(4.0, 8.0)
            area = 10 ** rng.uniform(-10.0, 0.0)
            d = 10 ** rng.uniform(-6.0, -2.0)
            assert not plate_drive_contradiction(mass, omega, area, d).equal

    def test_documented_plate(self):
        result = plate_drive_contradiction(MASS, OMEGA, 1e-6, D)
        assert result.implied_e_squared == pytest.approx(2.32e-33, rel=1e-3)
        assert result.implied_e_squared / result.actual_e_squared > 1e4
