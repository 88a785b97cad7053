import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvteleport.analytic_core import InputStateParams, output_negativity, ref_output_negativity
from cvteleport.errors import DomainError, NegativeNoiseError
from cvteleport.noise import NoiseLevel, amplitude_rule_r, break_even_noise, noisy_r, noisy_r_eff
from cvteleport.phase_space import (
    GridSpec,
    apply_quadrature_noise_factor,
    from_characteristic,
    origin_value,
    to_characteristic,
    wigner_reference,
)

LN_SQRT2 = 0.5 * math.log(2)
# 40-digit mpmath
NOISY_0795_02 = 0.7054459850564858


def test_zero_noise():
    for r in (-0.3, 0.0, 0.795, 3.0):
        assert noisy_r(r, 0.0) == pytest.approx(r, abs=1e-15)


def test_noise_level_validation():
    with pytest.raises(NegativeNoiseError):
        NoiseLevel(-0.1)
    with pytest.raises(NegativeNoiseError):
        NoiseLevel(math.nan)
    assert noisy_r(0.5, NoiseLevel(0.2)) == noisy_r(0.5, 0.2)


def test_classical_crossing():
    assert noisy_r(LN_SQRT2, math.sqrt(0.5)) == pytest.approx(0.0, abs=1e-15)


def test_can_go_negative():
    assert noisy_r(0.1, 0.9) < 0


@settings(max_examples=200, deadline=None)
@given(r=st.floats(0, 4), n1=st.floats(0, 2), n2=st.floats(0, 2))
def test_power_additivity(r, n1, n2):
    assert noisy_r(noisy_r(r, n1), n2) == pytest.approx(noisy_r(r, math.hypot(n1, n2)), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(r=st.floats(0, 4), n=st.floats(0.01, 2), dn=st.floats(0.01, 1), dr=st.floats(0.01, 1))
def test_strict_monotonicity(r, n, dn, dr):
    assert noisy_r(r, n + dn) < noisy_r(r, n)
    assert noisy_r(r + dr, n) > noisy_r(r, n)


def test_break_even():
    for r in (0.1, 0.35, 0.795, 2.0):
        assert abs(noisy_r(r, break_even_noise(r))) <= 1e-12
    assert break_even_noise(1e-12).amplitude == pytest.approx(0.0, abs=1e-5)
    assert break_even_noise(40.0).amplitude == pytest.approx(1.0, abs=1e-15)
    assert break_even_noise(LN_SQRT2).amplitude == pytest.approx(math.sqrt(0.5), abs=1e-15)
    for r in (0.0, -1.0):
        with pytest.raises(DomainError):
            break_even_noise(r)


def test_noisy_r_eff():
    assert noisy_r_eff(0.795, 0.0) == 0.795
    assert noisy_r_eff(0.795, 0.2) == pytest.approx(NOISY_0795_02, abs=1e-15)


def test_noise_weakens_negativity():
    p = InputStateParams(0.28, 0.8, 0.013)
    for n in (0.05, 0.2, 0.5):
        assert output_negativity(p, noisy_r(0.795, n)) >= output_negativity(p, 0.795)


def test_infinite_r():
    assert noisy_r(math.inf, 0.0) == math.inf
    assert noisy_r(math.inf, 0.5) == pytest.approx(-math.log(0.5))


def test_power_vs_amplitude_rule_on_grid():
    # teleport the squeezed photon with noise added through the characteristic function
    s, r, n = 0.28, 0.5, 0.3
    w = wigner_reference(s, GridSpec.square(8.0, 512))
    gamma = math.sqrt(math.exp(-2 * r) + n * n)
    chi = to_characteristic(w)
    chi = apply_quadrature_noise_factor(apply_quadrature_noise_factor(chi, gamma, "u"), gamma, "v")
    grid_value = origin_value(from_characteristic(chi))
    power = ref_output_negativity(s, noisy_r(r, n))
    amplitude = ref_output_negativity(s, amplitude_rule_r(r, n))
    assert abs(grid_value - power) <= 1e-6
    assert abs(grid_value - amplitude) > 1e-2
