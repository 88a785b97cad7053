import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvteleport.errors import (
    ConfigError,
    GridMismatchError,
    GridSpanError,
    NegativeNoiseError,
    NegativeWeightWarning,
    PumpRangeError,
)
from cvteleport.multimode import (
    ModeFunction,
    NoiseSpectrum,
    SqueezingSpectrum,
    TransferFunction,
    effective_epr,
    effective_noise,
    gain_moments,
    lorentzian,
    lorentzian_grid,
    lorentzian_mode,
    opo_squeezing_spectrum,
    output_mode_function,
    read_samples_csv,
    write_samples_csv,
)

# adaptive quadrature over the whole real line (scipy.integrate.quad, epsabs 1e-15)
REFF_OPO = 0.9200572146696321  # gamma=1, x=0.4, kappa=2
G_LOWPASS = 0.6666666666666681  # int f/(1 + i W/2), l1 Lorentzian gamma=1
L2_LOWPASS = 0.9428090415820628  # l2 norm of l2-Lorentzian times the same low-pass
N_BAND = 0.08855017059025996  # N0=0.3 on |W| < 1/2


@pytest.fixture(scope="module")
def grid():
    return lorentzian_grid(1.0)


@pytest.fixture(scope="module")
def mode(grid):
    return lorentzian_mode(1.0, grid)


class TestModeFunction:
    def test_l1(self, mode):
        assert abs(np.trapezoid(mode.weights, mode.omega) - 1) <= 1e-9

    def test_l2(self, grid):
        f = lorentzian_mode(1.0, grid, "l2")
        assert abs(np.trapezoid(f.weights**2, grid) - 1) <= 1e-9

    def test_rejects_unnormalized(self, grid):
        with pytest.raises(ConfigError):
            ModeFunction(grid, 2 * lorentzian(grid, 1.0), "l1")

    def test_rejects_bad_grid(self):
        with pytest.raises(ConfigError):
            ModeFunction(np.array([0.0, 2.0, 1.0]), np.ones(3), None)
        with pytest.raises(GridMismatchError):
            ModeFunction(np.arange(3.0), np.ones(4), None)

    def test_peak_and_hwhm(self):
        assert lorentzian(0.0, 0.7) == pytest.approx(1 / (math.pi * 0.7))
        assert lorentzian(0.7, 0.7) == pytest.approx(0.5 * lorentzian(0.0, 0.7))

    def test_span_check(self):
        with pytest.raises(GridSpanError):
            lorentzian_mode(1.0, np.linspace(-20, 20, 4001))
        lorentzian_mode(1.0, np.linspace(-700, 700, 20001))

    def test_resample(self, mode):
        coarse = mode.resampled(lorentzian_grid(1.0, 2001))
        assert coarse.normalization == "l1"
        assert abs(coarse.l1_integral() - 1) <= 1e-9


class TestOPOSpectrum:
    def test_no_pump(self, grid):
        assert np.all(opo_squeezing_spectrum(0.0, 2.0, grid).s_minus == 1.0)

    def test_dc_value(self):
        spec = opo_squeezing_spectrum(0.5, 1.0, np.array([-1.0, 0.0, 1.0]))
        assert spec.s_minus[1] == pytest.approx(1 / 9, abs=1e-15)

    def test_symmetric(self, grid):
        s = opo_squeezing_spectrum(0.7, 3.0, grid).s_minus
        assert np.array_equal(s, s[::-1])

    @pytest.mark.parametrize("x", [1.0, 1.2, -0.1])
    def test_pump_range(self, grid, x):
        with pytest.raises(PumpRangeError):
            opo_squeezing_spectrum(x, 1.0, grid)


class TestEffectiveEPR:
    @settings(max_examples=50, deadline=None)
    @given(r0=st.floats(0.0, 3.0), gamma=st.floats(0.2, 5.0))
    def test_flat_collapse(self, r0, gamma):
        om = lorentzian_grid(gamma, 2001)
        f = lorentzian_mode(gamma, om)
        assert abs(effective_epr(f, SqueezingSpectrum.flat(om, r0)) - r0) <= 1e-12

    def test_zero(self, grid, mode):
        assert effective_epr(mode, SqueezingSpectrum.flat(grid, 0.0)) == pytest.approx(0, abs=1e-12)

    def test_opo_oracle(self, grid, mode):
        spec = opo_squeezing_spectrum(0.4, 2.0, grid)
        assert effective_epr(mode, spec) == pytest.approx(REFF_OPO, abs=1e-6)

    @pytest.mark.parametrize("x,kappa,gamma", [(0.1, 1, 1), (0.4, 2, 1), (0.8, 0.5, 2), (0.95, 5, 0.3)])
    def test_jensen(self, x, kappa, gamma):
        om = lorentzian_grid(gamma)
        f = lorentzian_mode(gamma, om)
        spec = opo_squeezing_spectrum(x, kappa, om)
        mean_r = np.trapezoid(f.weights * spec.r_values, om)
        assert effective_epr(f, spec) <= mean_r + 1e-15

    def test_requires_l1(self, grid):
        with pytest.raises(ConfigError):
            effective_epr(lorentzian_mode(1.0, grid, "l2"), SqueezingSpectrum.flat(grid, 1.0))

    def test_grid_mismatch(self, mode):
        with pytest.raises(GridMismatchError):
            effective_epr(mode, SqueezingSpectrum.flat(lorentzian_grid(1.0, 2001), 1.0))

    def test_negative_lobes_warn(self):
        om = np.linspace(-1, 1, 201)
        w = 1.5 - 3 * om**2 + 0.25
        f = ModeFunction.normalized(om, w)
        with pytest.warns(NegativeWeightWarning):
            effective_epr(f, SqueezingSpectrum.flat(om, 0.3))


class TestGainMoments:
    def test_unity_flat(self, grid, mode):
        gm = gain_moments(mode, TransferFunction.unity(grid), SqueezingSpectrum.flat(grid, 0.8), 0.8)
        assert gm.g_plus == pytest.approx(1, abs=1e-12)
        assert gm.g_minus == pytest.approx(1, abs=1e-12)
        sq, anti = gm.noise_coefficients(0.8)
        assert anti == 0
        assert sq == pytest.approx(math.sqrt(2) * math.exp(-0.8))

    def test_zero_gain(self, grid, mode):
        g = TransferFunction(grid, np.zeros(grid.shape))
        spec = opo_squeezing_spectrum(0.4, 2.0, grid)
        gm = gain_moments(mode, g, spec, effective_epr(mode, spec))
        assert gm.g_plus == 0 and gm.g_minus == 0

    def test_unity_gain_with_spectrum(self, grid, mode):
        spec = opo_squeezing_spectrum(0.4, 2.0, grid)
        r_eff = effective_epr(mode, spec)
        gm = gain_moments(mode, TransferFunction.unity(grid), spec, r_eff)
        # by definition of r_eff the minus moment is exactly one
        assert gm.g_minus == pytest.approx(1, abs=1e-12)
        assert gm.g_plus.real >= 1

    def test_lowpass_oracle(self, grid, mode):
        g = TransferFunction.low_pass(grid, 2.0)
        gm = gain_moments(mode, g, SqueezingSpectrum.flat(grid, 0.5), 0.5)
        assert gm.g_plus == pytest.approx(G_LOWPASS, abs=1e-6)
        assert gm.g_minus == pytest.approx(gm.g_plus, abs=1e-15)

    def test_gain_bound(self, grid):
        with pytest.raises(ConfigError):
            TransferFunction(grid, np.full(grid.shape, 11.0))
        TransferFunction(grid, np.full(grid.shape, 11.0), max_gain=20)


class TestOutputMode:
    def test_delay(self, grid):
        f = lorentzian_mode(1.0, grid, "l2")
        out, norm = output_mode_function(f, TransferFunction.delay(grid, 0.37))
        assert np.allclose(np.abs(out.weights), np.abs(f.weights), rtol=1e-14, atol=0)
        assert norm == pytest.approx(f.l2_norm(), abs=1e-12)

    def test_identity(self, grid, mode):
        out, _ = output_mode_function(mode, TransferFunction.unity(grid))
        assert np.array_equal(out.weights, mode.weights)
        assert out.normalization is None

    def test_lowpass_oracle(self, grid):
        f = lorentzian_mode(1.0, grid, "l2")
        _, norm = output_mode_function(f, TransferFunction.low_pass(grid, 2.0))
        assert norm < 1
        assert norm == pytest.approx(L2_LOWPASS, abs=1e-6)


class TestEffectiveNoise:
    def test_zero_and_flat(self, grid, mode):
        assert effective_noise(mode, np.zeros(grid.shape)) == 0
        assert effective_noise(mode, np.full(grid.shape, 0.42)) == pytest.approx(0.42, abs=1e-12)

    def test_band_limited_oracle(self):
        base = lorentzian_grid(1.0)
        # uniform spacing around the band edges, jump sampled at its midpoint
        om = np.union1d(base[np.abs(base) > 2], np.linspace(-2, 2, 4001))
        n = np.where(np.abs(om) < 0.5, 0.3, 0.0)
        n[np.isclose(np.abs(om), 0.5, atol=1e-12)] = 0.15
        assert effective_noise(lorentzian_mode(1.0, om), n) == pytest.approx(N_BAND, abs=1e-6)

    def test_negative(self, grid, mode):
        with pytest.raises(NegativeNoiseError):
            effective_noise(mode, np.full(grid.shape, -0.1))

    def test_mismatch(self, mode):
        with pytest.raises(GridMismatchError):
            effective_noise(mode, np.zeros(10))
        other = lorentzian_grid(1.0, 101)
        with pytest.raises(GridMismatchError):
            effective_noise(mode, NoiseSpectrum(other, np.zeros(other.shape)))


def test_grid_refinement():
    results = []
    for n in (8001, 16001):
        om = lorentzian_grid(1.0, n)
        f = lorentzian_mode(1.0, om)
        spec = opo_squeezing_spectrum(0.4, 2.0, om)
        r_eff = effective_epr(f, spec)
        gm = gain_moments(f, TransferFunction.low_pass(om, 2.0), spec, r_eff)
        _, norm = output_mode_function(lorentzian_mode(1.0, om, "l2"), TransferFunction.low_pass(om, 2.0))
        noise = effective_noise(f, 0.2 / (1 + om**2))
        results.append(np.array([r_eff, gm.g_plus.real, gm.g_plus.imag, gm.g_minus.real, norm, noise]))
    assert np.max(np.abs(results[0] - results[1])) < 1e-6


def test_csv_roundtrip(tmp_path, grid, mode):
    path = tmp_path / "f.csv"
    write_samples_csv(path, grid, mode.weights)
    om, w = read_samples_csv(path)
    assert np.array_equal(om, grid) and np.array_equal(w, mode.weights)
    g = TransferFunction.delay(grid, 0.1)
    write_samples_csv(path, grid, g.g_values)
    om, w = read_samples_csv(path)
    assert np.array_equal(w, g.g_values)


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("w,f\n0,1\n")
    with pytest.raises(ConfigError):
        read_samples_csv(path)
