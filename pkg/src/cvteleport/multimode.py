"""Effective single-mode description of broadband teleportation.

Frequencies are sideband offsets ``Omega = omega - omega_0`` from the
carrier. Spectral averages (effective EPR parameter, effective noise, gain
moments) weight with l1-normalized mode functions, so that a flat spectrum
averages to itself. The l2 convention, which preserves commutators of the
wave-packet operators, is kept as an explicit tag.

All integrals are composite trapezoid sums on the supplied grid. Grids need
not be uniform; :func:`lorentzian_grid` builds one that resolves a
Lorentzian and its heavy tails with a few thousand points.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    GridMismatchError,
    GridSpanError,
    InvalidParameterError,
    NegativeNoiseError,
    NegativeWeightWarning,
    PumpRangeError,
)

NORM_TOL = 1e-9
TAIL_TOL = 1e-3
DEFAULT_MAX_GAIN = 10.0


def _trapz(y: np.ndarray, x: np.ndarray):
    return np.trapezoid(y, x)


def _as_grid(omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.size < 2:
        raise ConfigError("frequency grid must be a 1-D array with at least two samples")
    if not np.all(np.diff(omega) > 0):
        raise ConfigError("frequency grid must be strictly increasing")
    return omega


def _same_grid(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape or not np.array_equal(a, b):
        raise GridMismatchError("spectral objects live on different frequency grids; resample first")


def lorentzian(omega, gamma: float) -> np.ndarray:
    """Unit-area Lorentzian ``gamma / (pi (gamma^2 + Omega^2))``."""
    omega = np.asarray(omega, dtype=float)
    return gamma / (np.pi * (gamma**2 + omega**2))


def lorentzian_tail_mass(gamma: float, omega_lo: float, omega_hi: float) -> float:
    """Mass of the unit-area Lorentzian outside ``[omega_lo, omega_hi]``."""
    inside = (math.atan(omega_hi / gamma) - math.atan(omega_lo / gamma)) / math.pi
    return 1.0 - inside


def lorentzian_grid(gamma: float, n: int = 8001, tail_mass: float = 1e-7) -> np.ndarray:
    """Symmetric grid with nodes uniform in ``asinh(Omega / gamma)``.

    Spacing is about ``gamma`` times the step near the line centre and grows
    geometrically in the tails, which keeps the trapezoid error of
    ``1/Omega**2`` tails small. ``tail_mass`` is the Lorentzian area left
    outside the grid.
    """
    if gamma <= 0:
        raise InvalidParameterError("gamma must be positive")
    if not 0 < tail_mass < 1:
        raise InvalidParameterError("tail_mass must lie in (0, 1)")
    omega_max = gamma * math.tan(0.5 * math.pi * (1.0 - tail_mass))
    u_max = math.asinh(omega_max / gamma)
    half = gamma * np.sinh(np.linspace(-u_max, u_max, n)[n // 2 :])
    # mirror so that the grid is exactly symmetric
    if n % 2:
        return np.concatenate([-half[:0:-1], half])
    return np.concatenate([-half[::-1], half])


@dataclass(frozen=True, eq=False)
class ModeFunction:
    """Sampled wave-packet weight ``f(Omega)``.

    ``normalization`` is ``"l1"`` (``int f = 1``), ``"l2"``
    (``int |f|^2 = 1``) or ``None`` for unnormalized products such as the
    output of :func:`output_mode_function`.
    """

    omega: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    normalization: str | None = "l1"

    def __post_init__(self):
        omega = _as_grid(self.omega)
        weights = np.asarray(self.weights)
        if weights.shape != omega.shape:
            raise GridMismatchError("weights and frequency grid differ in length")
        if not np.all(np.isfinite(weights)):
            raise ConfigError("mode function samples must be finite")
        weights = weights.astype(complex if np.iscomplexobj(weights) else float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "weights", weights)
        if self.normalization == "l1":
            if abs(self.l1_integral() - 1.0) > NORM_TOL:
                raise ConfigError(f"l1 norm is {self.l1_integral()!r}, expected 1")
        elif self.normalization == "l2":
            if abs(self.l2_norm() ** 2 - 1.0) > NORM_TOL:
                raise ConfigError(f"l2 norm is {self.l2_norm()!r}, expected 1")
        elif self.normalization is not None:
            raise ConfigError(f"unknown normalization {self.normalization!r}")

    @classmethod
    def normalized(cls, omega, weights, normalization: str = "l1") -> "ModeFunction":
        omega = _as_grid(omega)
        weights = np.asarray(weights)
        if normalization == "l1":
            total = _trapz(weights, omega)
            if abs(total) == 0:
                raise ConfigError("mode function integrates to zero")
            weights = weights / total
        elif normalization == "l2":
            weights = weights / math.sqrt(_trapz(np.abs(weights) ** 2, omega))
        else:
            raise ConfigError(f"unknown normalization {normalization!r}")
        return cls(omega, weights, normalization)

    def l1_integral(self) -> complex | float:
        return _trapz(self.weights, self.omega)

    def l2_norm(self) -> float:
        return float(math.sqrt(_trapz(np.abs(self.weights) ** 2, self.omega)))

    def renormalized(self, normalization: str) -> "ModeFunction":
        return ModeFunction.normalized(self.omega, self.weights, normalization)

    def resampled(self, omega) -> "ModeFunction":
        """Linear interpolation onto ``omega``, renormalized under the same tag."""
        omega = _as_grid(omega)
        w = _interp(omega, self.omega, self.weights)
        if self.normalization is None:
            return ModeFunction(omega, w, None)
        return ModeFunction.normalized(omega, w, self.normalization)


def _interp(x_new, x, y):
    if np.iscomplexobj(y):
        return np.interp(x_new, x, y.real, 0.0, 0.0) + 1j * np.interp(x_new, x, y.imag, 0.0, 0.0)
    return np.interp(x_new, x, y, left=y[0], right=y[-1])


def lorentzian_mode(gamma: float, omega, normalization: str = "l1") -> ModeFunction:
    """Lorentzian mode of half-width ``gamma`` (the OPO decay rate).

    Raises:
        GridSpanError: if the grid leaves more than 1e-3 of the Lorentzian's
            area outside its span.
    """
    if gamma <= 0:
        raise InvalidParameterError("gamma must be positive")
    omega = _as_grid(omega)
    tail = lorentzian_tail_mass(gamma, omega[0], omega[-1])
    if tail > TAIL_TOL:
        raise GridSpanError(
            f"grid [{omega[0]:g}, {omega[-1]:g}] leaves {tail:.2e} of the Lorentzian outside; "
            "use lorentzian_grid() or a wider span"
        )
    return ModeFunction.normalized(omega, lorentzian(omega, gamma), normalization)


@dataclass(frozen=True, eq=False)
class SqueezingSpectrum:
    """Squeezing spectrum ``S_-(Omega) = exp(-r(Omega))``."""

    omega: np.ndarray = field(repr=False)
    s_minus: np.ndarray = field(repr=False)

    def __post_init__(self):
        omega = _as_grid(self.omega)
        s_minus = np.asarray(self.s_minus, dtype=float)
        if s_minus.shape != omega.shape:
            raise GridMismatchError("spectrum and frequency grid differ in length")
        if not np.all(s_minus > 0) or not np.all(np.isfinite(s_minus)):
            raise ConfigError("S_- samples must be finite and positive")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "s_minus", s_minus)

    @classmethod
    def from_r(cls, omega, r_values) -> "SqueezingSpectrum":
        return cls(omega, np.exp(-np.asarray(r_values, dtype=float)))

    @classmethod
    def flat(cls, omega, r0: float) -> "SqueezingSpectrum":
        omega = _as_grid(omega)
        return cls.from_r(omega, np.full(omega.shape, float(r0)))

    @property
    def r_values(self) -> np.ndarray:
        return -np.log(self.s_minus)

    def resampled(self, omega) -> "SqueezingSpectrum":
        omega = _as_grid(omega)
        return SqueezingSpectrum(omega, _interp(omega, self.omega, self.s_minus))


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """Complex classical-channel response ``g(Omega)``."""

    omega: np.ndarray = field(repr=False)
    g_values: np.ndarray = field(repr=False)
    max_gain: float = DEFAULT_MAX_GAIN

    def __post_init__(self):
        omega = _as_grid(self.omega)
        g = np.asarray(self.g_values, dtype=complex)
        if g.shape != omega.shape:
            raise GridMismatchError("transfer function and frequency grid differ in length")
        if not np.all(np.isfinite(g)):
            raise ConfigError("transfer function samples must be finite")
        if np.max(np.abs(g)) > self.max_gain:
            raise ConfigError(f"|g| exceeds the configured maximum {self.max_gain}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g_values", g)

    @classmethod
    def unity(cls, omega) -> "TransferFunction":
        omega = _as_grid(omega)
        return cls(omega, np.ones(omega.shape))

    @classmethod
    def delay(cls, omega, dt: float) -> "TransferFunction":
        """Pure linear delay ``exp(-i Omega dt)``."""
        omega = _as_grid(omega)
        return cls(omega, np.exp(-1j * omega * dt))

    @classmethod
    def low_pass(cls, omega, cutoff: float) -> "TransferFunction":
        """Single-pole response ``1 / (1 + i Omega / cutoff)``."""
        omega = _as_grid(omega)
        return cls(omega, 1.0 / (1.0 + 1j * omega / cutoff))

    def resampled(self, omega) -> "TransferFunction":
        omega = _as_grid(omega)
        return TransferFunction(omega, _interp(omega, self.omega, self.g_values), self.max_gain)


@dataclass(frozen=True)
class GainMoments:
    """Spectral averages of ``g(Omega) exp(+-(r(Omega) - r_eff))``.

    In the nonunity-gain output quadrature the vacuum noise of the squeezed
    auxiliary mode enters with ``(1 + g_minus) exp(-r_eff) / sqrt(2)`` and
    the antisqueezed one with ``(1 - g_plus) exp(+r_eff) / sqrt(2)``.
    """

    g_plus: complex
    g_minus: complex

    def noise_coefficients(self, r_eff: float) -> tuple[complex, complex]:
        """(squeezed-noise, antisqueezed-noise) coefficients."""
        squeezed = (1.0 + self.g_minus) / math.sqrt(2.0) * math.exp(-r_eff)
        antisqueezed = (1.0 - self.g_plus) / math.sqrt(2.0) * math.exp(r_eff)
        return squeezed, antisqueezed


def opo_squeezing_spectrum(x_pump: float, kappa_cav: float, omega) -> SqueezingSpectrum:
    """Below-threshold OPO: ``S_-(Omega) = 1 - 4x / ((1 + x)^2 + (Omega / kappa)^2)``.

    ``x_pump`` is the pump amplitude relative to threshold, ``kappa_cav``
    the cavity half-width.
    """
    if not 0 <= x_pump < 1:
        raise PumpRangeError(f"pump parameter must lie in [0, 1), got {x_pump}")
    if kappa_cav <= 0:
        raise InvalidParameterError("cavity decay rate must be positive")
    omega = _as_grid(omega)
    s_minus = 1.0 - 4.0 * x_pump / ((1.0 + x_pump) ** 2 + (omega / kappa_cav) ** 2)
    return SqueezingSpectrum(omega, s_minus)


def _averaging_weights(f: ModeFunction) -> np.ndarray:
    if f.normalization != "l1":
        raise ConfigError("spectral averages need an l1-normalized mode function")
    w = np.real_if_close(f.weights, tol=1000)
    if np.iscomplexobj(w):
        raise ConfigError("spectral averages need a real mode function")
    if np.any(w < 0):
        warnings.warn("mode function has negative lobes", NegativeWeightWarning, stacklevel=3)
    return w


def effective_epr(f: ModeFunction, spec: SqueezingSpectrum) -> float:
    """``r_eff`` defined by ``exp(-r_eff) = int f(Omega) S_-(Omega) dOmega``."""
    _same_grid(f.omega, spec.omega)
    w = _averaging_weights(f)
    return float(-math.log(_trapz(w * spec.s_minus, f.omega)))


def gain_moments(
    f: ModeFunction, g: TransferFunction, spec: SqueezingSpectrum, r_eff: float
) -> GainMoments:
    _same_grid(f.omega, g.omega)
    _same_grid(f.omega, spec.omega)
    w = _averaging_weights(f)
    dr = spec.r_values - r_eff
    g_plus = _trapz(w * g.g_values * np.exp(dr), f.omega)
    g_minus = _trapz(w * g.g_values * np.exp(-dr), f.omega)
    return GainMoments(complex(g_plus), complex(g_minus))


def output_mode_function(f: ModeFunction, g: TransferFunction) -> tuple[ModeFunction, float]:
    """Output wave-packet ``f * g`` (not renormalized) and its l2 norm."""
    _same_grid(f.omega, g.omega)
    out = ModeFunction(f.omega, f.weights * g.g_values, None)
    return out, out.l2_norm()


@dataclass(frozen=True, eq=False)
class NoiseSpectrum:
    """Vacuum-normalized classical noise amplitude ``N(Omega) >= 0``."""

    omega: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        omega = _as_grid(self.omega)
        values = np.asarray(self.values, dtype=float)
        if values.shape != omega.shape:
            raise GridMismatchError("noise spectrum and frequency grid differ in length")
        if np.any(values < 0):
            raise NegativeNoiseError("noise amplitudes must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def resampled(self, omega) -> "NoiseSpectrum":
        omega = _as_grid(omega)
        return NoiseSpectrum(omega, _interp(omega, self.omega, self.values))


def effective_noise(f: ModeFunction, noise: NoiseSpectrum | np.ndarray) -> float:
    """``N_eff = int f(Omega) N(Omega) dOmega``.

    ``noise`` may be a bare array sampled on ``f.omega``.
    """
    if not isinstance(noise, NoiseSpectrum):
        values = np.asarray(noise, dtype=float)
        if values.shape != f.omega.shape:
            raise GridMismatchError("noise samples do not match the mode-function grid")
        noise = NoiseSpectrum(f.omega, values)
    _same_grid(f.omega, noise.omega)
    w = _averaging_weights(f)
    return float(_trapz(w * noise.values, f.omega))


# -- CSV ingestion ------------------------------------------------------------


def read_samples_csv(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read ``omega,value`` or ``omega,re,im`` columns (header row required)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        rows = [row for row in reader if row and not row[0].lstrip().startswith("#")]
    if header == ["omega", "value"]:
        data = np.array(rows, dtype=float).reshape(-1, 2)
        return data[:, 0], data[:, 1]
    if header == ["omega", "re", "im"]:
        data = np.array(rows, dtype=float).reshape(-1, 3)
        return data[:, 0], data[:, 1] + 1j * data[:, 2]
    raise ConfigError(f"{path}: header must be 'omega,value' or 'omega,re,im', got {header}")


def write_samples_csv(path: str | os.PathLike, omega, values) -> None:
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values)
    lines = []
    if np.iscomplexobj(values):
        lines.append("omega,re,im")
        lines += [f"{float(w)!r},{float(v.real)!r},{float(v.imag)!r}" for w, v in zip(omega, values)]
    else:
        lines.append("omega,value")
        lines += [f"{float(w)!r},{float(v)!r}" for w, v in zip(omega, values)]
    Path(path).write_text("\n".join(lines) + "\n")
