"""Closed-form central negativities and thresholds.

All quantities use hbar = 1: the vacuum Wigner function is a normalized 2-D
Gaussian with per-axis standard deviation 1/sqrt(2).

The input state is a squeezed single photon (squeezing ``s``) passed through
a beam splitter of transmission ``eta`` and mixed with a fraction
``epsilon`` of plain squeezed vacuum (false heralding events). Unity-gain
teleportation with EPR parameter ``r`` convolves the Wigner function with a
Gaussian of standard deviation ``exp(-r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NoThresholdError

__all__ = [
    "InputStateParams",
    "DerivedWidths",
    "ThresholdCoefficients",
    "sinh2",
    "ref_wigner_value",
    "ref_output_negativity",
    "input_negativity",
    "output_negativity",
    "threshold_r",
    "input_threshold_epsilon",
    "effective_r_after_input_loss",
    "output_wigner",
]


def sinh2(s: float) -> float:
    """sinh(s)**2."""
    return math.sinh(s) ** 2


def _check_r(r: float) -> None:
    if math.isnan(r) or r == -math.inf:
        raise InvalidParameterError(f"EPR parameter must be a number or +inf, got {r!r}")


def _g(r: float) -> float:
    # exp(-inf) == 0.0, so r = +inf is the identity channel
    return 1.0 + 2.0 * math.exp(-2.0 * r)


@dataclass(frozen=True)
class InputStateParams:
    """Three-parameter model of a heralded photon-subtracted squeezed vacuum.

    Attributes:
        s: squeezing parameter, ``s >= 0``.
        eta: effective transmission of the loss model, ``0 < eta <= 1``.
        epsilon: fraction of false heralds, ``0 <= epsilon <= 1``. Equal to
            one minus the modal purity.
    """

    s: float
    eta: float
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("s", "eta", "epsilon"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be a finite number, got {value!r}")
        if self.s < 0:
            raise InvalidParameterError(f"s must be >= 0, got {self.s}")
        if not 0 < self.eta <= 1:
            raise InvalidParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0 <= self.epsilon <= 1:
            raise InvalidParameterError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def modal_purity(self) -> float:
        return 1.0 - self.epsilon


@dataclass(frozen=True)
class DerivedWidths:
    """Gaussian widths entering the loss and teleportation channels."""

    lam: float
    lam_prime: float
    g_r: float

    @classmethod
    def from_params(cls, eta: float, r: float) -> "DerivedWidths":
        if not 0 < eta <= 1:
            raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
        _check_r(r)
        lam = math.sqrt((1.0 - eta) / (2.0 * eta))
        lam_prime = math.sqrt(lam**2 + math.exp(-2.0 * r) / eta)
        return cls(lam=lam, lam_prime=lam_prime, g_r=_g(r))


@dataclass(frozen=True)
class ThresholdCoefficients:
    """Coefficients of the quadratic ``g**2 + 2*b*eta*g - c*eta**2 = 0``."""

    b: float
    c: float

    @classmethod
    def from_params(cls, epsilon: float, s: float) -> "ThresholdCoefficients":
        sh = sinh2(s)
        return cls(b=epsilon * (1.0 + 2.0 * sh) - 1.0, c=4.0 * epsilon * sh)


def ref_wigner_value(s: float, q: float, p: float) -> float:
    """Wigner function of the squeezed single photon at ``(q, p)``."""
    u = math.exp(s) * q
    v = math.exp(-s) * p
    # G_{1/sqrt2}(u, v) is exp(-(u^2+v^2))/pi; the Jacobian of (q,p)->(u,v) is one
    return 2.0 * (u * u + v * v - 0.5) * math.exp(-(u * u + v * v)) / math.pi


def ref_output_negativity(s: float, r: float) -> float:
    """W(0,0) after teleporting the pure squeezed photon.

    The bracket in the denominator is ``g_r**2 + 8 exp(-2r) sinh(s)**2``.
    Direct Gaussian convolution (and the grid engine) give the squared
    ``g_r``, which is also the eta = 1 limit of :func:`output_negativity`.
    """
    if s < 0:
        raise InvalidParameterError(f"s must be >= 0, got {s}")
    _check_r(r)
    e2r = math.exp(-2.0 * r)
    g = 1.0 + 2.0 * e2r
    denom = math.pi * (g * g + 8.0 * e2r * sinh2(s)) ** 1.5
    return (2.0 * e2r + 1.0) * (2.0 * e2r - 1.0) / denom


def input_negativity(params: InputStateParams) -> float:
    """W_in(0,0) of the lossy, false-herald-mixed input state."""
    s, eta, eps = params.s, params.eta, params.epsilon
    sh = sinh2(s)
    denom = math.pi * (1.0 + 4.0 * eta * (1.0 - eta) * sh) ** 1.5
    value = (1.0 - 2.0 * eta) / denom
    if eps > 0:
        value += 2.0 * eps * eta * (1.0 + 2.0 * (1.0 - eta) * sh) / denom
    return value


def output_negativity(params: InputStateParams, r: float) -> float:
    """W_out(0,0) after unity-gain teleportation with EPR parameter ``r``.

    The false-herald correction shares its denominator with the main term,
    ``g_r**2 + 4 eta (g_r - eta) sinh(s)**2``. Teleporting the squeezed
    vacuum component on the grid confirms this; a ``(g_r - 2 eta)`` factor
    there would disagree with it.
    """
    _check_r(r)
    s, eta, eps = params.s, params.eta, params.epsilon
    sh = sinh2(s)
    g = _g(r)
    denom = math.pi * (g * g + 4.0 * eta * (g - eta) * sh) ** 1.5
    value = g * (g - 2.0 * eta) / denom
    if eps > 0:
        value += 2.0 * eps * eta * (g + 2.0 * (g - eta) * sh) / denom
    return value


def threshold_r(eta: float, s: float, epsilon: float = 0.0) -> float:
    """EPR parameter at which the output negativity vanishes.

    Raises:
        NoThresholdError: if no finite ``r`` makes the output negative.
    """
    if not 0 < eta <= 1:
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
    if epsilon == 0:
        if 2.0 * eta - 1.0 <= 0:
            raise NoThresholdError(f"eta = {eta} <= 1/2: output is never negative")
        return 0.5 * math.log(2.0 / (2.0 * eta - 1.0))
    coef = ThresholdCoefficients.from_params(epsilon, s)
    g = eta * (math.sqrt(coef.b**2 + coef.c) - coef.b)
    if g - 1.0 <= 0:
        raise NoThresholdError(
            f"no physical threshold for eta={eta}, s={s}, epsilon={epsilon}"
        )
    return 0.5 * math.log(2.0 / (g - 1.0))


def input_threshold_epsilon(eta: float, s: float) -> float:
    """Largest false-herald fraction keeping W_in(0,0) <= 0.

    Non-positive values mean the input is never negative (``eta <= 1/2``).
    """
    if not 0 < eta <= 1:
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
    return (2.0 * eta - 1.0) / (2.0 * eta * (1.0 + 2.0 * (1.0 - eta) * sinh2(s)))


def effective_r_after_input_loss(r: float, eta: float) -> float:
    if not 0 < eta <= 1:
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
    return r + 0.5 * math.log(eta)


def output_wigner(params: InputStateParams, r: float, x, p) -> np.ndarray:
    """Full output Wigner function at ``(x, p)`` (arrays broadcast).

    Loss followed by teleportation is the channel ``X -> sqrt(eta) X + noise``
    with per-axis noise variance ``eta * lambda'**2``. Both components of the
    input stay Gaussian-times-quadratic, so the result is closed-form.
    :func:`output_negativity` is its value at the origin.
    """
    _check_r(r)
    s, eta, eps = params.s, params.eta, params.epsilon
    lam2 = DerivedWidths.from_params(eta, r).lam_prime ** 2
    a = 0.5 * math.exp(-2.0 * s)
    b = 0.5 * math.exp(2.0 * s)
    var_x, var_p = a + lam2, b + lam2
    q = np.asarray(x, dtype=float) / math.sqrt(eta)
    k = np.asarray(p, dtype=float) / math.sqrt(eta)
    gauss = np.exp(-0.5 * q * q / var_x - 0.5 * k * k / var_p) / (2.0 * math.pi * eta * math.sqrt(var_x * var_p))
    photon = gauss * (a * q * q / var_x**2 + lam2 / var_x + b * k * k / var_p**2 + lam2 / var_p - 1.0)
    return (1.0 - eps) * photon + eps * gauss
