"""Classical noise folded into the EPR parameter.

Uncorrelated Gaussian noise of vacuum-normalized amplitude ``N`` on both
quadratures adds to the teleportation kernel in power, not amplitude::

    exp(-2 r') = exp(-2 r) + N**2

Only Gaussian entanglement and uncorrelated Gaussian noise are covered.
Anisotropic noise goes through the characteristic-function route in
:mod:`cvteleport.phase_space`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NegativeNoiseError

__all__ = [
    "NoiseLevel",
    "noisy_r",
    "noisy_r_eff",
    "break_even_noise",
    "amplitude_rule_r",
]


@dataclass(frozen=True)
class NoiseLevel:
    """Vacuum-normalized noise amplitude, identical on x and p."""

    amplitude: float

    def __post_init__(self):
        a = self.amplitude
        if not isinstance(a, (int, float)) or not math.isfinite(a):
            raise NegativeNoiseError(f"noise amplitude must be finite, got {a!r}")
        if a < 0:
            raise NegativeNoiseError(f"noise amplitude must be >= 0, got {a}")


def _amp(n: NoiseLevel | float) -> float:
    return n.amplitude if isinstance(n, NoiseLevel) else NoiseLevel(n).amplitude


def noisy_r(r: float, n: NoiseLevel | float) -> float:
    """Renormalized EPR parameter; negative once noise beats the squeezing."""
    a = _amp(n)
    if math.isinf(r) and r > 0:
        return -math.log(a) if a > 0 else math.inf
    # r - log(sqrt(1 + N^2 e^{2r})), written to avoid overflow at large r
    return -0.5 * math.log(math.exp(-2.0 * r) + a * a)


def noisy_r_eff(r_eff: float, n_eff: float) -> float:
    """Same rule for the broadband effective quantities."""
    return noisy_r(r_eff, n_eff)


def amplitude_rule_r(r: float, n: NoiseLevel | float) -> float:
    """Amplitude-additive ``exp(-r') = exp(-r) + N``.

    Not a valid noise model; kept to show that the grid engine rejects it.
    """
    return -math.log(math.exp(-r) + _amp(n))


def break_even_noise(r: float) -> NoiseLevel:
    """Noise amplitude at which teleportation falls back to the classical r = 0."""
    if not r > 0:
        raise DomainError(f"break-even noise needs r > 0, got {r}")
    return NoiseLevel(math.sqrt(-math.expm1(-2.0 * r)))
