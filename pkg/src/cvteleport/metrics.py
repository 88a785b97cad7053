"""Comparisons between Wigner functions and vacuum-teleportation fidelity."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DegeneratePurityError, GridMismatchError
from .phase_space import WignerGrid

__all__ = [
    "FidelityConvention",
    "ComparisonReport",
    "overlap",
    "normalized_overlap",
    "l2_distance",
    "purity",
    "vacuum_fidelity",
    "fidelity_to_r",
    "compare",
]


def _check(a: WignerGrid, b: WignerGrid) -> None:
    if a.spec != b.spec:
        raise GridMismatchError("Wigner functions are sampled on different grids")


def _integrate(values: np.ndarray, w: WignerGrid) -> float:
    return float(np.trapezoid(np.trapezoid(values, dx=w.spec.dp, axis=1), dx=w.spec.dx))


def overlap(w_a: WignerGrid, w_b: WignerGrid) -> float:
    """``2 pi int W_a W_b``; equals Tr(rho_a rho_b)."""
    _check(w_a, w_b)
    return 2.0 * math.pi * _integrate(w_a.values * w_b.values, w_a)


def purity(w: WignerGrid) -> float:
    return overlap(w, w)


def normalized_overlap(w_a: WignerGrid, w_b: WignerGrid) -> float:
    """Overlap divided by the geometric mean of the purities."""
    pa, pb = purity(w_a), purity(w_b)
    if pa <= 0 or pb <= 0:
        raise DegeneratePurityError(f"purities must be positive, got {pa}, {pb}")
    return overlap(w_a, w_b) / math.sqrt(pa * pb)


def l2_distance(w_a: WignerGrid, w_b: WignerGrid) -> float:
    _check(w_a, w_b)
    return math.sqrt(max(_integrate((w_a.values - w_b.values) ** 2, w_a), 0.0))


class FidelityConvention(str, Enum):
    """How ``r`` enters the vacuum fidelity.

    ``LINEAR`` uses ``1 / (1 + exp(-r))``, reading ``exp(-r)`` as a noise
    power ratio. ``AMPLITUDE`` treats ``exp(-r)`` as
    the standard deviation of the teleportation kernel, which gives
    ``1 / (1 + exp(-2r))``; the grid engine reproduces the latter when the
    vacuum is teleported and compared with itself.
    """

    LINEAR = "linear"
    AMPLITUDE = "amplitude"


def _convention(convention) -> FidelityConvention:
    try:
        return FidelityConvention(convention)
    except ValueError:
        raise ConfigError(f"unknown fidelity convention {convention!r}") from None


def vacuum_fidelity(r: float, convention: FidelityConvention | str = FidelityConvention.LINEAR) -> float:
    k = 1.0 if _convention(convention) is FidelityConvention.LINEAR else 2.0
    return 1.0 / (1.0 + math.exp(-k * r))


def fidelity_to_r(fidelity: float, convention: FidelityConvention | str = FidelityConvention.LINEAR) -> float:
    """Inverse of :func:`vacuum_fidelity`; ``fidelity`` must lie in (0, 1)."""
    if not 0 < fidelity < 1:
        raise ConfigError(f"fidelity must lie in (0, 1), got {fidelity}")
    k = 1.0 if _convention(convention) is FidelityConvention.LINEAR else 2.0
    return -math.log(1.0 / fidelity - 1.0) / k


@dataclass(frozen=True)
class ComparisonReport:
    overlap: float
    normalized_overlap: float
    l2_distance: float
    purity_a: float
    purity_b: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        return cls(**json.loads(text))


def compare(w_a: WignerGrid, w_b: WignerGrid) -> ComparisonReport:
    return ComparisonReport(
        overlap=overlap(w_a, w_b),
        normalized_overlap=normalized_overlap(w_a, w_b),
        l2_distance=l2_distance(w_a, w_b),
        purity_a=purity(w_a),
        purity_b=purity(w_b),
    )
