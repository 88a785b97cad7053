"""Discretized single-mode Wigner functions and Gaussian channels.

Grids are sampled on ``x_min + i * dx`` for ``i = 0 .. n_x - 1`` with
``dx = (x_max - x_min) / n_x`` (the upper edge is excluded, as for a
periodic FFT grid). On a symmetric window with an even number of points the
origin is a grid node.

Convolutions are spectral: the input is zero-padded to twice its size per
axis and multiplied by the analytic Gaussian transfer function, so a
Gaussian sampled on the grid convolves to a Gaussian to round-off accuracy.
"""

from __future__ import annotations

import io
import logging
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage, special
from scipy.interpolate import RectBivariateSpline

from .errors import (
    AliasingError,
    ConfigError,
    DomainError,
    DomainTooSmallError,
    GridMismatchError,
    InvalidParameterError,
    StabilityError,
)

logger = logging.getLogger(__name__)

DEFAULT_EXTENT = 6.0
DEFAULT_POINTS = 512
CLIP_TOL = 1e-3
WRAP_TOL = 1e-6
# cubic spline; bilinear leaves ~1e-4 origin bias after a subsequent convolution
RESAMPLE_ORDER = 3


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    """Rectangular phase-space window and sample counts."""

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    n_x: int
    n_p: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ConfigError(f"empty phase-space window: {self}")
        for n in (self.n_x, self.n_p):
            if int(n) != n or n < 64 or not _is_pow2(int(n)):
                raise ConfigError(f"sample counts must be powers of two >= 64, got {n}")

    @classmethod
    def square(cls, extent: float = DEFAULT_EXTENT, n: int = DEFAULT_POINTS) -> "GridSpec":
        return cls(-extent, extent, -extent, extent, n, n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.n_p

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_x)

    @property
    def p(self) -> np.ndarray:
        return self.p_min + self.dp * np.arange(self.n_p)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_p)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.p, indexing="ij")


def default_grid(n: int | None = None, extent: float = DEFAULT_EXTENT) -> GridSpec:
    """Default ``[-6, 6]^2`` window; ``CVT_DEFAULT_GRID`` overrides the point count."""
    if n is None:
        env = os.environ.get("CVT_DEFAULT_GRID")
        try:
            n = int(env) if env else DEFAULT_POINTS
        except ValueError:
            raise ConfigError(f"CVT_DEFAULT_GRID must be an integer, got {env!r}") from None
    return GridSpec.square(extent, n)


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Real Wigner function sampled on a :class:`GridSpec`.

    ``values[i, j]`` is ``W(x[i], p[j])``.
    """

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise GridMismatchError(
                f"values shape {values.shape} does not match grid {self.spec.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Wigner values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.spec.x

    @property
    def p(self) -> np.ndarray:
        return self.spec.p

    def integral(self) -> float:
        return float(self.values.sum() * self.spec.dx * self.spec.dp)

    def marginal_x(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.spec.dp

    def marginal_p(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.spec.dx

    def moments(self) -> dict[str, float]:
        """Second moments ``<x^2>`` and ``<p^2>`` (Riemann sums)."""
        return {
            "x2": float(np.sum(self.marginal_x() * self.x**2) * self.spec.dx),
            "p2": float(np.sum(self.marginal_p() * self.p**2) * self.spec.dp),
        }

    # -- serialization ----------------------------------------------------

    def to_csv(self, path: str | os.PathLike | None = None) -> str:
        """Write ``x,p,w`` rows (x-major). Returns the text."""
        xx, pp = self.spec.mesh()
        buf = io.StringIO()
        buf.write("x,p,w\n")
        for x, p, w in zip(xx.ravel(), pp.ravel(), self.values.ravel()):
            buf.write(f"{float(x)!r},{float(p)!r},{float(w)!r}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | os.PathLike) -> "WignerGrid":
        data = np.loadtxt(source, delimiter=",", skiprows=1, ndmin=2)
        xs = np.unique(data[:, 0])
        ps = np.unique(data[:, 1])
        nx, np_ = len(xs), len(ps)
        if nx * np_ != len(data):
            raise ConfigError("CSV rows do not form a full rectangular grid")
        dx = (xs[-1] - xs[0]) / (nx - 1)
        dp = (ps[-1] - ps[0]) / (np_ - 1)
        spec = GridSpec(xs[0], xs[0] + nx * dx, ps[0], ps[0] + np_ * dp, nx, np_)
        order = np.lexsort((data[:, 1], data[:, 0]))
        return cls(spec, data[order, 2].reshape(nx, np_))

    def to_bytes(self) -> bytes:
        """Little-endian layout: (min, max, count) for x then p, then row-major values."""
        s = self.spec
        header = struct.pack("<6d", s.x_min, s.x_max, s.n_x, s.p_min, s.p_max, s.n_p)
        return header + self.values.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, blob: bytes) -> "WignerGrid":
        x_min, x_max, n_x, p_min, p_max, n_p = struct.unpack_from("<6d", blob, 0)
        spec = GridSpec(x_min, x_max, p_min, p_max, int(n_x), int(n_p))
        values = np.frombuffer(blob, dtype="<f8", offset=48)
        if values.size != spec.n_x * spec.n_p:
            raise ConfigError("binary payload size does not match its header")
        return cls(spec, values.reshape(spec.shape).astype(float))

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "WignerGrid":
        return cls.from_bytes(Path(path).read_bytes())


def _check_compatible(a: WignerGrid, b: WignerGrid) -> None:
    if a.spec != b.spec:
        raise GridMismatchError(f"incompatible grids: {a.spec} vs {b.spec}")


def _checked_state(spec: GridSpec, values: np.ndarray, label: str) -> WignerGrid:
    w = WignerGrid(spec, values)
    clipped = abs(1.0 - w.integral())
    if clipped > CLIP_TOL:
        raise DomainTooSmallError(
            f"{label}: grid captures only {w.integral():.6f} of the probability mass"
        )
    return w


# -- states ---------------------------------------------------------------


def _squeezed_coords(s: float, spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    if s < 0:
        raise InvalidParameterError(f"s must be >= 0, got {s}")
    xx, pp = spec.mesh()
    return math.exp(s) * xx, math.exp(-s) * pp


def wigner_reference(s: float, spec: GridSpec | None = None) -> WignerGrid:
    """Squeezed single photon."""
    spec = spec or default_grid()
    u, v = _squeezed_coords(s, spec)
    r2 = u * u + v * v
    values = 2.0 * (r2 - 0.5) * np.exp(-r2) / np.pi
    return _checked_state(spec, values, f"wigner_reference(s={s})")


def wigner_squeezed_vacuum(s: float, spec: GridSpec | None = None) -> WignerGrid:
    spec = spec or default_grid()
    u, v = _squeezed_coords(s, spec)
    values = np.exp(-(u * u + v * v)) / np.pi
    return _checked_state(spec, values, f"wigner_squeezed_vacuum(s={s})")


def wigner_vacuum(spec: GridSpec | None = None) -> WignerGrid:
    return wigner_squeezed_vacuum(0.0, spec)


def wigner_gaussian(sigma_x: float, sigma_p: float, spec: GridSpec | None = None) -> WignerGrid:
    """Centered normalized Gaussian with the given per-axis standard deviations.

    Not necessarily a physical state; used as a test fixture.
    """
    spec = spec or default_grid()
    xx, pp = spec.mesh()
    values = np.exp(-0.5 * ((xx / sigma_x) ** 2 + (pp / sigma_p) ** 2)) / (
        2.0 * np.pi * sigma_x * sigma_p
    )
    return WignerGrid(spec, values)


# -- Gaussian convolution ---------------------------------------------------


def _pad(values: np.ndarray) -> np.ndarray:
    """Embed in a zero array twice as large, centered."""
    nx, np_ = values.shape
    out = np.zeros((2 * nx, 2 * np_))
    out[nx // 2 : nx // 2 + nx, np_ // 2 : np_ // 2 + np_] = values
    return out


def _crop(values: np.ndarray) -> np.ndarray:
    nx, np_ = values.shape[0] // 2, values.shape[1] // 2
    return values[nx // 2 : nx // 2 + nx, np_ // 2 : np_ // 2 + np_]


def _wrap_mass(values: np.ndarray, spec: GridSpec, sigma_x: float, sigma_p: float) -> float:
    # content must travel farther than the padding width to wrap back in
    l1 = np.abs(values).sum() * spec.dx * spec.dp
    tail = 0.0
    for sig, width in ((sigma_x, spec.x_max - spec.x_min), (sigma_p, spec.p_max - spec.p_min)):
        if sig > 0:
            tail += special.erfc(width / (sig * math.sqrt(2.0)))
    return float(l1 * tail)


def _convolve_padded(padded: np.ndarray, spec: GridSpec, sigma_x: float, sigma_p: float) -> np.ndarray:
    kx = 2.0 * np.pi * np.fft.fftfreq(padded.shape[0], spec.dx)
    kp = 2.0 * np.pi * np.fft.rfftfreq(padded.shape[1], spec.dp)
    transfer = np.exp(-0.5 * (sigma_x**2 * kx[:, None] ** 2 + sigma_p**2 * kp[None, :] ** 2))
    return np.fft.irfft2(np.fft.rfft2(padded) * transfer, s=padded.shape)


def _convolve_values(w: WignerGrid, sigma_x: float, sigma_p: float) -> np.ndarray:
    wrap = _wrap_mass(w.values, w.spec, sigma_x, sigma_p)
    if wrap > WRAP_TOL:
        raise AliasingError(f"wrap-around mass {wrap:.2e} exceeds {WRAP_TOL:.0e}")
    padded = _convolve_padded(_pad(w.values), w.spec, sigma_x, sigma_p)
    if logger.isEnabledFor(logging.DEBUG):
        inside = _crop(padded).sum() * w.spec.dx * w.spec.dp
        total = padded.sum() * w.spec.dx * w.spec.dp
        logger.debug("convolution pushed %.3e of mass outside the window", total - inside)
    return _crop(padded)


def convolve_gaussian(w: WignerGrid, sigma: float) -> WignerGrid:
    """``W o G_sigma``: isotropic Gaussian convolution."""
    return convolve_anisotropic(w, sigma, sigma)


def convolve_anisotropic(w: WignerGrid, sigma_x: float, sigma_p: float) -> WignerGrid:
    if sigma_x < 0 or sigma_p < 0 or math.isnan(sigma_x) or math.isnan(sigma_p):
        raise InvalidParameterError("kernel widths must be >= 0")
    if sigma_x == 0 and sigma_p == 0:
        return w
    return WignerGrid(w.spec, _convolve_values(w, sigma_x, sigma_p))


def teleport(w: WignerGrid, r: float) -> WignerGrid:
    """Unity-gain teleportation; ``r = inf`` is the identity."""
    if math.isnan(r) or r == -math.inf:
        raise InvalidParameterError(f"invalid EPR parameter {r!r}")
    return convolve_gaussian(w, math.exp(-r))


def apply_loss(w: WignerGrid, eta: float) -> WignerGrid:
    """Beam splitter of transmission ``eta`` with vacuum in the other port.

    Convolution with ``G_lambda``, ``lambda = sqrt((1-eta)/(2 eta))``,
    followed by the contraction ``(x, p) -> (x, p) / sqrt(eta)`` with a
    ``1/eta`` Jacobian. The contraction is the only non-convolution map in the
    engine; it is done by cubic spline resampling on the padded array and the
    result is rescaled so that resampling does not change the total mass.
    """
    if not 0 < eta <= 1:
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
    if eta == 1:
        return w
    lam = math.sqrt((1.0 - eta) / (2.0 * eta))
    spec = w.spec
    wrap = _wrap_mass(w.values, spec, lam, lam)
    if wrap > WRAP_TOL:
        raise AliasingError(f"wrap-around mass {wrap:.2e} exceeds {WRAP_TOL:.0e}")
    conv = _convolve_padded(_pad(w.values), spec, lam, lam)

    # padded sample coordinates
    nx, np_ = spec.shape
    x0 = spec.x_min - (nx // 2) * spec.dx
    p0 = spec.p_min - (np_ // 2) * spec.dp
    xs = x0 + spec.dx * np.arange(2 * nx)
    ps = p0 + spec.dp * np.arange(2 * np_)
    scale = 1.0 / math.sqrt(eta)
    ix = (xs * scale - x0) / spec.dx
    ip = (ps * scale - p0) / spec.dp
    coords = np.meshgrid(ix, ip, indexing="ij")
    resampled = ndimage.map_coordinates(conv, coords, order=RESAMPLE_ORDER, mode="constant", cval=0.0) / eta

    mass_before = conv.sum()
    mass_after = resampled.sum()
    if mass_after != 0:
        resampled *= mass_before / mass_after
    return WignerGrid(spec, _crop(resampled))


def mix(w_a: WignerGrid, w_b: WignerGrid, epsilon: float) -> WignerGrid:
    """``(1 - epsilon) w_a + epsilon w_b``."""
    _check_compatible(w_a, w_b)
    if not 0 <= epsilon <= 1:
        raise InvalidParameterError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon == 0:
        return w_a
    if epsilon == 1:
        return w_b
    return WignerGrid(w_a.spec, (1.0 - epsilon) * w_a.values + epsilon * w_b.values)


def input_state(s: float, eta: float, epsilon: float, spec: GridSpec | None = None) -> WignerGrid:
    """Lossy, false-herald-mixed squeezed photon on the grid."""
    spec = spec or default_grid()
    mixed = mix(wigner_reference(s, spec), wigner_squeezed_vacuum(s, spec), epsilon)
    return apply_loss(mixed, eta)


def value_at(w: WignerGrid, x: float, p: float) -> float:
    """Bicubic interpolation of ``W(x, p)`` from a local stencil."""
    spec = w.spec
    fx = (x - spec.x_min) / spec.dx
    fp = (p - spec.p_min) / spec.dp
    if not (0 <= fx <= spec.n_x - 1 and 0 <= fp <= spec.n_p - 1):
        raise DomainError(f"({x}, {p}) lies outside the sampled window")
    half = 4
    i0 = int(np.clip(math.floor(fx) - half + 1, 0, spec.n_x - 2 * half))
    j0 = int(np.clip(math.floor(fp) - half + 1, 0, spec.n_p - 2 * half))
    xs = spec.x[i0 : i0 + 2 * half]
    ps = spec.p[j0 : j0 + 2 * half]
    patch = w.values[i0 : i0 + 2 * half, j0 : j0 + 2 * half]
    spline = RectBivariateSpline(xs, ps, patch, kx=3, ky=3, s=0)
    return float(spline(x, p, grid=False))


def origin_value(w: WignerGrid) -> float:
    return value_at(w, 0.0, 0.0)


# -- diffusion --------------------------------------------------------------


def diffusion_steps(spec: GridSpec, kappa: float, t: float) -> int:
    """Smallest step count satisfying the explicit stability bound."""
    bound = 0.25 * min(spec.dx, spec.dp) ** 2
    return max(1, math.ceil(kappa * t / bound - 1e-12))


def evolve_diffusion(w: WignerGrid, kappa: float, t: float, steps: int) -> WignerGrid:
    """Integrate ``dW/dt = kappa * (d2/dx2 + d2/dp2) W`` with forward Euler.

    Central differences with zero (far-field) boundary values. The result
    approximates ``convolve_gaussian(w, sqrt(2 kappa t))``.

    Raises:
        StabilityError: if ``kappa * t / steps`` exceeds ``0.25 * min(dx, dp)**2``.
    """
    if kappa < 0 or t < 0:
        raise InvalidParameterError("kappa and t must be non-negative")
    if t == 0 or kappa == 0:
        return w
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    spec = w.spec
    dt = t / steps
    bound = 0.25 * min(spec.dx, spec.dp) ** 2
    if kappa * dt > bound * (1 + 1e-12):
        raise StabilityError(
            f"kappa*dt = {kappa * dt:.3e} exceeds the bound {bound:.3e}; "
            f"use at least {diffusion_steps(spec, kappa, t)} steps"
        )
    cx = kappa * dt / spec.dx**2
    cp = kappa * dt / spec.dp**2
    u = np.zeros((spec.n_x + 2, spec.n_p + 2))
    u[1:-1, 1:-1] = w.values
    inner = u[1:-1, 1:-1]
    for _ in range(steps):
        lap_x = u[2:, 1:-1] + u[:-2, 1:-1] - 2.0 * inner
        lap_p = u[1:-1, 2:] + u[1:-1, :-2] - 2.0 * inner
        inner += cx * lap_x + cp * lap_p
    return WignerGrid(spec, inner.copy())


# -- characteristic function ----------------------------------------------


@dataclass(frozen=True, eq=False)
class CharacteristicGrid:
    """Symmetrically ordered characteristic function on the conjugate grid.

    ``values[k, l] = chi(u[k], v[l])`` with
    ``W(x, p) = (1 / 4 pi^2) iint chi(u, v) exp(i v x - i u p) du dv``, so
    ``v`` is conjugate to ``x`` and ``u`` to ``p``. Both axes are in
    ascending (fft-shifted) order. ``wigner_spec`` records the phase-space
    grid needed for the inverse transform.
    """

    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    wigner_spec: GridSpec

    def at_origin(self) -> complex:
        return complex(self.values[len(self.u) // 2, len(self.v) // 2])


def _phase_factors(spec: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    kx = 2.0 * np.pi * np.fft.fftfreq(spec.n_x, spec.dx)
    kp = 2.0 * np.pi * np.fft.fftfreq(spec.n_p, spec.dp)
    return kx, kp, np.exp(-1j * kx * spec.x_min), np.exp(-1j * kp * spec.p_min)


def to_characteristic(w: WignerGrid) -> CharacteristicGrid:
    spec = w.spec
    kx, kp, phx, php = _phase_factors(spec)
    # F(kx, kp) = iint W exp(-i (kx x + kp p)); chi(u, v) = F(v, -u)
    F = spec.dx * spec.dp * phx[:, None] * php[None, :] * np.fft.fft2(w.values)
    neg = (-np.arange(spec.n_p)) % spec.n_p
    chi = F[:, neg].T
    return CharacteristicGrid(
        u=np.fft.fftshift(kp), v=np.fft.fftshift(kx), values=np.fft.fftshift(chi), wigner_spec=spec
    )


def from_characteristic(chi: CharacteristicGrid) -> WignerGrid:
    spec = chi.wigner_spec
    _, _, phx, php = _phase_factors(spec)
    neg = (-np.arange(spec.n_p)) % spec.n_p
    F = np.fft.ifftshift(chi.values).T[:, neg]
    values = np.fft.ifft2(F / (spec.dx * spec.dp * phx[:, None] * php[None, :]))
    return WignerGrid(spec, values.real)


def apply_quadrature_noise_factor(chi: CharacteristicGrid, gamma: float, axis: str) -> CharacteristicGrid:
    """Multiply by ``exp(-gamma^2 u^2 / 2)`` (``axis='u'``) or the ``v`` analogue.

    With the Fourier convention above, the ``u`` factor adds Gaussian noise of
    variance ``gamma**2`` to ``p`` and the ``v`` factor adds it to ``x``.
    """
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be >= 0, got {gamma}")
    if axis == "u":
        factor = np.exp(-0.5 * gamma**2 * chi.u**2)[:, None]
    elif axis == "v":
        factor = np.exp(-0.5 * gamma**2 * chi.v**2)[None, :]
    else:
        raise ConfigError(f"axis must be 'u' or 'v', got {axis!r}")
    return CharacteristicGrid(chi.u, chi.v, chi.values * factor, chi.wigner_spec)
