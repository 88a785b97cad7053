"""Scenario configs, the end-to-end prediction pipeline, figures and sweeps.

A scenario is a TOML file::

    engine = "both"            # analytic | grid | both

    [input_state]
    s = 0.28
    eta = 0.80
    epsilon = 0.013

    [teleporter]
    r = 0.795                  # or "infinite"
    noise = 0.0                # optional vacuum-normalized amplitude

A broadband teleporter replaces ``r`` with a ``[teleporter.broadband]``
table; see :class:`BroadbandTeleporter`. Relative file paths are resolved
against the directory holding the config.
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from . import __version__
from . import multimode as mm
from .analytic_core import (
    InputStateParams,
    input_negativity,
    input_threshold_epsilon,
    output_negativity,
    threshold_r,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    CVTeleportError,
    NoThresholdError,
    UnknownFigureError,
)
from .metrics import vacuum_fidelity
from .noise import noisy_r, noisy_r_eff
from .phase_space import GridSpec, default_grid, input_state, origin_value, teleport

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENGINES = ("analytic", "grid", "both")
OUTPUTS = ("report", "input-wigner", "output-wigner")
MAX_SWEEP_AXES = 3
MAX_SWEEP_POINTS = 1_000_000
MAX_GRID_SWEEP_POINTS = 1_000
INFINITE = "infinite"

# short names accepted by sweep axes
AXIS_ALIASES = {
    "s": "input_state.s",
    "eta": "input_state.eta",
    "epsilon": "input_state.epsilon",
    "r": "teleporter.r",
    "noise": "teleporter.noise",
}


def _number(table: dict, key: str, where: str, default: Any = None) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"{where}.{key}: required field missing")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _check_keys(table: dict, allowed: Iterable[str], where: str) -> None:
    extra = set(table) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {sorted(extra)}")


def _resolve(path: str, base: Path) -> Path:
    p = Path(path)
    if not p.is_absolute():
        p = base / p
    if not p.is_file():
        raise ConfigError(f"referenced file not found: {p}")
    return p


@dataclass(frozen=True)
class ScalarTeleporter:
    """Single-mode teleporter: EPR parameter plus optional isotropic noise."""

    r: float
    noise: float = 0.0

    def __post_init__(self):
        if math.isnan(self.r) or self.r < 0:
            raise ConfigError(f"teleporter.r: must be >= 0 or {INFINITE!r}, got {self.r}")
        if not math.isfinite(self.noise) or self.noise < 0:
            raise ConfigError(f"teleporter.noise: must be finite and >= 0, got {self.noise}")


@dataclass(frozen=True, eq=False)
class BroadbandTeleporter:
    """Mode function, squeezing spectrum, noise spectrum and transfer function.

    TOML fields under ``[teleporter.broadband]``:

    * ``gamma`` (Lorentzian mode) or ``mode_file`` (``omega,value`` CSV)
    * ``x_pump`` and ``kappa`` (OPO spectrum) or ``spectrum_file`` (S_- samples)
    * ``noise`` (constant amplitude) or ``noise_file``; optional
    * ``transfer_file`` (``omega,re,im``); optional, enables gain moments
    * ``n_omega``, ``tail_mass``: Lorentzian grid controls
    * ``resample``: allow interpolation of files onto the mode grid
    """

    mode: mm.ModeFunction
    spectrum: mm.SqueezingSpectrum
    noise: mm.NoiseSpectrum
    transfer: mm.TransferFunction | None = None

    def r_eff(self) -> float:
        return mm.effective_epr(self.mode, self.spectrum)

    def n_eff(self) -> float:
        return mm.effective_noise(self.mode, self.noise)


TeleporterSpec = ScalarTeleporter | BroadbandTeleporter

_BROADBAND_KEYS = (
    "gamma", "mode_file", "x_pump", "kappa", "spectrum_file", "noise", "noise_file",
    "transfer_file", "n_omega", "tail_mass", "resample",
)


def _parse_broadband(table: dict, base: Path) -> BroadbandTeleporter:
    where = "teleporter.broadband"
    _check_keys(table, _BROADBAND_KEYS, where)
    resample = bool(table.get("resample", False))

    def on_grid(omega_file, values, omega, label):
        if omega_file.shape == omega.shape and np.array_equal(omega_file, omega):
            return values
        if not resample:
            raise ConfigError(f"{where}.{label}: frequency grid differs from the mode grid; set resample = true")
        return mm._interp(omega, omega_file, values)

    if ("gamma" in table) == ("mode_file" in table):
        raise ConfigError(f"{where}: give exactly one of gamma or mode_file")
    if "gamma" in table:
        gamma = _number(table, "gamma", where)
        n = int(table.get("n_omega", 8001))
        omega = mm.lorentzian_grid(gamma, n, _number(table, "tail_mass", where, 1e-7))
        mode = mm.lorentzian_mode(gamma, omega)
    else:
        omega, weights = mm.read_samples_csv(_resolve(table["mode_file"], base))
        mode = mm.ModeFunction.normalized(omega, np.real_if_close(weights), "l1")
        omega = mode.omega

    if ("spectrum_file" in table) == ("x_pump" in table):
        raise ConfigError(f"{where}: give exactly one of spectrum_file or x_pump/kappa")
    if "x_pump" in table:
        spectrum = mm.opo_squeezing_spectrum(_number(table, "x_pump", where), _number(table, "kappa", where), omega)
    else:
        om, vals = mm.read_samples_csv(_resolve(table["spectrum_file"], base))
        spectrum = mm.SqueezingSpectrum(omega, on_grid(om, np.real(vals), omega, "spectrum_file"))

    if "noise" in table and "noise_file" in table:
        raise ConfigError(f"{where}: give at most one of noise or noise_file")
    if "noise_file" in table:
        om, vals = mm.read_samples_csv(_resolve(table["noise_file"], base))
        noise = mm.NoiseSpectrum(omega, on_grid(om, np.real(vals), omega, "noise_file"))
    else:
        noise = mm.NoiseSpectrum(omega, np.full(omega.shape, _number(table, "noise", where, 0.0)))

    transfer = None
    if "transfer_file" in table:
        om, vals = mm.read_samples_csv(_resolve(table["transfer_file"], base))
        transfer = mm.TransferFunction(omega, on_grid(om, np.asarray(vals, complex), omega, "transfer_file"))
    return BroadbandTeleporter(mode, spectrum, noise, transfer)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    input_state: InputStateParams
    teleporter: ScalarTeleporter | BroadbandTeleporter
    engine: str = "analytic"
    grid: GridSpec | None = None
    outputs: tuple[str, ...] = ("report",)
    raw: dict = field(default_factory=dict, repr=False)
    base_dir: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | os.PathLike = ".") -> "ScenarioConfig":
        base = Path(base_dir)
        _check_keys(raw, ("engine", "input_state", "teleporter", "grid", "outputs"), "config")
        engine = raw.get("engine", "analytic")
        if engine not in ENGINES:
            raise ConfigError(f"engine: expected one of {ENGINES}, got {engine!r}")

        ist = raw.get("input_state")
        if not isinstance(ist, dict):
            raise ConfigError("input_state: table missing")
        _check_keys(ist, ("s", "eta", "epsilon"), "input_state")
        try:
            params = InputStateParams(
                _number(ist, "s", "input_state"),
                _number(ist, "eta", "input_state"),
                _number(ist, "epsilon", "input_state", 0.0),
            )
        except ConfigError as exc:
            raise ConfigError(f"input_state: {exc}") from None

        tel = raw.get("teleporter")
        if not isinstance(tel, dict):
            raise ConfigError("teleporter: table missing")
        _check_keys(tel, ("r", "noise", "broadband"), "teleporter")
        if ("r" in tel) == ("broadband" in tel):
            raise ConfigError("teleporter: give exactly one of r or [teleporter.broadband]")
        if "r" in tel:
            r = tel["r"]
            if r == INFINITE:
                r = math.inf
            elif isinstance(r, bool) or not isinstance(r, (int, float)):
                raise ConfigError(f"teleporter.r: expected a number or {INFINITE!r}, got {r!r}")
            teleporter = ScalarTeleporter(float(r), _number(tel, "noise", "teleporter", 0.0))
        else:
            if "noise" in tel:
                raise ConfigError("teleporter.noise: put broadband noise under [teleporter.broadband]")
            teleporter = _parse_broadband(tel["broadband"], base)

        grid = None
        if "grid" in raw:
            g = raw["grid"]
            _check_keys(g, ("n", "extent"), "grid")
            grid = GridSpec.square(_number(g, "extent", "grid", 6.0), int(g.get("n", 512)))

        outputs = tuple(raw.get("outputs", ["report"]))
        for o in outputs:
            if o not in OUTPUTS:
                raise ConfigError(f"outputs: unknown artifact {o!r}; expected some of {OUTPUTS}")
        if {"input-wigner", "output-wigner"} & set(outputs) and engine == "analytic":
            raise ConfigError("outputs: Wigner grids need engine = 'grid' or 'both'")
        return cls(params, teleporter, engine, grid, outputs, copy.deepcopy(raw), base)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ScenarioConfig":
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(raw, path.parent)

    def with_overrides(self, engine: str | None = None, grid_size: int | None = None) -> "ScenarioConfig":
        raw = copy.deepcopy(self.raw)
        if engine is not None:
            raw["engine"] = engine
        if grid_size is not None:
            raw.setdefault("grid", {})["n"] = grid_size
        return ScenarioConfig.from_dict(raw, self.base_dir)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ScenarioReport:
    input_negativity: float
    output_negativity: float
    threshold_r: float | None
    r_eff: float
    n_eff: float
    r_prime: float
    fidelity_linear: float
    fidelity_amplitude: float
    engine: str
    grid_output_negativity: float | None = None
    engine_discrepancy: float | None = None
    gain_moments: dict | None = None
    config_hash: str = ""
    version: str = __version__

    def to_dict(self) -> dict:
        out = {
            "input_negativity": self.input_negativity,
            "output_negativity": self.output_negativity,
            "threshold_r": self.threshold_r,
            "r_eff": self.r_eff,
            "n_eff": self.n_eff,
            "r_prime": self.r_prime,
            "fidelities": {"linear": self.fidelity_linear, "amplitude": self.fidelity_amplitude},
            "engine": self.engine,
        }
        if self.grid_output_negativity is not None:
            out["grid_output_negativity"] = self.grid_output_negativity
        if self.engine_discrepancy is not None:
            out["engine_discrepancy"] = self.engine_discrepancy
        if self.gain_moments is not None:
            out["gain_moments"] = self.gain_moments
        out["provenance"] = {"config_sha256": self.config_hash, "version": self.version}
        return out

    def flat(self) -> dict:
        """One-level mapping for CSV rows."""
        d = self.to_dict()
        row = {}
        for key, value in d.items():
            if isinstance(value, dict):
                for k, v in value.items():
                    row[f"{key}.{k}"] = v
            else:
                row[key] = value
        return row


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    report: ScenarioReport
    input_wigner: Any = None
    output_wigner: Any = None


def json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return INFINITE if value > 0 else repr(value)
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def to_json(data) -> str:
    return json.dumps(json_safe(data), indent=2, allow_nan=False) + "\n"


def execute(config: ScenarioConfig) -> ScenarioResult:
    """Run the scenario and keep the grids it produced."""
    params = config.input_state
    tel = config.teleporter
    gm = None
    if isinstance(tel, ScalarTeleporter):
        r_eff, n_eff = tel.r, tel.noise
        r_prime = noisy_r(r_eff, n_eff)
    else:
        r_eff, n_eff = tel.r_eff(), tel.n_eff()
        r_prime = noisy_r_eff(r_eff, n_eff)
        if tel.transfer is not None:
            moments = mm.gain_moments(tel.mode, tel.transfer, tel.spectrum, r_eff)
            gm = {
                "g_plus": [moments.g_plus.real, moments.g_plus.imag],
                "g_minus": [moments.g_minus.real, moments.g_minus.imag],
            }
    try:
        r_thr = threshold_r(params.eta, params.s, params.epsilon)
    except NoThresholdError:
        r_thr = None

    analytic = output_negativity(params, r_prime)
    grid_value = discrepancy = None
    w_in = w_out = None
    if config.engine in ("grid", "both"):
        spec = config.grid or default_grid()
        try:
            w_in = input_state(params.s, params.eta, params.epsilon, spec)
            w_out = teleport(w_in, r_prime)
        except CVTeleportError as exc:
            raise type(exc)(f"grid engine: {exc}") from exc
        grid_value = origin_value(w_out)
        if config.engine == "both":
            discrepancy = abs(grid_value - analytic)
    report = ScenarioReport(
        input_negativity=input_negativity(params),
        output_negativity=grid_value if config.engine == "grid" else analytic,
        threshold_r=r_thr,
        r_eff=r_eff,
        n_eff=n_eff,
        r_prime=r_prime,
        fidelity_linear=vacuum_fidelity(r_prime, "linear"),
        fidelity_amplitude=vacuum_fidelity(r_prime, "amplitude"),
        engine=config.engine,
        grid_output_negativity=grid_value if config.engine == "both" else None,
        engine_discrepancy=discrepancy,
        gain_moments=gm,
        config_hash=config.config_hash(),
    )
    return ScenarioResult(report, w_in, w_out)


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    return execute(config).report


BACKTEST_RAW = {
    "engine": "analytic",
    "input_state": {"s": 0.28, "eta": 0.80, "epsilon": 0.013},
    "teleporter": {"r": 0.795},
}
BACKTEST_EXPECTED = -0.0243
BACKTEST_TOL = 5e-4


def backtest(engine: str = "analytic", grid_size: int | None = None) -> dict:
    """Pinned experimental back-test plus its limiting cases."""
    raw = copy.deepcopy(BACKTEST_RAW)
    raw["engine"] = engine
    if grid_size is not None:
        raw["grid"] = {"n": grid_size}
    report = run_scenario(ScenarioConfig.from_dict(raw))
    p = ScenarioConfig.from_dict(raw).input_state
    limits = {
        "epsilon=0": output_negativity(InputStateParams(p.s, p.eta), 0.795),
        "eta=1,epsilon=0": output_negativity(InputStateParams(p.s, 1.0), 0.795),
        "r=infinite": output_negativity(p, math.inf),
        "input": input_negativity(p),
    }
    ok = abs(report.output_negativity - BACKTEST_EXPECTED) <= BACKTEST_TOL
    if report.engine_discrepancy is not None:
        ok = ok and report.engine_discrepancy <= 1e-4
    return {
        "report": report.to_dict(),
        "limits": limits,
        "expected": BACKTEST_EXPECTED,
        "tolerance": BACKTEST_TOL,
        "pass": bool(ok),
    }


# -- figures ------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    columns: tuple[str, ...]
    rows: list[tuple]
    x: str = ""
    y: str = ""
    group: tuple[str, ...] = ()

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return to_json([dict(zip(self.columns, row)) for row in self.rows])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_range(text: str) -> tuple[str, np.ndarray]:
    """``k=a:b:n`` (inclusive linspace) or ``k=v1,v2,...``."""
    if "=" not in text:
        raise ConfigError(f"range {text!r}: expected key=a:b:n or key=v1,v2")
    key, spec = text.split("=", 1)
    key = key.strip()
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            values = np.linspace(float(a), float(b), n)
        else:
            values = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise ConfigError(f"range {text!r}: malformed values") from None
    return key, values


def _thr(eta, s, eps):
    try:
        return threshold_r(float(eta), float(s), float(eps))
    except NoThresholdError:
        return None


FIGURES = {
    # name: (default axes in loop order, x axis, y column)
    "input-negativity": ({"s": [0.0, 0.28, 0.6, 1.0], "epsilon": [0.0], "eta": np.linspace(0.05, 1, 96)}, "eta", "w_in"),
    "output-negativity": ({"eta": [0.8, 1.0], "s": [0.0, 0.28, 0.6], "r": np.linspace(0, 2, 201)}, "r", "w_out"),
    "threshold": ({"eta": np.linspace(0.51, 1, 50)}, "eta", "r_threshold"),
    "mixed-input": ({"s": [0.0, 0.28, 0.6], "epsilon": [0.0, 0.013, 0.1], "eta": np.linspace(0.05, 1, 96)}, "eta", "w_in"),
    "mixed-threshold": ({"s": [0.0, 0.28, 0.6], "epsilon": [0.0, 0.013, 0.05, 0.1], "eta": np.linspace(0.51, 1, 50)}, "eta", "r_threshold"),
    "noise-ratio": ({"noise": [0.0, 0.1, 0.2, 0.3, 0.5], "r": np.linspace(0.05, 2, 40)}, "r", "ratio"),
}


def _figure_row(name: str, p: dict) -> tuple[tuple[str, ...], tuple]:
    if name in ("input-negativity", "mixed-input"):
        w = input_negativity(InputStateParams(p["s"], p["eta"], p["epsilon"]))
        if name == "input-negativity":
            return ("w_in",), (w,)
        return ("w_in", "epsilon_threshold"), (w, input_threshold_epsilon(p["eta"], p["s"]))
    if name == "output-negativity":
        return ("w_out",), (output_negativity(InputStateParams(p["s"], p["eta"]), p["r"]),)
    if name == "threshold":
        return ("r_threshold",), (_thr(p["eta"], 0.0, 0.0),)
    if name == "mixed-threshold":
        return ("r_threshold",), (_thr(p["eta"], p["s"], p["epsilon"]),)
    if name == "noise-ratio":
        rp = noisy_r(p["r"], p["noise"])
        return ("r_prime", "ratio"), (rp, rp / p["r"])
    raise UnknownFigureError(name)


def figure(name: str, ranges: dict[str, Iterable[float]] | None = None) -> Dataset:
    """Data behind one of the named figures; every value is closed-form."""
    if name not in FIGURES:
        raise UnknownFigureError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    axes, x, y = FIGURES[name]
    axes = {k: np.asarray(v, dtype=float) for k, v in axes.items()}
    for key, values in (ranges or {}).items():
        if key not in axes:
            raise ConfigError(f"figure {name}: no axis {key!r}; axes are {list(axes)}")
        axes[key] = np.asarray(values, dtype=float)
    keys = list(axes)
    rows = []
    value_cols: tuple[str, ...] = ()
    for combo in itertools.product(*(axes[k] for k in keys)):
        p = {k: float(v) for k, v in zip(keys, combo)}
        value_cols, values = _figure_row(name, p)
        rows.append(tuple(p.values()) + tuple(values))
    group = tuple(k for k in keys if k != x)
    return Dataset(tuple(keys) + value_cols, rows, x, y, group)


def render_svg(data: Dataset, path: str | os.PathLike, title: str = "") -> None:
    """Line plot of ``data.y`` against ``data.x``, one line per group."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xi, yi = data.columns.index(data.x), data.columns.index(data.y)
    gi = [data.columns.index(g) for g in data.group]
    lines: dict[tuple, list] = {}
    for row in data.rows:
        if row[yi] is None:
            continue
        lines.setdefault(tuple(row[i] for i in gi), []).append((row[xi], row[yi]))
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for key, pts in lines.items():
        label = ", ".join(f"{g}={v:g}" for g, v in zip(data.group, key))
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=label or None)
    ax.axhline(0.0, color="0.6", lw=0.5)
    ax.set_xlabel(data.x)
    ax.set_ylabel(data.y)
    if title:
        ax.set_title(title)
    if data.group:
        ax.legend(fontsize=6)
    fig.tight_layout()
    # fixed hash salt and no date keep the SVG byte-stable
    with plt.rc_context({"svg.hashsalt": "cvteleport"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# -- sweeps -------------------------------------------------------------------


def _set_path(raw: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = raw
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"sweep axis {dotted!r}: {part} is not a table")
    node[parts[-1]] = value


def sweep_points(axes: dict[str, Iterable[float]], engine: str) -> int:
    if not axes:
        raise ConfigError("sweep: at least one axis required")
    if len(axes) > MAX_SWEEP_AXES:
        raise BudgetExceededError(f"sweep: at most {MAX_SWEEP_AXES} axes, got {len(axes)}")
    total = math.prod(len(list(v)) for v in axes.values())
    limit = MAX_GRID_SWEEP_POINTS if engine in ("grid", "both") else MAX_SWEEP_POINTS
    if total > limit:
        raise BudgetExceededError(f"sweep: {total} points exceeds the {engine} budget of {limit}")
    return total


def sweep(
    template: ScenarioConfig, axes: dict[str, Iterable[float]], workers: int = 1
) -> Iterator[dict]:
    """Cartesian-product scenario runs in deterministic (row-major) order.

    Axis keys are dotted config paths or the short names in ``AXIS_ALIASES``.
    Rows are yielded lazily; with ``workers > 1`` evaluation fans out to a
    process pool but the order is preserved.
    """
    axes = {AXIS_ALIASES.get(k, k): [float(v) for v in vals] for k, vals in axes.items()}
    sweep_points(axes, template.engine)
    keys = list(axes)
    combos = itertools.product(*(axes[k] for k in keys))
    jobs = ((template.raw, str(template.base_dir), keys, combo) for combo in combos)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            yield from pool.map(_sweep_one, jobs, chunksize=64)
    else:
        yield from map(_sweep_one, jobs)


def _sweep_one(job) -> dict:
    raw, base, keys, combo = job
    raw = copy.deepcopy(raw)
    for k, v in zip(keys, combo):
        _set_path(raw, k, v)
    report = run_scenario(ScenarioConfig.from_dict(raw, base))
    row = dict(zip(keys, combo))
    row.update(report.flat())
    return row
