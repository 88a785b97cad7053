import json
import math
from pathlib import Path

import numpy as np
import pytest

from cvteleport.analytic_core import InputStateParams, input_negativity, output_negativity, threshold_r
from cvteleport.errors import BudgetExceededError, ConfigError, GridSpanError, UnknownFigureError
from cvteleport.noise import noisy_r
from cvteleport.scenario import (
    FIGURES,
    ScenarioConfig,
    backtest,
    figure,
    parse_range,
    render_svg,
    run_scenario,
    sweep,
)

CONFIGS = sorted((Path(__file__).parents[1] / "configs").glob("*.toml"))


def cfg(**kw):
    raw = {
        "engine": kw.pop("engine", "analytic"),
        "input_state": {"s": 0.28, "eta": 0.8, "epsilon": 0.013},
        "teleporter": {"r": 0.795},
    }
    raw["input_state"].update({k: v for k, v in kw.items() if k in ("s", "eta", "epsilon")})
    raw["teleporter"].update({k: v for k, v in kw.items() if k in ("r", "noise")})
    return ScenarioConfig.from_dict(raw)


class TestRunScenario:
    def test_backtest(self):
        assert run_scenario(cfg()).output_negativity == pytest.approx(-0.0243, abs=5e-4)

    def test_no_mixing(self):
        assert run_scenario(cfg(epsilon=0.0)).output_negativity == pytest.approx(-0.0275, abs=5e-5)

    def test_identity(self):
        rep = run_scenario(cfg(eta=1.0, epsilon=0.0, r="infinite"))
        assert rep.output_negativity == pytest.approx(-1 / math.pi, abs=1e-15)
        assert rep.output_negativity == rep.input_negativity

    def test_noise(self):
        rep = run_scenario(cfg(noise=0.2))
        assert rep.r_prime == noisy_r(0.795, 0.2)
        assert rep.output_negativity > run_scenario(cfg()).output_negativity

    def test_no_threshold_reported_as_none(self):
        assert run_scenario(cfg(eta=0.4)).threshold_r is None

    def test_engine_discrepancy_only_for_both(self):
        assert run_scenario(cfg()).engine_discrepancy is None
        assert "engine_discrepancy" not in run_scenario(cfg()).to_dict()
        rep = run_scenario(cfg(engine="both"))
        assert rep.engine_discrepancy <= 1e-4
        rep = run_scenario(cfg(engine="grid"))
        assert rep.engine_discrepancy is None
        assert rep.output_negativity == pytest.approx(-0.024345789547, abs=1e-4)

    def test_provenance(self):
        a, b = run_scenario(cfg()), run_scenario(cfg())
        assert a.config_hash == b.config_hash and len(a.config_hash) == 64
        assert run_scenario(cfg(s=0.3)).config_hash != a.config_hash


class TestConfigValidation:
    @pytest.mark.parametrize(
        "mutate,field",
        [
            (lambda r: r["input_state"].update(eta=1.5), "input_state"),
            (lambda r: r["input_state"].pop("s"), "input_state.s"),
            (lambda r: r["teleporter"].update(r=-0.1), "teleporter.r"),
            (lambda r: r["teleporter"].update(r="big"), "teleporter.r"),
            (lambda r: r.update(engine="fast"), "engine"),
            (lambda r: r.update(colour="red"), "config"),
            (lambda r: r["teleporter"].update(broadband={"gamma": 1.0, "x_pump": 0.2, "kappa": 1.0}), "teleporter"),
            (lambda r: r.update(outputs=["output-wigner"]), "outputs"),
        ],
    )
    def test_field_level_messages(self, mutate, field):
        raw = {"input_state": {"s": 0.28, "eta": 0.8}, "teleporter": {"r": 0.5}}
        mutate(raw)
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            ScenarioConfig.from_dict(raw)

    def test_missing_file_at_parse_time(self, tmp_path):
        raw = {
            "input_state": {"s": 0.28, "eta": 0.8},
            "teleporter": {"broadband": {"gamma": 1.0, "spectrum_file": "nope.csv"}},
        }
        with pytest.raises(ConfigError, match="not found"):
            ScenarioConfig.from_dict(raw, tmp_path)

    def test_resampling_is_explicit(self, tmp_path):
        (tmp_path / "s.csv").write_text("omega,value\n-1e7,1.0\n0,0.5\n1e7,1.0\n")
        raw = {
            "input_state": {"s": 0.28, "eta": 0.8},
            "teleporter": {"broadband": {"gamma": 1.0, "spectrum_file": "s.csv"}},
        }
        with pytest.raises(ConfigError, match="resample"):
            ScenarioConfig.from_dict(raw, tmp_path)
        raw["teleporter"]["broadband"]["resample"] = True
        assert ScenarioConfig.from_dict(raw, tmp_path).teleporter.r_eff() > 0

    def test_narrow_mode_grid(self):
        raw = {
            "input_state": {"s": 0.28, "eta": 0.8},
            "teleporter": {"broadband": {"gamma": 1.0, "x_pump": 0.3, "kappa": 1.0, "tail_mass": 0.01}},
        }
        with pytest.raises(GridSpanError):
            ScenarioConfig.from_dict(raw)

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "x.toml"
        path.write_text("engine = \n")
        with pytest.raises(ConfigError):
            ScenarioConfig.from_file(path)


@pytest.mark.parametrize("path", CONFIGS, ids=[p.name for p in CONFIGS])
def test_shipped_configs(path):
    config = ScenarioConfig.from_file(path)
    rep = run_scenario(config)
    assert config.engine == "both"
    assert rep.engine_discrepancy <= 1e-4


def test_broadband_matches_scalar_reduction():
    raw = {
        "input_state": {"s": 0.28, "eta": 0.8, "epsilon": 0.013},
        "teleporter": {"broadband": {"gamma": 1.0, "x_pump": 0.4, "kappa": 2.0, "noise": 0.1}},
    }
    rep = run_scenario(ScenarioConfig.from_dict(raw))
    assert rep.r_eff == pytest.approx(0.9200572146696321, abs=1e-6)
    assert rep.n_eff == pytest.approx(0.1, abs=1e-12)
    assert rep.output_negativity == pytest.approx(
        output_negativity(InputStateParams(0.28, 0.8, 0.013), noisy_r(rep.r_eff, 0.1)), abs=1e-15
    )


def test_backtest_payload():
    result = backtest()
    assert result["pass"]
    assert result["limits"]["epsilon=0"] == pytest.approx(-0.0275, abs=5e-5)
    assert result["limits"]["r=infinite"] == result["limits"]["input"]


class TestFigures:
    def test_unknown(self):
        with pytest.raises(UnknownFigureError):
            figure("wigner-3d")

    def test_bad_axis(self):
        with pytest.raises(ConfigError):
            figure("threshold", {"r": [1.0]})

    def test_input_crossing(self):
        d = figure("input-negativity", {"eta": np.linspace(0.3, 1, 71), "s": [0, 0.28, 0.6]})
        eta, s, w = d.column("eta"), d.column("s"), d.column("w_in")
        for sv in (0, 0.28, 0.6):
            m = s == sv
            assert np.all(w[m & (eta < 0.5 - 1e-9)] > 0)
            assert np.all(w[m & (eta > 0.5 + 1e-9)] < 0)
            assert abs(w[m & np.isclose(eta, 0.5)][0]) < 1e-15

    def test_threshold_endpoint(self):
        d = figure("threshold")
        assert d.rows[-1] == (1.0, pytest.approx(0.5 * math.log(2), abs=1e-15))

    def test_mixed_threshold_none_when_impossible(self):
        d = figure("mixed-threshold", {"eta": [0.5], "s": [0.3], "epsilon": [0.1]})
        assert d.rows[0][-1] is None
        assert d.to_csv().splitlines()[1].endswith(",")

    @pytest.mark.parametrize("name", sorted(FIGURES))
    def test_deterministic(self, name):
        assert figure(name).to_csv() == figure(name).to_csv()

    def test_svg(self, tmp_path):
        d = figure("output-negativity")
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_svg(d, a)
        render_svg(d, b)
        assert a.read_text().startswith("<?xml")
        assert a.read_bytes() == b.read_bytes()


class TestParseRange:
    def test_linspace(self):
        k, v = parse_range("eta=0.5:1:6")
        assert k == "eta" and np.allclose(v, [0.5, 0.6, 0.7, 0.8, 0.9, 1.0])

    def test_list(self):
        assert parse_range("s=0,0.28")[1].tolist() == [0.0, 0.28]

    @pytest.mark.parametrize("text", ["eta", "eta=1:2", "eta=a,b", "eta=0:1:0"])
    def test_bad(self, text):
        with pytest.raises(ConfigError):
            parse_range(text)


class TestSweep:
    def test_single_point_equals_run(self):
        rows = list(sweep(cfg(), {"eta": [0.8]}))
        assert len(rows) == 1
        assert rows[0]["output_negativity"] == run_scenario(cfg()).output_negativity

    def test_threshold_sweep_matches_figure(self):
        etas = np.linspace(0.51, 1, 50)
        rows = list(sweep(cfg(epsilon=0.0), {"eta": etas}))
        fig = figure("threshold", {"eta": etas})
        assert [r["threshold_r"] for r in rows] == [row[1] for row in fig.rows]

    def test_order_and_determinism(self):
        axes = {"eta": [0.6, 0.9], "r": [0.1, 0.5, 1.0]}
        rows = list(sweep(cfg(), axes))
        assert [(r["input_state.eta"], r["teleporter.r"]) for r in rows] == [
            (e, r) for e in (0.6, 0.9) for r in (0.1, 0.5, 1.0)
        ]
        assert json.dumps(rows) == json.dumps(list(sweep(cfg(), axes)))

    def test_parallel_preserves_order(self):
        axes = {"eta": np.linspace(0.6, 1, 5), "r": np.linspace(0, 2, 40)}
        assert list(sweep(cfg(), axes, workers=2)) == list(sweep(cfg(), axes))

    def test_budgets(self):
        with pytest.raises(BudgetExceededError):
            list(sweep(cfg(), {"eta": [0.8], "s": [0.1], "r": [0.1], "noise": [0.0]}))
        with pytest.raises(BudgetExceededError):
            list(sweep(cfg(), {"eta": np.linspace(0.6, 1, 101), "s": np.linspace(0, 1, 100), "r": np.linspace(0, 2, 101)}))
        with pytest.raises(BudgetExceededError):
            list(sweep(cfg(engine="grid"), {"eta": np.linspace(0.6, 1, 11), "r": np.linspace(0, 2, 100)}))

    def test_lattice_runtime(self):
        # 20^3 analytic lattice; measured ~1 s at build time
        import time

        grid = np.linspace(0.05, 1, 20)
        t0 = time.perf_counter()
        rows = list(sweep(cfg(), {"eta": grid, "epsilon": np.linspace(0, 1, 20), "r": np.linspace(0, 3, 20)}))
        assert len(rows) == 8000
        assert time.perf_counter() - t0 < 20
