"""
Back-test, figures and sweeps
=============================

The scenario layer behind the ``cvt`` command.
"""

from pathlib import Path

import numpy as np

from cvteleport.scenario import ScenarioConfig, backtest, figure, render_svg, run_scenario, sweep

result = backtest("both")
print("W_out(0,0) =", result["report"]["output_negativity"], " pass:", result["pass"])

configs = Path(__file__).resolve().parents[1] / "configs"
for path in sorted(configs.glob("*.toml")):
    rep = run_scenario(ScenarioConfig.from_file(path))
    print(f"{path.name:<28} r' = {rep.r_prime:<8.4g} W_out(0,0) = {rep.output_negativity:+.5f}")

data = figure("output-negativity", {"eta": [0.7, 0.9], "s": [0.0, 0.3, 0.8]})
render_svg(data, "output_negativity.svg", "output negativity")
Path("output_negativity.csv").write_text(data.to_csv())

template = ScenarioConfig.from_file(configs / "backtest.toml").with_overrides(engine="analytic")
rows = list(sweep(template, {"eta": np.linspace(0.6, 1, 5), "noise": [0.0, 0.2]}))
for row in rows:
    print(row["input_state.eta"], row["teleporter.noise"], round(row["output_negativity"], 5))
