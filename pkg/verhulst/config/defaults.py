"""Built-in scenario defaults and figure presets."""

from __future__ import annotations

import math
from copy import deepcopy

STANDARD_OMEGAS = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
TABLE_FORCING = {
    "forcing.0.B1": 1.0,
    "forcing.0.omega1": 1.0,
    "forcing.1.B1": 1.0,
    "forcing.1.omega1": math.sqrt(2.0),
    "forcing.2.B1": 10.0,
    "forcing.2.omega1": 1.0,
    "forcing.3.B1": 10.0,
    "forcing.3.omega1": math.sqrt(2.0),
}

DEFAULT_THEME_COLORS = {
    "background": "#000000",
    "axes": "#00ff41",
    "series": ["#00ff41", "#ffa500", "#ff0000", "#3fa9f5"],
}


DEFAULT_SCENARIO = {
    "variant": "correlated",
    "B": 0.0,
    "N0": 5.0,
    "omega": 1.0,
    "K": 10.0,
    "C": 1.0,
    "x0": 0.1,
    "T": 1000.0,
    "dt": None,
    "method": "auto",
    "bins": 100,
    "prominence": 0.05,
    "estimator": "time",
    "eps_u": None,
    "eps_rel": 4e-3,
    "t_resolution": 0.12,
    "density_floor": 1e-12,
    "n_points": 1000,
    "T_step": 10.0,
    "tail_fraction": 0.2,
    "divergence_bound": 1e12,
    "trace_stride": 10,
    "workers": 1,
    "preset": None,
    "output_dir": "output",
    "emit_svg": False,
}


DEFAULT_PRESETS = {
    "fig1": {
        "runner": "verhulst.experiments.figures:run_traces",
        "require_bounded": True,
        "params": {"omega": [1.0, 10.0], "x0": [0.1, 5.0], "T": 50.0, "trace_stride": 10},
    },
    "fig2": {
        "runner": "verhulst.experiments.figures:run_max_x",
        "require_bounded": True,
        "params": {"omega": [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0], "x0": [0.1, 5.0]},
    },
    "fig3": {
        "runner": "verhulst.experiments.figures:run_densities",
        "require_bounded": True,
        "params": {"omega": STANDARD_OMEGAS, "x0": 0.1},
    },
    "fig4": {
        "runner": "verhulst.experiments.figures:run_densities",
        "require_bounded": True,
        "params": {"omega": STANDARD_OMEGAS, "x0": 5.0},
    },
    "fig6": {
        "runner": "verhulst.experiments.figures:run_fisher_series",
        "require_bounded": True,
        "params": {"omega": STANDARD_OMEGAS, "x0": 0.1},
    },
    "fig7": {
        "runner": "verhulst.experiments.figures:run_fisher_sweep",
        "require_bounded": True,
        "params": {"omega": STANDARD_OMEGAS, "x0": 0.1},
    },
    "fig8": {
        "runner": "verhulst.experiments.figures:run_fisher_series",
        "require_bounded": True,
        "params": {"omega": STANDARD_OMEGAS, "x0": 5.0},
    },
    "fig9": {
        "runner": "verhulst.experiments.figures:run_fisher_sweep",
        "require_bounded": True,
        "params": {"omega": STANDARD_OMEGAS, "x0": 5.0},
    },
    "fig10": {
        "runner": "verhulst.experiments.figures:run_densities",
        "require_bounded": False,
        "params": {"omega": [1.0, 10.0], "x0": 0.1, **TABLE_FORCING},
    },
    "fig11": {
        "runner": "verhulst.experiments.figures:run_densities",
        "require_bounded": True,
        "params": {"variant": "positive", "B": 0.0, "C": 1.0, "N0": [1.0, 5.0], "omega": [0.1, 1.0, 10.0], "x0": 0.1},
    },
    "fig12": {
        "runner": "verhulst.experiments.figures:run_densities",
        "require_bounded": True,
        "params": {"variant": "negative", "B": 1.0, "C": 1.0, "N0": [0.5, 1.0], "omega": [0.1, 1.0, 10.0], "x0": 0.1},
    },
    "fig13": {
        "runner": "verhulst.experiments.figures:run_traces",
        "require_bounded": False,
        "params": {"variant": "negative", "B": 1.0, "C": 1.0, "N0": [1.0, 10.0], "omega": [0.1, 10.0], "x0": 0.1, "T": 100.0},
    },
    "table1": {
        "runner": "verhulst.experiments.figures:run_means",
        "require_bounded": True,
        "params": {"omega": [1.0, 10.0], "x0": 0.1},
    },
    "table2": {
        "runner": "verhulst.experiments.figures:run_resilience",
        "require_bounded": False,
        "params": {"omega": [1.0, 10.0], "x0": 0.1, **TABLE_FORCING},
    },
}


COMMAND_RUNNERS = {
    "simulate": "verhulst.experiments.figures:run_scenarios",
    "density": "verhulst.experiments.figures:run_densities",
    "fisher": "verhulst.experiments.figures:run_fisher_series",
    "sweep": "verhulst.experiments.figures:run_fisher_sweep",
    "resilience": "verhulst.experiments.figures:run_resilience",
}


def clone_defaults():
    """Return deep copies of ``(scenario, presets, theme_colors)``."""

    return (
        deepcopy(DEFAULT_SCENARIO),
        deepcopy(DEFAULT_PRESETS),
        deepcopy(DEFAULT_THEME_COLORS),
    )


__all__ = [
    "COMMAND_RUNNERS",
    "DEFAULT_PRESETS",
    "DEFAULT_SCENARIO",
    "DEFAULT_THEME_COLORS",
    "STANDARD_OMEGAS",
    "TABLE_FORCING",
    "clone_defaults",
]
