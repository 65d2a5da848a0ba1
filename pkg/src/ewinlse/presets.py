"""Built-in experiment presets.

Each preset is a complete run configuration (same schema as a config file).
The convergence presets sweep the time step at fixed mesh against a
small-step reference; `fig1*` are the 1D inverse-power studies, `fig2*` the
2D Coulomb/random-potential studies, `fig3*` the 3D Fourier-rule studies at
desk scale (the full-resolution 3D reference, 512^3, is not desk-feasible;
the scaled preset keeps the same coefficient rules on a smaller box -- rates,
not constants, are the quantity under test).  `fig4` is the four-center
dynamics demonstration and `strichartz-1d` the space-time norm probe.

Seeds default to a fixed value so random potentials are reproducible; every
run records its seed in the report manifest.
"""

from __future__ import annotations

import copy

__all__ = ["PRESETS", "preset_names", "get_preset", "DEFAULT_SEED"]

DEFAULT_SEED = 12345

_CONV_1D = {
    "experiment": "convergence",
    "grid": {"d": 1, "bounds": [[-16.0, 16.0]], "n": [16384]},
    "initial": {"kind": "gaussian", "width": 1.0},
    "scheme": {
        "t_final": 1.0,
        "beta": 1.0,
        "sigma": 1.0,
        "filter": "smooth",
        "tau_list": [0.1 * 2.0 ** -k for k in range(7)],
        "tau_ref": 1.0e-6,
    },
    "io": {"seed": DEFAULT_SEED},
}

PRESETS: dict[str, dict] = {}

PRESETS["fig1a"] = copy.deepcopy(_CONV_1D)
PRESETS["fig1a"]["potential"] = {
    "kind": "inverse_power", "alpha": 0.51, "centers": [[0.0]], "charges": [-1.0],
}

PRESETS["fig1b"] = copy.deepcopy(_CONV_1D)
PRESETS["fig1b"]["potential"] = {
    "kind": "inverse_power", "alpha": 0.76, "centers": [[0.0]], "charges": [-1.0],
}

_CONV_2D = {
    "experiment": "convergence",
    "grid": {"d": 2, "bounds": [[-8.0, 8.0], [-8.0, 8.0]], "n": [256, 256]},
    "initial": {"kind": "gaussian", "width": 1.0},
    "scheme": {
        "t_final": 0.25,
        "beta": -1.0,
        "sigma": 1.0,
        "filter": "smooth",
        "tau_list": [2.0 ** -k for k in range(4, 10)],
        "tau_ref": 1.0e-4,
    },
    "io": {"seed": DEFAULT_SEED},
}

PRESETS["fig2a"] = copy.deepcopy(_CONV_2D)
PRESETS["fig2a"]["potential"] = {
    "kind": "inverse_power", "alpha": 1.0, "centers": [[0.0, 0.0]], "charges": [-1.0],
}

PRESETS["fig2b"] = copy.deepcopy(_CONV_2D)
PRESETS["fig2b"]["potential"] = {
    "kind": "random_fourier", "decay": 1.0, "zero_mode": 1.0, "seed": None,
}

_CONV_3D = {
    "experiment": "convergence",
    "grid": {"d": 3, "bounds": [[-4.0, 4.0]] * 3, "n": [64, 64, 64]},
    "initial": {"kind": "gaussian", "width": 1.0},
    "scheme": {
        "t_final": 1.0 / 16.0,
        "beta": 1.0,
        "sigma": 1.0,
        "filter": "smooth",
        "tau_list": [2.0 ** -k for k in range(6, 12)],
        "tau_ref": 1.0e-4,
    },
    "io": {"seed": DEFAULT_SEED},
}

PRESETS["fig3a"] = copy.deepcopy(_CONV_3D)
PRESETS["fig3a"]["potential"] = {"kind": "fourier_decay", "s": 1.0}

PRESETS["fig3b"] = copy.deepcopy(_CONV_3D)
PRESETS["fig3b"]["potential"] = {"kind": "fourier_decay", "s": 0.76}

PRESETS["fig4"] = {
    "experiment": "dynamics",
    "grid": {"d": 2, "bounds": [[-8.0, 8.0], [-8.0, 8.0]], "n": [256, 256]},
    "potential": {
        "kind": "inverse_power", "alpha": 1.0,
        "centers": [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
        "charges": [-1.0, -1.0, -1.0, -1.0],
    },
    "scheme": {
        "t_final": 4.0, "beta": -1.0, "sigma": 1.0, "filter": "smooth",
        "tau": 1.0e-3,
    },
    "dynamics": {
        "omega": 3.0,
        "offset": [-4.0, 2.0],
        "carrier": [1.0, 0.0],
        "approach_radius": 0.8,
        "analysis_stride": 50,
    },
    "io": {"seed": DEFAULT_SEED, "snapshot_stride": 250},
}

PRESETS["strichartz-1d"] = {
    "experiment": "strichartz",
    "grid": {"d": 1, "bounds": [[-16.0, 16.0]], "n": [1024]},
    "initial": {"kind": "gaussian", "width": 1.0},
    "strichartz": {
        "pairs": [["inf", 2], [8, 4]],
        "t_final": 1.0,
        "tau_list": [2.0 ** -k for k in range(3, 10)],
    },
    "io": {"seed": DEFAULT_SEED},
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> dict:
    if name not in PRESETS:
        known = ", ".join(preset_names())
        raise KeyError(f"unknown preset {name!r}; valid presets: {known}")
    return copy.deepcopy(PRESETS[name])
