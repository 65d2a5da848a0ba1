"""Run configuration: schema validation, presets, and experiment assembly.

A configuration is a JSON document (or a built-in preset) with the blocks

* ``experiment``: one of ``convergence``, ``strichartz``, ``dynamics``,
  ``single-run``;
* ``grid``: dimension, per-axis bounds and point counts;
* ``potential``: mirrors the potential specs (inverse_power, fourier_decay,
  random_fourier, constant, sum, none);
* ``initial``: the initial datum (gaussian; the dynamics demo builds its own
  boosted ground-state datum);
* ``scheme``: final time, nonlinearity parameters, filter shape and either a
  single ``tau`` or a ``tau_list`` plus ``tau_ref``;
* ``strichartz`` / ``dynamics``: experiment-specific settings;
* ``io``: seed and snapshot stride.

Unknown keys are rejected by name (with a suggestion when one is close);
loading a file, serializing the resolved configuration and loading it again
yields an identical document.
"""

from __future__ import annotations

import copy
import difflib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .experiments import DynamicsSetup, StrichartzConfig, SweepConfig, gaussian_datum
from .integrator import EwiParams
from .potentials import (
    ConstantPotential,
    FourierDecay,
    InversePower,
    PotentialField,
    RandomFourier,
    SumPotential,
    realize,
)
from .presets import DEFAULT_SEED, get_preset, preset_names
from .spectral import Grid, SpectralField

__all__ = ["ConfigError", "RunConfig", "load_config", "resolve_config",
           "serialize_config"]


class ConfigError(ValueError):
    """A configuration document is malformed; maps to CLI exit code 2."""


_KEY_ALIASES = {
    "dt": "tau",
    "dts": "tau_list",
    "timestep": "tau",
    "time_step": "tau",
    "tf": "t_final",
    "T": "t_final",
    "final_time": "t_final",
    "nx": "n",
    "npoints": "n",
    "domain": "bounds",
    "box": "bounds",
    "out": "out_dir",
}

_SCHEMA = {
    "": {"experiment", "preset", "grid", "potential", "initial", "scheme",
         "strichartz", "dynamics", "io"},
    "grid": {"d", "bounds", "n"},
    "potential": {"kind", "alpha", "centers", "charges", "s", "decay",
                  "zero_mode", "seed", "value", "parts", "oversample"},
    "initial": {"kind", "width", "center"},
    "scheme": {"t_final", "beta", "sigma", "filter", "tau", "tau_list",
               "tau_ref"},
    "strichartz": {"pairs", "t_final", "tau_list"},
    "dynamics": {"omega", "offset", "carrier", "approach_radius",
                 "analysis_stride", "gs_tol", "gs_decay_tol"},
    "io": {"seed", "snapshot_stride", "out_dir"},
}

_EXPERIMENTS = ("convergence", "strichartz", "dynamics", "single-run")


def _reject_unknown(block: dict, name: str):
    allowed = _SCHEMA[name]
    for key in block:
        if key in allowed:
            continue
        where = f" in block {name!r}" if name else ""
        hint = _KEY_ALIASES.get(key) or next(
            iter(difflib.get_close_matches(key, allowed, n=1, cutoff=0.6)), None)
        suggestion = f"; did you mean {hint!r}?" if hint else ""
        raise ConfigError(f"unknown key {key!r}{where}{suggestion}")


def _require(block: dict, key: str, where: str):
    if key not in block or block[key] is None:
        raise ConfigError(f"missing required key {key!r} in block {where!r}")
    return block[key]


def resolve_config(doc: dict) -> dict:
    """Validate a raw document and fill defaults; returns the resolved copy."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    doc = copy.deepcopy(doc)
    _reject_unknown(doc, "")
    experiment = doc.get("experiment")
    if experiment not in _EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {', '.join(_EXPERIMENTS)}; got {experiment!r}")

    grid = _require(doc, "grid", "")
    _reject_unknown(grid, "grid")
    d = _require(grid, "d", "grid")
    if d not in (1, 2, 3):
        raise ConfigError(f"grid.d must be 1, 2 or 3, got {d}")
    bounds = _require(grid, "bounds", "grid")
    n = _require(grid, "n", "grid")
    if isinstance(n, (int, float)):
        n = [int(n)] * d
    if len(bounds) == 2 and all(isinstance(v, (int, float)) for v in bounds):
        bounds = [list(bounds)] * d
    if len(bounds) != d or len(n) != d:
        raise ConfigError(f"grid bounds/n must have {d} entries")
    doc["grid"] = {"d": d, "bounds": [[float(a), float(b)] for a, b in bounds],
                   "n": [int(m) for m in n]}

    pot = doc.get("potential")
    if pot is not None:
        doc["potential"] = _resolve_potential(pot)

    init = doc.get("initial")
    if init is None and experiment in ("convergence", "strichartz", "single-run"):
        init = {"kind": "gaussian"}
    if init is not None:
        _reject_unknown(init, "initial")
        kind = init.get("kind", "gaussian")
        if kind != "gaussian":
            raise ConfigError(f"unknown initial datum kind {kind!r}")
        init = {"kind": "gaussian", "width": float(init.get("width", 1.0)),
                "center": init.get("center")}
        doc["initial"] = init

    scheme = doc.get("scheme")
    if experiment in ("convergence", "dynamics", "single-run"):
        if scheme is None:
            raise ConfigError("missing required block 'scheme'")
        _reject_unknown(scheme, "scheme")
        resolved = {
            "t_final": float(_require(scheme, "t_final", "scheme")),
            "beta": float(scheme.get("beta", 0.0)),
            "sigma": float(scheme.get("sigma", 1.0)),
            "filter": scheme.get("filter", "smooth"),
            "tau": scheme.get("tau"),
            "tau_list": scheme.get("tau_list"),
            "tau_ref": scheme.get("tau_ref"),
        }
        if resolved["filter"] not in ("smooth", "sharp", "off"):
            raise ConfigError(f"scheme.filter must be smooth, sharp or off")
        if experiment == "convergence":
            if not resolved["tau_list"] or resolved["tau_ref"] is None:
                raise ConfigError(
                    "convergence runs need scheme.tau_list and scheme.tau_ref")
            resolved["tau_list"] = sorted(
                (float(t) for t in resolved["tau_list"]), reverse=True)
            resolved["tau_ref"] = float(resolved["tau_ref"])
        else:
            if resolved["tau"] is None:
                raise ConfigError(f"{experiment} runs need scheme.tau")
            resolved["tau"] = float(resolved["tau"])
        doc["scheme"] = resolved

    if experiment == "strichartz":
        st = doc.get("strichartz")
        if st is None:
            raise ConfigError("missing required block 'strichartz'")
        _reject_unknown(st, "strichartz")
        pairs = _require(st, "pairs", "strichartz")
        doc["strichartz"] = {
            "pairs": [[p[0], p[1]] for p in pairs],
            "t_final": float(_require(st, "t_final", "strichartz")),
            "tau_list": sorted((float(t) for t in _require(st, "tau_list",
                                                           "strichartz")),
                               reverse=True),
        }

    if experiment == "dynamics":
        dyn = doc.get("dynamics")
        if dyn is None:
            raise ConfigError("missing required block 'dynamics'")
        _reject_unknown(dyn, "dynamics")
        if doc.get("potential") is None or doc["potential"]["kind"] != "inverse_power":
            raise ConfigError("dynamics runs need an inverse_power potential")
        doc["dynamics"] = {
            "omega": float(dyn.get("omega", 3.0)),
            "offset": [float(v) for v in _require(dyn, "offset", "dynamics")],
            "carrier": [float(v) for v in dyn.get("carrier", [0.0] * d)],
            "approach_radius": float(dyn.get("approach_radius", 0.8)),
            "analysis_stride": int(dyn.get("analysis_stride", 50)),
            "gs_tol": float(dyn.get("gs_tol", 1e-10)),
            "gs_decay_tol": float(dyn.get("gs_decay_tol", 1e-10)),
        }

    io = doc.get("io") or {}
    _reject_unknown(io, "io")
    doc["io"] = {
        "seed": int(io.get("seed", DEFAULT_SEED)),
        "snapshot_stride": (None if io.get("snapshot_stride") is None
                            else int(io["snapshot_stride"])),
    }
    doc.setdefault("preset", None)
    for key in ("potential", "initial", "scheme", "strichartz", "dynamics"):
        doc.setdefault(key, None)
    return doc


def _resolve_potential(pot: dict) -> dict:
    _reject_unknown(pot, "potential")
    kind = _require(pot, "kind", "potential")
    out = {"kind": kind, "oversample": pot.get("oversample")}
    if kind == "none":
        return {"kind": "none"}
    if kind == "inverse_power":
        out["alpha"] = float(_require(pot, "alpha", "potential"))
        out["centers"] = [[float(c) for c in ctr]
                          for ctr in _require(pot, "centers", "potential")]
        out["charges"] = [float(z) for z in _require(pot, "charges", "potential")]
    elif kind == "fourier_decay":
        out["s"] = float(_require(pot, "s", "potential"))
    elif kind == "random_fourier":
        out["decay"] = float(pot.get("decay", 1.0))
        out["zero_mode"] = float(pot.get("zero_mode", 1.0))
        out["seed"] = pot.get("seed")
    elif kind == "constant":
        out["value"] = float(_require(pot, "value", "potential"))
    elif kind == "sum":
        out["parts"] = [_resolve_potential(p)
                        for p in _require(pot, "parts", "potential")]
    else:
        raise ConfigError(f"unknown potential kind {kind!r}")
    return out


def serialize_config(doc: dict) -> str:
    """Deterministic serialization of a resolved configuration."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


@dataclass
class RunConfig:
    """A validated configuration plus builders for the experiment objects."""

    doc: dict

    @property
    def experiment(self) -> str:
        return self.doc["experiment"]

    @property
    def seed(self) -> int:
        return self.doc["io"]["seed"]

    @property
    def snapshot_stride(self):
        return self.doc["io"]["snapshot_stride"]

    @property
    def preset(self):
        return self.doc.get("preset")

    def build_grid(self) -> Grid:
        g = self.doc["grid"]
        return Grid([tuple(b) for b in g["bounds"]], g["n"])

    def potential_spec(self):
        pot = self.doc.get("potential")
        if pot is None or pot["kind"] == "none":
            return None
        return self._spec_from(pot)

    def _spec_from(self, pot: dict):
        kind = pot["kind"]
        if kind == "inverse_power":
            return InversePower(tuple(tuple(c) for c in pot["centers"]),
                                tuple(pot["charges"]), pot["alpha"])
        if kind == "fourier_decay":
            return FourierDecay(pot["s"])
        if kind == "random_fourier":
            seed = pot.get("seed")
            return RandomFourier(seed=self.seed if seed is None else int(seed),
                                 decay=pot["decay"], zero_mode=pot["zero_mode"])
        if kind == "constant":
            return ConstantPotential(pot["value"])
        if kind == "sum":
            return SumPotential(tuple(self._spec_from(p) for p in pot["parts"]))
        raise ConfigError(f"unknown potential kind {kind!r}")

    def build_potential(self, grid: Grid) -> PotentialField | None:
        spec = self.potential_spec()
        if spec is None:
            return None
        oversample = (self.doc["potential"] or {}).get("oversample")
        return realize(spec, grid, oversample)

    def build_initial(self, grid: Grid) -> SpectralField:
        init = self.doc["initial"] or {"kind": "gaussian", "width": 1.0,
                                       "center": None}
        center = None if init.get("center") is None else tuple(init["center"])
        return gaussian_datum(grid, width=init.get("width", 1.0), center=center)

    def build_sweep(self) -> SweepConfig:
        if self.experiment != "convergence":
            raise ConfigError("not a convergence configuration")
        grid = self.build_grid()
        scheme = self.doc["scheme"]
        return SweepConfig(
            grid=grid,
            potential=self.build_potential(grid),
            initial=self.build_initial(grid),
            tau_list=tuple(scheme["tau_list"]),
            tau_ref=scheme["tau_ref"],
            t_final=scheme["t_final"],
            beta=scheme["beta"],
            sigma=scheme["sigma"],
            filter_shape=scheme["filter"],
        )

    def build_strichartz(self) -> list[StrichartzConfig]:
        if self.experiment != "strichartz":
            raise ConfigError("not a strichartz configuration")
        grid = self.build_grid()
        datum = self.build_initial(grid)
        st = self.doc["strichartz"]
        return [StrichartzConfig(grid=grid, datum=datum, pair=tuple(pair),
                                 t_final=st["t_final"],
                                 tau_list=tuple(st["tau_list"]))
                for pair in st["pairs"]]

    def build_dynamics(self) -> DynamicsSetup:
        if self.experiment != "dynamics":
            raise ConfigError("not a dynamics configuration")
        grid = self.build_grid()
        potential = self.build_potential(grid)
        pot_doc = self.doc["potential"]
        dyn = self.doc["dynamics"]
        scheme = self.doc["scheme"]
        stride = self.snapshot_stride
        return DynamicsSetup(
            grid=grid,
            potential=potential,
            centers=tuple(tuple(c) for c in pot_doc["centers"]),
            tau=scheme["tau"],
            t_final=scheme["t_final"],
            beta=scheme["beta"],
            sigma=scheme["sigma"],
            omega=dyn["omega"],
            offset=tuple(dyn["offset"]),
            carrier=tuple(dyn["carrier"]),
            filter_shape=scheme["filter"],
            snapshot_stride=stride,
            analysis_stride=dyn["analysis_stride"],
            approach_radius=dyn["approach_radius"],
            gs_tol=dyn["gs_tol"],
            gs_decay_tol=dyn["gs_decay_tol"],
        )

    def build_single(self) -> tuple[SpectralField, EwiParams]:
        if self.experiment != "single-run":
            raise ConfigError("not a single-run configuration")
        grid = self.build_grid()
        scheme = self.doc["scheme"]
        params = EwiParams(grid, self.build_potential(grid), scheme["tau"],
                           scheme["t_final"], scheme["beta"], scheme["sigma"],
                           scheme["filter"])
        return self.build_initial(grid), params


def load_config(source: str | Path | dict) -> RunConfig:
    """Load a configuration from a preset name, a JSON file path, or a dict."""
    if isinstance(source, dict):
        doc = copy.deepcopy(source)
    else:
        name = str(source)
        if name in preset_names():
            doc = get_preset(name)
            doc["preset"] = name
        else:
            path = Path(name)
            if not path.exists():
                if not name.endswith(".json") and "/" not in name:
                    known = ", ".join(preset_names())
                    raise ConfigError(
                        f"unknown preset {name!r}; valid presets: {known}")
                raise ConfigError(f"config file not found: {path}")
            try:
                doc = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return RunConfig(resolve_config(doc))
