"""Artifact persistence: binary field files, CSV tables, JSON manifests.

Binary field format (versioned, little-endian throughout):

    bytes 0..7   magic  b"EWIFLD\\x01\\x00"  (format version 1)
    byte  8      dimension d (1..3)
    byte  9      payload kind: 0 = Fourier coefficients, 1 = node samples
    byte  10     dtype: 0 = complex128, 1 = complex64, 2 = float64
    byte  11     reserved (0)
    per axis j (d times): u32 n_j, f64 a_j, f64 b_j
    then the raw array bytes in C order.

Report writers emit deterministic bytes for identical report data (sorted
JSON keys, repr-formatted floats, RFC-4180-style CSV); wall-clock timings go
to a separate ``run_info.json`` so that reruns of the same configuration
reproduce the data files bit for bit.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .experiments import ConvergenceReport, DynamicsResult, StrichartzReport
from .potentials import PotentialField
from .spectral import Grid, SpectralField

__all__ = [
    "write_field",
    "read_field",
    "write_field_artifact",
    "read_field_artifact",
    "write_potential_artifact",
    "read_potential_artifact",
    "write_json",
    "write_convergence_report",
    "write_strichartz_report",
    "write_dynamics_result",
]

MAGIC = b"EWIFLD\x01\x00"
_KIND_COEFFS, _KIND_VALUES = 0, 1
_DTYPES = {0: np.complex128, 1: np.complex64, 2: np.float64}
_DTYPE_CODES = {np.dtype(np.complex128): 0, np.dtype(np.complex64): 1,
                np.dtype(np.float64): 2}


def _fmt(x) -> str:
    """Shortest round-trip decimal representation (deterministic)."""
    return repr(float(x))


def write_field(path: Path, grid: Grid, array: np.ndarray, kind: str) -> Path:
    """Write an array on a grid to the versioned binary format."""
    path = Path(path)
    array = np.ascontiguousarray(array)
    if array.dtype not in _DTYPE_CODES:
        array = np.ascontiguousarray(array, dtype=np.complex128)
    if array.shape != grid.shape:
        raise ValueError(f"array shape {array.shape} != grid shape {grid.shape}")
    kind_code = {"coeffs": _KIND_COEFFS, "values": _KIND_VALUES}[kind]
    header = MAGIC + struct.pack("<BBBB", grid.d, kind_code,
                                 _DTYPE_CODES[array.dtype], 0)
    for (a, b), m in zip(grid.bounds, grid.n):
        header += struct.pack("<Idd", m, a, b)
    with open(path, "wb") as fh:
        fh.write(header)
        data = array if array.dtype.byteorder in ("<", "=", "|") else \
            array.astype(array.dtype.newbyteorder("<"))
        fh.write(data.tobytes(order="C"))
    return path


def read_field(path: Path) -> tuple[Grid, np.ndarray, str]:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path} is not a field artifact (bad magic)")
    d, kind_code, dtype_code, _ = struct.unpack_from("<BBBB", raw, 8)
    offset = 12
    bounds, n = [], []
    for _ in range(d):
        m, a, b = struct.unpack_from("<Idd", raw, offset)
        offset += struct.calcsize("<Idd")
        bounds.append((a, b))
        n.append(m)
    grid = Grid(bounds, n)
    dtype = np.dtype(_DTYPES[dtype_code]).newbyteorder("<")
    array = np.frombuffer(raw, dtype=dtype, offset=offset).reshape(grid.shape)
    array = array.astype(_DTYPES[dtype_code])
    kind = "coeffs" if kind_code == _KIND_COEFFS else "values"
    return grid, array, kind


def write_field_artifact(path: Path, field: SpectralField,
                         meta: dict | None = None) -> Path:
    """Field snapshot: binary coefficients plus a JSON sidecar."""
    path = Path(path)
    write_field(path, field.grid, field.coeffs, "coeffs")
    if meta is not None:
        write_json(path.with_suffix(path.suffix + ".json"), meta)
    return path


def read_field_artifact(path: Path) -> SpectralField:
    grid, array, kind = read_field(path)
    if kind == "coeffs":
        return SpectralField.from_coeffs(grid, array)
    return SpectralField.from_values(grid, array)


def write_potential_artifact(path: Path, potential: PotentialField,
                             meta: dict | None = None) -> Path:
    """Persist a realized potential (fine samples; exact reconstruction)."""
    path = Path(path)
    write_field(path, potential.fine_grid, potential.fine_values, "values")
    sidecar = {"oversample": potential.oversample,
               "base_n": list(potential.grid.n)}
    sidecar.update(meta or {})
    write_json(path.with_suffix(path.suffix + ".json"), sidecar)
    return path


def read_potential_artifact(path: Path) -> PotentialField:
    path = Path(path)
    fine_grid, fine_values, kind = read_field(path)
    if kind != "values":
        raise ValueError("potential artifact must store node samples")
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    oversample = int(sidecar["oversample"])
    base = Grid(fine_grid.bounds, [m // oversample for m in fine_grid.n])
    return PotentialField(base, oversample, fine_values.real)


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               allow_nan=True) + "\n")
    return path


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    Path(path).write_text("\r\n".join(lines) + "\r\n")
    return Path(path)


def _fit_payload(report: ConvergenceReport) -> dict:
    return {
        kind: {"slope": fit.slope, "residual": fit.residual,
               "degenerate": fit.degenerate}
        for kind, fit in report.fits.items()
    }


def write_convergence_report(report: ConvergenceReport, out_dir: Path,
                             figures: bool = True) -> dict:
    """Emit errors.csv, loglog.csv, manifest.json (+ figure); returns paths.

    Failed sweep members are recorded in the manifest and omitted from the
    CSV rows.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    norms = list(report.norms)
    ok_rows = [r for r in report.rows if not r.failed]
    err_rows = [[r.tau] + [r.errors[k] for k in norms] for r in ok_rows]
    paths = {}
    paths["errors"] = _write_csv(out_dir / "errors.csv",
                                 ["tau"] + [f"err_{k}" for k in norms], err_rows)
    log_rows = [[float(np.log10(r.tau))]
                + [float(np.log10(r.errors[k])) if r.errors[k] > 0 else float("-inf")
                   for k in norms]
                for r in ok_rows]
    paths["loglog"] = _write_csv(out_dir / "loglog.csv",
                                 ["log10_tau"] + [f"log10_err_{k}" for k in norms],
                                 log_rows)
    manifest = {
        "kind": "convergence",
        "norms": norms,
        "tau_ref": report.tau_ref,
        "orders": _fit_payload(report),
        "rows": [{"tau": r.tau, "errors": r.errors, "failed": r.failed,
                  "reason": r.reason} for r in report.rows],
        "failures": [{"tau": r.tau, "reason": r.reason}
                     for r in report.rows if r.failed],
        "reference_check": report.reference_check,
    }
    manifest.update(report.metadata)
    paths["manifest"] = write_json(out_dir / "manifest.json", manifest)
    if report.timings:
        write_json(out_dir / "run_info.json", {"timings": report.timings})
    if figures:
        from . import figures as _figures
        paths["figure"] = _figures.save_convergence_figure(
            report, out_dir / "convergence.png")
    return paths


def write_strichartz_report(reports: list[StrichartzReport], out_dir: Path,
                            metadata: dict | None = None,
                            figures: bool = True) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    payload = {"kind": "strichartz", "pairs": [], "datum_l2": None}
    payload.update(metadata or {})
    rows_csv = []
    for rep in reports:
        q, r = rep.pair
        label = f"q={q},r={r}"
        payload["datum_l2"] = rep.datum_l2
        payload["pairs"].append({
            "q": str(q), "r": str(r),
            "rows": [{"tau": t, "ratio": val} for t, val in rep.rows],
            "max_ratio": float(np.max(rep.ratios)),
            "max_over_min": float(np.max(rep.ratios) / np.min(rep.ratios)),
        })
        for t, val in rep.rows:
            rows_csv.append([label, t, val])
    paths["ratios"] = _write_csv(out_dir / "ratios.csv",
                                 ["pair", "tau", "ratio"], rows_csv)
    paths["manifest"] = write_json(out_dir / "manifest.json", payload)
    if figures and reports:
        from . import figures as _figures
        paths["figure"] = _figures.save_strichartz_figure(
            reports, out_dir / "strichartz.png")
    return paths


def write_dynamics_result(result: DynamicsResult, out_dir: Path,
                          centers=None, figures: bool = True) -> dict:
    """Emit per-snapshot field artifacts, the mass/centroid traces and the
    manifest (plus density figures)."""
    out_dir = Path(out_dir)
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    traj = result.trajectory
    paths = {"snapshots": []}
    for t, field in zip(traj.times, traj.snapshots):
        stem = f"rho_t{t:08.4f}".replace(".", "p")
        p = write_field_artifact(snap_dir / f"{stem}.field", field,
                                 meta={"t": t, "tau": traj.tau})
        paths["snapshots"].append(p)
    mass = traj.mass_trace
    paths["mass"] = _write_csv(out_dir / "mass_trace.csv", ["step", "l2_norm"],
                               [[i, float(m)] for i, m in enumerate(mass)])
    centroid_rows = []
    for i, t in enumerate(result.centroid_times):
        centroid_rows.append([float(t)]
                             + [float(c) for c in result.centroids[i]]
                             + [float(v) for v in result.center_distances[i]])
    d = result.centroids.shape[1]
    ncent = result.center_distances.shape[1]
    paths["centroids"] = _write_csv(
        out_dir / "centroid_track.csv",
        ["t"] + [f"x{j}" for j in range(d)] + [f"dist_{j}" for j in range(ncent)],
        centroid_rows)
    manifest = {
        "kind": "dynamics",
        "mass_initial": float(mass[0]),
        "mass_drift": result.mass_drift,
        "first_approach": result.first_approach,
        "ground_state_residual": result.ground_state_residual,
        "snapshot_times": [float(t) for t in traj.times],
    }
    manifest.update(result.metadata)
    paths["manifest"] = write_json(out_dir / "manifest.json", manifest)
    if figures:
        from . import figures as _figures
        fig_dir = out_dir / "figures"
        fig_dir.mkdir(exist_ok=True)
        paths["figures"] = []
        for t, field in zip(traj.times, traj.snapshots):
            stem = f"density_t{t:08.4f}".replace(".", "p")
            paths["figures"].append(_figures.save_density_figure(
                field, t, fig_dir / f"{stem}.png", centers=centers))
    return paths
