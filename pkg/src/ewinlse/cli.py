"""Command-line interface.

Subcommands:

* ``run`` -- execute a preset or a config file; writes the resolved config,
  CSV/JSON reports, binary snapshots and (by default) figures into --out.
* ``list-presets`` -- show the built-in presets.
* ``inspect`` -- summarize a config file, a report manifest, or a binary
  field artifact.

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime aborts
(blow-up, ground-state failure, fully failed sweeps).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import artifacts
from .config import ConfigError, RunConfig, load_config, resolve_config, serialize_config
from .experiments import run_convergence, run_dynamics_demo, strichartz_probe
from .groundstate import GroundStateError
from .integrator import BlowupError, evolve
from .presets import preset_names

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

#: Documented fast-reference step for the 1D paper-scale presets; the default
#: reference (1e-6) is ~10x slower at identical fitted orders.
FAST_REFERENCE_TAU = 1.0e-5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewinlse",
        description="Spectral solver and experiment harness for the NLSE "
                    "with singular potentials on periodic boxes.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a config file")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="built-in preset name")
    src.add_argument("--config", help="path to a JSON config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None,
                     help="override io.seed (random potentials)")
    run.add_argument("--threads", type=int, default=1,
                     help="concurrent sweep members")
    run.add_argument("--snapshot-stride", type=int, default=None,
                     help="override io.snapshot_stride")
    run.add_argument("--fast-reference", action="store_true",
                     help=f"raise the reference step to {FAST_REFERENCE_TAU:g} "
                          "when the preset uses a smaller one (documented "
                          "speed/accuracy trade; fitted orders unchanged)")
    run.add_argument("--check-reference", action="store_true",
                     help="re-run the reference at half step and flag the "
                          "report if errors move by more than 5%%")
    run.add_argument("--no-figures", action="store_true",
                     help="skip matplotlib figure rendering")

    sub.add_parser("list-presets", help="list built-in presets")

    ins = sub.add_parser("inspect", help="summarize an artifact or config")
    ins.add_argument("path", help="field artifact, manifest or config file")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    doc = config.doc
    if args.seed is not None:
        doc["io"]["seed"] = int(args.seed)
    if args.snapshot_stride is not None:
        doc["io"]["snapshot_stride"] = int(args.snapshot_stride)
    if args.fast_reference and doc.get("scheme") and doc["scheme"].get("tau_ref"):
        if doc["scheme"]["tau_ref"] < FAST_REFERENCE_TAU:
            doc["scheme"]["tau_ref"] = FAST_REFERENCE_TAU
    return RunConfig(resolve_config(doc))


def _summary_meta(config: RunConfig) -> dict:
    return {
        "preset": config.preset,
        "experiment": config.experiment,
        "seed": config.seed,
        "grid": config.doc["grid"],
        "potential": config.doc.get("potential"),
    }


def _cmd_run(args) -> int:
    config = _apply_overrides(load_config(args.preset or args.config), args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.json").write_text(serialize_config(config.doc))
    figures = not args.no_figures
    t0 = time.perf_counter()

    if config.experiment == "convergence":
        report = run_convergence(config.build_sweep(), threads=args.threads,
                                 check_reference=args.check_reference,
                                 metadata=_summary_meta(config))
        artifacts.write_convergence_report(report, out_dir, figures=figures)
        ok = [r for r in report.rows if not r.failed]
        for row in report.rows:
            if row.failed:
                print(f"tau={row.tau:.6g}  FAILED ({row.reason})")
            else:
                errs = "  ".join(f"{k}={row.errors[k]:.4e}" for k in report.norms)
                print(f"tau={row.tau:.6g}  {errs}")
        for kind, fit in report.fits.items():
            if fit.degenerate:
                print(f"{kind}: degenerate fit (errors at machine scale or "
                      f"too few valid points)")
            else:
                print(f"{kind}: fitted order {fit.slope:.3f} "
                      f"(residual {fit.residual:.2e})")
        if report.reference_check is not None:
            print(f"reference check: "
                  f"{'ok' if report.reference_check['consistent'] else 'FLAGGED'}")
        print(f"report written to {out_dir} "
              f"({time.perf_counter() - t0:.1f}s)")
        if not ok:
            print("all sweep members failed", file=sys.stderr)
            return EXIT_RUNTIME
        return EXIT_OK

    if config.experiment == "strichartz":
        reports = [strichartz_probe(cfg) for cfg in config.build_strichartz()]
        artifacts.write_strichartz_report(reports, out_dir,
                                          metadata=_summary_meta(config),
                                          figures=figures)
        for rep in reports:
            print(f"(q, r) = ({rep.pair[0]}, {rep.pair[1]}): "
                  f"max ratio {rep.ratios.max():.6f}, "
                  f"max/min {rep.ratios.max() / rep.ratios.min():.4f}")
        print(f"report written to {out_dir} ({time.perf_counter() - t0:.1f}s)")
        return EXIT_OK

    if config.experiment == "dynamics":
        setup = config.build_dynamics()
        result = run_dynamics_demo(setup)
        artifacts.write_dynamics_result(result, out_dir, centers=setup.centers,
                                        figures=figures)
        print(f"mass drift {result.mass_drift:.3e} over "
              f"[0, {setup.t_final:g}]")
        if result.first_approach:
            fa = result.first_approach
            print(f"first approach: center {fa['center']} at t = {fa['time']:g}")
        else:
            print("no center approached within the configured radius")
        print(f"artifacts written to {out_dir} ({time.perf_counter() - t0:.1f}s)")
        return EXIT_OK

    # single-run
    initial, params = config.build_single()
    stride = config.snapshot_stride or max(1, params.n_steps // 16)
    traj = evolve(initial, params, snapshot_stride=stride)
    snap_dir = out_dir / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for t, field in zip(traj.times, traj.snapshots):
        stem = f"psi_t{t:08.4f}".replace(".", "p")
        artifacts.write_field_artifact(snap_dir / f"{stem}.field", field,
                                       meta={"t": t, "tau": params.tau})
    mass = traj.mass_trace
    artifacts.write_json(out_dir / "manifest.json", {
        "kind": "single-run",
        "mass_initial": float(mass[0]),
        "mass_drift": float(max(abs(mass - mass[0]))),
        "snapshot_times": [float(t) for t in traj.times],
        **_summary_meta(config),
    })
    print(f"trajectory written to {out_dir} ({time.perf_counter() - t0:.1f}s)")
    return EXIT_OK


def _cmd_inspect(path_str: str) -> int:
    path = Path(path_str)
    if not path.exists():
        print(f"no such file: {path}", file=sys.stderr)
        return EXIT_CONFIG
    head = path.open("rb").read(8)
    if head == artifacts.MAGIC:
        grid, array, kind = artifacts.read_field(path)
        print(f"field artifact: d={grid.d} n={grid.n} bounds={grid.bounds}")
        print(f"payload: {kind}, dtype {array.dtype}, {array.nbytes} bytes")
        sidecar = path.with_suffix(path.suffix + ".json")
        if sidecar.exists():
            print(f"sidecar: {sidecar.read_text().strip()}")
        return EXIT_OK
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError:
        print(f"{path} is neither a field artifact nor JSON", file=sys.stderr)
        return EXIT_CONFIG
    if "experiment" in doc:
        config = load_config(doc)
        print(f"config: experiment={config.experiment} "
              f"preset={config.preset or '-'}")
        print(serialize_config(config.doc))
    else:
        print(json.dumps(doc, sort_keys=True, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-presets":
            for name in preset_names():
                print(name)
            return EXIT_OK
        if args.command == "inspect":
            return _cmd_inspect(args.path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowupError, GroundStateError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
