"""Command-line frontend: build, reduce, gamma, run, sweep, reproduce.

Every command accepts ``--config FILE`` (a JSON object whose keys match the
long flag names with underscores); explicit flags override config values.
Exit codes: 0 success, 1 numeric failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import InputError, InvalidStage, SimplexSearchError
from .evolve import DEFAULT_SAMPLES, Schedule, result_to_csv, run_schedule, uniform_initial_state
from .hamiltonian import make_oracle
from .lattice import LatticeSpec, build_lattice, load_lattice, save_lattice
from .output import provenance, table_csv, write_json, write_text
from .partition import partition_to_json, quotient, quotient_to_csv, refine
from .perturbation import crossing_curve, crossing_to_csv, find_critical_rate, preset_plan, two_level_model
from .scenarios import get_scenario
from .sweep import TABLE_IDS, SweepSpec, analyze, epsilon_tolerance, reproduce

DEFAULTS: dict[str, Any] = {
    "out": "out",
    "jobs": 1,
    "grid_points": None,
    "tolerance": 1e-10,
    "method": "orbits",
    "kind": "adjacency",
    "oracle": "class_state",
    "stage": 1,
    "schedule": "auto",
    "samples": DEFAULT_SAMPLES,
    "half_width": 0.5,
    "points": 201,
    "threshold": 0.5,
}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _marked(text: str) -> list[list[int]]:
    """Addresses separated by ';', components by ',' (e.g. "0,0,0;1,0,0")."""
    return [[int(c) for c in part.split(",")] for part in text.split(";") if part.strip()]


def _schedule(text: str) -> list[list[float]] | str:
    """Segments "gamma:duration" separated by ','; or "auto"."""
    if text.strip() == "auto":
        return "auto"
    out = []
    for part in text.split(","):
        if part.strip():
            g, t = part.split(":")
            out.append([float(g), float(t)])
    return out


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output directory (default out)")
    common.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    common.add_argument("--grid-points", type=int, dest="grid_points", help="gamma grid size for crossing scans")
    common.add_argument("--tolerance", type=float, help="crossing tolerance")

    spec = argparse.ArgumentParser(add_help=False)
    spec.add_argument("--order", type=int)
    spec.add_argument("--dim", type=int)

    marks = argparse.ArgumentParser(add_help=False)
    marks.add_argument("--scenario", help="preset scenario name")
    marks.add_argument("--marked", type=_marked, help='explicit addresses, e.g. "0,0,0;1,0,0"')

    p = argparse.ArgumentParser(prog="simplexsearch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("build", parents=[common, spec], help="write a lattice JSON file")

    r = sub.add_parser("reduce", parents=[common, spec, marks], help="partition and quotient")
    r.add_argument("--lattice", help="lattice JSON file (otherwise built or reduced symbolically)")
    r.add_argument("--method", choices=["orbits", "color"])
    r.add_argument("--asymptotic", action="store_true", default=None, help="leading-order quotient entries")

    g = sub.add_parser("gamma", parents=[common, spec, marks], help="critical jumping rate of one stage")
    g.add_argument("--stage", type=int)
    g.add_argument("--range", type=float, nargs=2, dest="gamma_range", metavar=("LO", "HI"))

    u = sub.add_parser("run", parents=[common, spec, marks], help="evolve a schedule")
    u.add_argument("--schedule", type=_schedule, help='"auto" or "gamma:duration,..."')
    u.add_argument("--samples", type=int)
    u.add_argument("--kind", choices=["adjacency", "laplacian"])

    s = sub.add_parser("sweep", parents=[common, marks], help="epsilon tolerance sweep")
    s.add_argument("--stage", type=int)
    s.add_argument("--m-values", type=_int_list, dest="m_values")
    s.add_argument("--half-width", type=float, dest="half_width")
    s.add_argument("--points", type=int)
    s.add_argument("--threshold", type=float)

    x = sub.add_parser("reproduce", parents=[common], help="regenerate a published table or figure")
    x.add_argument("table_id", choices=TABLE_IDS)
    return p


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg = dict(DEFAULTS)
    if args.config:
        doc = json.loads(Path(args.config).read_text())
        lat = doc.pop("lattice", None)
        if isinstance(lat, dict):
            doc.setdefault("order", lat.get("order"))
            doc.setdefault("dim", lat.get("dim"))
        elif lat is not None:
            doc["lattice"] = lat
        if "output_dir" in doc:
            doc.setdefault("out", doc.pop("output_dir"))
        if isinstance(doc.get("schedule"), str) and doc["schedule"] != "auto":
            doc["schedule"] = _schedule(doc["schedule"])
        cfg.update(doc)
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            cfg[key] = value
    return cfg


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise InputError(f"missing required settings: {', '.join(missing)}")


def _marks_choice(cfg: dict, required: bool = True) -> None:
    has_s, has_m = cfg.get("scenario") is not None, cfg.get("marked") is not None
    if has_s and has_m:
        raise InputError("give either a scenario or explicit marked addresses, not both")
    if required and not (has_s or has_m):
        raise InputError("a scenario or explicit marked addresses are required")


def _spec(cfg: dict) -> LatticeSpec:
    if cfg.get("order") is None and cfg.get("scenario"):
        cfg["order"] = get_scenario(cfg["scenario"]).order
    _need(cfg, "order", "dim")
    return LatticeSpec(int(cfg["order"]), int(cfg["dim"]))


def cmd_build(cfg: dict) -> list[Path]:
    spec = _spec(cfg)
    path = Path(cfg["out"]) / f"lattice_r{spec.order}_M{spec.dim}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_lattice(build_lattice(spec), path)
    return [path]


def _reduced(cfg: dict):
    """Partition for reduce/gamma/run: explicit lattice when given or when marks are explicit."""
    _marks_choice(cfg, required=False)
    lattice = load_lattice(cfg["lattice"]) if cfg.get("lattice") else None
    if lattice is not None:
        cfg["order"], cfg["dim"] = lattice.spec.order, lattice.spec.dim
    spec = lattice.spec if lattice is not None else _spec(cfg)
    scenario = cfg.get("scenario")
    if scenario is not None and get_scenario(scenario).order != spec.order:
        raise InvalidStage(f"scenario {scenario} needs order {get_scenario(scenario).order}")
    method = cfg.get("method", "orbits")
    if scenario is not None and lattice is None and method == "orbits":
        return None, get_scenario(scenario).partition(spec.dim)
    if lattice is None:
        lattice = build_lattice(spec)
    marked = cfg.get("marked") or []
    if scenario is not None:
        marked = get_scenario(scenario).marked_addresses(lattice)
    return lattice, refine(lattice, marked, method)


def cmd_reduce(cfg: dict) -> list[Path]:
    lattice, part = _reduced(cfg)
    q = quotient(lattice, part, asymptotic=bool(cfg.get("asymptotic")))
    out = Path(cfg["out"])
    head = provenance(cfg)
    files = [
        write_text(out / "partition.json", partition_to_json(part) + "\n"),
        write_text(out / "quotient.csv", quotient_to_csv(q, head)),
    ]
    print(f"{part.dim} classes over {part.num_vertices} vertices; marked classes {list(part.marked_classes)}")
    return files


def _stage_setup(cfg: dict):
    _need(cfg, "scenario")
    sc = get_scenario(cfg["scenario"])
    spec = _spec(cfg)
    part = sc.partition(spec.dim)
    q = quotient(None, part, asymptotic=bool(cfg.get("asymptotic")))
    oracle = make_oracle(part, kind=cfg.get("oracle", "class_state"))
    plan = preset_plan(sc.order, sc.name).resolve(part)
    return part, q, oracle, plan


def cmd_gamma(cfg: dict) -> list[Path]:
    part, q, oracle, plan = _stage_setup(cfg)
    stage = plan.stage(int(cfg["stage"]))
    rng = tuple(cfg["gamma_range"]) if cfg.get("gamma_range") else None
    cr = find_critical_rate(q, oracle, stage, rng, cfg.get("grid_points"), cfg.get("tolerance", 1e-10))
    report = {
        "scenario": cfg["scenario"],
        "dim": part.spec.dim,
        "stage": int(cfg["stage"]),
        "label": stage.label,
        "subspace_dimension": part.dim,
        "gamma_c": cr.gamma_c,
        "gamma_c_times_M": cr.gamma_c * part.spec.dim,
        "crossing_energy": cr.crossing_energy,
        "all_crossings": [list(c) for c in cr.all_crossings],
        "block_a": [part.labels[i] for i in stage.block_a],
        "block_b": [part.labels[i] for i in stage.block_b],
        "pruned": [part.labels[i] for i in stage.pruned],
        "provenance": provenance(cfg)[0],
    }
    try:
        model = two_level_model(q, oracle, stage, cr.gamma_c, cfg.get("kind", "adjacency"))
        report.update(e_minus=model.e_minus, e_plus=model.e_plus, stage_time=model.stage_time)
    except SimplexSearchError as exc:
        report["two_level_error"] = f"{exc.name}: {exc}"
    grid, energies = crossing_curve(q, oracle, stage, rng, cfg.get("grid_points"))
    out = Path(cfg["out"])
    files = [
        write_json(out / "critical_rate.json", report),
        write_text(out / "crossing.csv", crossing_to_csv(grid, energies, part.spec.dim, provenance(cfg))),
    ]
    print(f"gamma_c = {cr.gamma_c:.10g}  (gamma_c*M = {cr.gamma_c * part.spec.dim:.6g}, {len(cr.all_crossings)} crossing(s))")
    return files


def cmd_run(cfg: dict) -> list[Path]:
    schedule = cfg.get("schedule", "auto")
    kind = cfg.get("kind", "adjacency")
    summary: dict[str, Any] = {"provenance": provenance(cfg)[0]}
    if schedule == "auto":
        _need(cfg, "scenario")
        spec = _spec(cfg)
        an = analyze(cfg["scenario"], spec.dim, kind=kind, grid_points=cfg.get("grid_points"), tol=cfg.get("tolerance", 1e-10))
        part, q, oracle = an.partition, an.quotient, an.oracle
        sched = an.schedule()
        stages = [sr.stage for sr in an.stages]
    else:
        if cfg.get("scenario") is not None:
            lattice, part = None, get_scenario(cfg["scenario"]).partition(_spec(cfg).dim)
        else:
            lattice, part = _reduced(cfg)
        q = quotient(lattice, part)
        oracle = make_oracle(part, kind=cfg.get("oracle", "class_state"))
        sched = Schedule.of(schedule)
        stages = []
    psi0 = uniform_initial_state(part)
    res = run_schedule(q, oracle, sched, psi0, int(cfg.get("samples", DEFAULT_SAMPLES)), kind)
    marked = list(part.marked_classes)
    summary.update(
        scenario=cfg.get("scenario"),
        dim=part.spec.dim,
        subspace_dimension=part.dim,
        schedule=[list(s) for s in sched.segments],
        stage_times=[t for _, t in sched.segments],
        final_probability=float(np.sum(np.abs(res.final_state[marked]) ** 2)) if marked else 0.0,
        final_norm=float(np.linalg.norm(res.final_state)),
    )
    peaks = []
    for k, seg in enumerate(sched.segments):
        sl = res.segment_slice(k)
        target = list(stages[k].target) if stages else marked
        if not target:
            continue
        series = res.probabilities[sl][:, target].sum(axis=1)
        j = int(np.argmax(series))
        peaks.append({"segment": k + 1, "t_peak": float(res.times[sl][j]), "p_peak": float(series[j])})
    summary["stage_peaks"] = peaks
    out = Path(cfg["out"])
    files = [
        write_text(out / "evolution.csv", result_to_csv(res, part.labels, provenance(cfg))),
        write_json(out / "summary.json", summary),
    ]
    print(f"final marked probability {summary['final_probability']:.6f}")
    return files


def cmd_sweep(cfg: dict) -> list[Path]:
    _need(cfg, "scenario", "m_values")
    spec = SweepSpec(cfg["scenario"], int(cfg["stage"]), tuple(int(m) for m in cfg["m_values"]), (float(cfg["half_width"]), int(cfg["points"])), float(cfg["threshold"]), int(cfg.get("samples", DEFAULT_SAMPLES)))
    rows = []
    for iv in epsilon_tolerance(spec, int(cfg.get("jobs", 1)), cfg.get("grid_points")):
        rows.append((iv.dim, iv.gamma_c, iv.eps_lo, iv.eps_hi, iv.gamma_lo, iv.gamma_hi, iv.relative_halfwidth, iv.clipped))
        print(f"M={iv.dim}: gamma in [{iv.gamma_lo:.6g}, {iv.gamma_hi:.6g}]  ({iv.relative_halfwidth:.3g}%)")
    cols = ("M", "gamma_c", "eps_lo", "eps_hi", "gamma_lo", "gamma_hi", "relative_halfwidth_percent", "clipped")
    return [write_text(Path(cfg["out"]) / "tolerance.csv", table_csv(cols, rows, provenance(cfg)))]


def cmd_reproduce(cfg: dict) -> list[Path]:
    rep = reproduce(cfg["table_id"], cfg["out"], int(cfg.get("jobs", 1)), cfg.get("grid_points"), config=cfg)
    for row in rep.summary:
        print(f"{'PASS' if row[-1] else 'FAIL'}  {row[0]:<16} {row[1]:<32} computed={row[2]} published={row[3]}")
    return rep.files


COMMANDS = {
    "build": cmd_build,
    "reduce": cmd_reduce,
    "gamma": cmd_gamma,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        files = COMMANDS[args.command](cfg)
    except SimplexSearchError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f"wrote {f}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
