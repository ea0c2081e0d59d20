"""Execute a :class:`~cvaluations.config.RunConfig` and write its reports."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import harness as hn
from . import lattice as lat
from .config import RunConfig
from .domains import (DomainError, make_box_grid, make_sphere_grid, random_rotation, rotation_matrix,
                      sample_on_grid, sample_on_sphere)
from .valuation import ValuationFunctional, decompose_re_im, rotate_to_imaginary

CSV_COLUMNS = ("scenario_id", "kind", "trials", "max_deviation", "tolerance", "pass")


class ReportWriteError(OSError):
    pass


@dataclass
class RunSummary:
    reports: list[hn.PropertyReport]
    wall_seconds: dict[str, float] = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.reports)


def _bump(r2):
    # C-infinity bump on r2 < 1 with peak value 1 at the center
    out = np.zeros_like(r2)
    inside = r2 < 1
    out[inside] = np.exp(1 - 1 / (1 - r2[inside]))
    return out


def _grid_function(grid, spec, rng):
    if spec.shape == "random":
        vals = rng.uniform(-spec.value_range, spec.value_range, (2,) + grid.resolution)
        return sample_on_grid(grid, lambda *x: vals[0] + 1j * vals[1], buffer=spec.buffer)
    center = spec.center or [0.5 * (lo + hi) for lo, hi in grid.bounds]
    amp = complex(*spec.amplitude)

    def rule(*x):
        r2 = sum((xi - ci) ** 2 for xi, ci in zip(x, center)) / spec.radius ** 2
        return amp * _bump(r2)
    return sample_on_grid(grid, rule, buffer=spec.buffer)


def _sphere_function(quad, spec, rng):
    if spec.shape == "random":
        vals = rng.uniform(-spec.value_range, spec.value_range, (2, quad.size))
        return sample_on_sphere(quad, lambda u: vals[0] + 1j * vals[1])
    c = np.asarray(spec.center or ([0.6, 0.8] if quad.dimension == 2 else [0.3, 0.2, 0.9]), dtype=float)
    c = c / np.linalg.norm(c)
    amp = complex(*spec.amplitude)

    def rule(u):
        ang = np.arccos(np.clip(u @ c, -1.0, 1.0))
        return amp * _bump((ang / spec.radius) ** 2)
    return sample_on_sphere(quad, rule)


def _rotation(spec, n, rng):
    if spec.matrix is not None:
        return np.asarray(spec.matrix, dtype=float)
    if spec.random:
        return random_rotation(rng, n)
    angle = math.radians(spec.angle_deg or 0.0)
    if n == 2:
        return rotation_matrix(angle)
    return rotation_matrix(angle, spec.axis or [0.0, 0.0, 1.0])


_TRANSFORMS = {
    "rotate_to_imaginary": rotate_to_imaginary,
    "real_part": lambda phi: decompose_re_im(phi)[0],
    "imag_part": lambda phi: decompose_re_im(phi)[1],
}


def _draw_kwargs(params, partition):
    kw = {k: params[k] for k in ("min_cells", "max_cells", "value_range", "p") if k in params}
    kw["partition"] = partition
    return kw


def run_scenario(cfg: RunConfig, spec) -> hn.PropertyReport:
    """Run one scenario; harness failures come back as failed reports."""
    try:
        return _dispatch(cfg, spec)
    except (hn.ScenarioError, hn.InvalidScenarioError, DomainError) as exc:
        tol = spec.tolerance if spec.tolerance is not None else hn.EXACT_TOL
        return hn.PropertyReport(spec.id, spec.kind, 0, math.inf, tol, False,
                                 details={"error": f"{type(exc).__name__}: {exc}"})


def _dispatch(cfg: RunConfig, spec) -> hn.PropertyReport:
    kind, prm, tol = spec.kind, spec.params, spec.tolerance
    quad = cfg.quadruple(spec.quadruple).build() if spec.quadruple else None
    dom = cfg.domain(spec.domain) if spec.domain else None
    rng = np.random.default_rng(spec.seed)
    common = dict(scenario_id=spec.id, tolerance=tol)

    if kind == "necessity_growth":
        p = spec.typed_params()
        h = p.generator.build() if p.generator else None
        return hn.run_necessity_growth(p.p, p.steps, h, p.expect, scenario_id=spec.id)
    if kind == "necessity_delta_infinite":
        p = spec.typed_params()
        expect = None if p.expect is None else p.expect
        return hn.run_necessity_delta_infinite(p.generator.build(), expect, scenario_id=spec.id)

    if kind == "translation_invariance":
        p = spec.typed_params()
        grid = make_box_grid(dom.dimension, dom.bounds, dom.resolution)
        f = _grid_function(grid, p.function, rng)
        return hn.run_invariance(ValuationFunctional(quad, "grid"), "translation", p.shift, f, tol, spec.id)
    if kind == "rotation_invariance":
        p = spec.typed_params()
        sq = make_sphere_grid(dom.dimension, dom.order)
        f = _sphere_function(sq, p.function, rng)
        theta = _rotation(p.rotation, dom.dimension, rng)
        return hn.run_invariance(ValuationFunctional(quad, "sphere"), "rotation", theta, f, tol, spec.id)

    partition = lat.make_partition(dom.measures, dom.infinite_total) if dom is not None else None
    phi = ValuationFunctional(quad) if quad is not None else None

    if kind == "continuity":
        p = spec.typed_params()
        part = partition or hn.random_partition(rng, p.cells, p.cells)
        f = (lat.constant(part, 0) if p.target == "zero"
             else hn.random_function(rng, part, p.value_range))
        make_rule = hn.dyadic_rule if p.rule == "dyadic" else hn.harmonic_rule
        return hn.run_continuity(phi, f, make_rule(f, p.bump_cells), p.steps, **common)
    if kind == "characteristic_formula":
        return hn.run_characteristic(phi, spec.trials, spec.seed, value_range=prm["value_range"],
                                     refine=prm["refine"], **common)

    draw = _draw_kwargs(prm, partition)
    if kind == "valuation_law":
        transform = _TRANSFORMS.get(prm["transform"])
        return hn.run_valuation_law(phi, spec.trials, spec.seed, oracle_every=prm["oracle_every"],
                                    refine=prm["refine"], transform=transform, **draw, **common)
    if kind == "oracle_equivalence":
        return hn.run_oracle_trials(phi, spec.trials, spec.seed, refine=prm["refine"], **draw, **common)
    if kind == "times_i_lattice":
        draw.pop("p", None)
        return hn.run_times_i_lattice(spec.trials, spec.seed, refine=prm["refine"], **draw, **common)
    runner = {
        "re_im_split": hn.run_re_im_split,
        "imaginary_rotation": hn.run_imaginary_rotation,
        "component_split": hn.run_component_split,
    }.get(kind)
    if runner is not None:
        return runner(phi, spec.trials, spec.seed, refine=prm["refine"], **draw, **common)
    if kind == "refinement_invariance":
        return hn.run_refinement_invariance(phi, spec.trials, spec.seed, **draw, **common)
    raise hn.InvalidScenarioError(f"unhandled kind {kind!r}")


def _timed(args):
    cfg, spec = args
    t0 = time.perf_counter()
    report = run_scenario(cfg, spec)
    return report, time.perf_counter() - t0


def run_suite(cfg: RunConfig, jobs: int = 1, seed: int | None = None) -> RunSummary:
    """Run every scenario. ``seed`` overrides all scenario seeds when given."""
    specs = [s.model_copy(update={"seed": seed}) if seed is not None else s for s in cfg.scenarios]
    work = [(cfg, s) for s in specs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_timed, work))
    else:
        results = [_timed(w) for w in work]
    results.sort(key=lambda rt: rt[0].scenario_id)
    return RunSummary([r for r, _ in results], {r.scenario_id: t for r, t in results})


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _finite(obj.item())
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def summary_to_json(summary: RunSummary) -> dict:
    rows = []
    for r in summary.reports:
        d = r.to_dict()
        d["wall_seconds"] = summary.wall_seconds.get(r.scenario_id)
        rows.append(d)
    return _finite({"overall_pass": summary.overall_pass, "scenarios": rows})


def csv_rows(summary: RunSummary):
    for r in summary.reports:
        yield [r.scenario_id, r.kind, r.trials, repr(float(r.max_deviation)), repr(float(r.tolerance)),
               "true" if r.passed else "false"]


def write_reports(summary: RunSummary, out_dir, json_name="report.json", csv_name="report.csv"):
    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / json_name, "w", encoding="utf-8") as fh:
            json.dump(summary_to_json(summary), fh, indent=2)
        with open(out / csv_name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            w.writerows(csv_rows(summary))
    except OSError as exc:
        raise ReportWriteError(f"cannot write reports to {out_dir}: {exc}") from exc
    return out / json_name, out / csv_name
