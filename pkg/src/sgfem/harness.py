"""Error norms, convergence studies, run-time tables and CSV export."""

from __future__ import annotations

import copy
import csv
import json
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np
from scipy.integrate import trapezoid

from .constitutive import PULLOUT_TABLE, as_params
from .pullout import MIXED, NewtonConfig, PulloutDomain, solve_pullout
from .shear import (CASE_D, CASE_T, ShearCase, _family_of, analytic_shear, default_material,
                    solve_shear_1d, solve_shear_mixed_1d)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 201
SHEAR_PROBLEMS = {"shearD": CASE_D, "shearT": CASE_T}
PULLOUT = "pullout"
PROBLEMS = (*SHEAR_PROBLEMS, PULLOUT)
CONVERGENCE_COLUMNS = ("problem", "family", "n_elem", "dofs", "l1_error", "runtime_s")
BENCH_COLUMNS = ("problem", "family", "nodes", "dofs", "runtime_s")


def l1_error(ref, sim) -> float:
    """Trapezoid-rule L1 distance of two profiles sampled at the same ``N`` uniform
    stations of the unit interval (``dx = 1/(N-1)``)."""
    ref = np.asarray(ref, dtype=float).ravel()
    sim = np.asarray(sim, dtype=float).ravel()
    if ref.shape != sim.shape:
        raise ValueError(f"profile lengths differ: {ref.size} vs {sim.size}")
    if ref.size < 2:
        raise ValueError("need at least two samples")
    return float(trapezoid(np.abs(ref - sim), dx=1.0 / (ref.size - 1)))


def unit_stations(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


@dataclass(frozen=True)
class ConvergenceRecord:
    problem: str
    family: str
    n_elem: int
    dofs: int
    l1_error: float
    runtime_s: float

    def __post_init__(self):
        if self.dofs < 1:
            raise ValueError("dofs must be >= 1")
        if not self.l1_error >= 0:
            raise ValueError(f"l1_error must be non-negative, got {self.l1_error}")


class StudyError(RuntimeError):
    """A solve inside a study failed; ``cell`` names the failing (problem, family, n_elem)."""

    def __init__(self, cell, cause):
        super().__init__(f"solve failed for problem={cell[0]} family={cell[1]} "
                         f"n_elem={cell[2]}: {cause}")
        self.cell = cell


# ---------------------------------------------------------------------------
# configuration

_FAMILY_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": ["lagrange", "hermite", "bspline", "mixed"]},
        "degree": {"type": ["integer", "null"], "minimum": 1, "maximum": 8},
    },
    "required": ["family"],
    "additionalProperties": False,
}

RUN_CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "problem": {"enum": list(PROBLEMS)},
        "material": {
            "oneOf": [
                {"type": "object",
                 "properties": {"E": {"type": "number", "exclusiveMinimum": 0},
                                "nu": {"type": "number", "exclusiveMinimum": -1,
                                       "exclusiveMaximum": 0.5},
                                "lc": {"type": "number", "minimum": 0}},
                 "required": ["E", "nu"], "additionalProperties": False},
                {"type": "object",
                 "patternProperties": {"^c[1-7]$": {"type": "number"}},
                 "properties": {"c2": {"type": "number", "exclusiveMinimum": 0}},
                 "required": ["c1", "c2"], "additionalProperties": False},
            ]
        },
        "geometry": {
            "type": "object",
            "properties": {
                "H": {"type": "number", "exclusiveMinimum": 0},
                "load": {"type": "number"},
                "r_in": {"type": "number", "exclusiveMinimum": 0},
                "R": {"type": "number", "exclusiveMinimum": 0},
                "u_p": {"type": "number"},
                "measure": {"enum": ["r", "1"]},
                "clamp_outer_slope": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "families": {"type": "array", "items": _FAMILY_SCHEMA, "minItems": 1},
        "elements": {"type": "array", "items": {"type": "integer", "minimum": 1},
                     "minItems": 1},
        "reference_elements": {"type": "integer", "minimum": 1},
        "penalty": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "newton": {
            "type": "object",
            "properties": {
                "max_iter": {"type": "integer", "minimum": 1},
                "rtol": {"type": "number", "minimum": 0},
                "atol": {"type": "number", "minimum": 0},
                "stol": {"type": "number", "minimum": 0},
                "max_halvings": {"type": "integer", "minimum": 0},
                "initial_guess": {"enum": ["lift", "log"]},
            },
            "additionalProperties": False,
        },
        "samples": {"type": "integer", "minimum": 2},
        "dof_target": {"type": "integer", "minimum": 1},
        "repeats": {"type": "integer", "minimum": 1},
        "workers": {"type": "integer", "minimum": 1},
        "output": {
            "type": "object",
            "properties": {"dir": {"type": "string"},
                           "convergence": {"type": "string"},
                           "bench": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "required": ["problem"],
    "additionalProperties": False,
}

_DEFAULT_FAMILIES = {
    "shear": [{"family": "hermite"}, {"family": "bspline", "degree": 2},
              {"family": "mixed", "degree": 1}],
    PULLOUT: [{"family": "lagrange", "degree": 2}, {"family": "hermite"},
              {"family": "mixed", "degree": 1}, {"family": "bspline", "degree": 2}],
}


@dataclass
class RunConfig:
    problem: str
    material: dict | None = None
    geometry: dict = field(default_factory=dict)
    families: list = field(default_factory=list)
    elements: list = field(default_factory=list)
    reference_elements: int = 5000
    penalty: float | None = None
    newton: dict = field(default_factory=dict)
    samples: int = DEFAULT_SAMPLES
    dof_target: int = 106
    repeats: int = 5
    workers: int = 1
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Validate against ``RUN_CONFIG_SCHEMA`` and fill defaults."""
        jsonschema.validate(data, RUN_CONFIG_SCHEMA)
        data = copy.deepcopy(data)
        problem = data["problem"]
        key = PULLOUT if problem == PULLOUT else "shear"
        data.setdefault("families", copy.deepcopy(_DEFAULT_FAMILIES[key]))
        data.setdefault("elements", [5, 50, 500] if problem == PULLOUT else [8, 16, 32, 64, 128])
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def params(self):
        if self.material is not None:
            return as_params(self.material)
        if self.problem == PULLOUT:
            return PULLOUT_TABLE
        return default_material(SHEAR_PROBLEMS[self.problem])

    def shear_case(self) -> ShearCase:
        tag = SHEAR_PROBLEMS[self.problem]
        default = ShearCase.default(tag)
        return ShearCase(tag, float(self.geometry.get("load", default.load)),
                         float(self.geometry.get("H", default.H)))

    def pullout_domain(self) -> PulloutDomain:
        g = self.geometry
        R = float(g.get("R", 1.0))
        return PulloutDomain(float(g.get("r_in", R / 100.0)), R, float(g.get("u_p", 0.1)),
                             g.get("measure", "r"))

    def newton_config(self) -> NewtonConfig:
        return NewtonConfig(**self.newton)


# ---------------------------------------------------------------------------
# single solves, sampled on the normalized coordinate


def solve_profile(cfg: RunConfig, family: str, degree: int | None, n_elem: int):
    """Solve one cell; returns ``(u at the N unit stations, dofs, solution, extra)``."""
    t = unit_stations(cfg.samples)
    params = cfg.params()
    if cfg.problem == PULLOUT:
        dom = cfg.pullout_domain()
        sol, report = solve_pullout(family, n_elem, dom, params, cfg.newton_config(), degree,
                                    bool(cfg.geometry.get("clamp_outer_slope", False)))
        if not report.converged:
            raise RuntimeError(f"Newton did not converge in {report.iterations} iterations")
        return sol.evaluate(dom.r_in + (dom.R - dom.r_in) * t), sol.info["n_dofs"], sol, report
    case = cfg.shear_case()
    if family == MIXED:
        sol = solve_shear_mixed_1d(n_elem, case, params, p=degree or 1)
    elif family == "lagrange":
        raise ValueError("the shear benchmark needs a C1 family (hermite, bspline) or mixed")
    else:
        sol = solve_shear_1d(_family_of(family, degree), n_elem, case, params, K=cfg.penalty)
    return sol.evaluate(case.H * t), sol.n_dofs, sol, None


def reference_profile(cfg: RunConfig, family: str, degree: int | None) -> np.ndarray:
    """Closed form for shear; the same-family ``reference_elements`` solve for pull-out."""
    if cfg.problem == PULLOUT:
        return solve_profile(cfg, family, degree, cfg.reference_elements)[0]
    case = cfg.shear_case()
    return analytic_shear(case, cfg.params()).u(case.H * unit_stations(cfg.samples))


def convergence_study(cfg: RunConfig) -> list[ConvergenceRecord]:
    """One record per (family, n_elem), errors against the reference on N stations."""
    cells = [(f["family"], f.get("degree"), n) for f in cfg.families for n in cfg.elements]

    def reference(fam):
        family, degree = fam
        try:
            return fam, reference_profile(cfg, family, degree)
        except Exception as exc:
            raise StudyError((cfg.problem, family, cfg.reference_elements), exc) from exc

    def run(cell):
        family, degree, n = cell
        try:
            t0 = time.perf_counter()
            u, dofs, _, _ = solve_profile(cfg, family, degree, n)
            elapsed = time.perf_counter() - t0
        except Exception as exc:
            raise StudyError((cfg.problem, family, n), exc) from exc
        return ConvergenceRecord(cfg.problem, family, n, int(dofs),
                                 l1_error(refs[(family, degree)], u), elapsed)

    fams = list(dict.fromkeys((f["family"], f.get("degree")) for f in cfg.families))
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        refs = dict(pool.map(reference, fams))
        records = list(pool.map(run, cells))
    for r in records:
        logger.info("%s %s n=%d dofs=%d L1=%.3e", r.problem, r.family, r.n_elem, r.dofs,
                    r.l1_error)
    return records


# ---------------------------------------------------------------------------
# run-time table


def _n_dofs(problem: str, family: str, degree: int | None, n: int) -> int:
    if family == "hermite":
        return 2 * (n + 1)
    if family == "bspline":
        return n + (degree or 2)
    if family == MIXED:
        return 3 * ((degree or 1) * n + 1)
    return (degree or 2) * n + 1


def elements_for_dofs(problem: str, family: str, degree: int | None, target: int) -> int:
    """Element count whose DOF total is closest to ``target`` (ties go to the coarser mesh)."""
    best = min(range(1, 4 * target + 2),
               key=lambda n: (abs(_n_dofs(problem, family, degree, n) - target), n))
    return best


@dataclass(frozen=True)
class BenchRow:
    problem: str
    family: str
    nodes: int
    dofs: int
    runtime_s: float


def run_benchmark(cfg: RunConfig) -> list[BenchRow]:
    """Median wall time of ``cfg.repeats`` solves per family after one warm-up,
    at the element count closest to ``cfg.dof_target`` DOFs."""
    rows = []
    for fam in cfg.families:
        family, degree = fam["family"], fam.get("degree")
        n = elements_for_dofs(cfg.problem, family, degree, cfg.dof_target)
        solve_profile(cfg, family, degree, n)
        times = []
        dofs = 0
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            _, dofs, _, _ = solve_profile(cfg, family, degree, n)
            times.append(time.perf_counter() - t0)
        rows.append(BenchRow(cfg.problem, family, n + 1, int(dofs), statistics.median(times)))
    return rows


# ---------------------------------------------------------------------------
# CSV export


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, columns, rows, comments=()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_convergence_csv(records, path, samples: int = DEFAULT_SAMPLES) -> Path:
    rows = [tuple(getattr(r, c) for c in CONVERGENCE_COLUMNS) for r in records]
    return write_csv(path, CONVERGENCE_COLUMNS, rows, comments=[f"samples: {samples}"])


def write_bench_csv(rows, path) -> Path:
    return write_csv(path, BENCH_COLUMNS, [tuple(asdict(r).values()) for r in rows])


def read_csv(path):
    """Header and rows of a CSV written here; comment lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, list(reader)


def write_profile_csv(path, x, u, du=None, coordinate: str = "y") -> Path:
    cols = [coordinate, "u"] + ([] if du is None else ["du"])
    data = [x, u] + ([] if du is None else [du])
    return write_csv(path, cols, zip(*(np.asarray(d, dtype=float) for d in data)))


def write_newton_csv(report, path) -> Path:
    return write_csv(path, ("iter", "norm"), [(i, float(n)) for i, n in report.to_rows()])


def write_field_csv(sol2d, path) -> Path:
    return write_csv(path, ("x", "y", "u_x", "u_y"), sol2d.field_rows())
