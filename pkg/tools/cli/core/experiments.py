"""
Experiment runner

シナリオの宣言から Lagrangian・イソトピー・パッチを遅延生成し、実験ごとに
不変量チェック {invariant, value, tolerance, passed} を記録する。
数値エラー (GeometryError と線形代数の破綻) は実験単位で失敗レコードに変換し、他の実験は続行する。
"""

import contextvars
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from services.common.core.run_context import experiment_scope, set_scenario
from services.common.models import scenario as schema
from services.geometry.config import config, overridden
from services.geometry.core.exceptions import ArgumentError, GeometryError, TheoremCheckError
from services.geometry.curves import Arc, BasePath, Composite, ConstantPath, Segment, ushape
from services.geometry.disc_area import (
    DiscPatch,
    TriangleSetup,
    area_difference_check,
    constant_disc,
    disc_area,
    fiber_annulus,
    fiber_triangle,
    polar_disc,
    triangle_split_check,
)
from services.geometry.fibration import (
    TransportOptions,
    conic_moment,
    horizontal_lift,
    monodromy,
    transport_rows,
)
from services.geometry.grading import (
    GradedLagrangian,
    alpha_hor,
    bigon_relation,
    degree,
    degree_details,
    grade,
    grade_near,
    horizontal_probe,
    residue,
)
from services.geometry.isotopy import LagrangianIsotopy, make_isotopy
from services.geometry.lagrangians import (
    FiberedLagrangian,
    IntersectionPoint,
    find_intersections,
    make_fiber,
    vertical_tangent,
)
from services.geometry.models import ModelSpec, PointY, TangentVec, make_model

logger = logging.getLogger("lglab.cli.experiments")


# =============================================================================
# Records
# =============================================================================


@dataclass(frozen=True)
class Check:
    invariant: str
    value: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class Summary:
    """summary.csv の1行分 (実験名を除く)"""

    name: str
    value: float
    residual: float
    tolerance: float


@dataclass
class ExperimentRecord:
    name: str
    kind: str
    inputs: Dict[str, Any]
    values: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    summary: Optional[Summary] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(check.passed for check in self.checks)


def within(invariant: str, value: float, tolerance: float) -> Check:
    value = float(value)
    return Check(invariant, value, float(tolerance), math.isfinite(value) and abs(value) <= tolerance)


def exact(invariant: str, difference: int) -> Check:
    return Check(invariant, float(difference), 0.0, difference == 0)


# =============================================================================
# Builders
# =============================================================================


def build_curve(spec: schema.CurveSpec) -> BasePath:
    domain = spec.domain or (0.0, 1.0)
    if spec.kind == "segment":
        path = Segment(spec.start, spec.end, domain)
    elif spec.kind == "arc":
        path = Arc(spec.center, spec.radius, spec.theta_start, spec.theta_end, domain)
    elif spec.kind == "constant":
        path = ConstantPath(spec.value, domain)
    elif spec.kind == "ushape":
        path = ushape(spec.angle_in, spec.angle_out, spec.radius, spec.far_radius, spec.fillet)
    else:
        path = Composite([build_curve(piece) for piece in spec.pieces], origin=spec.origin)
    return path.rotated(spec.rotate) if spec.rotate else path


def build_lagrangian(
    model: ModelSpec, spec: schema.LagrangianSpec, name: str, options: TransportOptions
) -> FiberedLagrangian:
    curve = build_curve(spec.curve)
    f = spec.fiber
    c0 = f.c0 if f.c0 is not None else complex(curve.point(0.0))
    fiber = make_fiber(model, f.kind, c0, radius=f.r, s_range=tuple(f.s_range), pitch=f.pitch, angle=f.angle)
    # trajectories are integrated on demand, in batches
    return FiberedLagrangian(model, curve, fiber, options, name=name, warm=False)


def _take(params: Dict[str, Any], allowed: Sequence[str], factory: str) -> Dict[str, Any]:
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ArgumentError(f"{factory} does not take {', '.join(unknown)}")
    return dict(params)


def build_patch(spec: schema.PatchSpec, model: ModelSpec, options: TransportOptions) -> DiscPatch | TriangleSetup:
    params = spec.params
    if spec.factory == "polar_disc":
        kw = _take(params, ("radius",), spec.factory)
        return polar_disc(float(kw.get("radius", 1.0)), options)
    if spec.factory == "fiber_annulus":
        kw = _take(params, ("c", "inner", "outer"), spec.factory)
        return fiber_annulus(
            schema.parse_complex(kw.get("c", 1.0)), float(kw.get("inner", 1.0)), float(kw.get("outer", 2.0))
        )
    if spec.factory == "constant_disc":
        kw = _take(params, ("point",), spec.factory)
        if "point" not in kw:
            raise ArgumentError("constant_disc needs a point")
        return constant_disc(model, [schema.parse_complex(v) for v in kw["point"]])
    kw = _take(params, ("epsilon", "depth", "height", "radius", "pitch", "samples"), spec.factory)
    if "samples" in kw:
        kw["samples"] = int(kw["samples"])
    return fiber_triangle(options=options, **kw)


def _disc_of(built: DiscPatch | TriangleSetup) -> DiscPatch:
    return built.u if isinstance(built, TriangleSetup) else built


def _area_oracle(spec: schema.PatchSpec) -> Optional[float]:
    params = spec.params
    if spec.factory == "polar_disc":
        return math.pi * float(params.get("radius", 1.0)) ** 2
    if spec.factory == "fiber_annulus":
        c = abs(schema.parse_complex(params.get("c", 1.0)))
        a, b = float(params.get("inner", 1.0)), float(params.get("outer", 2.0))
        # z₁-annulus plus its image under z₂ = c/z₁
        return math.pi * (b**2 - a**2) + math.pi * c**2 * (1.0 / a**2 - 1.0 / b**2)
    if spec.factory == "constant_disc":
        return 0.0
    return None


# =============================================================================
# Lab
# =============================================================================


class Lab:
    """
    シナリオ1本分の実行コンテキスト

    Lagrangian・グレーディング・イソトピーは名前ごとに1度だけ生成し、
    ワーカースレッド間で共有する。
    """

    def __init__(self, scenario: schema.Scenario, seed: Optional[int] = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else int(seed)
        self.model = make_model(scenario.model)
        integrator = scenario.integrator
        self.options = TransportOptions.from_config(
            step=integrator.step,
            fiber_tol=integrator.fiber_tol,
            max_newton_iters=integrator.max_newton_iters,
        )
        self._lock = threading.RLock()
        self._lagrangians: Dict[str, FiberedLagrangian] = {}
        self._graded: Dict[str, GradedLagrangian] = {}
        self._isotopies: Dict[str, LagrangianIsotopy] = {}
        self.paths: List[tuple[str, BasePath]] = []
        self.intersections: List[complex] = []
        self.patches: List[tuple[str, DiscPatch]] = []

    def rng(self, index: int) -> np.random.Generator:
        # per-experiment stream: independent of worker scheduling
        return np.random.default_rng([self.seed, index])

    def lagrangian(self, name: str) -> FiberedLagrangian:
        with self._lock:
            if name not in self._lagrangians:
                spec = self.scenario.lagrangians[name]
                self._lagrangians[name] = build_lagrangian(self.model, spec, name, self.options)
            return self._lagrangians[name]

    def graded(self, name: str) -> GradedLagrangian:
        with self._lock:
            if name not in self._graded:
                g = self.scenario.lagrangians[name].grading
                self._graded[name] = grade(
                    self.lagrangian(name), g.fiber_anchor, g.base_anchor, g.anchor_params.t, g.anchor_params.s
                )
            return self._graded[name]

    def isotopy(self, name: str) -> LagrangianIsotopy:
        with self._lock:
            if name not in self._isotopies:
                spec = self.scenario.isotopies[name]
                target = build_curve(spec.target) if isinstance(spec.target, schema.CurveSpec) else spec.target
                self._isotopies[name] = make_isotopy(
                    self.lagrangian(spec.lagrangian), target, tuple(spec.delta_range), spec.bump_width
                )
            return self._isotopies[name]

    def patch(self, spec: schema.PatchSpec) -> DiscPatch | TriangleSetup:
        built = build_patch(spec, self.model, self.options)
        disc = _disc_of(built)
        if disc.model.id != self.model.id:
            raise ArgumentError(f"{spec.factory} lives in {disc.model.id}, scenario model is {self.model.id}")
        return built

    def note_path(self, label: str, path: BasePath) -> None:
        with self._lock:
            self.paths.append((label, path))

    def note_patch(self, label: str, disc: DiscPatch) -> None:
        with self._lock:
            self.patches.append((label, disc))

    def note_intersections(self, points: Sequence[IntersectionPoint]) -> None:
        with self._lock:
            self.intersections.extend(complex(p.base_value) for p in points)


def _point(model: ModelSpec, coords: Sequence[complex]) -> np.ndarray:
    z = np.asarray(coords, dtype=complex)
    if z.shape != (model.dim_total,):
        raise ArgumentError(f"{model.id} points have {model.dim_total} coordinates, got {len(coords)}")
    return z


# =============================================================================
# Runners
# =============================================================================


def _run_transport(lab: Lab, exp: schema.TransportExperiment, rng, record: ExperimentRecord) -> None:
    model = lab.model
    path = build_curve(exp.path)
    lab.note_path(exp.name, path)
    lo, hi = path.domain
    t0 = lo if exp.t0 is None else exp.t0
    t1 = hi if exp.t1 is None else exp.t1
    start = _point(model, exp.start)
    a, b = sorted((t0, t1))
    nodes = path.nodes(config.LAGRANGIAN_GRID_STEP, a, b)
    end, recorded = transport_rows(model, path, t0, t1, start[None, :], lab.options, nodes=nodes)
    order = np.array(sorted({float(n) for n in nodes}, reverse=t1 < t0))
    drift = float(np.max(np.abs(model.value(recorded[:, 0, :]) - path.point(order))))
    end = end[0]

    record.values.update({"t0": t0, "t1": t1, "end": end.tolist(), "fiber_drift": drift})
    record.checks.append(within("fiber_constraint", drift, lab.options.fiber_tol))
    if model.id == "conic":
        shift = abs(float(conic_moment(end) - conic_moment(start)))
        record.values["moment_shift"] = shift
        record.checks.append(within("moment_conservation", shift, config.MOMENT_TOL))
    if exp.expected is not None:
        residual = float(np.linalg.norm(end - _point(model, exp.expected)))
        record.values["oracle_residual"] = residual
        record.checks.append(within("transport_oracle", residual, config.ORACLE_TOL))
        record.summary = Summary("transport_residual", residual, drift, config.ORACLE_TOL)
    else:
        record.summary = Summary("fiber_drift", drift, drift, lab.options.fiber_tol)


def _run_monodromy(lab: Lab, exp: schema.MonodromyExperiment, rng, record: ExperimentRecord) -> None:
    model = lab.model
    loop = build_curve(exp.loop)
    lab.note_path(exp.name, loop)
    start = _point(model, exp.start)
    result = monodromy(model, loop, PointY(start), lab.options).coords
    expected = start if exp.expected is None else _point(model, exp.expected)
    residual = float(np.linalg.norm(result - expected))
    drift = abs(complex(model.value(result)) - complex(loop.point(loop.domain[0])))

    record.values.update({"result": result.tolist(), "residual": residual, "fiber_drift": drift})
    record.checks.append(within("monodromy_oracle", residual, config.ORACLE_TOL))
    record.checks.append(within("fiber_constraint", drift, lab.options.fiber_tol))
    if model.id == "conic":
        shift = abs(float(conic_moment(result) - conic_moment(start)))
        record.checks.append(within("moment_conservation", shift, config.MOMENT_TOL))
    record.summary = Summary("monodromy_residual", residual, drift, config.ORACLE_TOL)


def _run_flux(lab: Lab, exp: schema.FluxExperiment, rng, record: ExperimentRecord) -> None:
    iso = lab.isotopy(exp.isotopy)
    L = iso.lagrangian
    lo_t, hi_t = L.curve.domain
    lo_s, hi_s = L.fiber_range
    a, b = iso.homotopy.delta_range
    t_loop = min(max(0.5 * (a + b), lo_t), hi_t)

    summary = None
    if L.fiber_periodic:
        loop = iso.fiber_loop(t_loop)
        fluxes = [iso.flux_loop_integral(s, loop) for s in exp.s_values]
        worst = max(abs(v) for v in fluxes)
        record.values["loop_flux"] = [[s, v] for s, v in zip(exp.s_values, fluxes)]
        record.checks.append(within("loop_flux", worst, config.POTENTIAL_TOL))
        summary = Summary("loop_flux", worst, worst, config.POTENTIAL_TOL)

    if lab.model.fiber_dim > 0:
        n = exp.vertical_samples
        params = np.column_stack([rng.uniform(lo_t, hi_t, n), rng.uniform(lo_s, hi_s, n)])
        s_values = rng.uniform(0.0, 1.0, n)
        directions = np.tile([0.0, 1.0], (n, 1))
        density = iso.flux_density(params, directions, s_values)
        worst = float(np.max(np.abs(density[np.arange(n), np.arange(n)])))
        record.values["vertical_flux_max"] = worst
        record.checks.append(within("vertical_flux", worst, config.VERTICAL_FLUX_TOL))

    base = (0.0, 0.0 if lo_s <= 0.0 <= hi_s else lo_s)
    p = tuple(exp.potential_point) if exp.potential_point else (t_loop, 0.5 * (lo_s + hi_s))
    first = iso.potential(p, base, path=[base, (base[0], p[1]), p], check=False)
    second = iso.potential(p, base, path=[base, (p[0], base[1]), p], check=False)
    gap = abs(first - second)
    record.values.update({"potential": first, "potential_transposed": second})
    record.checks.append(within("potential_path_independence", gap, config.POTENTIAL_TOL))
    record.summary = summary or Summary("potential_path_independence", first, gap, config.POTENTIAL_TOL)


def _run_grade(lab: Lab, exp: schema.GradeExperiment, rng, record: ExperimentRecord) -> None:
    Lg = lab.graded(exp.lagrangian)
    L = Lg.lagrangian
    model = lab.model
    lo_t, hi_t = L.curve.domain
    lo_s, hi_s = L.fiber_range
    n = exp.samples
    ts = rng.uniform(lo_t, hi_t, n)
    ss = rng.uniform(lo_s, hi_s, n) if model.fiber_dim > 0 else np.zeros(n)
    if model.fiber_dim > 0:
        h = config.FD_STEP
        L.trajectories(np.concatenate([ss, ss - h, ss + h]))

    split, horizontal, probe = [], [], []
    for t, s in zip(ts.tolist(), ss.tolist()):
        split.append(abs(Lg.phase(t, s) - Lg.vertical_phase(t, s) * Lg.base_phase(t)))
        z = L.evaluate(t, s)
        p = PointY(z)
        e = horizontal_lift(model, p, complex(L.curve.derivative(t)))
        horizontal.append(abs(alpha_hor(model, p, e) - Lg.base_phase(t)))
        if model.fiber_dim > 0:
            vertical = [TangentVec(p, vertical_tangent(L, t, s))]
            kick = rng.normal(size=model.dim_total) + 1j * rng.normal(size=model.dim_total)
            kick *= 0.25 / (np.linalg.norm(kick) * np.linalg.norm(model.gradient(z)))
            plain = residue(model, p, vertical)
            other = residue(model, p, vertical, 2.0 * horizontal_probe(model, z) + kick)
            probe.append(abs(plain - other) / max(1.0, abs(plain)))

    worst = float(max(split))
    record.values.update({"phase_splitting_max": worst, "horizontal_phase_max": float(max(horizontal))})
    record.checks.append(within("phase_splitting", worst, config.PHASE_SPLIT_TOL))
    record.checks.append(within("horizontal_phase", max(horizontal), config.PHASE_SPLIT_TOL))
    if probe:
        record.values["residue_probe_max"] = float(max(probe))
        record.checks.append(within("residue_probe_independence", max(probe), config.RESIDUE_PROBE_TOL))

    if exp.lift_samples:
        gaps = []
        for t, s in zip(ts[: exp.lift_samples].tolist(), ss[: exp.lift_samples].tolist()):
            gaps.append(abs(np.exp(2j * math.pi * Lg.lift(t, s)) - Lg.phase(t, s)))
        record.values["lift_consistency_max"] = float(max(gaps))
        record.checks.append(within("lift_consistency", max(gaps), config.ANCHOR_TOL))
    record.summary = Summary("phase_splitting", worst, worst, config.PHASE_SPLIT_TOL)


def _variant_lagrangian(lab: Lab, name: str, phi: float, scale: float) -> FiberedLagrangian:
    spec = lab.scenario.lagrangians[name]
    curve = spec.curve.model_copy(update={"rotate": spec.curve.rotate + phi})
    fiber = spec.fiber.model_copy(update={"c0": None, "r": spec.fiber.r * scale})
    variant = spec.model_copy(update={"curve": curve, "fiber": fiber})
    return build_lagrangian(lab.model, variant, f"{name}~", lab.options)


def _degree_variants(lab: Lab, exp: schema.DegreeExperiment, rng, record: ExperimentRecord) -> None:
    """Rotated, rescaled and re-anchored copies of the pair; deg = fiber + base on each."""
    failures, worst, counted = 0, 0.0, 0
    for _ in range(exp.variants):
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        scale = float(rng.uniform(0.5, 2.0))
        shifts = rng.integers(-2, 3, size=4).tolist()
        try:
            graded = []
            for k, name in enumerate(exp.pair):
                g = lab.scenario.lagrangians[name].grading
                L = _variant_lagrangian(lab, name, phi, scale)
                graded.append(
                    grade_near(
                        L,
                        g.fiber_anchor + shifts[2 * k],
                        g.base_anchor + shifts[2 * k + 1] + phi / math.pi,
                        g.anchor_params.t,
                        g.anchor_params.s,
                    )
                )
            for p in find_intersections(graded[0].lagrangian, graded[1].lagrangian):
                details = degree_details(graded[0], graded[1], p)
                counted += 1
                worst = max(worst, details.residual)
                failures += details.degree != details.fiber_degree + details.base_degree
        except GeometryError as exc:
            logger.warning("degree variant failed: %s", exc, extra={"error": type(exc).__name__})
            failures += 1
    record.values.update({"variants": exp.variants, "variant_points": counted, "variant_residual_max": worst})
    record.checks.append(exact("degree_split_variants", failures))
    record.checks.append(within("degree_integrality_variants", worst, config.DEGREE_RESIDUAL_TOL))


def _run_degree(lab: Lab, exp: schema.DegreeExperiment, rng, record: ExperimentRecord) -> None:
    L0g, L1g = (lab.graded(name) for name in exp.pair)
    points = find_intersections(L0g.lagrangian, L1g.lagrangian)
    lab.note_intersections(points)
    if not points:
        raise TheoremCheckError(f"{exp.pair[0]} and {exp.pair[1]} do not intersect")
    details = [degree_details(L0g, L1g, p) for p in points]
    record.values["points"] = [
        {
            "base_value": p.base_value,
            "params0": list(p.params0),
            "params1": list(p.params1),
            "value": d.value,
            "degree": d.degree,
            "fiber_degree": d.fiber_degree,
            "base_degree": d.base_degree,
        }
        for p, d in zip(points, details)
    ]
    worst = max(d.residual for d in details)
    record.checks.append(within("degree_integrality", worst, config.DEGREE_RESIDUAL_TOL))
    record.checks.append(exact("degree_split", sum(d.degree != d.fiber_degree + d.base_degree for d in details)))

    degrees = [d.degree for d in details]
    if exp.expected is not None:
        mismatched = len(exp.expected) != len(degrees) or degrees != list(exp.expected)
        record.checks.append(exact("degree_expected", int(mismatched)))
    if exp.expected_split is not None:
        split = [(d.fiber_degree, d.base_degree, d.degree) for d in details]
        mismatched = split != [tuple(v) for v in exp.expected_split]
        record.checks.append(exact("degree_split_expected", int(mismatched)))
    if exp.anchor_shift:
        k = exp.anchor_shift
        p, d0 = points[0], degrees[0]
        moved = [
            degree(L0g, L1g.shifted(fiber=k), p) - (d0 + k),
            degree(L0g, L1g.shifted(base=k), p) - (d0 + k),
            degree(L0g.shifted(fiber=k), L1g, p) - (d0 - k),
        ]
        record.checks.append(exact("anchor_shift", sum(v != 0 for v in moved)))
    if exp.variants:
        _degree_variants(lab, exp, rng, record)
    record.summary = Summary("degree", degrees[0], worst, config.DEGREE_RESIDUAL_TOL)


def _run_bigon(lab: Lab, exp: schema.BigonExperiment, rng, record: ExperimentRecord) -> None:
    L0g, L1g = (lab.graded(name) for name in exp.pair)
    points = find_intersections(L0g.lagrangian, L1g.lagrangian)
    lab.note_intersections(points)
    if len(points) != 2:
        raise TheoremCheckError(f"a bigon needs two corners, found {len(points)}")
    rec = bigon_relation(L0g, L1g, points)
    record.values.update(
        {
            "degree_plus": rec.degree_plus,
            "degree_minus": rec.degree_minus,
            "fiber_degree_plus": rec.fiber_degree_plus,
            "fiber_degree_minus": rec.fiber_degree_minus,
            "fiber_degree_pulled_back": rec.fiber_degree_pulled_back,
            "lhs": rec.lhs,
            "rhs": rec.rhs,
            "monodromy_displacement": rec.monodromy_displacement,
            "pulled_back_point": rec.pulled_back_point.coords.tolist(),
            "c_plus": rec.c_plus,
        }
    )
    record.checks.append(exact("bigon_relation", rec.difference))
    if exp.expected_lhs is not None:
        record.checks.append(exact("bigon_lhs", rec.lhs - exp.expected_lhs))
    if exp.contractible:
        record.checks.append(within("monodromy_trivial", rec.monodromy_displacement, config.ORACLE_TOL))
        base_shift = (rec.degree_plus - rec.fiber_degree_plus) - (rec.degree_minus - rec.fiber_degree_minus)
        record.checks.append(exact("base_shift", base_shift - 1))
    record.summary = Summary("bigon_relation", rec.lhs, abs(rec.difference), 0.0)


def _run_disc_area(lab: Lab, exp: schema.DiscAreaExperiment, rng, record: ExperimentRecord) -> None:
    disc = _disc_of(lab.patch(exp.patch))
    lab.note_patch(exp.name, disc)
    area = disc_area(disc)
    expected = exp.expected if exp.expected is not None else _area_oracle(exp.patch)
    record.values["area"] = area
    residual = 0.0
    if expected is not None:
        residual = abs(area - expected)
        record.values["expected"] = expected
        record.checks.append(within("area_oracle", residual, config.AREA_IDENTITY_TOL))
    if disc.arcs:
        record.checks.append(within("boundary_fidelity", disc.boundary_deviation(), config.BOUNDARY_TOL))
    if not record.checks:
        record.checks.append(within("area_finite", 0.0 if math.isfinite(area) else math.inf, 0.0))
    record.summary = Summary("area", area, residual, config.AREA_IDENTITY_TOL)


def _run_area_difference(lab: Lab, exp: schema.AreaDifferenceExperiment, rng, record: ExperimentRecord) -> None:
    built = lab.patch(exp.patch)
    disc = _disc_of(built)
    lab.note_patch(exp.name, disc)
    if not 0 <= exp.arc < len(disc.arcs):
        raise ArgumentError(f"patch {disc.name} has no arc {exp.arc}")
    L = disc.arcs[exp.arc].target
    if exp.isotopy == "identity":
        iso = make_isotopy(L, L.curve, L.curve.domain)
    elif isinstance(built, TriangleSetup):
        if exp.arc != 0:
            raise ArgumentError("the triangle isotopy moves arc 0")
        iso = built.isotopy
    else:
        if exp.target is None:
            raise ArgumentError("a factory isotopy needs a target")
        iso = make_isotopy(L, exp.target, tuple(exp.delta_range), exp.bump_width)

    report = area_difference_check(disc, iso, exp.arc)
    record.values.update(
        {
            "area_u": report.area_u,
            "area_u_prime": report.area_u_prime,
            "boundary_term": report.boundary_term,
            "residual": report.residual,
        }
    )
    record.checks.append(within("area_identity", report.residual, config.AREA_IDENTITY_TOL))
    record.summary = Summary(
        "area_identity", report.area_u - report.area_u_prime, report.residual, config.AREA_IDENTITY_TOL
    )


def _run_triangle_split(lab: Lab, exp: schema.TriangleSplitExperiment, rng, record: ExperimentRecord) -> None:
    setup = lab.patch(exp.patch)
    if not isinstance(setup, TriangleSetup):
        raise ArgumentError("triangle_split needs the fiber_triangle factory")
    lab.note_patch(exp.name, setup.u)
    lab.note_patch(exp.name, setup.u_fiber)
    iso = setup.isotopy
    report = triangle_split_check(setup.u, iso, setup.u_fiber, 0, complex(-setup.epsilon))
    start, end = setup.u_reparametrized.arc_params(0)
    base_rep = iso.potential(end, start)
    area_rep = disc_area(setup.u_reparametrized)
    fidelity = max(setup.u.boundary_deviation(), setup.u_fiber.boundary_deviation())

    record.values.update(
        {
            "area_u": report.area_u,
            "area_u_fiber": report.area_u_prime,
            "boundary_term": report.boundary_term,
            "boundary_term_reparametrized": base_rep,
            "area_u_reparametrized": area_rep,
            "fiber_deviation": report.metadata["fiber_deviation"],
        }
    )
    record.checks.append(within("triangle_split", report.residual, config.AREA_IDENTITY_TOL))
    record.checks.append(within("fiber_containment", report.metadata["fiber_deviation"], config.FIBER_TOL))
    record.checks.append(within("base_term_invariance", base_rep - report.boundary_term, config.REPARAM_TOL))
    record.checks.append(within("reparametrized_area", area_rep - report.area_u, config.AREA_IDENTITY_TOL))
    record.checks.append(within("boundary_fidelity", fidelity, config.BOUNDARY_TOL))
    record.summary = Summary("triangle_split", report.area_u, report.residual, config.AREA_IDENTITY_TOL)


RUNNERS: Dict[str, Callable[[Lab, Any, np.random.Generator, ExperimentRecord], None]] = {
    "transport": _run_transport,
    "monodromy": _run_monodromy,
    "flux": _run_flux,
    "grade": _run_grade,
    "degree": _run_degree,
    "bigon": _run_bigon,
    "disc_area": _run_disc_area,
    "area_difference": _run_area_difference,
    "triangle_split": _run_triangle_split,
}


# =============================================================================
# Scheduling
# =============================================================================


def run_experiment(lab: Lab, exp: Any, index: int) -> ExperimentRecord:
    with experiment_scope(exp.name):
        record = ExperimentRecord(exp.name, exp.kind, exp.model_dump(exclude={"name", "kind"}))
        try:
            RUNNERS[exp.kind](lab, exp, lab.rng(index), record)
        except (GeometryError, np.linalg.LinAlgError, ArithmeticError) as exc:
            # numerical breakdowns fail this experiment only
            invariant = f"error:{type(exc).__name__}"
            logger.warning("experiment %s failed: %s", exp.name, exc, extra={"error": type(exc).__name__})
            record.error = str(exc)
            record.checks.append(Check(invariant, math.nan, 0.0, False))
            record.summary = Summary(invariant, math.nan, math.nan, 0.0)
        logger.info(
            "experiment %s %s",
            exp.name,
            "passed" if record.passed else "failed",
            extra={"kind": exp.kind, "checks": len(record.checks)},
        )
        return record


def run_scenario(
    scenario: schema.Scenario, seed: Optional[int] = None, workers: Optional[int] = None
) -> tuple[Lab, List[ExperimentRecord]]:
    """
    シナリオの全実験を実行する。

    設定の上書きはブロック内でのみ有効。結果は宣言順に並ぶ。
    """
    set_scenario(scenario.name)
    try:
        with overridden(dict(scenario.settings)):
            lab = Lab(scenario, seed)
            workers = workers or config.LAB_MAX_WORKERS
            experiments = list(scenario.experiments)
            if workers == 1:
                records = [run_experiment(lab, exp, i) for i, exp in enumerate(experiments)]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    futures = [
                        pool.submit(contextvars.copy_context().run, run_experiment, lab, exp, i)
                        for i, exp in enumerate(experiments)
                    ]
                    records = [future.result() for future in futures]
    finally:
        set_scenario(None)
    return lab, records
