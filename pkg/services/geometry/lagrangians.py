"""
Fibered Lagrangians.

A fibered Lagrangian is the union of the parallel transports of a fiber
Lagrangian ℓ ⊂ Y_{γ(0)} along a base curve γ. Points are addressed by the base
parameter t and the fiber parameter s. Trajectories t ↦ L(t, s) are integrated
once per s on a t-grid, cached, and interpolated with cubic Hermite splines
whose node derivatives are the exact horizontal lifts of γ'.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import subspace_angles

from services.geometry.config import config
from services.geometry.core.exceptions import (
    ArgumentError,
    FrameError,
    TransversalityError,
)
from services.geometry.core.trajectory_cache import TrajectoryCache
from services.geometry.curves import BasePath
from services.geometry.fibration import (
    TransportOptions,
    lift_rows,
    project_to_fiber,
    transport_rows,
)
from services.geometry.models import ModelSpec, PointY, TangentVec

logger = logging.getLogger("lglab.lagrangians")

FIBER_KINDS = ("circle", "real_ray", "spiral", "point")


@dataclass(frozen=True)
class FiberLagrangianParam:
    """
    Fiber Lagrangian ℓ ⊂ Y_{c0}, parametrised through the model's fiber chart w:

    - circle:   w = r·e^{is},                    s ∈ [0, 2π)
    - real_ray: w = e^{s},                       s ∈ s_range
    - spiral:   w = e^{(1 + i·pitch)s + i·angle}, s ∈ s_range
    - point:    the fiber itself (trivial_line)
    """

    kind: str
    c0: complex
    radius: float = 1.0
    s_range: tuple[float, float] = (-2.0, 2.0)
    pitch: float = 0.0
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in FIBER_KINDS:
            raise ArgumentError(f"unknown fiber kind {self.kind!r}")
        if self.kind == "circle" and self.radius <= 0:
            raise ArgumentError("circle radius must be positive")
        if self.kind in ("real_ray", "spiral") and not self.s_range[1] > self.s_range[0]:
            raise ArgumentError("empty fiber parameter range")

    @property
    def periodic(self) -> bool:
        return self.kind == "circle"

    @property
    def range(self) -> tuple[float, float]:
        if self.kind == "circle":
            return (0.0, 2.0 * math.pi)
        if self.kind == "point":
            return (0.0, 0.0)
        return (float(self.s_range[0]), float(self.s_range[1]))

    def coordinate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.kind == "circle":
            return self.radius * np.exp(1j * s)
        if self.kind == "real_ray":
            return np.exp(s).astype(complex)
        if self.kind == "spiral":
            return np.exp((1.0 + 1j * self.pitch) * s + 1j * self.angle)
        return np.zeros_like(s, dtype=complex)

    def evaluate(self, model: ModelSpec, s) -> np.ndarray:
        return model.fiber_point(self.coordinate(s), self.c0)


def make_fiber(model: ModelSpec, kind: str, c0: complex, **params) -> FiberLagrangianParam:
    """ファイバーLagrangianを生成し、モデルとの整合性を検証する。"""
    c0 = complex(c0)
    if (kind == "point") != (model.fiber_dim == 0):
        raise ArgumentError(f"fiber kind {kind!r} does not fit model {model.id}")
    if model.fiber_dim > 0 and float(model.critical_distance(np.array([c0]))[0]) < config.CRITICAL_CLEARANCE:
        raise ArgumentError(f"basepoint fiber over {c0} is singular")
    fiber = FiberLagrangianParam(kind=kind, c0=c0, **params)
    lo, hi = fiber.range
    probe = fiber.evaluate(model, np.linspace(lo, hi, 7))
    drift = float(np.max(np.abs(model.value(probe) - c0)))
    if drift > 1e-10 * max(1.0, abs(c0)):
        raise ArgumentError(f"fiber parametrization leaves the fiber (drift {drift:.3g})")
    return fiber


def _real(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag], axis=-1)


class Trajectory:
    """Transported fiber point t ↦ L(t, s) on the grid, with spline interpolation."""

    def __init__(self, model: ModelSpec, curve: BasePath, nodes: np.ndarray, values: np.ndarray):
        self.nodes = nodes
        self.values = values
        self._k = values.shape[-1]
        self._bounds = []
        self._splines = []
        for piece in curve.smooth_pieces():
            mask = (nodes >= piece.lo - 1e-12) & (nodes <= piece.hi + 1e-12)
            if np.count_nonzero(mask) < 2:
                continue
            x = nodes[mask]
            y = values[mask]
            dy = lift_rows(model, y, piece.derivative(x))
            self._bounds.append(x[0])
            self._splines.append(CubicHermiteSpline(x, _real(y), _real(dy), axis=0))
        self._bounds = np.asarray(self._bounds)

    def __call__(self, t: float) -> np.ndarray:
        k = int(np.clip(np.searchsorted(self._bounds, t, side="right") - 1, 0, len(self._splines) - 1))
        r = self._splines[k](t)
        return r[: self._k] + 1j * r[self._k :]


class FiberedLagrangian:
    """
    L = ⋃_t Φ_{γ(0)→γ(t)}(ℓ).

    The fiber-sample grid used by intersection search is integrated eagerly
    at construction; other fiber parameters are integrated on first use and
    kept in a synchronized LRU cache.
    """

    def __init__(
        self,
        model: ModelSpec,
        curve: BasePath,
        fiber: FiberLagrangianParam,
        options: TransportOptions | None = None,
        name: str = "L",
        grid_step: float | None = None,
        warm: bool = True,
    ):
        lo, hi = curve.domain
        if not lo <= 0.0 <= hi:
            raise ArgumentError(f"curve domain {curve.domain} must contain the basepoint t=0")
        gap = abs(curve.point(0.0) - fiber.c0)
        if gap > 1e-9:
            raise ArgumentError(f"fiber basepoint {fiber.c0} is not γ(0) = {curve.point(0.0)}")
        if (fiber.kind == "point") != (model.fiber_dim == 0):
            raise ArgumentError(f"fiber kind {fiber.kind!r} does not fit model {model.id}")
        self.model = model
        self.curve = curve
        self.fiber = fiber
        self.name = name
        self.options = options or TransportOptions.from_config()
        self.grid_step = grid_step or config.LAGRANGIAN_GRID_STEP
        self._cache: TrajectoryCache[Trajectory] = TrajectoryCache()
        if warm and model.fiber_dim > 0:
            self.trajectories(self.fiber_grid())

    def __repr__(self):
        return f"FiberedLagrangian({self.name}, {self.model.id}, fiber={self.fiber.kind})"

    # ----- parameters -----

    @property
    def fiber_range(self) -> tuple[float, float]:
        return self.fiber.range

    @property
    def fiber_periodic(self) -> bool:
        return self.fiber.periodic

    def fiber_grid(self, count: int | None = None) -> np.ndarray:
        if self.model.fiber_dim == 0:
            return np.zeros(1)
        count = count or config.FIBER_SAMPLES
        lo, hi = self.fiber_range
        return np.linspace(lo, hi, count, endpoint=not self.fiber_periodic)

    def normalize_fiber(self, s: float) -> float:
        if self.fiber_periodic:
            return float(np.mod(s, 2.0 * math.pi))
        return float(s)

    # ----- trajectories -----

    def _build(self, sigmas: np.ndarray) -> list[Trajectory]:
        z0 = self.fiber.evaluate(self.model, sigmas)
        lo, hi = self.curve.domain
        nodes = [np.zeros(1)]
        values = [z0[None]]
        if lo < 0.0:
            back = self.curve.nodes(self.grid_step, lo, 0.0)[::-1]
            _, rec = transport_rows(self.model, self.curve, 0.0, lo, z0, self.options, nodes=back)
            nodes.insert(0, back[1:][::-1])
            values.insert(0, rec[1:][::-1])
        if hi > 0.0:
            fwd = self.curve.nodes(self.grid_step, 0.0, hi)
            _, rec = transport_rows(self.model, self.curve, 0.0, hi, z0, self.options, nodes=fwd)
            nodes.append(fwd[1:])
            values.append(rec[1:])
        grid = np.concatenate(nodes)
        stacked = np.concatenate(values, axis=0)
        logger.debug(
            "integrated %d trajectories for %s", len(sigmas), self.name, extra={"nodes": len(grid)}
        )
        return [Trajectory(self.model, self.curve, grid, stacked[:, j, :]) for j in range(len(sigmas))]

    def trajectories(self, sigmas) -> list[Trajectory]:
        return self._cache.get_or_build(np.atleast_1d(sigmas), self._build)

    # ----- evaluation -----

    def _check_t(self, t: float) -> None:
        lo, hi = self.curve.domain
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise ArgumentError(f"t={t:g} outside curve domain {self.curve.domain}")

    def base_point(self, t: float) -> complex:
        return complex(self.curve.point(t))

    def evaluate_many(self, t: float, sigmas) -> np.ndarray:
        """L(t, s) for a batch of fiber parameters at one base parameter."""
        self._check_t(t)
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
        if self.model.fiber_dim == 0:
            return np.repeat(self.model.fiber_point(0.0, self.base_point(t))[None, :], len(sigmas), 0)
        if t == 0.0:
            return self.fiber.evaluate(self.model, sigmas)
        rows = np.stack([traj(t) for traj in self.trajectories(sigmas)])
        return project_to_fiber(self.model, rows, self.base_point(t), self.options, iters=2)

    def evaluate(self, t: float, s: float) -> np.ndarray:
        return self.evaluate_many(t, [s])[0]

    def evaluate_params(self, ts, sigmas) -> np.ndarray:
        """L(t_k, s_k) for paired parameters."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
        if self.model.fiber_dim > 0 and np.any(ts != 0.0):
            # one batch for every missing trajectory
            self.trajectories(np.unique(sigmas[ts != 0.0]))
        out = np.empty((len(ts), self.model.dim_total), dtype=complex)
        for k, (t, s) in enumerate(zip(ts, sigmas)):
            out[k] = self.evaluate(float(t), float(s))
        return out

    def evaluate_direct(self, t: float, sigmas) -> np.ndarray:
        """Transport σ(s) straight to t without touching the trajectory cache."""
        self._check_t(t)
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
        z0 = self.fiber.evaluate(self.model, sigmas)
        if t == 0.0 or self.model.fiber_dim == 0:
            return self.evaluate_many(t, sigmas) if self.model.fiber_dim == 0 else z0
        end, _ = transport_rows(self.model, self.curve, 0.0, t, z0, self.options)
        return end

    def point(self, t: float, s: float) -> PointY:
        return PointY(self.evaluate(t, s))


def eval_fibered(L: FiberedLagrangian, t: float, s: float) -> PointY:
    return L.point(t, s)


def vertical_tangent(L: FiberedLagrangian, t: float, s: float, h: float | None = None) -> np.ndarray:
    """Fiber-parameter derivative, with the finite-difference noise outside ker dv removed."""
    h = h or config.FD_STEP
    if L.model.fiber_dim == 0:
        return np.zeros(L.model.dim_total, dtype=complex)
    minus, center, plus = L.evaluate_many(t, [s - h, s, s + h])
    x = (plus - minus) / (2.0 * h)
    g = L.model.gradient(center)
    return x - (np.sum(g * x) / np.sum(np.abs(g) ** 2)) * np.conj(g)


def tangent_frame(L: FiberedLagrangian, t: float, s: float) -> list[TangentVec]:
    """
    Ordered real basis of T_pL: the fiber-parameter derivative (central
    difference) followed by the t-derivative, which is the horizontal lift of γ'(t).

    Raises:
        FrameError: condition number above 1e8
    """
    z = L.evaluate(t, s)
    p = PointY(z)
    vectors = []
    if L.model.fiber_dim > 0:
        vectors.append(vertical_tangent(L, t, s))
    vectors.append(lift_rows(L.model, z[None, :], L.curve.derivative(t))[0])
    real = np.stack([_real(v) for v in vectors], axis=1)
    singular = np.linalg.svd(real, compute_uv=False)
    if singular[-1] <= 0 or singular[0] / singular[-1] > 1e8:
        raise FrameError(f"degenerate tangent frame of {L.name} at t={t:g}, s={s:g}")
    return [TangentVec(p, v) for v in vectors]


@dataclass(frozen=True)
class IntersectionPoint:
    point: PointY
    base_value: complex
    params0: tuple[float, float]
    params1: tuple[float, float]
    min_angle: float
    residual: float


def _segment_crossings(a0, a1, b0, b1, tol=1e-12):
    """Pairwise crossings of polylines a (segments a0→a1) and b (b0→b1)."""
    da = (a1 - a0)[:, None]
    db = (b1 - b0)[None, :]
    w = b0[None, :] - a0[:, None]
    cross = np.imag(np.conj(da) * db)
    scale = np.abs(da) * np.abs(db)
    parallel = np.abs(cross) <= 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.imag(np.conj(w) * db) / cross
        v = np.imag(np.conj(w) * da) / cross
    live = (np.abs(da) > 0) & (np.abs(db) > 0)
    hit = ~parallel & live & (u >= -tol) & (u <= 1 + tol) & (v >= -tol) & (v <= 1 + tol)
    # colinear overlap: parallel and b0 on the line of a
    colinear = parallel & live & (np.abs(np.imag(np.conj(da) * w)) <= 1e-10 * np.abs(da) ** 2)
    if np.any(colinear):
        ia, ib = np.nonzero(colinear)
        for i, j in zip(ia, ib):
            d = a1[i] - a0[i]
            proj = [np.real(np.conj(d) * (x - a0[i])) / abs(d) ** 2 for x in (b0[j], b1[j])]
            if max(proj) > 1e-9 and min(proj) < 1 - 1e-9:
                raise TransversalityError("base curves overlap along a segment")
    return np.nonzero(hit), u, v


def _base_intersections(g0: BasePath, g1: BasePath, threshold: float) -> list[tuple[float, float]]:
    t0s, p0 = g0.polyline(config.LAGRANGIAN_GRID_STEP)
    t1s, p1 = g1.polyline(config.LAGRANGIAN_GRID_STEP)
    (ia, ib), u, v = _segment_crossings(p0[:-1], p0[1:], p1[:-1], p1[1:])
    found: list[tuple[float, float]] = []
    for i, j in zip(ia, ib):
        t0 = t0s[i] + u[i, j] * (t0s[i + 1] - t0s[i])
        t1 = t1s[j] + v[i, j] * (t1s[j + 1] - t1s[j])
        for _ in range(30):
            r = g0.point(t0) - g1.point(t1)
            jac = np.array(
                [[g0.derivative(t0).real, -g1.derivative(t1).real],
                 [g0.derivative(t0).imag, -g1.derivative(t1).imag]]
            )
            step = np.linalg.lstsq(jac, -np.array([r.real, r.imag]), rcond=None)[0]
            t0, t1 = t0 + step[0], t1 + step[1]
            if np.max(np.abs(step)) < 1e-15:
                break
        t0 = float(np.clip(t0, *g0.domain))
        t1 = float(np.clip(t1, *g1.domain))
        if abs(g0.point(t0) - g1.point(t1)) > 1e-10:
            continue
        if any(abs(t0 - a) < 1e-7 and abs(t1 - b) < 1e-7 for a, b in found):
            continue
        d0, d1 = g0.derivative(t0), g1.derivative(t1)
        if min(abs(d0), abs(d1)) < 1e-12:
            raise TransversalityError(f"base curve stalls at the crossing t0={t0:g}, t1={t1:g}")
        turn = abs(np.angle(d1 / d0)) % math.pi
        if min(turn, math.pi - turn) < threshold:
            raise TransversalityError(
                f"base curves meet tangentially at t0={t0:g}, t1={t1:g} (angle {turn:.3g})"
            )
        found.append((t0, t1))
    return sorted(found)


def _fiber_candidates(L0: FiberedLagrangian, t0: float, L1: FiberedLagrangian, t1: float):
    s0 = L0.fiber_grid()
    s1 = L1.fiber_grid()
    p0 = L0.evaluate_many(t0, s0)
    p1 = L1.evaluate_many(t1, s1)
    dist = np.linalg.norm(p0[:, None, :] - p1[None, :, :], axis=-1)
    best_j = np.argmin(dist, axis=1)
    d = dist[np.arange(len(s0)), best_j]
    seeds = []
    for i in range(len(s0)):
        left = d[i - 1] if (i > 0 or L0.fiber_periodic) else np.inf
        right = d[(i + 1) % len(s0)] if (i + 1 < len(s0) or L0.fiber_periodic) else np.inf
        if d[i] <= left and d[i] <= right:
            seeds.append((float(s0[i]), float(s1[best_j[i]])))
    return seeds


def _refine_fiber(L0, t0, L1, t1, s0, s1, h):
    for _ in range(15):
        a = L0.evaluate_direct(t0, [s0 - h, s0, s0 + h])
        b = L1.evaluate_direct(t1, [s1 - h, s1, s1 + h])
        r = _real(a[1] - b[1])
        jac = np.stack([_real((a[2] - a[0]) / (2 * h)), -_real((b[2] - b[0]) / (2 * h))], axis=1)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        s0, s1 = s0 + float(step[0]), s1 + float(step[1])
        if np.max(np.abs(step)) < 1e-11:
            break
    return s0, s1


def tangent_plane_angle(frame0: list[TangentVec], frame1: list[TangentVec]) -> float:
    """Smallest principal angle between two real tangent planes."""
    a = np.stack([_real(v.components) for v in frame0], axis=1)
    b = np.stack([_real(v.components) for v in frame1], axis=1)
    return float(np.min(subspace_angles(a, b)))


def find_intersections(
    L0: FiberedLagrangian, L1: FiberedLagrangian, threshold: float | None = None
) -> list[IntersectionPoint]:
    """
    Transverse intersection points of two fibered Lagrangians.

    Base crossings come from polyline crossings refined by Newton; fiber points
    over each crossing from a grid search refined by Gauss–Newton on the
    difference of the two parametrisations.

    Raises:
        TransversalityError: overlapping base curves, tangential crossings or
            non-transverse tangent planes
    """
    if L0.model is not L1.model:
        raise ArgumentError("Lagrangians live in different models")
    threshold = threshold or config.TRANSVERSALITY_THRESHOLD
    h = config.FD_STEP
    points: list[IntersectionPoint] = []
    for t0, t1 in _base_intersections(L0.curve, L1.curve, threshold):
        c = L0.base_point(t0)
        if L0.model.fiber_dim == 0:
            candidates = [(0.0, 0.0)]
        else:
            candidates = []
            for seed in _fiber_candidates(L0, t0, L1, t1):
                s0, s1 = _refine_fiber(L0, t0, L1, t1, *seed, h)
                s0, s1 = L0.normalize_fiber(s0), L1.normalize_fiber(s1)
                if any(abs(s0 - a) < 1e-7 and abs(s1 - b) < 1e-7 for a, b in candidates):
                    continue
                candidates.append((s0, s1))
        for s0, s1 in candidates:
            z0 = L0.evaluate(t0, s0)
            residual = float(np.linalg.norm(z0 - L1.evaluate(t1, s1)))
            if residual > config.INTERSECTION_TOL:
                continue
            angle = tangent_plane_angle(tangent_frame(L0, t0, s0), tangent_frame(L1, t1, s1))
            if angle < threshold:
                raise TransversalityError(
                    f"{L0.name} and {L1.name} meet non-transversally over {c:.6g} (angle {angle:.3g})"
                )
            points.append(
                IntersectionPoint(
                    point=PointY(z0),
                    base_value=c,
                    params0=(t0, s0),
                    params1=(t1, s1),
                    min_angle=angle,
                    residual=residual,
                )
            )
    logger.info(
        "found %d intersection points between %s and %s",
        len(points),
        L0.name,
        L1.name,
        extra={"count": len(points)},
    )
    return points
