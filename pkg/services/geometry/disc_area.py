"""
Symplectic areas of parametrised disc patches and the area identities of
Lagrangian isotopies.

A patch is a union of parameter rectangles ("pieces"), each mapped into the
model chart. Boundary arcs are chains of rectangle sides assigned to a
Lagrangian (or an isotoped Lagrangian) together with the Lagrangian
parameters each side point is supposed to hit.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Protocol, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from services.geometry.config import config
from services.geometry.core.exceptions import (
    ArgumentError,
    HypothesisError,
    MeshError,
)
from services.geometry.curves import Arc, Segment
from services.geometry.fibration import TransportOptions
from services.geometry.isotopy import (
    IsotopedLagrangian,
    LagrangianIsotopy,
    make_isotopy,
    smoothstep,
)
from services.geometry.lagrangians import FiberedLagrangian, make_fiber
from services.geometry.models import ModelSpec, make_model

logger = logging.getLogger("lglab.disc_area")

SIDES = ("bottom", "right", "top", "left")
ParamMap = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


class BoundaryTarget(Protocol):
    name: str

    def evaluate_params(self, ts, sigmas) -> np.ndarray: ...


# ----- surfaces -----


class Surface(ABC):
    """Map of a parameter rectangle [a0, a1] × [b0, b1] into the chart."""

    rect: tuple[float, float, float, float]

    @abstractmethod
    def evaluate(self, a, b) -> np.ndarray:
        """Images of paired parameters, shape (..., n+1)."""

    @abstractmethod
    def partials(self, a, b) -> tuple[np.ndarray, np.ndarray]:
        """(∂u/∂a, ∂u/∂b) at paired parameters."""


class AnalyticSurface(Surface):
    """Closed-form surface; partial derivatives by central differences."""

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], rect, step: float | None = None):
        self.fn = fn
        self.rect = tuple(float(x) for x in rect)
        self.step = step or config.FD_STEP

    def evaluate(self, a, b):
        return self.fn(np.asarray(a, dtype=float), np.asarray(b, dtype=float))

    def partials(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        h = self.step
        da = (self.fn(a + h, b) - self.fn(a - h, b)) / (2 * h)
        db = (self.fn(a, b + h) - self.fn(a, b - h)) / (2 * h)
        return da, db


class SampledSurface(Surface):
    """Grid samples interpolated by bicubic splines (one per real component)."""

    def __init__(self, a_nodes: np.ndarray, b_nodes: np.ndarray, values: np.ndarray):
        a_nodes = np.asarray(a_nodes, dtype=float)
        b_nodes = np.asarray(b_nodes, dtype=float)
        values = np.asarray(values, dtype=complex)
        if values.shape[:2] != (len(a_nodes), len(b_nodes)):
            raise ArgumentError(f"sample grid {values.shape[:2]} does not match nodes")
        self.rect = (a_nodes[0], a_nodes[-1], b_nodes[0], b_nodes[-1])
        self.values = values
        self._k = values.shape[-1]
        self._splines = [
            RectBivariateSpline(a_nodes, b_nodes, part[..., j])
            for part in (values.real, values.imag)
            for j in range(self._k)
        ]

    def _eval(self, a, b, dx=0, dy=0):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        parts = [s(a.ravel(), b.ravel(), dx=dx, dy=dy, grid=False) for s in self._splines]
        out = np.stack(parts[: self._k], axis=-1) + 1j * np.stack(parts[self._k :], axis=-1)
        return out.reshape(a.shape + (self._k,))

    def evaluate(self, a, b):
        return self._eval(a, b)

    def partials(self, a, b):
        return self._eval(a, b, dx=1), self._eval(a, b, dy=1)


def side_point(rect, side: str, u) -> tuple[np.ndarray, np.ndarray]:
    """Point at fraction ``u`` along a rectangle side, in counter-clockwise order."""
    a0, a1, b0, b1 = rect
    u = np.asarray(u, dtype=float)
    if side == "bottom":
        return a0 + u * (a1 - a0), np.full(u.shape, b0)
    if side == "right":
        return np.full(u.shape, a1), b0 + u * (b1 - b0)
    if side == "top":
        return a1 - u * (a1 - a0), np.full(u.shape, b1)
    if side == "left":
        return np.full(u.shape, a0), b1 - u * (b1 - b0)
    raise ArgumentError(f"unknown side {side!r}")


# ----- patches -----


@dataclass(frozen=True)
class ArcSegment:
    piece: int
    side: str
    params: ParamMap

    def __post_init__(self):
        if self.side not in SIDES:
            raise ArgumentError(f"unknown side {self.side!r}")


@dataclass(frozen=True)
class BoundaryArc:
    target: BoundaryTarget
    segments: tuple[ArcSegment, ...]
    name: str = ""

    @property
    def label(self) -> str:
        return self.name or self.target.name


@dataclass(frozen=True)
class DiscPatch:
    """
    u: (D, ∂D = ⋃ ∂_j D, {z_0, …, z_k}) → (Y, ⋃ L_j, {p_0, …, p_k}).

    Arc j runs from corner j to corner j+1 (mod k+1).
    """

    model: ModelSpec
    pieces: tuple[Surface, ...]
    arcs: tuple[BoundaryArc, ...] = ()
    corners: tuple[np.ndarray, ...] = ()
    name: str = "u"
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for arc in self.arcs:
            for seg in arc.segments:
                if not 0 <= seg.piece < len(self.pieces):
                    raise ArgumentError(f"arc {arc.label} references missing piece {seg.piece}")
        if self.arcs and len(self.corners) != len(self.arcs):
            raise ArgumentError("a patch with k+1 arcs needs k+1 corners")

    def arc_params(self, m: int) -> tuple[tuple[float, float], tuple[float, float]]:
        """Lagrangian parameters of the start and end corner of arc m."""
        arc = self.arcs[m]
        t0, s0 = arc.segments[0].params(np.array([0.0]))
        t1, s1 = arc.segments[-1].params(np.array([1.0]))
        return (float(t0[0]), float(s0[0])), (float(t1[0]), float(s1[0]))

    def boundary_deviation(self, samples: int = 33) -> float:
        """Largest distance between a boundary sample and its assigned Lagrangian point."""
        worst = 0.0
        u = np.linspace(0.0, 1.0, samples)
        for arc in self.arcs:
            for seg in arc.segments:
                surface = self.pieces[seg.piece]
                a, b = side_point(surface.rect, seg.side, u)
                ts, sigmas = seg.params(u)
                expected = arc.target.evaluate_params(ts, sigmas)
                worst = max(worst, float(np.max(np.abs(surface.evaluate(a, b) - expected))))
        return worst

    def corner_deviation(self) -> float:
        worst = 0.0
        for m, arc in enumerate(self.arcs):
            seg = arc.segments[0]
            surface = self.pieces[seg.piece]
            a, b = side_point(surface.rect, seg.side, np.array([0.0]))
            worst = max(worst, float(np.max(np.abs(surface.evaluate(a, b)[0] - self.corners[m]))))
        return worst

    def validate(self, tol: float | None = None) -> None:
        """
        Raises:
            HypothesisError: a boundary arc leaves its Lagrangian or a corner is misplaced
        """
        tol = config.BOUNDARY_TOL if tol is None else tol
        deviation = self.boundary_deviation()
        if deviation > tol:
            raise HypothesisError(f"boundary of {self.name} leaves its Lagrangians by {deviation:.3g}")
        corner = self.corner_deviation()
        if corner > max(tol, 1e-8):
            raise HypothesisError(f"corners of {self.name} are off by {corner:.3g}")

    def to_columns(self, cells: int = 8) -> dict[str, list]:
        """Columnar export: one row per grid vertex of every piece."""
        columns: dict[str, list] = {"piece": [], "a": [], "b": [], "arc": []}
        k = self.model.dim_total
        for j in range(k):
            columns[f"z{j + 1}_re"] = []
            columns[f"z{j + 1}_im"] = []
        labels = {}
        for arc in self.arcs:
            for seg in arc.segments:
                labels[(seg.piece, seg.side)] = arc.label
        for index, surface in enumerate(self.pieces):
            a0, a1, b0, b1 = surface.rect
            a, b = np.meshgrid(np.linspace(a0, a1, cells + 1), np.linspace(b0, b1, cells + 1), indexing="ij")
            images = surface.evaluate(a.ravel(), b.ravel())
            for (ai, bi), z in zip(zip(a.ravel(), b.ravel()), images):
                side = _vertex_side(surface.rect, ai, bi)
                columns["piece"].append(index)
                columns["a"].append(float(ai))
                columns["b"].append(float(bi))
                columns["arc"].append(labels.get((index, side), "") if side else "")
                for j in range(k):
                    columns[f"z{j + 1}_re"].append(float(z[j].real))
                    columns[f"z{j + 1}_im"].append(float(z[j].imag))
        return columns


def _vertex_side(rect, a: float, b: float) -> str | None:
    a0, a1, b0, b1 = rect
    if b == b0:
        return "bottom"
    if a == a1:
        return "right"
    if b == b1:
        return "top"
    if a == a0:
        return "left"
    return None


# ----- quadrature -----


def _piece_area(model: ModelSpec, surface: Surface, cells: int) -> float:
    """Edge-midpoint rule on 2·cells² triangles of the parameter rectangle."""
    a0, a1, b0, b1 = surface.rect
    da = (a1 - a0) / cells
    db = (b1 - b0) / cells
    ai = a0 + da * np.arange(cells)
    bj = b0 + db * np.arange(cells)
    A, B = np.meshgrid(ai, bj, indexing="ij")
    A, B = A.ravel(), B.ravel()
    # lower triangle (A,B),(A+da,B),(A,B+db); upper (A+da,B),(A+da,B+db),(A,B+db)
    mids_a = np.concatenate([A + da / 2, A + da / 2, A, A + da, A + da / 2, A + da / 2])
    mids_b = np.concatenate([B, B + db / 2, B + db / 2, B + db / 2, B + db, B + db / 2])
    du_a, du_b = surface.partials(mids_a, mids_b)
    density = model.omega(du_a, du_b)
    return float(np.sum(density) * (da * db / 2.0) / 3.0)


def disc_area(disc: DiscPatch, cells: int | None = None) -> float:
    """
    ∫ u*ω over all pieces.

    Raises:
        MeshError: doubling the mesh changes the area by more than AREA_CONVERGENCE_TOL
    """
    cells = cells or config.AREA_MESH_CELLS
    coarse = sum(_piece_area(disc.model, piece, cells) for piece in disc.pieces)
    fine = sum(_piece_area(disc.model, piece, 2 * cells) for piece in disc.pieces)
    if abs(coarse - fine) > config.AREA_CONVERGENCE_TOL:
        raise MeshError(coarse, fine, config.AREA_CONVERGENCE_TOL)
    logger.debug("area of %s = %.10g", disc.name, fine, extra={"cells": 2 * cells, "coarse": coarse})
    return fine


# ----- isotopies of patches -----


def _collar(iso: LagrangianIsotopy, params: ParamMap, samples: int) -> SampledSurface:
    """(a, b) ∈ [0,1] × [−1,0] ↦ ψ_{−b}(L(params(a)))."""
    nodes = np.linspace(0.0, 1.0, samples)
    ts, sigmas = params(nodes)
    values = iso.evaluate_rows(ts, sigmas, nodes)  # (s, a, k)
    return SampledSurface(nodes, nodes - 1.0, values[::-1].transpose(1, 0, 2))


def deform_disc(disc: DiscPatch, iso: LagrangianIsotopy, m: int, samples: int | None = None) -> DiscPatch:
    """
    u′ = u ∪ {ψ_s(∂_m u) : s ∈ [0,1]}: a collar piece is glued along every side
    of arc m, and arc m moves to ψ₁(∂_m u).
    """
    if not 0 <= m < len(disc.arcs):
        raise ArgumentError(f"patch {disc.name} has no arc {m}")
    arc = disc.arcs[m]
    if arc.target is not iso.lagrangian:
        raise ArgumentError(f"arc {arc.label} does not lie on {iso.lagrangian.name}")
    if iso.homotopy.is_identity():
        return disc
    samples = samples or config.COLLAR_SAMPLES
    pieces = list(disc.pieces)
    segments = []
    for seg in arc.segments:
        pieces.append(_collar(iso, seg.params, samples))
        segments.append(ArcSegment(len(pieces) - 1, "bottom", seg.params))
    arcs = list(disc.arcs)
    arcs[m] = BoundaryArc(IsotopedLagrangian(iso, 1.0), tuple(segments), name=f"psi1({arc.label})")
    corners = list(disc.corners)
    first, last = pieces[segments[0].piece], pieces[segments[-1].piece]
    corners[m] = first.values[0, 0]
    corners[(m + 1) % len(corners)] = last.values[-1, 0]
    return replace(disc, pieces=tuple(pieces), arcs=tuple(arcs), corners=tuple(corners), name=f"{disc.name}'")


@dataclass(frozen=True)
class AreaReport:
    area_u: float
    area_u_prime: float
    boundary_term: float
    residual: float
    metadata: dict[str, Any] = field(default_factory=dict)


def _boundary_term(disc: DiscPatch, iso: LagrangianIsotopy, m: int) -> float:
    start, end = disc.arc_params(m)
    return iso.potential(end, start)


def area_difference_check(disc: DiscPatch, iso: LagrangianIsotopy, m: int) -> AreaReport:
    """∫u*ω − ∫u′*ω against f(p_{m+1}) − f(p_m)."""
    area_u = disc_area(disc)
    deformed = deform_disc(disc, iso, m)
    area_u_prime = disc_area(deformed)
    boundary = _boundary_term(disc, iso, m)
    residual = abs((area_u - area_u_prime) - boundary)
    report = AreaReport(
        area_u=area_u,
        area_u_prime=area_u_prime,
        boundary_term=boundary,
        residual=residual,
        metadata={"arc": disc.arcs[m].label, "pieces": len(deformed.pieces)},
    )
    logger.info(
        "area difference on %s",
        disc.name,
        extra={"area_u": area_u, "area_u_prime": area_u_prime, "boundary_term": boundary, "residual": residual},
    )
    return report


def fiber_deviation(disc: DiscPatch, value: complex, samples: int = 33) -> float:
    """max |v(u) − value| over a grid of every piece."""
    worst = 0.0
    for surface in disc.pieces:
        a0, a1, b0, b1 = surface.rect
        a, b = np.meshgrid(np.linspace(a0, a1, samples), np.linspace(b0, b1, samples), indexing="ij")
        images = surface.evaluate(a.ravel(), b.ravel())
        worst = max(worst, float(np.max(np.abs(disc.model.value(images) - value))))
    return worst


def triangle_split_check(
    u: DiscPatch,
    iso: LagrangianIsotopy,
    u_fiber: DiscPatch,
    m: int = 0,
    fiber_value: complex | None = None,
) -> AreaReport:
    """
    ∫u*ω = ∫u″*ω + f(p_{m+1}) − f(p_m), with u″ inside one fiber.

    Raises:
        HypothesisError: u″ leaves the fiber over ``fiber_value``
    """
    if fiber_value is None:
        if not isinstance(iso.homotopy.target, (complex, float, int)):
            raise ArgumentError("fiber value needed for a non-constant homotopy target")
        fiber_value = complex(iso.homotopy.target)
    deviation = fiber_deviation(u_fiber, fiber_value)
    if deviation > config.FIBER_TOL:
        raise HypothesisError(f"{u_fiber.name} leaves the fiber over {fiber_value} by {deviation:.3g}")
    area_u = disc_area(u)
    area_fiber = disc_area(u_fiber)
    boundary = _boundary_term(u, iso, m)
    residual = abs(area_u - area_fiber - boundary)
    return AreaReport(
        area_u=area_u,
        area_u_prime=area_fiber,
        boundary_term=boundary,
        residual=residual,
        metadata={"fiber_deviation": deviation, "fiber_value": fiber_value},
    )


# ----- factories -----


def constant_disc(model: ModelSpec, point, name: str = "constant") -> DiscPatch:
    point = np.asarray(point, dtype=complex).reshape(-1)
    surface = AnalyticSurface(lambda a, b: np.broadcast_to(point, np.shape(a) + point.shape).copy(), (0, 1, 0, 1))
    return DiscPatch(model, (surface,), name=name)


def polar_disc(radius: float = 1.0, options: TransportOptions | None = None) -> DiscPatch:
    """trivial_line disc u(z) = R·z in polar parameters, boundary on the circle |c| = R."""
    model = make_model("trivial_line")
    R = float(radius)
    circle = FiberedLagrangian(
        model,
        Arc(0.0, R, 0.0, 2.0 * math.pi),
        make_fiber(model, "point", R),
        options,
        name="circle",
    )

    def fn(r, theta):
        return (R * r * np.exp(1j * theta))[..., None]

    surface = AnalyticSurface(fn, (0.0, 1.0, 0.0, 2.0 * math.pi))
    arc = BoundaryArc(circle, (ArcSegment(0, "right", lambda u: (u, np.zeros_like(u))),))
    return DiscPatch(model, (surface,), (arc,), (np.array([R + 0j]),), name="polar_disc")


def fiber_annulus(c: complex = 1.0, inner: float = 1.0, outer: float = 2.0) -> DiscPatch:
    """Graph annulus z₁ = ρe^{iθ}, z₂ = c/z₁ for ρ ∈ [inner, outer] in the conic fiber over c."""
    if not 0 < inner < outer:
        raise ArgumentError("annulus radii must satisfy 0 < inner < outer")
    model = make_model("conic")
    c = complex(c)

    def fn(rho, theta):
        z1 = rho * np.exp(1j * theta)
        return np.stack([z1, c / z1], axis=-1)

    surface = AnalyticSurface(fn, (inner, outer, 0.0, 2.0 * math.pi))
    return DiscPatch(model, (surface,), name="fiber_annulus", metadata={"c": c, "inner": inner, "outer": outer})


@dataclass(frozen=True)
class TriangleSetup:
    lagrangians: tuple[FiberedLagrangian, FiberedLagrangian, FiberedLagrangian]
    isotopy: LagrangianIsotopy
    u: DiscPatch
    u_fiber: DiscPatch
    u_reparametrized: DiscPatch
    epsilon: float


def _triangle_patches(iso, L1, L2, epsilon, pitch, x_eps, beta, warp, samples, name):
    """u and u″ for one parametrisation ``warp`` of the moving arc."""
    model = iso.model
    e = -epsilon
    nodes = np.linspace(0.0, 1.0, samples)
    y0 = pitch * x_eps

    def y(a):
        return y0 * (1.0 - warp(a))

    def sigma(a):
        return y(a) - beta(warp(a))

    def fiber_fn(a, b):
        z1 = np.exp((1.0 - b) * (x_eps + 1j * y(a)))
        return np.stack([z1, e / z1], axis=-1)

    u_fiber_surface = AnalyticSurface(fiber_fn, (0.0, 1.0, 0.0, 1.0))
    values = iso.evaluate_rows(warp(nodes), sigma(nodes), nodes)  # (s, a, k)
    collar = SampledSurface(nodes, nodes - 1.0, values.transpose(1, 0, 2))

    def on_L0(u):
        return warp(u), sigma(u)

    def corner_track_L1(u):
        return 1.0 - u, np.full(np.shape(u), x_eps)

    def fiber_side_L1(u):
        return np.zeros(np.shape(u)), (1.0 - u) * x_eps

    def fiber_side_L2(u):
        return np.zeros(np.shape(u)), u * x_eps

    def corner_track_L2(u):
        return np.asarray(u, dtype=float), np.full(np.shape(u), x_eps)

    p0, p1 = values[0, 0], values[0, -1]
    p2 = np.array([1.0 + 0j, e + 0j])
    u = DiscPatch(
        model,
        (collar, u_fiber_surface),
        (
            BoundaryArc(iso.lagrangian, (ArcSegment(0, "bottom", on_L0),)),
            BoundaryArc(L1, (ArcSegment(0, "right", corner_track_L1), ArcSegment(1, "right", fiber_side_L1))),
            BoundaryArc(L2, (ArcSegment(1, "left", fiber_side_L2), ArcSegment(0, "left", corner_track_L2))),
        ),
        (p0, p1, p2),
        name=name,
    )
    u_fiber = DiscPatch(
        model,
        (u_fiber_surface,),
        (
            BoundaryArc(IsotopedLagrangian(iso, 1.0), (ArcSegment(0, "bottom", on_L0),)),
            BoundaryArc(L1, (ArcSegment(0, "right", fiber_side_L1),)),
            BoundaryArc(L2, (ArcSegment(0, "left", fiber_side_L2),)),
        ),
        (fiber_fn(np.array(0.0), np.array(0.0)), fiber_fn(np.array(1.0), np.array(0.0)), p2),
        name=f"{name}''",
    )
    return u, u_fiber


def fiber_triangle(
    epsilon: float = 0.5,
    depth: float = 1.0,
    height: float = 0.5,
    radius: float = 1.0,
    pitch: float = 1.0,
    options: TransportOptions | None = None,
    samples: int | None = None,
) -> TriangleSetup:
    """
    Conic triangle on three fibered Lagrangians whose curves meet at −ε.

    L₀ is a circle-fibered segment from c₀ = −ε − depth − i·height to c₁ (its
    conjugate); L₁ and L₂ are fibered by a real ray and a spiral over −ε and run
    from −ε to c₁ and c₀. The isotopy contracts γ₀|[0,1] onto −ε. u″ is a
    sector of the fiber over −ε in log coordinates; u is u″ with the reversed
    isotopy collar glued along the L₀ side, so [u] and [u″] agree by construction.
    """
    if epsilon <= 0:
        raise ArgumentError("epsilon must be positive")
    model = make_model("conic")
    samples = samples or config.COLLAR_SAMPLES
    e = complex(-epsilon)
    c0 = complex(-epsilon - depth, -height)
    c1 = complex(-epsilon - depth, height)
    options = options or TransportOptions.from_config()
    L0 = FiberedLagrangian(
        model, Segment(c0, c1, domain=(-0.5, 1.5)), make_fiber(model, "circle", c0, radius=radius), options, "L0", warm=False
    )
    L1 = FiberedLagrangian(
        model, Segment(e, c1, domain=(-0.2, 1.2)), make_fiber(model, "real_ray", e), options, "L1", warm=False
    )
    L2 = FiberedLagrangian(
        model, Segment(e, c0, domain=(-0.2, 1.2)), make_fiber(model, "spiral", e, pitch=pitch), options, "L2", warm=False
    )
    iso = make_isotopy(L0, e, (0.0, 1.0))

    # arg z₁ of ψ₁(L₀(t, 0)); S¹-equivariance turns it into σ-shifts
    nodes = np.linspace(0.0, 1.0, samples)
    moved = iso.evaluate_rows(nodes, np.zeros_like(nodes), [1.0])[0]
    x_eps = float(np.log(np.abs(moved[0, 0])))
    beta = CubicSpline(nodes, np.unwrap(np.angle(moved[:, 0])))

    u, u_fiber = _triangle_patches(iso, L1, L2, epsilon, pitch, x_eps, beta, lambda a: np.asarray(a, dtype=float), samples, "u")
    u_rep, _ = _triangle_patches(iso, L1, L2, epsilon, pitch, x_eps, beta, smoothstep, samples, "u_rep")
    logger.info("built fiber triangle", extra={"epsilon": epsilon, "x_eps": x_eps})
    return TriangleSetup((L0, L1, L2), iso, u, u_fiber, u_rep, float(epsilon))
