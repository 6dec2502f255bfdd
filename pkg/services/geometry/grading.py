"""
Squared phases, gradings and Floer degrees of intersection points.

Every Lagrangian plane in the catalogue splits into a vertical line (inside
ker dv) and a horizontal line, so the squared phase factors as

    α_L = α^Vert · α^Hor,   α^Vert = Ω_c(e)²/|Ω_c(e)|²,   α^Hor = dv(h)²/|dv(h)|²

and short paths, gradings and degrees are all computed one complex line
(factor) at a time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from services.geometry.config import config
from services.geometry.core.exceptions import (
    AnchorError,
    ArgumentError,
    DegeneratePlaneError,
    NumericalConsistencyError,
    SamplingError,
    SingularSplitError,
    TheoremCheckError,
    TransversalityError,
)
from services.geometry.core.trajectory_cache import TrajectoryCache
from services.geometry.curves import BasePath, Composite, Reparametrized
from services.geometry.fibration import monodromy, transport_rows
from services.geometry.lagrangians import (
    FiberedLagrangian,
    IntersectionPoint,
    _real,
    _segment_crossings,
    tangent_frame,
    vertical_tangent,
)
from services.geometry.models import ModelSpec, PointY, TangentVec

logger = logging.getLogger("lglab.grading")

_TWO_PI = 2.0 * math.pi


def _unit(z) -> np.ndarray | complex:
    z = np.asarray(z, dtype=complex)
    out = z / np.abs(z)
    return complex(out) if out.ndim == 0 else out


def _squared_phase(z) -> np.ndarray | complex:
    return _unit(np.asarray(z, dtype=complex) ** 2)


def _turns(phase) -> np.ndarray:
    """Phase angle measured in full turns, in (−1/2, 1/2]."""
    return np.angle(phase) / _TWO_PI


def _snap(reference: float, phase: complex) -> float:
    """The lift of ``phase`` closest to ``reference``."""
    delta = float(_turns(phase)) - reference
    return reference + delta - round(delta)


# ----- planes and squared phases -----


@dataclass(frozen=True, eq=False)
class LagrangianPlane:
    base: PointY
    basis: tuple[TangentVec, ...]

    def __post_init__(self):
        basis = tuple(self.basis)
        object.__setattr__(self, "basis", basis)
        if not basis:
            raise ArgumentError("empty basis")
        real = np.stack([_real(v.components) for v in basis], axis=1)
        if np.linalg.matrix_rank(real, tol=1e-12 * max(1.0, float(np.abs(real).max()))) < len(basis):
            raise DegeneratePlaneError("basis vectors are linearly dependent over R")
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                a, b = basis[i].components, basis[j].components
                pairing = float(ModelSpec.omega(a, b))
                if abs(pairing) > 1e-8 * max(1.0, np.linalg.norm(a) * np.linalg.norm(b)):
                    raise ArgumentError(f"plane is not Lagrangian: ω(e{i}, e{j}) = {pairing:.3g}")

    def matrix(self) -> np.ndarray:
        return np.stack([v.components for v in self.basis], axis=1)


def alpha_total(model: ModelSpec, plane: LagrangianPlane) -> complex:
    """α_Θ(p, V) = Ω(e₁,…,e_{n+1})²/|Ω(e₁,…,e_{n+1})|²."""
    if len(plane.basis) != model.dim_total:
        raise ArgumentError(f"{model.id} planes need {model.dim_total} basis vectors")
    volume = model.Omega(plane.matrix())
    if abs(volume) < 1e-12:
        raise DegeneratePlaneError(f"|Ω| = {abs(volume):.3g} on a supposedly Lagrangian plane")
    return complex(_squared_phase(volume))


def horizontal_probe(model: ModelSpec, z: np.ndarray) -> np.ndarray:
    """Horizontal vector h with dv(h) = 1."""
    g = model.gradient(z)
    n2 = float(np.sum(np.abs(g) ** 2))
    if n2 < config.CRITICAL_CLEARANCE**2:
        raise SingularSplitError(z)
    return np.conj(g) / n2


def residue(model: ModelSpec, p: PointY, vertical: Sequence[TangentVec], probe=None) -> complex:
    """Ω_c(e₁,…,e_n) = Ω(e₁,…,e_n, h)/dv(h) for any probe h with dv(h) ≠ 0."""
    if len(vertical) != model.fiber_dim:
        raise ArgumentError(f"{model.id} fibers need {model.fiber_dim} vertical vectors")
    z = p.coords
    h = horizontal_probe(model, z) if probe is None else np.asarray(probe, dtype=complex)
    dvh = complex(model.dv(z, h))
    if abs(dvh) < 1e-12:
        raise ArgumentError("residue probe is vertical")
    scale = max(1.0, *(float(np.linalg.norm(v.components)) for v in vertical))
    for v in vertical:
        if abs(complex(model.dv(z, v.components))) > 1e-8 * scale:
            raise ArgumentError("residue needs vertical vectors")
    frame = np.stack([*(v.components for v in vertical), h], axis=1)
    return model.Omega(frame) / dvh


def alpha_vert(model: ModelSpec, p: PointY, vertical: Sequence[TangentVec], probe=None) -> complex:
    """Relative squared phase of a vertical Lagrangian frame."""
    value = residue(model, p, vertical, probe)
    if abs(value) < 1e-12:
        raise DegeneratePlaneError("vertical frame has vanishing residue")
    return complex(_squared_phase(value))


def alpha_hor(model: ModelSpec, p: PointY, e: TangentVec) -> complex:
    value = complex(model.dv(p.coords, e.components))
    if abs(value) < 1e-12:
        raise DegeneratePlaneError("horizontal vector has dv(e) = 0")
    return complex(_squared_phase(value))


def alpha_base(derivative) -> np.ndarray | complex:
    """Squared phase of a base curve: γ̇²/|γ̇|²."""
    return _squared_phase(derivative)


# ----- lifts -----


def unwrap_lift(samples, anchor: float, max_step: float | None = None) -> np.ndarray:
    """
    Continuous real lift of unit complex samples, lift[0] = anchor.

    Raises:
        SamplingError: consecutive samples are more than ``max_step`` turns apart
    """
    max_step = config.PHASE_MAX_STEP if max_step is None else max_step
    turns = _turns(np.asarray(samples, dtype=complex))
    if turns.size == 0:
        return np.zeros(0)
    steps = np.diff(turns)
    steps = steps - np.round(steps)
    if steps.size and np.max(np.abs(steps)) > max_step:
        k = int(np.argmax(np.abs(steps)))
        raise SamplingError(f"phase jumps by {steps[k]:.3g} turns between samples {k} and {k + 1}")
    return float(anchor) + np.concatenate([[0.0], np.cumsum(steps)])


def phase_lift_along(
    fn: Callable[[np.ndarray], np.ndarray],
    start: float,
    stop: float,
    anchor: float,
    count: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Lift ``fn`` (vectorised, unit complex) along [start, stop], doubling the
    grid until every increment is below PHASE_MAX_STEP.

    Raises:
        SamplingError: refinement cap reached
    """
    if start == stop:
        return np.array([start]), np.array([float(anchor)])
    count = count or config.SHORT_PATH_SAMPLES
    last = None
    for _ in range(config.PHASE_MAX_REFINEMENTS + 1):
        grid = np.linspace(start, stop, count)
        try:
            return grid, unwrap_lift(fn(grid), anchor)
        except SamplingError as exc:
            last = exc
            count = 2 * count - 1
    raise SamplingError(f"phase lift did not resolve after {config.PHASE_MAX_REFINEMENTS} refinements: {last}")


# ----- graded Lagrangians -----


def _residue_rows(model: ModelSpec, z: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.array([model.residue_form(zi, xi) for zi, xi in zip(z, x)], dtype=complex)


class GradedLagrangian:
    """
    α̃_L = α̃^Vert + α̃_{v(L)}∘v.

    The vertical lift is unwrapped along an L-shaped parameter path: first
    along the fiber at ``anchor_t``, then along the base direction over the
    transport grid. Base-direction lifts are cached per fiber parameter.
    """

    def __init__(
        self,
        lagrangian: FiberedLagrangian,
        fiber_anchor: float,
        base_anchor: float,
        anchor_t: float = 0.0,
        anchor_sigma: float | None = None,
    ):
        self.lagrangian = lagrangian
        self.model = lagrangian.model
        self.fiber_anchor = float(fiber_anchor)
        self.base_anchor = float(base_anchor)
        self.anchor_t = float(anchor_t)
        if anchor_sigma is None:
            lo, hi = lagrangian.fiber_range
            anchor_sigma = 0.0 if lo <= 0.0 <= hi else lo
        self.anchor_sigma = float(anchor_sigma)
        self._vertical: TrajectoryCache[tuple[np.ndarray, np.ndarray]] = TrajectoryCache()

        self._check_anchor("fiber", self.fiber_anchor, self.vertical_phase(self.anchor_t, self.anchor_sigma))
        self._check_anchor("base", self.base_anchor, self.base_phase(self.anchor_t))

        curve = lagrangian.curve
        nodes = np.union1d(curve.nodes(lagrangian.grid_step), [self.anchor_t])
        self._base_nodes = nodes
        self._base_lifts = self._lift_from(nodes, alpha_base(curve.derivative(nodes)), self.anchor_t, self.base_anchor)

    @property
    def name(self) -> str:
        return self.lagrangian.name

    @staticmethod
    def _check_anchor(which: str, anchor: float, phase: complex) -> None:
        if abs(np.exp(2j * math.pi * anchor) - phase) > config.ANCHOR_TOL:
            raise AnchorError(which, anchor, phase, config.ANCHOR_TOL)

    @staticmethod
    def _lift_from(nodes: np.ndarray, phases: np.ndarray, t: float, value: float) -> np.ndarray:
        """Unwrap node phases forward and backward from the node nearest ``t``."""
        k = int(np.argmin(np.abs(nodes - t)))
        start = _snap(value, phases[k])
        ahead = unwrap_lift(phases[k:], start)
        behind = unwrap_lift(phases[: k + 1][::-1], start)[::-1]
        return np.concatenate([behind[:-1], ahead])

    # ----- phases -----

    def vertical_phase(self, t: float, s: float) -> complex:
        if self.model.fiber_dim == 0:
            return 1.0 + 0.0j
        z = self.lagrangian.evaluate(t, s)
        x = vertical_tangent(self.lagrangian, t, s)
        return complex(_squared_phase(self.model.residue_form(z, x)))

    def base_phase(self, t: float) -> complex:
        return complex(alpha_base(self.lagrangian.curve.derivative(t)))

    def phase(self, t: float, s: float) -> complex:
        frame = tangent_frame(self.lagrangian, t, s)
        return alpha_total(self.model, LagrangianPlane(frame[0].base, tuple(frame)))

    # ----- lifts -----

    def _fiber_leg_phases(self, sigmas: np.ndarray) -> np.ndarray:
        L = self.lagrangian
        h = config.FD_STEP
        if self.anchor_t == 0.0:
            z = L.fiber.evaluate(self.model, sigmas)
            x = (L.fiber.evaluate(self.model, sigmas + h) - L.fiber.evaluate(self.model, sigmas - h)) / (2 * h)
        else:
            z = L.evaluate_many(self.anchor_t, sigmas)
            x = (L.evaluate_many(self.anchor_t, sigmas + h) - L.evaluate_many(self.anchor_t, sigmas - h)) / (2 * h)
        return _squared_phase(_residue_rows(self.model, z, x))

    def _fiber_leg(self, sigma: float) -> float:
        _, lifts = phase_lift_along(self._fiber_leg_phases, self.anchor_sigma, sigma, self.fiber_anchor)
        return float(lifts[-1])

    def _build_vertical(self, sigmas: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        h = config.FD_STEP
        L = self.lagrangian
        out = []
        for sigma in sigmas:
            center, minus, plus = L.trajectories(np.array([sigma, sigma - h, sigma + h]))
            x = (plus.values - minus.values) / (2 * h)
            phases = _squared_phase(_residue_rows(self.model, center.values, x))
            lifts = self._lift_from(center.nodes, phases, self.anchor_t, self._fiber_leg(float(sigma)))
            out.append((center.nodes, lifts))
        return out

    def vertical_lift(self, t: float, s: float) -> float:
        if self.model.fiber_dim == 0:
            return self.fiber_anchor
        if t == self.anchor_t:
            return _snap(self._fiber_leg(s), self.vertical_phase(t, s))
        ((nodes, lifts),) = self._vertical.get_or_build([s], self._build_vertical)
        k = int(np.argmin(np.abs(nodes - t)))
        return _snap(float(lifts[k]), self.vertical_phase(t, s))

    def base_lift(self, t: float) -> float:
        k = int(np.argmin(np.abs(self._base_nodes - t)))
        return _snap(float(self._base_lifts[k]), self.base_phase(t))

    def lift(self, t: float, s: float) -> float:
        return self.vertical_lift(t, s) + self.base_lift(t)

    def shifted(self, fiber: int = 0, base: int = 0) -> "GradedLagrangian":
        """Same Lagrangian with integer-shifted anchors."""
        return GradedLagrangian(
            self.lagrangian,
            self.fiber_anchor + fiber,
            self.base_anchor + base,
            self.anchor_t,
            self.anchor_sigma,
        )


def grade(
    L: FiberedLagrangian,
    fiber_anchor: float,
    base_anchor: float,
    anchor_t: float = 0.0,
    anchor_sigma: float | None = None,
) -> GradedLagrangian:
    """
    Lagrangianにグレーディングを与える。

    Raises:
        AnchorError: アンカー値が位相と整合しない
    """
    graded = GradedLagrangian(L, fiber_anchor, base_anchor, anchor_t, anchor_sigma)
    logger.debug(
        "graded %s",
        L.name,
        extra={"fiber_anchor": graded.fiber_anchor, "base_anchor": graded.base_anchor},
    )
    return graded


def grade_near(
    L: FiberedLagrangian,
    fiber_hint: float,
    base_hint: float,
    anchor_t: float = 0.0,
    anchor_sigma: float | None = None,
) -> GradedLagrangian:
    """Grading whose anchors are the lifts closest to the hints."""
    if anchor_sigma is None:
        lo, hi = L.fiber_range
        anchor_sigma = 0.0 if lo <= 0.0 <= hi else lo
    fiber_phase = 1.0 + 0.0j
    if L.model.fiber_dim > 0:
        z = L.evaluate(anchor_t, anchor_sigma)
        fiber_phase = complex(_squared_phase(L.model.residue_form(z, vertical_tangent(L, anchor_t, anchor_sigma))))
    base_phase = complex(alpha_base(L.curve.derivative(anchor_t)))
    return grade(
        L,
        _snap(fiber_hint, fiber_phase),
        _snap(base_hint, base_phase),
        anchor_t,
        anchor_sigma,
    )


# ----- short paths -----


def _line_angle(ratio: complex) -> float:
    """Relative angle of two real lines in C, normalised to [0, π)."""
    return float(np.mod(np.angle(ratio), math.pi))


def _check_factor(theta: float, factor: str, threshold: float) -> None:
    if theta < threshold or theta > math.pi - threshold:
        raise TransversalityError(f"{factor} factor lines are tangent (θ = {theta:.3g})")


def zeta(theta: float, tau):
    """A⁻¹(e^{−iπτ/2}) for A = [[1, −cot θ], [0, 1]]: rotates ℝ onto e^{iθ}ℝ."""
    a = 0.5 * math.pi * np.asarray(tau, dtype=float)
    return np.cos(a) - np.sin(a) / math.tan(theta) - 1j * np.sin(a)


class ShortPath:
    """λ(τ) = λ^Vert(τ) ⊕ λ^Hor(τ), τ ∈ [0, 1]."""

    def __init__(
        self,
        model: ModelSpec,
        intersection: IntersectionPoint,
        vertical0: np.ndarray | None,
        horizontal0: np.ndarray,
        theta_vertical: float | None,
        theta_horizontal: float,
    ):
        self.model = model
        self.intersection = intersection
        self.vertical0 = vertical0
        self.horizontal0 = horizontal0
        self.theta_vertical = theta_vertical
        self.theta_horizontal = theta_horizontal
        columns = [horizontal0] if vertical0 is None else [vertical0, horizontal0]
        self._volume0 = model.Omega(np.stack(columns, axis=1))

    @property
    def point(self) -> PointY:
        return self.intersection.point

    def plane(self, tau: float) -> LagrangianPlane:
        p = self.point
        vectors = [TangentVec(p, complex(zeta(self.theta_horizontal, tau)) * self.horizontal0)]
        if self.vertical0 is not None:
            vectors.insert(0, TangentVec(p, complex(zeta(self.theta_vertical, tau)) * self.vertical0))
        return LagrangianPlane(p, tuple(vectors))

    def phase(self, tau) -> np.ndarray:
        factor = zeta(self.theta_horizontal, tau)
        if self.vertical0 is not None:
            factor = factor * zeta(self.theta_vertical, tau)
        return _squared_phase(factor * self._volume0)


def canonical_short_path(
    p: IntersectionPoint,
    L0: FiberedLagrangian,
    L1: FiberedLagrangian,
    threshold: float | None = None,
) -> ShortPath:
    """
    Raises:
        TransversalityError: the two Lagrangians are tangent in one factor
    """
    threshold = config.TRANSVERSALITY_THRESHOLD if threshold is None else threshold
    model = L0.model
    frame0 = tangent_frame(L0, *p.params0)
    frame1 = tangent_frame(L1, *p.params1)
    z = p.point.coords
    h0, h1 = frame0[-1].components, frame1[-1].components
    theta_h = _line_angle(complex(model.dv(z, h1)) / complex(model.dv(z, h0)))
    _check_factor(theta_h, "horizontal", threshold)
    v0, theta_v = None, None
    if model.fiber_dim > 0:
        v0 = frame0[0].components
        ratio = model.residue_form(z, frame1[0].components) / model.residue_form(z, v0)
        theta_v = _line_angle(ratio)
        _check_factor(theta_v, "vertical", threshold)
    return ShortPath(model, p, v0, h0, theta_v, theta_h)


# ----- degrees -----


def _factor_degree(theta: float, start: complex, lift0: float, lift1: float) -> float:
    """(α̃₁ − α̃₀) minus the lift change of the factor short path starting at ``start``."""
    _, lifts = phase_lift_along(lambda tau: _squared_phase(zeta(theta, tau) * start), 0.0, 1.0, lift0)
    return (lift1 - lift0) - (lifts[-1] - lifts[0])


def _round_degree(value: float) -> tuple[int, float]:
    degree = int(round(value))
    residual = abs(value - degree)
    if residual > config.DEGREE_RESIDUAL_TOL:
        raise NumericalConsistencyError(value, residual, config.DEGREE_RESIDUAL_TOL)
    return degree, residual


@dataclass(frozen=True)
class DegreeRecord:
    value: float
    degree: int
    residual: float
    fiber_degree: int
    base_degree: int
    fiber_value: float
    base_value: float
    theta_vertical: float | None
    theta_horizontal: float


def degree_details(L0g: GradedLagrangian, L1g: GradedLagrangian, p: IntersectionPoint) -> DegreeRecord:
    """
    deg = (α̃_{L₁}(p) − α̃_{L₀}(p)) − (α̃_λ(1) − α̃_λ(0)), computed on the full
    plane path and, independently, per factor.

    Raises:
        NumericalConsistencyError: a pre-rounding value is farther than
            DEGREE_RESIDUAL_TOL from an integer
    """
    L0, L1 = L0g.lagrangian, L1g.lagrangian
    path = canonical_short_path(p, L0, L1)
    t0, s0 = p.params0
    t1, s1 = p.params1
    a0 = L0g.lift(t0, s0)
    a1 = L1g.lift(t1, s1)
    _, lam = phase_lift_along(path.phase, 0.0, 1.0, a0)
    value = (a1 - a0) - (lam[-1] - lam[0])
    degree, residual = _round_degree(value)

    z = p.point.coords
    model = L0.model
    base_value = _factor_degree(
        path.theta_horizontal,
        complex(model.dv(z, path.horizontal0)),
        L0g.base_lift(t0),
        L1g.base_lift(t1),
    )
    if path.vertical0 is not None:
        fiber_value = _factor_degree(
            path.theta_vertical,
            model.residue_form(z, path.vertical0),
            L0g.vertical_lift(t0, s0),
            L1g.vertical_lift(t1, s1),
        )
    else:
        fiber_value = L1g.fiber_anchor - L0g.fiber_anchor
    fiber_degree, _ = _round_degree(fiber_value)
    base_degree, _ = _round_degree(base_value)
    record = DegreeRecord(
        value=float(value),
        degree=degree,
        residual=float(residual),
        fiber_degree=fiber_degree,
        base_degree=base_degree,
        fiber_value=float(fiber_value),
        base_value=float(base_value),
        theta_vertical=path.theta_vertical,
        theta_horizontal=path.theta_horizontal,
    )
    logger.debug(
        "degree at %s: %d",
        p.base_value,
        degree,
        extra={"value": record.value, "fiber": fiber_degree, "base": base_degree},
    )
    return record


def degree(L0g: GradedLagrangian, L1g: GradedLagrangian, p: IntersectionPoint) -> int:
    return degree_details(L0g, L1g, p).degree


def degree_split(L0g: GradedLagrangian, L1g: GradedLagrangian, p: IntersectionPoint) -> tuple[int, int, int]:
    """
    (fiber degree, base degree, total degree).

    Raises:
        TheoremCheckError: total ≠ fiber + base
    """
    record = degree_details(L0g, L1g, p)
    if record.degree != record.fiber_degree + record.base_degree:
        raise TheoremCheckError(
            f"degree {record.degree} != fiber {record.fiber_degree} + base {record.base_degree}"
        )
    return record.fiber_degree, record.base_degree, record.degree


# ----- bigons -----


@dataclass(frozen=True)
class BigonRecord:
    degree_plus: int
    degree_minus: int
    fiber_degree_plus: int
    fiber_degree_minus: int
    fiber_degree_pulled_back: int
    lhs: int
    rhs: int
    difference: int
    monodromy_displacement: float
    pulled_back_point: PointY
    c_plus: complex


def bigon_loop(L0: FiberedLagrangian, L1: FiberedLagrangian, p_plus: IntersectionPoint, p_minus: IntersectionPoint) -> BasePath:
    """γ_{L₀} from c₊ to c₋ followed by γ_{L₁} back to c₊."""
    return Composite(
        [
            Reparametrized(L0.curve, p_plus.params0[0], p_minus.params0[0]),
            Reparametrized(L1.curve, p_minus.params1[0], p_plus.params1[0]),
        ]
    )


def _around_loop(L0: FiberedLagrangian, t: float, sigma: float, loop: BasePath, nodes=None):
    """Transport L₀(t, σ) and its σ ± h neighbours once around ``loop``."""
    h = config.FD_STEP
    rows = L0.evaluate_many(t, [sigma, sigma - h, sigma + h])
    return transport_rows(L0.model, loop, loop.domain[0], loop.domain[1], rows, L0.options, nodes=nodes)


def _fiber_distance(L: FiberedLagrangian, a: float, b: float) -> float:
    if not L.fiber_periodic:
        return abs(a - b)
    d = abs(a - b) % _TWO_PI
    return min(d, _TWO_PI - d)


def _pulled_back_corner(
    L0: FiberedLagrangian, L1: FiberedLagrangian, t0p: float, s0m: float, t1p: float, loop: BasePath
) -> tuple[float, float]:
    """
    (σ, s₁) with Φ(L₀(t₊, σ)) = L₁(t₊, s₁), Φ the transport once around ``loop``.

    Among the crossings of Φ(L₀,c₊) with L₁,c₊ the one whose σ is closest to
    the fiber parameter of p₋ is taken; for the bigon's own loop this is the
    image of p₋ itself.
    """
    model = L0.model
    h = config.FD_STEP
    sigmas = L0.fiber_grid()
    image, _ = transport_rows(
        model, loop, loop.domain[0], loop.domain[1], L0.evaluate_many(t0p, sigmas), L0.options
    )
    s1 = L1.fiber_grid()
    w0 = model.fiber_coordinate(image)
    w1 = model.fiber_coordinate(L1.evaluate_many(t1p, s1))
    if L0.fiber_periodic:
        sigmas, w0 = np.append(sigmas, sigmas[0] + _TWO_PI), np.append(w0, w0[0])
    if L1.fiber_periodic:
        s1, w1 = np.append(s1, s1[0] + _TWO_PI), np.append(w1, w1[0])
    (ia, ib), u, v = _segment_crossings(w0[:-1], w0[1:], w1[:-1], w1[1:])
    if len(ia) == 0:
        raise TheoremCheckError("fiber of L₀ transported around the loop misses L₁ over c₊")
    seeds = [
        (sigmas[i] + u[i, j] * (sigmas[i + 1] - sigmas[i]), s1[j] + v[i, j] * (s1[j + 1] - s1[j]))
        for i, j in zip(ia, ib)
    ]
    sigma, s = min(seeds, key=lambda seed: _fiber_distance(L0, seed[0], s0m))

    for _ in range(10):
        end, _ = _around_loop(L0, t0p, sigma, loop)
        w_img = model.fiber_coordinate(end)
        w_l1 = model.fiber_coordinate(L1.evaluate_many(t1p, [s, s - h, s + h]))
        r = w_img[0] - w_l1[0]
        d0 = (w_img[2] - w_img[1]) / (2 * h)
        d1 = (w_l1[2] - w_l1[1]) / (2 * h)
        jac = np.array([[d0.real, -d1.real], [d0.imag, -d1.imag]])
        step = np.linalg.lstsq(jac, -np.array([r.real, r.imag]), rcond=None)[0]
        sigma, s = sigma + step[0], s + step[1]
        if np.max(np.abs(step)) < 1e-12:
            break
    return L0.normalize_fiber(sigma), L1.normalize_fiber(s)


def _pulled_back_fiber_degree(
    L0g: GradedLagrangian,
    L1g: GradedLagrangian,
    p_plus: IntersectionPoint,
    p_minus: IntersectionPoint,
    loop: BasePath,
) -> tuple[int, PointY]:
    """Fiber degree of (Φ(L₀,c₊), L₁,c₊) at p′₋, with Φ the transport around ``loop``."""
    L0, L1 = L0g.lagrangian, L1g.lagrangian
    model = L0.model
    h = config.FD_STEP
    t0p, t1p = p_plus.params0[0], p_plus.params1[0]
    sigma, s1 = _pulled_back_corner(L0, L1, t0p, p_minus.params0[1], t1p, loop)
    _, recorded = _around_loop(L0, t0p, sigma, loop, nodes=loop.nodes(L0.grid_step))
    points = recorded[:, 0]
    tangents = (recorded[:, 2] - recorded[:, 1]) / (2 * h)
    phases = _squared_phase(_residue_rows(model, points, tangents))
    lifts = unwrap_lift(phases, _snap(L0g.vertical_lift(t0p, sigma), phases[0]))
    pulled_back = points[-1]
    v1 = vertical_tangent(L1, t1p, s1)
    theta = _line_angle(model.residue_form(pulled_back, v1) / model.residue_form(pulled_back, tangents[-1]))
    _check_factor(theta, "vertical", config.TRANSVERSALITY_THRESHOLD)
    value = _factor_degree(
        theta,
        model.residue_form(pulled_back, tangents[-1]),
        float(lifts[-1]),
        L1g.vertical_lift(t1p, s1),
    )
    degree_value, _ = _round_degree(value)
    return degree_value, PointY(pulled_back)


def bigon_relation(
    L0g: GradedLagrangian,
    L1g: GradedLagrangian,
    points: Sequence[IntersectionPoint],
    loop: BasePath | None = None,
    explicit: bool = False,
) -> BigonRecord:
    """
    Both sides of deg(p₊) − deg(p₋) = deg_fib(p₊) − deg_fib(Φ(L₀); p′₋) + 1.

    p₊ is the corner with the larger base degree unless ``explicit`` is set,
    in which case ``points`` is read as (p₊, p₋). ``loop`` must be closed and
    based at c₊; it defaults to :func:`bigon_loop`. Φ and p′₋ follow it.

    Raises:
        ArgumentError: wrong corner count, open loop or loop not based at c₊
    """
    if len(points) != 2:
        raise ArgumentError(f"a bigon has two corners, got {len(points)}")
    first, second = (degree_details(L0g, L1g, q) for q in points)
    if explicit or first.base_degree >= second.base_degree:
        p_plus, p_minus, rec_plus, rec_minus = points[0], points[1], first, second
    else:
        p_plus, p_minus, rec_plus, rec_minus = points[1], points[0], second, first

    L0, L1 = L0g.lagrangian, L1g.lagrangian
    model = L0.model
    loop = loop or bigon_loop(L0, L1, p_plus, p_minus)
    if not loop.is_closed():
        raise ArgumentError("bigon loop must be closed")
    if abs(loop.point(loop.domain[0]) - p_plus.base_value) > 1e-9:
        raise ArgumentError(f"bigon loop must start at c₊ = {p_plus.base_value:.6g}")
    if model.fiber_dim > 0:
        pulled_back_degree, pulled_back = _pulled_back_fiber_degree(L0g, L1g, p_plus, p_minus, loop)
    else:
        pulled_back_degree = rec_minus.fiber_degree
        pulled_back = PointY(L1.evaluate(p_plus.params1[0], 0.0))
    q = p_plus.point
    moved = monodromy(model, loop, q, L0.options)
    displacement = float(np.linalg.norm(moved.coords - q.coords))

    lhs = rec_plus.degree - rec_minus.degree
    rhs = rec_plus.fiber_degree - pulled_back_degree + 1
    record = BigonRecord(
        degree_plus=rec_plus.degree,
        degree_minus=rec_minus.degree,
        fiber_degree_plus=rec_plus.fiber_degree,
        fiber_degree_minus=rec_minus.fiber_degree,
        fiber_degree_pulled_back=pulled_back_degree,
        lhs=lhs,
        rhs=rhs,
        difference=lhs - rhs,
        monodromy_displacement=displacement,
        pulled_back_point=pulled_back,
        c_plus=p_plus.base_value,
    )
    logger.info(
        "bigon relation %d vs %d",
        lhs,
        rhs,
        extra={"monodromy_displacement": displacement, "c_plus": p_plus.base_value},
    )
    return record
