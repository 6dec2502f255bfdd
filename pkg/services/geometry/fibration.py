"""
Vertical/horizontal splitting, horizontal lifts and symplectic parallel transport.

For the Kähler catalogue models the horizontal space at z is the complex line
spanned by conj(∇v(z)), so the lift of a base vector ξ is ξ·conj(g)/|g|².
Transport integrates that lift with fixed-step RK4 and projects back onto the
fiber after every step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from services.geometry.config import GeometryConfig, config
from services.geometry.core.exceptions import (
    ArgumentError,
    PathError,
    SingularSplitError,
    TransportError,
)
from services.geometry.models import ModelSpec, PointY, TangentVec

logger = logging.getLogger("lglab.fibration")


class TransportOptions(BaseModel):
    """Integrator options (シナリオの `integrator` セクションに対応)"""

    model_config = ConfigDict(frozen=True)

    step: float = Field(default=1e-3, gt=0, le=0.1, description="RK4ステップ幅")
    fiber_tol: float = Field(default=1e-8, gt=0, description="ファイバー拘束の許容誤差")
    max_newton_iters: int = Field(default=3, ge=1, le=20, description="射影Newton反復回数")
    critical_clearance: float = Field(default=1e-6, gt=0, description="臨界値からの最小距離")

    @classmethod
    def from_config(cls, settings: GeometryConfig = config, **overrides) -> "TransportOptions":
        values = {
            "step": settings.TRANSPORT_STEP,
            "fiber_tol": settings.FIBER_TOL,
            "max_newton_iters": settings.MAX_NEWTON_ITERS,
            "critical_clearance": settings.CRITICAL_CLEARANCE,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class TangentSplit:
    vertical: TangentVec
    horizontal: TangentVec


def _gradient_norm2(model: ModelSpec, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = model.gradient(z)
    return g, np.sum(np.abs(g) ** 2, axis=-1)


def split_tangent(model: ModelSpec, p: PointY, x: TangentVec) -> TangentSplit:
    """
    Decompose ``x`` into ker dv ⊕ (Hermitian complement of ker dv).

    Raises:
        SingularSplitError: p is a critical point
    """
    g, n2 = _gradient_norm2(model, p.coords)
    if n2 < config.CRITICAL_CLEARANCE**2:
        raise SingularSplitError(p.coords)
    horizontal = (np.sum(g * x.components) / n2) * np.conj(g)
    return TangentSplit(
        vertical=TangentVec(p, x.components - horizontal),
        horizontal=TangentVec(p, horizontal),
    )


def horizontal_lift(model: ModelSpec, p: PointY, xi: complex) -> TangentVec:
    g, n2 = _gradient_norm2(model, p.coords)
    if n2 < config.CRITICAL_CLEARANCE**2:
        raise SingularSplitError(p.coords)
    return TangentVec(p, complex(xi) * np.conj(g) / n2)


def lift_rows(model: ModelSpec, z: np.ndarray, xi) -> np.ndarray:
    """Vectorised horizontal lift: rows of ``z`` with base velocities ``xi``."""
    g, n2 = _gradient_norm2(model, z)
    return (np.asarray(xi, dtype=complex) / n2)[..., None] * np.conj(g)


def project_to_fiber(
    model: ModelSpec, z: np.ndarray, c, options: TransportOptions, iters: int | None = None
) -> np.ndarray:
    """Newton steps along the horizontal line until v(z) = c."""
    iters = options.max_newton_iters if iters is None else iters
    c = np.asarray(c, dtype=complex)
    for _ in range(iters):
        residual = c - model.value(z)
        if np.max(np.abs(residual), initial=0.0) <= 1e-3 * options.fiber_tol:
            break
        g, n2 = _gradient_norm2(model, z)
        z = z + (residual / n2)[..., None] * np.conj(g)
    return z


def _check_clearance(model: ModelSpec, t: float, c, options: TransportOptions) -> None:
    if not model.critical_values:
        return
    values = np.atleast_1d(np.asarray(c, dtype=complex))
    distance = model.critical_distance(values)
    k = int(np.argmin(distance))
    if distance[k] < options.critical_clearance:
        raise PathError(t, complex(values[k]), float(distance[k]))


def _rk4_interval(model, piece, a: float, b: float, z: np.ndarray, options: TransportOptions):
    count = max(1, math.ceil(abs(b - a) / options.step - 1e-9))
    h = (b - a) / count
    clearance2 = options.critical_clearance**2

    def field(t, state):
        g, n2 = _gradient_norm2(model, state)
        if np.min(n2) < clearance2:
            raise PathError(t, complex(np.ravel(piece.point(t))[0]), float(np.sqrt(np.min(n2))))
        return (np.asarray(piece.derivative(t), dtype=complex) / n2)[..., None] * np.conj(g)

    for k in range(count):
        t = a + k * h
        k1 = field(t, z)
        k2 = field(t + h / 2, z + (h / 2) * k1)
        k3 = field(t + h / 2, z + (h / 2) * k2)
        k4 = field(t + h, z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_next = a + (k + 1) * h
        c = piece.point(t_next)
        _check_clearance(model, t_next, c, options)
        z = project_to_fiber(model, z, c, options)
        drift = float(np.max(np.abs(model.value(z) - c)))
        if drift > options.fiber_tol:
            raise TransportError(t_next, drift, options.fiber_tol)
    return z


def transport_rows(
    model: ModelSpec,
    path,
    t0: float,
    t1: float,
    z: np.ndarray,
    options: TransportOptions | None = None,
    nodes: Sequence[float] | None = None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """
    Transport every row of ``z`` (shape (m, n+1)) along ``path`` from t0 to t1.

    Args:
        path: BasePath or LinearPathFamily (one base path per row)
        nodes: optional parameters between t0 and t1 at which to record the rows

    Returns:
        (end rows, recorded array of shape (len(nodes), m, n+1) or None)
    """
    options = options or TransportOptions.from_config()
    z = np.array(z, dtype=complex, copy=True)
    if z.ndim != 2 or z.shape[1] != model.dim_total:
        raise ArgumentError(f"expected rows of length {model.dim_total}, got shape {z.shape}")

    c0 = path.point(t0)
    _check_clearance(model, t0, c0, options)
    start_drift = float(np.max(np.abs(model.value(z) - c0))) if len(z) else 0.0
    if start_drift > 100.0 * options.fiber_tol:
        raise ArgumentError(f"start point is not in the fiber over path(t0) (drift {start_drift:.3g})")
    z = project_to_fiber(model, z, c0, options)

    lo, hi = sorted((t0, t1))
    record = [] if nodes is None else sorted({float(n) for n in nodes}, reverse=t1 < t0)
    for n in record:
        if not lo - 1e-12 <= n <= hi + 1e-12:
            raise ArgumentError(f"record node {n:g} outside [{lo:g}, {hi:g}]")
    knots = {t0, t1, *record, *(b for b in path.breakpoints if lo < b < hi)}
    knots = sorted(knots, reverse=t1 < t0)

    recorded = {}
    if t0 in record:
        recorded[t0] = z.copy()
    for a, b in zip(knots[:-1], knots[1:]):
        z = _rk4_interval(model, path.piece_for(a, b), a, b, z, options)
        recorded[b] = z.copy()

    logger.debug(
        "transported %d rows over [%g, %g]",
        len(z),
        t0,
        t1,
        extra={"rows": len(z), "knots": len(knots)},
    )
    stacked = np.stack([recorded[n] for n in record]) if nodes is not None else None
    return z, stacked


def parallel_transport(
    model: ModelSpec,
    path,
    t0: float,
    t1: float,
    q: PointY,
    opts: TransportOptions | None = None,
) -> PointY:
    end, _ = transport_rows(model, path, t0, t1, q.coords[None, :], opts)
    return PointY(end[0])


def monodromy(model: ModelSpec, loop, q: PointY, opts: TransportOptions | None = None) -> PointY:
    """Parallel transport once around a closed loop."""
    if not loop.is_closed():
        raise ArgumentError("monodromy needs a closed loop")
    return parallel_transport(model, loop, loop.domain[0], loop.domain[1], q, opts)


def conic_moment(z: np.ndarray) -> np.ndarray:
    """μ = (|z₁|² − |z₂|²)/2, conserved by conic transport."""
    z = np.asarray(z, dtype=complex)
    return 0.5 * (np.abs(z[..., 0]) ** 2 - np.abs(z[..., 1]) ** 2)
