"""
Parallel-transport isotopies of fibered Lagrangians.

A base homotopy h_s(t) = γ(t) + s·χ(t)·(δ̃(t) − γ(t)) moves the base curve;
the isotopy ψ(t, σ, s) transports L(t, σ) along the straight s-line from γ(t)
to h_s(t). The flux form b_s(w) = ω(dψ(w), ∂_sψ) and its primitive, the
potential f, control how disc areas change under the isotopy.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from services.geometry.config import config
from services.geometry.core.exceptions import (
    ArgumentError,
    ExactnessViolationError,
    HomotopyError,
)
from services.geometry.curves import BasePath, LinearPathFamily
from services.geometry.fibration import TransportOptions, transport_rows
from services.geometry.lagrangians import FiberedLagrangian, _real
from services.geometry.models import PointY, TangentVec

logger = logging.getLogger("lglab.isotopy")

Params = tuple[float, float]


def smoothstep(x):
    """Quintic smoothstep 6x⁵ − 15x⁴ + 10x³ clamped to [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**3 * (x * (6.0 * x - 15.0) + 10.0)


class BaseHomotopy:
    """
    h_s(t) = γ(t) + s·χ(t)·(δ̃(t) − γ(t)).

    χ is 1 on ``delta_range``, 0 outside the ``bump_width`` neighbourhood, and
    a quintic smoothstep in between. ``target`` is a path (evaluated at the
    same parameter) or a constant.
    """

    def __init__(
        self,
        model,
        gamma: BasePath,
        target: BasePath | complex,
        delta_range: tuple[float, float] = (0.0, 1.0),
        bump_width: float | None = None,
        clearance: float | None = None,
    ):
        a, b = float(delta_range[0]), float(delta_range[1])
        if not b > a:
            raise ArgumentError(f"empty delta range [{a:g}, {b:g}]")
        self.model = model
        self.gamma = gamma
        self.target = target
        self.delta_range = (a, b)
        self.bump_width = float(bump_width if bump_width is not None else config.BUMP_WIDTH)
        if self.bump_width <= 0:
            raise ArgumentError("bump width must be positive")
        self._check_clearance(clearance or config.CRITICAL_CLEARANCE)

    @property
    def support(self) -> tuple[float, float]:
        a, b = self.delta_range
        lo, hi = self.gamma.domain
        return max(lo, a - self.bump_width), min(hi, b + self.bump_width)

    @property
    def knots(self) -> tuple[float, ...]:
        a, b = self.delta_range
        w = self.bump_width
        lo, hi = self.gamma.domain
        return tuple(k for k in (a - w, a, b, b + w) if lo < k < hi)

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.delta_range
        w = self.bump_width
        rise = smoothstep((t - (a - w)) / w)
        fall = smoothstep(((b + w) - t) / w)
        return np.minimum(rise, fall)

    def target_point(self, t):
        if isinstance(self.target, BasePath):
            return self.target.point(t)
        return complex(self.target) + np.zeros_like(np.asarray(t, dtype=float), dtype=complex)

    def displacement(self, t):
        t = np.asarray(t, dtype=float)
        chi = self.chi(t)
        out = np.zeros(t.shape, dtype=complex)
        mask = chi > 0.0
        if np.any(mask):
            out[mask] = chi[mask] * (self.target_point(t[mask]) - self.gamma.point(t[mask]))
        return complex(out) if out.ndim == 0 else out

    def point(self, t, s):
        return self.gamma.point(t) + s * self.displacement(t)

    def is_identity(self) -> bool:
        ts = self.gamma.nodes(config.LAGRANGIAN_GRID_STEP)
        return bool(np.max(np.abs(self.displacement(ts))) == 0.0)

    def _check_clearance(self, clearance: float) -> None:
        if not self.model.critical_values:
            return
        ts = np.union1d(self.gamma.nodes(config.LAGRANGIAN_GRID_STEP / 4), np.array(self.knots))
        start = np.asarray(self.gamma.point(ts), dtype=complex)
        move = np.asarray(self.displacement(ts), dtype=complex)
        for crit in self.model.critical_values:
            # distance from the critical value to each straight s-segment
            with np.errstate(divide="ignore", invalid="ignore"):
                u = np.real(np.conj(move) * (crit - start)) / np.abs(move) ** 2
            u = np.where(np.abs(move) > 0, np.clip(u, 0.0, 1.0), 0.0)
            distance = np.abs(start + u * move - crit)
            k = int(np.argmin(distance))
            if distance[k] < clearance:
                raise HomotopyError(
                    f"homotopy crosses critical value {crit} near t={ts[k]:g}, s={u[k]:.3g}"
                )


class LagrangianIsotopy:
    """ψ(t, σ, s) = Φ_{γ(t) → h_s(t)}(L(t, σ)) along the straight s-line."""

    def __init__(
        self,
        lagrangian: FiberedLagrangian,
        homotopy: BaseHomotopy,
        options: TransportOptions | None = None,
    ):
        if homotopy.gamma is not lagrangian.curve:
            raise ArgumentError("homotopy must deform the Lagrangian's own base curve")
        self.lagrangian = lagrangian
        self.homotopy = homotopy
        self.options = options or lagrangian.options
        self.name = f"psi({lagrangian.name})"

    @property
    def model(self):
        return self.lagrangian.model

    # ----- evaluation -----

    def evaluate_rows(self, ts, sigmas, s_values: Sequence[float]) -> np.ndarray:
        """
        ψ at paired parameters (t_k, σ_k) for every s in ``s_values``.

        Returns:
            array of shape (len(s_values), m, n+1), ordered like ``s_values``
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
        start = self.lagrangian.evaluate_params(ts, sigmas)
        family = LinearPathFamily(self.homotopy.gamma.point(ts), self.homotopy.displacement(ts))
        s_values = [float(s) for s in s_values]
        found = {}
        positive = sorted({s for s in s_values if s > 0.0})
        negative = sorted({s for s in s_values if s < 0.0}, reverse=True)
        if 0.0 in s_values:
            found[0.0] = start
        if positive:
            _, rec = transport_rows(
                self.model, family, 0.0, positive[-1], start, self.options, nodes=positive
            )
            found.update(zip(positive, rec))
        if negative:
            _, rec = transport_rows(
                self.model, family, 0.0, negative[-1], start, self.options, nodes=negative
            )
            found.update(zip(negative, rec))
        return np.stack([found[s] for s in s_values])

    def evaluate(self, t: float, sigma: float, s: float) -> np.ndarray:
        return self.evaluate_rows([t], [sigma], [s])[0, 0]

    def point(self, t: float, sigma: float, s: float) -> PointY:
        return PointY(self.evaluate(t, sigma, s))

    # ----- flux -----

    def flux_density(self, params: np.ndarray, directions: np.ndarray, s_values) -> np.ndarray:
        """
        b_s(d) = ω(dψ(d), ∂_sψ) for parameter directions d = (dt, dσ).

        Both derivatives are central differences with the configured step.

        Returns:
            array of shape (len(s_values), m)
        """
        params = np.atleast_2d(np.asarray(params, dtype=float))
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        h = config.FD_STEP
        m = len(params)
        rows = np.concatenate([params, params + h * directions, params - h * directions])
        s_values = [float(s) for s in s_values]
        s_nodes = sorted({v for s in s_values for v in (s - h, s, s + h)})
        psi = self.evaluate_rows(rows[:, 0], rows[:, 1], s_nodes)
        index = {s: k for k, s in enumerate(s_nodes)}
        out = np.empty((len(s_values), m))
        for j, s in enumerate(s_values):
            at_s = psi[index[s]]
            du = (at_s[m : 2 * m] - at_s[2 * m :]) / (2.0 * h)
            ds = (psi[index[s + h], :m] - psi[index[s - h], :m]) / (2.0 * h)
            out[j] = self.model.omega(du, ds)
        return out

    def _segment_nodes(self, start: Params, end: Params):
        """Gauss nodes along a straight parameter segment, split at base knots."""
        nodes, weights = np.polynomial.legendre.leggauss(config.GAUSS_NODES_PATH)
        nodes = 0.5 * (nodes + 1.0)
        weights = 0.5 * weights
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        dt = end[0] - start[0]
        cuts = [0.0, 1.0]
        if dt != 0.0:
            for knot in (*self.lagrangian.curve.breakpoints, *self.homotopy.knots, 0.0):
                u = (knot - start[0]) / dt
                if 0.0 < u < 1.0:
                    cuts.append(u)
        cuts = sorted(set(cuts))
        points, wts = [], []
        for a, b in zip(cuts[:-1], cuts[1:]):
            u = a + (b - a) * nodes
            points.append(start[None, :] + u[:, None] * (end - start)[None, :])
            wts.append((b - a) * weights)
        return np.concatenate(points), np.concatenate(wts), end - start

    def _path_integral(self, waypoints: Sequence[Params], s_values, s_weights) -> float:
        params, weights, directions = [], [], []
        for a, b in zip(waypoints[:-1], waypoints[1:]):
            if np.allclose(a, b, atol=0.0, rtol=0.0):
                continue
            pts, wts, d = self._segment_nodes(a, b)
            params.append(pts)
            weights.append(wts)
            directions.append(np.repeat(d[None, :], len(pts), axis=0))
        if not params:
            return 0.0
        density = self.flux_density(np.concatenate(params), np.concatenate(directions), s_values)
        integrated = np.asarray(s_weights) @ density
        return float(np.concatenate(weights) @ integrated)

    def flux_form(self, s: float, t: float, sigma: float, w: TangentVec) -> float:
        """
        b_s(w) for a vector w tangent to ψ_s(L) at ψ(t, σ, s).

        Raises:
            ArgumentError: w is not tangent to the isotoped Lagrangian
        """
        h = config.FD_STEP
        dims = 2 if self.model.fiber_dim > 0 else 1
        base = np.array([[t, sigma]])
        dirs = np.array([[1.0, 0.0], [0.0, 1.0]])[:dims]
        rows = np.concatenate([base, base + h * dirs, base - h * dirs])
        psi = self.evaluate_rows(rows[:, 0], rows[:, 1], [s - h, s, s + h])
        center = psi[1, 0]
        if not np.allclose(w.base.coords, center, atol=1e-6, rtol=0.0):
            raise ArgumentError("w is not based at ψ(t, σ, s)")
        span = (psi[1, 1 : 1 + dims] - psi[1, 1 + dims :]) / (2.0 * h)
        basis = np.stack([_real(v) for v in span], axis=1)
        target = _real(w.components)
        coeffs, *_ = np.linalg.lstsq(basis, target, rcond=None)
        miss = float(np.linalg.norm(basis @ coeffs - target))
        if miss > 1e-6 * max(1.0, float(np.linalg.norm(target))):
            raise ArgumentError(f"w is not tangent to the isotoped Lagrangian (miss {miss:.3g})")
        ds = (psi[2, 0] - psi[0, 0]) / (2.0 * h)
        return float(self.model.omega(w.components, ds))

    def flux_loop_integral(self, s: float, loop: Sequence[Params]) -> float:
        """∮ b_s over a closed polygon in (t, σ) parameters."""
        if len(loop) < 2:
            raise ArgumentError("loop needs at least two waypoints")
        first, last = np.asarray(loop[0], float), np.asarray(loop[-1], float)
        closed = np.allclose(first, last, atol=1e-12)
        if not closed and self.lagrangian.fiber_periodic:
            d = last - first
            closed = abs(d[0]) < 1e-12 and abs(abs(d[1]) - 2.0 * math.pi) < 1e-9
        if not closed:
            raise ArgumentError("flux loop is not closed in L")
        return self._path_integral(list(loop), [s], [1.0])

    def fiber_loop(self, t: float) -> list[Params]:
        """Generator of H₁(L): the fiber circle over γ(t)."""
        if not self.lagrangian.fiber_periodic:
            raise ArgumentError(f"{self.lagrangian.name} has no closed fiber loop")
        return [(t, 0.0), (t, 2.0 * math.pi)]

    def potential(
        self,
        p: Params,
        basepoint: Params,
        path: Sequence[Params] | None = None,
        check: bool = True,
    ) -> float:
        """
        f(p) = ∫ from basepoint to p of B = ∫₀¹ b_s ds.

        The s-integral uses Gauss–Legendre nodes; the line integral follows
        ``path`` (default: fiber direction first, then base direction). When
        ``check`` is set the transposed route is integrated too.

        Raises:
            ExactnessViolationError: the two routes disagree beyond POTENTIAL_TOL
        """
        p = (float(p[0]), float(p[1]))
        basepoint = (float(basepoint[0]), float(basepoint[1]))
        if p == basepoint:
            return 0.0
        nodes, weights = np.polynomial.legendre.leggauss(config.GAUSS_NODES_S)
        s_values = 0.5 * (nodes + 1.0)
        s_weights = 0.5 * weights
        route = list(path) if path is not None else [basepoint, (basepoint[0], p[1]), p]
        value = self._path_integral(route, s_values, s_weights)
        if check:
            other = [basepoint, (p[0], basepoint[1]), p]
            if path is not None and np.allclose(np.asarray(route), np.asarray(other)):
                other = [basepoint, (basepoint[0], p[1]), p]
            second = self._path_integral(other, s_values, s_weights)
            if abs(value - second) > config.POTENTIAL_TOL:
                raise ExactnessViolationError(value, second, config.POTENTIAL_TOL)
        logger.debug("potential %s -> %s = %.10g", basepoint, p, value)
        return value


class IsotopedLagrangian:
    """ψ_s(L) at a fixed s, addressed by the parameters of L."""

    def __init__(self, isotopy: LagrangianIsotopy, s: float = 1.0):
        self.isotopy = isotopy
        self.s = float(s)
        self.name = f"{isotopy.lagrangian.name}@s={self.s:g}"

    def evaluate_params(self, ts, sigmas) -> np.ndarray:
        return self.isotopy.evaluate_rows(ts, sigmas, [self.s])[0]


def make_isotopy(
    L: FiberedLagrangian,
    target: BasePath | complex,
    delta_range: tuple[float, float] = (0.0, 1.0),
    bump_width: float | None = None,
) -> LagrangianIsotopy:
    homotopy = BaseHomotopy(
        L.model,
        L.curve,
        target,
        delta_range=delta_range,
        bump_width=bump_width,
        clearance=L.options.critical_clearance,
    )
    logger.info(
        "isotopy of %s over %s", L.name, delta_range, extra={"bump_width": homotopy.bump_width}
    )
    return LagrangianIsotopy(L, homotopy)


def flux_form(iso: LagrangianIsotopy, s: float, t: float, sigma: float, w: TangentVec) -> float:
    return iso.flux_form(s, t, sigma, w)


def flux_loop_integral(iso: LagrangianIsotopy, s: float, loop: Sequence[Params]) -> float:
    return iso.flux_loop_integral(s, loop)


def potential(iso: LagrangianIsotopy, p: Params, basepoint: Params, path=None) -> float:
    return iso.potential(p, basepoint, path)
