"""
Base paths in the complex plane.

Every path is a closed-form map from a real interval into C together with its
derivative. Paths made of several analytic pieces report the junctions as
breakpoints; numerical integrators and interpolators never step across one.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from services.geometry.core.exceptions import ArgumentError

_JOIN_TOL = 1e-9


@dataclass(frozen=True)
class SmoothPiece:
    """Closed parameter interval on which a path is analytic."""

    lo: float
    hi: float
    point: Callable[[np.ndarray | float], np.ndarray | complex]
    derivative: Callable[[np.ndarray | float], np.ndarray | complex]

    def contains(self, a: float, b: float, eps: float = 1e-12) -> bool:
        return self.lo - eps <= min(a, b) and max(a, b) <= self.hi + eps


class BasePath(ABC):
    """A smooth (or piecewise smooth, C¹) path γ: [t_min, t_max] → C."""

    domain: tuple[float, float]

    @abstractmethod
    def smooth_pieces(self) -> list[SmoothPiece]:
        """Analytic pieces covering the domain, in increasing parameter order."""

    @cached_property
    def _pieces(self) -> list[SmoothPiece]:
        return self.smooth_pieces()

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(piece.lo for piece in self._pieces[1:])

    def _dispatch(self, t, attr: str):
        pieces = self._pieces
        if len(pieces) == 1:
            return getattr(pieces[0], attr)(t)
        t_arr = np.asarray(t, dtype=float)
        # right-continuous at junctions
        los = np.array([piece.lo for piece in pieces])
        index = np.clip(np.searchsorted(los, t_arr, side="right") - 1, 0, len(pieces) - 1)
        out = np.empty(t_arr.shape, dtype=complex)
        for k, piece in enumerate(pieces):
            mask = index == k
            if np.any(mask):
                out[mask] = getattr(piece, attr)(t_arr[mask])
        return complex(out) if out.ndim == 0 else out

    def point(self, t):
        return self._dispatch(t, "point")

    def derivative(self, t):
        return self._dispatch(t, "derivative")

    def piece_for(self, a: float, b: float) -> SmoothPiece:
        for piece in self._pieces:
            if piece.contains(a, b):
                return piece
        raise ArgumentError(f"interval [{a:g}, {b:g}] crosses a breakpoint or leaves the domain")

    def nodes(self, step: float, lo: float | None = None, hi: float | None = None) -> np.ndarray:
        """Grid over [lo, hi] with spacing at most ``step`` that contains every breakpoint."""
        lo = self.domain[0] if lo is None else lo
        hi = self.domain[1] if hi is None else hi
        knots = [lo] + [b for b in self.breakpoints if lo < b < hi] + [hi]
        out = []
        for a, b in zip(knots[:-1], knots[1:]):
            count = max(1, math.ceil((b - a) / step - 1e-9))
            out.append(np.linspace(a, b, count + 1)[:-1])
        out.append(np.array([hi]))
        return np.concatenate(out)

    def polyline(self, step: float = 1e-2) -> tuple[np.ndarray, np.ndarray]:
        ts = self.nodes(step)
        return ts, np.asarray(self.point(ts), dtype=complex)

    def project(self, c: complex, step: float = 1e-2) -> float:
        """Parameter of the point of the path nearest to ``c``."""
        ts, values = self.polyline(step)
        k = int(np.argmin(np.abs(values - c)))
        lo = ts[max(k - 1, 0)]
        hi = ts[min(k + 1, len(ts) - 1)]
        if hi <= lo:
            return float(ts[k])
        result = minimize_scalar(
            lambda t: abs(self.point(t) - c) ** 2,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13},
        )
        return float(result.x)

    def is_closed(self, tol: float = _JOIN_TOL) -> bool:
        return abs(self.point(self.domain[1]) - self.point(self.domain[0])) <= tol

    def rotated(self, phi: float) -> "BasePath":
        return RotatedPath(self, phi)


def _check_domain(domain: Sequence[float]) -> tuple[float, float]:
    lo, hi = float(domain[0]), float(domain[1])
    if not hi > lo:
        raise ArgumentError(f"empty path domain [{lo:g}, {hi:g}]")
    return lo, hi


class Segment(BasePath):
    """γ(t) = start + (end − start)·t."""

    def __init__(self, start: complex, end: complex, domain: Sequence[float] = (0.0, 1.0)):
        self.start = complex(start)
        self.end = complex(end)
        if self.start == self.end:
            raise ArgumentError("segment endpoints coincide")
        self.domain = _check_domain(domain)

    def smooth_pieces(self):
        d = self.end - self.start
        return [
            SmoothPiece(
                *self.domain,
                point=lambda t: self.start + d * np.asarray(t, dtype=float),
                derivative=lambda t: d * np.ones_like(np.asarray(t, dtype=float), dtype=complex),
            )
        ]

    def __repr__(self):
        return f"Segment({self.start}, {self.end}, domain={self.domain})"


class Arc(BasePath):
    """γ(t) = center + radius·exp(i(θ₀ + (θ₁ − θ₀)t))."""

    def __init__(
        self,
        center: complex,
        radius: float,
        theta_start: float,
        theta_end: float,
        domain: Sequence[float] = (0.0, 1.0),
    ):
        if radius <= 0:
            raise ArgumentError(f"arc radius must be positive, got {radius}")
        if theta_start == theta_end:
            raise ArgumentError("arc has zero angular span")
        self.center = complex(center)
        self.radius = float(radius)
        self.theta_start = float(theta_start)
        self.theta_end = float(theta_end)
        self.domain = _check_domain(domain)

    def smooth_pieces(self):
        span = self.theta_end - self.theta_start

        def point(t):
            return self.center + self.radius * np.exp(1j * (self.theta_start + span * np.asarray(t)))

        def derivative(t):
            return 1j * span * self.radius * np.exp(1j * (self.theta_start + span * np.asarray(t)))

        return [SmoothPiece(*self.domain, point=point, derivative=derivative)]

    def __repr__(self):
        return (
            f"Arc(center={self.center}, radius={self.radius}, "
            f"theta=({self.theta_start:g}, {self.theta_end:g}), domain={self.domain})"
        )


class ConstantPath(BasePath):
    def __init__(self, value: complex, domain: Sequence[float] = (0.0, 1.0)):
        self.value = complex(value)
        self.domain = _check_domain(domain)

    def smooth_pieces(self):
        return [
            SmoothPiece(
                *self.domain,
                point=lambda t: self.value + np.zeros_like(np.asarray(t, dtype=float), dtype=complex),
                derivative=lambda t: np.zeros_like(np.asarray(t, dtype=float), dtype=complex),
            )
        ]


class RotatedPath(BasePath):
    def __init__(self, path: BasePath, phi: float):
        self.path = path
        self.phi = float(phi)
        self.domain = path.domain

    def smooth_pieces(self):
        rot = np.exp(1j * self.phi)
        return [
            SmoothPiece(
                piece.lo,
                piece.hi,
                point=lambda t, p=piece: rot * p.point(t),
                derivative=lambda t, p=piece: rot * p.derivative(t),
            )
            for piece in self.path.smooth_pieces()
        ]


class Reparametrized(BasePath):
    """u ∈ [0, 1] ↦ path(t_start + (t_end − t_start)·u); reversal allowed."""

    def __init__(self, path: BasePath, t_start: float, t_end: float):
        lo, hi = path.domain
        for value in (t_start, t_end):
            if not lo - 1e-12 <= value <= hi + 1e-12:
                raise ArgumentError(f"parameter {value:g} outside domain {path.domain}")
        if t_start == t_end:
            raise ArgumentError("degenerate reparametrization")
        self.path = path
        self.t_start = float(t_start)
        self.t_end = float(t_end)
        self.domain = (0.0, 1.0)

    def smooth_pieces(self):
        scale = self.t_end - self.t_start
        a, b = sorted((self.t_start, self.t_end))
        pieces = []
        for piece in self.path.smooth_pieces():
            lo, hi = max(piece.lo, a), min(piece.hi, b)
            if hi - lo <= 1e-14:
                continue
            u0, u1 = sorted(((lo - self.t_start) / scale, (hi - self.t_start) / scale))
            pieces.append(
                SmoothPiece(
                    max(u0, 0.0),
                    min(u1, 1.0),
                    point=lambda u, p=piece: p.point(self.t_start + scale * np.asarray(u)),
                    derivative=lambda u, p=piece: scale
                    * p.derivative(self.t_start + scale * np.asarray(u)),
                )
            )
        pieces.sort(key=lambda piece: piece.lo)
        return pieces


class Composite(BasePath):
    """
    Concatenation of paths. Piece k occupies a parameter interval of the same
    length as its own domain; ``origin`` is subtracted so that the global
    parameter 0 can sit anywhere along the chain.
    """

    def __init__(self, pieces: Sequence[BasePath], origin: float = 0.0):
        if not pieces:
            raise ArgumentError("composite path needs at least one piece")
        self.parts = tuple(pieces)
        self.origin = float(origin)
        self._offsets = []
        cursor = -self.origin
        for index, part in enumerate(self.parts):
            self._offsets.append(cursor)
            cursor += part.domain[1] - part.domain[0]
            if index:
                prev = self.parts[index - 1]
                gap = abs(prev.point(prev.domain[1]) - part.point(part.domain[0]))
                if gap > _JOIN_TOL:
                    raise ArgumentError(f"composite pieces {index - 1} and {index} do not join ({gap:.3g})")
        self.domain = (-self.origin, cursor)

    def smooth_pieces(self):
        pieces = []
        for offset, part in zip(self._offsets, self.parts):
            shift = part.domain[0] - offset
            for piece in part.smooth_pieces():
                pieces.append(
                    SmoothPiece(
                        piece.lo - shift,
                        piece.hi - shift,
                        point=lambda t, p=piece, s=shift: p.point(np.asarray(t) + s),
                        derivative=lambda t, p=piece, s=shift: p.derivative(np.asarray(t) + s),
                    )
                )
        return pieces


class LinearPathFamily:
    """
    One straight path per row: c_k(t) = start_k + velocity_k·t.

    Quacks like a single-piece path for the transport integrator.
    """

    def __init__(self, start: np.ndarray, velocity: np.ndarray):
        self.start = np.asarray(start, dtype=complex).reshape(-1)
        self.velocity = np.asarray(velocity, dtype=complex).reshape(-1)
        if self.start.shape != self.velocity.shape:
            raise ArgumentError("start and velocity rows differ")
        self.domain = (-math.inf, math.inf)
        self.breakpoints = ()

    def point(self, t):
        return self.start + self.velocity * t

    def derivative(self, t):
        return self.velocity

    def piece_for(self, a, b):
        return SmoothPiece(-math.inf, math.inf, point=self.point, derivative=self.derivative)


def ushape(
    angle_in: float,
    angle_out: float,
    radius: float,
    far_radius: float,
    fillet: float | None = None,
) -> Composite:
    """
    U-shaped curve: radial ray in at ``angle_in``, a circular arc of ``radius``
    through angle 0 (away from the negative real axis), radial ray out at
    ``angle_out``. Corners are rounded with tangent fillet arcs so the curve is
    C¹. The parameter origin sits at the apex of the central arc.
    """
    if not -math.pi < angle_in < 0.0 < angle_out < math.pi:
        raise ArgumentError("ushape needs -pi < angle_in < 0 < angle_out < pi")
    kappa = 0.25 * radius if fillet is None else float(fillet)
    if kappa <= 0:
        raise ArgumentError("fillet radius must be positive")
    beta = math.asin(kappa / (radius + kappa))
    foot = (radius + kappa) * math.cos(beta)
    if far_radius <= foot:
        raise ArgumentError(f"far_radius must exceed {foot:g}")
    if angle_out - beta <= angle_in + beta:
        raise ArgumentError("fillets overlap; reduce fillet or widen the angles")

    e_in = np.exp(1j * angle_in)
    e_out = np.exp(1j * angle_out)
    c_in = (radius + kappa) * np.exp(1j * (angle_in + beta))
    c_out = (radius + kappa) * np.exp(1j * (angle_out - beta))
    pieces = [
        Segment(far_radius * e_in, foot * e_in),
        Arc(c_in, kappa, angle_in - math.pi / 2, angle_in + beta - math.pi),
        Arc(0.0, radius, angle_in + beta, angle_out - beta),
        Arc(c_out, kappa, angle_out - beta - math.pi, angle_out - 1.5 * math.pi),
        Segment(foot * e_out, far_radius * e_out),
    ]
    # apex: midpoint of the central arc
    return Composite(pieces, origin=2.5)
