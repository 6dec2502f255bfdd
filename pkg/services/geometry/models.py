"""
Model catalogue.

Explicit Kähler Landau-Ginzburg models on a single complex chart: the
standard form ω = Σ (i/2) dz ∧ dz̄, J = multiplication by i, a polynomial
superpotential v and Ω = dz₁ ∧ … ∧ dz_{n+1}. Every evaluator is a closed
form vectorised over leading axes; the last axis is the chart coordinate.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from services.geometry.config import config
from services.geometry.core.exceptions import ArgumentError, ModelCatalogueError

logger = logging.getLogger("lglab.models")


@dataclass(frozen=True, eq=False)
class PointY:
    """A point of the model chart."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=complex).reshape(-1))


@dataclass(frozen=True, eq=False)
class TangentVec:
    """A tangent vector at ``base``, with components in the chart."""

    base: PointY
    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=complex).reshape(-1)
        if comps.shape != self.base.coords.shape:
            raise ArgumentError(
                f"tangent components {comps.shape} do not match base point {self.base.coords.shape}"
            )
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class ModelSpec(ABC):
    id: str
    dim_total: int
    chart: str
    critical_values: tuple[complex, ...] = field(default=())
    critical_points: tuple[tuple[complex, ...], ...] = field(default=())

    @property
    def fiber_dim(self) -> int:
        return self.dim_total - 1

    # ----- superpotential -----

    @abstractmethod
    def value(self, z: np.ndarray) -> np.ndarray:
        """v(z) over the last axis."""

    @abstractmethod
    def gradient(self, z: np.ndarray) -> np.ndarray:
        """Holomorphic gradient (∂v/∂z_j), same shape as ``z``."""

    def dv(self, z: np.ndarray, x: np.ndarray) -> np.ndarray:
        return np.sum(self.gradient(z) * np.asarray(x, dtype=complex), axis=-1)

    # ----- Kähler structure -----

    @staticmethod
    def J(x: np.ndarray) -> np.ndarray:
        return 1j * np.asarray(x, dtype=complex)

    @staticmethod
    def omega(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.sum(np.imag(np.conj(x) * y), axis=-1)

    @staticmethod
    def Omega(frame: np.ndarray) -> complex:
        """Ω on the columns of ``frame`` (shape (n+1, n+1))."""
        return complex(np.linalg.det(np.asarray(frame, dtype=complex)))

    # ----- fiber charts -----

    @abstractmethod
    def fiber_point(self, w: np.ndarray, c: complex) -> np.ndarray:
        """Closed-form point of the fiber over ``c`` with fiber coordinate ``w``."""

    @abstractmethod
    def fiber_coordinate(self, z: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fiber_point` on the fiber through ``z``."""

    def residue_form(self, z: np.ndarray, x: np.ndarray) -> complex:
        """Closed-form Poincaré residue Ω_c evaluated on a vertical vector."""
        raise ArgumentError(f"{self.id} has no vertical directions")

    def is_critical(self, z: np.ndarray, tol: float | None = None) -> bool:
        tol = config.CRITICAL_CLEARANCE if tol is None else tol
        return bool(np.sum(np.abs(self.gradient(z)) ** 2) < tol**2)

    def critical_distance(self, c: np.ndarray) -> np.ndarray:
        """Distance from base values ``c`` to the nearest critical value (inf if none)."""
        c = np.asarray(c, dtype=complex)
        if not self.critical_values:
            return np.full(c.shape, np.inf)
        crit = np.asarray(self.critical_values, dtype=complex)
        return np.min(np.abs(c[..., None] - crit), axis=-1)


@dataclass(frozen=True)
class TrivialLine(ModelSpec):
    def value(self, z):
        return np.asarray(z, dtype=complex)[..., 0]

    def gradient(self, z):
        return np.ones_like(np.asarray(z, dtype=complex))

    def fiber_point(self, w, c):
        w = np.asarray(w, dtype=complex)
        return np.full(w.shape + (1,), complex(c))

    def fiber_coordinate(self, z):
        return np.zeros(np.asarray(z).shape[:-1], dtype=complex)


@dataclass(frozen=True)
class Conic(ModelSpec):
    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return z[..., 0] * z[..., 1]

    def gradient(self, z):
        z = np.asarray(z, dtype=complex)
        return z[..., ::-1].copy()

    def fiber_point(self, w, c):
        w = np.asarray(w, dtype=complex)
        return np.stack([w, complex(c) / w], axis=-1)

    def fiber_coordinate(self, z):
        return np.asarray(z, dtype=complex)[..., 0]

    def residue_form(self, z, x):
        # dz₁/z₁
        return complex(np.asarray(x)[0] / np.asarray(z)[0])


@dataclass(frozen=True)
class LefschetzQuadratic(ModelSpec):
    def value(self, z):
        z = np.asarray(z, dtype=complex)
        return z[..., 0] ** 2 + z[..., 1] ** 2

    def gradient(self, z):
        return 2.0 * np.asarray(z, dtype=complex)

    def fiber_point(self, w, c):
        # z₁ + i z₂ = w, z₁ − i z₂ = c / w
        w = np.asarray(w, dtype=complex)
        u = complex(c) / w
        return np.stack([(w + u) / 2.0, (w - u) / 2j], axis=-1)

    def fiber_coordinate(self, z):
        z = np.asarray(z, dtype=complex)
        return z[..., 0] + 1j * z[..., 1]

    def residue_form(self, z, x):
        z = np.asarray(z, dtype=complex)
        x = np.asarray(x, dtype=complex)
        if abs(z[1]) >= abs(z[0]):
            return complex(x[0] / (2.0 * z[1]))
        return complex(-x[1] / (2.0 * z[0]))


_CATALOGUE: dict[str, ModelSpec] = {
    "trivial_line": TrivialLine(
        id="trivial_line",
        dim_total=1,
        chart="C (coordinate z), v(z) = z",
    ),
    "conic": Conic(
        id="conic",
        dim_total=2,
        chart="C^2 (z1, z2), v = z1*z2; fiber charts exclude z1 = 0",
        critical_values=(0j,),
        critical_points=((0j, 0j),),
    ),
    "lefschetz_quadratic": LefschetzQuadratic(
        id="lefschetz_quadratic",
        dim_total=2,
        chart="C^2 (z1, z2), v = z1^2 + z2^2; fiber charts use w = z1 + i*z2 != 0",
        critical_values=(0j,),
        critical_points=((0j, 0j),),
    ),
}


def make_model(model_id: str) -> ModelSpec:
    """
    カタログからモデルを取得する。

    Raises:
        ModelCatalogueError: 未知のID
    """
    try:
        return _CATALOGUE[model_id]
    except KeyError:
        raise ModelCatalogueError(model_id, tuple(sorted(_CATALOGUE))) from None


def list_models() -> list[ModelSpec]:
    return [_CATALOGUE[key] for key in sorted(_CATALOGUE)]


def _check_base(p: PointY, *vectors: TangentVec) -> None:
    for vec in vectors:
        if vec.base is p:
            continue
        if vec.base.coords.shape != p.coords.shape or not np.allclose(
            vec.base.coords, p.coords, rtol=0.0, atol=config.ALGEBRA_TOL
        ):
            raise ArgumentError("tangent vector is not based at the evaluation point")


def eval_v(model: ModelSpec, p: PointY) -> complex:
    return complex(model.value(p.coords))


def eval_omega(model: ModelSpec, p: PointY, x: TangentVec, y: TangentVec) -> float:
    _check_base(p, x, y)
    return float(model.omega(x.components, y.components))


def eval_Omega(model: ModelSpec, p: PointY, frame: list[TangentVec]) -> complex:
    if len(frame) != model.dim_total:
        raise ArgumentError(f"{model.id} needs a frame of {model.dim_total} vectors, got {len(frame)}")
    _check_base(p, *frame)
    matrix = np.stack([vec.components for vec in frame], axis=1)
    return model.Omega(matrix)
