"""
Scenario schema

シナリオファイル (JSON / YAML, schema_version 1) の構造定義。
複素数は数値または [re, im] の組で記述する。
"""

from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator


def parse_complex(value: Any) -> complex:
    if isinstance(value, complex):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a complex number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            return complex(re, im)
    raise ValueError("expected a number or an [re, im] pair")


Complex = Annotated[complex, BeforeValidator(parse_complex)]
Interval = Tuple[float, float]


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


# =============================================================================
# Geometry declarations
# =============================================================================


class CurveSpec(_Spec):
    """基底曲線の宣言"""

    kind: Literal["segment", "arc", "constant", "ushape", "composite"]
    start: Optional[Complex] = Field(None, description="segment: 始点")
    end: Optional[Complex] = Field(None, description="segment: 終点")
    center: Optional[Complex] = Field(None, description="arc: 中心")
    radius: Optional[float] = Field(None, gt=0, description="arc / ushape: 半径")
    theta_start: Optional[float] = Field(None, description="arc: 開始角")
    theta_end: Optional[float] = Field(None, description="arc: 終了角")
    value: Optional[Complex] = Field(None, description="constant: 値")
    angle_in: Optional[float] = Field(None, description="ushape: 入射レイの角度")
    angle_out: Optional[float] = Field(None, description="ushape: 出射レイの角度")
    far_radius: Optional[float] = Field(None, gt=0, description="ushape: レイの外端半径")
    fillet: Optional[float] = Field(None, gt=0, description="ushape: フィレット半径")
    pieces: Optional[List["CurveSpec"]] = Field(None, description="composite: 構成パス")
    origin: float = Field(default=0.0, description="composite: パラメータ原点")
    domain: Optional[Interval] = Field(None, description="パラメータ区間")
    rotate: float = Field(default=0.0, description="原点まわりの回転角")

    @model_validator(mode="after")
    def _required_fields(self) -> "CurveSpec":
        required = {
            "segment": ("start", "end"),
            "arc": ("center", "radius", "theta_start", "theta_end"),
            "constant": ("value",),
            "ushape": ("angle_in", "angle_out", "radius", "far_radius"),
            "composite": ("pieces",),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} curve needs {', '.join(missing)}")
        if self.domain is not None:
            if self.kind in ("ushape", "composite"):
                raise ValueError(f"{self.kind} curves fix their own parameter domain")
            if not self.domain[1] > self.domain[0]:
                raise ValueError("domain must be an increasing interval")
        return self


class FiberSpec(_Spec):
    """ファイバーLagrangianの宣言"""

    kind: Literal["circle", "real_ray", "spiral", "point"]
    c0: Optional[Complex] = Field(None, description="基点ファイバーの値 (省略時は γ(0))")
    r: float = Field(default=1.0, gt=0, description="circle: 半径")
    s_range: Interval = Field(default=(-2.0, 2.0), description="ray / spiral: パラメータ範囲")
    pitch: float = Field(default=0.0, description="spiral: ピッチ")
    angle: float = Field(default=0.0, description="spiral: 回転角")


class AnchorParams(_Spec):
    t: float = Field(default=0.0, description="アンカー点の基底パラメータ")
    s: Optional[float] = Field(None, description="アンカー点のファイバーパラメータ")


class GradingSpec(_Spec):
    fiber_anchor: float = Field(..., description="α̃^Vert のアンカー値")
    base_anchor: float = Field(..., description="α̃_{v(L)} のアンカー値")
    anchor_params: AnchorParams = Field(default_factory=AnchorParams)


class LagrangianSpec(_Spec):
    curve: CurveSpec
    fiber: FiberSpec
    grading: Optional[GradingSpec] = None


class IsotopySpec(_Spec):
    """ベースホモトピー h_s と、それを覆うLagrangianイソトピーの宣言"""

    lagrangian: str = Field(..., description="変形するLagrangian名")
    target: Union[Complex, CurveSpec] = Field(..., description="δ̃ (定数または曲線)")
    delta_range: Interval = Field(default=(0.0, 1.0), description="δ̃ に一致させる区間")
    bump_width: Optional[float] = Field(None, gt=0, description="バンプの裾幅")


class IntegratorSpec(_Spec):
    step: Optional[float] = Field(None, gt=0, le=0.1, description="RK4ステップ幅")
    fiber_tol: Optional[float] = Field(None, gt=0, description="ファイバー拘束の許容誤差")
    max_newton_iters: Optional[int] = Field(None, ge=1, le=20, description="射影Newton反復回数")


class PatchSpec(_Spec):
    factory: Literal["polar_disc", "fiber_annulus", "constant_disc", "fiber_triangle"]
    params: Dict[str, Any] = Field(default_factory=dict)


class OutputSpec(_Spec):
    svg: bool = Field(default=True, description="base.svg を出力する")
    export_patches: bool = Field(default=False, description="パッチを列形式CSVで出力する")


# =============================================================================
# Experiments
# =============================================================================


class _Experiment(_Spec):
    name: str = Field(..., min_length=1, description="実験名 (summary.csv の experiment 列)")


class TransportExperiment(_Experiment):
    kind: Literal["transport"]
    path: CurveSpec
    start: List[Complex]
    t0: Optional[float] = None
    t1: Optional[float] = None
    expected: Optional[List[Complex]] = None


class MonodromyExperiment(_Experiment):
    kind: Literal["monodromy"]
    loop: CurveSpec
    start: List[Complex]
    expected: Optional[List[Complex]] = Field(None, description="省略時は始点 (自明なモノドロミー)")


class FluxExperiment(_Experiment):
    kind: Literal["flux"]
    isotopy: str
    s_values: List[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    vertical_samples: int = Field(default=50, ge=1, le=1000)
    potential_point: Optional[Tuple[float, float]] = Field(None, description="経路独立性を調べる点 (t, s)")


class GradeExperiment(_Experiment):
    kind: Literal["grade"]
    lagrangian: str
    samples: int = Field(default=100, ge=1, le=1000)
    lift_samples: int = Field(default=10, ge=0, le=200)


class DegreeExperiment(_Experiment):
    kind: Literal["degree"]
    pair: Tuple[str, str]
    expected: Optional[List[int]] = Field(None, description="交点ごとの期待次数")
    expected_split: Optional[List[Tuple[int, int, int]]] = None
    variants: int = Field(default=0, ge=0, le=500)
    anchor_shift: int = Field(default=1, description="アンカーシフト検査の整数幅")


class BigonExperiment(_Experiment):
    kind: Literal["bigon"]
    pair: Tuple[str, str]
    contractible: bool = Field(default=False, description="ループが臨界値を囲まない")
    expected_lhs: Optional[int] = None


class DiscAreaExperiment(_Experiment):
    kind: Literal["disc_area"]
    patch: PatchSpec
    expected: Optional[float] = None


class AreaDifferenceExperiment(_Experiment):
    kind: Literal["area_difference"]
    patch: PatchSpec
    isotopy: Literal["factory", "identity"] = "factory"
    arc: int = Field(default=0, ge=0, description="変形する境界弧の番号")
    target: Optional[Complex] = Field(None, description="factory: 弧を縮める先 (fiber_triangle 以外)")
    delta_range: Interval = Field(default=(0.25, 0.5), description="factory: δ̃ に一致させる区間")
    bump_width: float = Field(default=0.1, gt=0, description="factory: バンプの裾幅")


class TriangleSplitExperiment(_Experiment):
    kind: Literal["triangle_split"]
    patch: PatchSpec


Experiment = Annotated[
    Union[
        TransportExperiment,
        MonodromyExperiment,
        FluxExperiment,
        GradeExperiment,
        DegreeExperiment,
        BigonExperiment,
        DiscAreaExperiment,
        AreaDifferenceExperiment,
        TriangleSplitExperiment,
    ],
    Field(discriminator="kind"),
]


class Scenario(_Spec):
    """シナリオファイル全体"""

    schema_version: Literal[1]
    name: str = Field(..., min_length=1)
    description: str = ""
    model: str = Field(..., description="カタログのモデルID")
    seed: int = Field(default=0, ge=0, description="ランダム検査のシード")
    integrator: IntegratorSpec = Field(default_factory=IntegratorSpec)
    settings: Dict[str, float] = Field(
        default_factory=dict, description="GeometryConfig の上書き (例: AREA_MESH_CELLS)"
    )
    lagrangians: Dict[str, LagrangianSpec] = Field(default_factory=dict)
    isotopies: Dict[str, IsotopySpec] = Field(default_factory=dict)
    experiments: List[Experiment] = Field(..., min_length=1)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _references_resolve(self) -> "Scenario":
        for name, iso in self.isotopies.items():
            if iso.lagrangian not in self.lagrangians:
                raise ValueError(f"isotopy {name!r} references unknown Lagrangian {iso.lagrangian!r}")
        seen = set()
        for exp in self.experiments:
            if exp.name in seen:
                raise ValueError(f"duplicate experiment name {exp.name!r}")
            seen.add(exp.name)
            refs: List[str] = []
            if isinstance(exp, GradeExperiment):
                refs = [exp.lagrangian]
            elif isinstance(exp, (DegreeExperiment, BigonExperiment)):
                refs = list(exp.pair)
            for ref in refs:
                if ref not in self.lagrangians:
                    raise ValueError(f"experiment {exp.name!r} references unknown Lagrangian {ref!r}")
                if self.lagrangians[ref].grading is None:
                    raise ValueError(f"experiment {exp.name!r} needs a grading on {ref!r}")
            if isinstance(exp, FluxExperiment) and exp.isotopy not in self.isotopies:
                raise ValueError(f"experiment {exp.name!r} references unknown isotopy {exp.isotopy!r}")
        return self
