"""
Geometry設定定義

数値カーネル (輸送・求積・位相のアンラップ) の既定値を環境変数からロードします。
シナリオ側の上書きは overridden() でブロック単位に適用します。
"""

import sys
from contextlib import contextmanager
from typing import Any, Iterator

from pydantic import Field

from services.common.core.config import BaseAppConfig


class GeometryConfig(BaseAppConfig):
    """
    数値カーネルの設定管理
    """

    # ===== Transport =====
    TRANSPORT_STEP: float = Field(default=1e-3, gt=0, le=0.1, description="RK4のステップ幅")
    FIBER_TOL: float = Field(default=1e-8, gt=0, description="ファイバー拘束 |v - c| の許容誤差")
    MAX_NEWTON_ITERS: int = Field(default=3, ge=1, le=20, description="射影Newton反復の上限")
    CRITICAL_CLEARANCE: float = Field(
        default=1e-6, gt=0, description="臨界値・臨界点からの最小距離"
    )

    # ===== Fibered Lagrangians =====
    LAGRANGIAN_GRID_STEP: float = Field(
        default=1e-2, gt=0, le=0.1, description="輸送軌道を記録する t グリッド幅"
    )
    FD_STEP: float = Field(default=1e-5, gt=0, description="中心差分のステップ幅")
    TRAJECTORY_CACHE_SIZE: int = Field(default=4096, ge=16, description="軌道キャッシュの上限")
    FIBER_SAMPLES: int = Field(
        default=64, ge=8, description="交点探索で用いるファイバーパラメータのサンプル数"
    )
    TRANSVERSALITY_THRESHOLD: float = Field(
        default=1e-3, gt=0, description="横断性判定の最小主角度(rad)"
    )
    INTERSECTION_TOL: float = Field(default=1e-8, gt=0, description="交点残差の許容誤差")

    # ===== Grading =====
    DEGREE_RESIDUAL_TOL: float = Field(default=1e-4, gt=0, description="次数の丸め前残差の上限")
    ANCHOR_TOL: float = Field(default=1e-6, gt=0, description="アンカー整合性の許容誤差")
    PHASE_MAX_STEP: float = Field(
        default=0.25, gt=0, lt=0.5, description="アンラップ時の1ステップあたり最大増分(回転数)"
    )
    PHASE_MAX_REFINEMENTS: int = Field(default=8, ge=0, description="グリッド倍加の上限回数")
    SHORT_PATH_SAMPLES: int = Field(default=65, ge=3, description="短絡路の位相サンプル数")

    # ===== Isotopy / potential =====
    GAUSS_NODES_S: int = Field(default=16, ge=2, description="s方向Gauss-Legendre節点数")
    GAUSS_NODES_PATH: int = Field(default=24, ge=2, description="線積分の区間あたり節点数")
    POTENTIAL_TOL: float = Field(default=1e-5, gt=0, description="経路独立性の許容誤差")
    BUMP_WIDTH: float = Field(default=0.25, gt=0, description="ホモトピーのバンプ裾幅")

    # ===== Disc area =====
    AREA_MESH_CELLS: int = Field(default=64, ge=2, description="パッチ1辺あたりのセル数")
    AREA_CONVERGENCE_TOL: float = Field(default=1e-5, gt=0, description="メッシュ倍加時の収束判定")
    COLLAR_SAMPLES: int = Field(default=65, ge=5, description="カラー曲面の標本数(1辺)")
    BOUNDARY_TOL: float = Field(default=1e-6, gt=0, description="境界弧の忠実度許容誤差")

    # ===== Experiment checks =====
    ORACLE_TOL: float = Field(default=1e-6, gt=0, description="閉形式オラクルとの許容誤差")
    MOMENT_TOL: float = Field(default=1e-8, gt=0, description="conic モーメント μ の保存許容誤差")
    VERTICAL_FLUX_TOL: float = Field(default=1e-6, gt=0, description="垂直ベクトル上のフラックス許容値")
    PHASE_SPLIT_TOL: float = Field(default=1e-8, gt=0, description="位相分解 α_L = α^Vert·α^Hor の許容誤差")
    RESIDUE_PROBE_TOL: float = Field(default=1e-10, gt=0, description="留数のプローブ非依存性の許容誤差")
    AREA_IDENTITY_TOL: float = Field(default=1e-5, gt=0, description="面積恒等式の残差許容値")
    REPARAM_TOL: float = Field(default=1e-6, gt=0, description="再パラメータ化不変性の許容誤差")

    # ===== General =====
    ALGEBRA_TOL: float = Field(default=1e-9, gt=0, description="代数的恒等式の許容誤差")
    LAB_MAX_WORKERS: int = Field(default=1, ge=1, le=32, description="実験の並列ワーカー数")


# シングルトンとして設定をロード
try:
    config = GeometryConfig()
except Exception as e:
    sys.stderr.write(f"Failed to load configuration: {e}\n")
    raise


@contextmanager
def overridden(updates: dict[str, Any]) -> Iterator["GeometryConfig"]:
    """
    シナリオ単位で設定値を一時的に上書きする。

    上書き値は GeometryConfig のバリデーションを通してからシングルトンへ反映し、
    ブロック終了時に元の値へ戻す。
    """
    if not updates:
        yield config
        return
    unknown = sorted(set(updates) - set(GeometryConfig.model_fields))
    if unknown:
        raise KeyError(f"unknown settings: {', '.join(unknown)}")
    checked = GeometryConfig.model_validate({**config.model_dump(), **updates})
    saved = {key: getattr(config, key) for key in updates}
    for key in updates:
        setattr(config, key, getattr(checked, key))
    try:
        yield config.model_copy(update={key: getattr(checked, key) for key in updates})
    finally:
        for key, value in saved.items():
            setattr(config, key, value)
