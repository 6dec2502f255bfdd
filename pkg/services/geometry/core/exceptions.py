"""
カスタム例外クラス

数値計算 (輸送・交点・次数・面積) で発生するエラーを表現します。
"""


class GeometryError(Exception):
    """数値カーネルの基底例外クラス"""

    pass


class ModelCatalogueError(GeometryError):
    """未知のモデルIDが指定された場合の例外"""

    def __init__(self, model_id: str, known: tuple[str, ...] = ()):
        self.model_id = model_id
        self.known = known
        super().__init__(f"Unknown model: {model_id} (known: {', '.join(known)})")


class ArgumentError(GeometryError, ValueError):
    """引数の形状・基点・範囲が不正な場合の例外"""

    pass


class SingularSplitError(GeometryError):
    """臨界点で接空間を分解しようとした場合の例外"""

    def __init__(self, point):
        self.point = point
        super().__init__(f"dv vanishes at {point}; vertical/horizontal split undefined")


class PathError(GeometryError):
    """基底パスが臨界値を通過(または接近)した場合の例外"""

    def __init__(self, parameter: float, value: complex, distance: float):
        self.parameter = parameter
        self.value = value
        self.distance = distance
        super().__init__(
            f"path reaches critical locus at t={parameter:.6g} "
            f"(c={value:.6g}, distance={distance:.3g})"
        )


class TransportError(GeometryError):
    """射影後もファイバー拘束から外れた場合の例外"""

    def __init__(self, parameter: float, drift: float, tolerance: float):
        self.parameter = parameter
        self.drift = drift
        self.tolerance = tolerance
        super().__init__(
            f"fiber drift {drift:.3g} exceeds tolerance {tolerance:.3g} at t={parameter:.6g}"
        )


class FrameError(GeometryError):
    """接フレームが退化している場合の例外"""

    pass


class HomotopyError(GeometryError):
    """ベースホモトピーが臨界値を横切る場合の例外"""

    pass


class ExactnessViolationError(GeometryError):
    """ポテンシャルが経路に依存する(フラックスが閉でない)場合の例外"""

    def __init__(self, first: float, second: float, tolerance: float):
        self.first = first
        self.second = second
        self.tolerance = tolerance
        super().__init__(
            f"potential is path dependent: {first:.10g} vs {second:.10g} "
            f"(|diff|={abs(first - second):.3g} > {tolerance:.3g})"
        )


class TransversalityError(GeometryError):
    """交点が横断的でない場合の例外"""

    pass


class DegeneratePlaneError(GeometryError):
    """体積形式がほぼ零になる平面の例外"""

    pass


class SamplingError(GeometryError):
    """位相のアンラップがグリッド細分の上限を超えた場合の例外"""

    pass


class AnchorError(GeometryError):
    """グレーディングのアンカー値が位相と整合しない場合の例外"""

    def __init__(self, which: str, anchor: float, phase: complex, tolerance: float):
        self.which = which
        self.anchor = anchor
        self.phase = phase
        super().__init__(
            f"{which} anchor {anchor:g} inconsistent with phase {phase:.6g} "
            f"(tolerance {tolerance:g})"
        )


class NumericalConsistencyError(GeometryError):
    """丸め前の次数が整数から離れすぎている場合の例外"""

    def __init__(self, value: float, residual: float, tolerance: float):
        self.value = value
        self.residual = residual
        super().__init__(
            f"degree value {value:.8g} is not an integer (residual {residual:.3g} > {tolerance:g})"
        )


class TheoremCheckError(GeometryError):
    """分解等式など、成立すべき関係が破れた場合の例外"""

    pass


class MeshError(GeometryError):
    """メッシュ細分で面積が収束しない場合の例外"""

    def __init__(self, coarse: float, fine: float, tolerance: float):
        self.coarse = coarse
        self.fine = fine
        super().__init__(
            f"area not converged: {coarse:.10g} vs {fine:.10g} (tolerance {tolerance:g})"
        )


class HypothesisError(GeometryError):
    """入力パッチが前提(ファイバー包含など)を満たさない場合の例外"""

    pass
