from services.geometry.models import ModelSpec, list_models


def _value(c: complex) -> str:
    return f"{c.real:g}" if c.imag == 0 else f"{c:g}"


def format_model(model: ModelSpec) -> str:
    critv = ",".join(_value(complex(c)) for c in model.critical_values)
    return f"{model.id}  dim={model.dim_total}  critv={{{critv}}}"


def run(args) -> int:
    # 出力は装飾なし (実行ごとにバイト単位で同一)
    for model in list_models():
        print(format_model(model))
    return 0
