from services.geometry.curves import Arc, Segment
from services.geometry.models import make_model
from tools.cli.core.sketch import render_base_svg, write_base_svg


def test_render_conic_picture():
    svg = render_base_svg(
        make_model("conic"),
        [("L1", Segment(2.0, 2.0 + 1j)), ("L0", Segment(2.0, 3.0))],
        intersections=[2.0, 2.0],
        title="conic & pair",
    )
    assert svg.startswith("<?xml")
    assert svg.count('class="curve"') == 2
    # 交点は重複を除いて1つ
    assert svg.count('class="intersection"') == 1
    assert svg.count('class="critical"') == 1
    assert "critical value 0" in svg
    # ラベル順に描画
    assert svg.index(">L0<") < svg.index(">L1<")
    assert "conic &amp; pair" in svg


def test_write_base_svg(tmp_path):
    path = write_base_svg(tmp_path, make_model("trivial_line"), [("loop", Arc(0.0, 1.0, 0.0, 3.0))])
    assert path == tmp_path / "base.svg"
    text = path.read_text(encoding="utf-8")
    assert 'class="critical"' not in text
    assert 'class="intersection"' not in text
