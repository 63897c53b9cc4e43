import pathlib

import pytest

pytest.importorskip("odtload_figures")

from odtload_figures import (render_efficiency_curves,
                             render_potential_contours)
from odtload_figures._io import SchemaError

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
SWEEP = str(DATA / "sweep_Tr_vb2_vb5.csv")
MAP_PLUS = str(DATA / "potential_xz_mj+3.csv")
MAP_MINUS = str(DATA / "potential_xz_mj-3.csv")


def test_sample_data_committed():
    for path in (SWEEP, MAP_PLUS, MAP_MINUS):
        assert pathlib.Path(path).is_file(), path


@pytest.mark.parametrize("ext", ["png", "svg"])
def test_efficiency_curves_render(tmp_path, ext):
    out = tmp_path / f"fig5a.{ext}"
    render_efficiency_curves(SWEEP, str(out), x="T_r", log_y=True)
    assert out.stat().st_size > 1000


def test_efficiency_vs_vb(tmp_path):
    out = tmp_path / "fig5b.png"
    render_efficiency_curves(SWEEP, str(out), x="v_b")
    assert out.stat().st_size > 1000


@pytest.mark.parametrize("src", [MAP_PLUS, MAP_MINUS])
def test_contours_render(tmp_path, src):
    out = tmp_path / "fig4.png"
    render_potential_contours(src, str(out), clip_uK=5000.0)
    assert out.stat().st_size > 1000


def test_byte_stable_outputs(tmp_path):
    pairs = []
    for i in (0, 1):
        eff = tmp_path / f"eff{i}.svg"
        con = tmp_path / f"con{i}.svg"
        render_efficiency_curves(SWEEP, str(eff), x="T_r")
        render_potential_contours(MAP_MINUS, str(con), clip_uK=5000.0)
        pairs.append((eff.read_bytes(), con.read_bytes()))
    assert pairs[0] == pairs[1]


def test_missing_column_aborts(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("v_b_mps,T_r_K,lambda\n5.0,0.001,0.0035\n")
    with pytest.raises(SchemaError, match="ci_low"):
        render_efficiency_curves(str(bad), str(tmp_path / "x.png"))


def test_single_row_aborts(tmp_path):
    bad = tmp_path / "one.csv"
    bad.write_text("v_b_mps,T_r_K,T_z_K,I_c_A,U_esc_J,N,captured,"
                   "lambda,ci_low,ci_high,seed\n"
                   "5.0,0.001,0.001,16.1,-1e-24,100,1,0.01,0.001,0.05,1\n")
    with pytest.raises(SchemaError, match="2 plottable rows"):
        render_efficiency_curves(str(bad), str(tmp_path / "x.png"))


def test_non_rectangular_grid_aborts(tmp_path):
    bad = tmp_path / "grid.csv"
    bad.write_text("axis1,axis2,U_joule\n0,0,1e-25\n0,1,1e-25\n1,0,1e-25\n")
    with pytest.raises(SchemaError, match="rectangular"):
        render_potential_contours(str(bad), str(tmp_path / "x.png"))


def test_unsupported_format_rejected(tmp_path):
    with pytest.raises(ValueError, match="format"):
        render_potential_contours(MAP_MINUS, str(tmp_path / "fig.pdf"))


def test_criterion_13_regeneration(tmp_path):
    """Acceptance criterion 13: the figure scripts regenerate the efficiency
    and contour figure analogs from the committed CSVs without error, with
    byte-stable output on repeated runs."""
    ok = True
    detail = "efficiency + 2 contour figures regenerated, byte-stable"
    try:
        for i in (0, 1):
            render_efficiency_curves(SWEEP, str(tmp_path / f"f5_{i}.png"),
                                     x="T_r", log_y=True)
            render_potential_contours(MAP_PLUS, str(tmp_path / f"f4a_{i}.png"),
                                      clip_uK=5000.0)
            render_potential_contours(MAP_MINUS, str(tmp_path / f"f4b_{i}.png"),
                                      clip_uK=5000.0)
        for name in ("f5", "f4a", "f4b"):
            b0 = (tmp_path / f"{name}_0.png").read_bytes()
            b1 = (tmp_path / f"{name}_1.png").read_bytes()
            if b0 != b1:
                ok = False
                detail = f"{name} output differs between runs"
    except Exception as exc:  # noqa: BLE001  (reported in the summary line)
        ok = False
        detail = f"render failed: {exc}"
    try:
        # the primary suite's conftest prints one line per criterion; append
        # there when both suites run together, otherwise pass silently
        import conftest as primary_conftest
        lines = primary_conftest.ACCEPTANCE_LINES
    except (ImportError, AttributeError):
        lines = []
    status = "PASS" if ok else "FAIL"
    lines.append(f"criterion 13: {status} - {detail}")
    assert ok, detail
