import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schottky_gaps.errors import ConfigError, OutputError
from schottky_gaps.gaps import compute_gaps
from schottky_gaps.io import (OUTPUT_DIR_ENV, RunConfig, dumps_report, fmt_float, load_config, metadata,
                              parse_angle, parse_config, read_cdf_csv, read_csv, read_orbit_csv,
                              read_report_json, resolve_output_dir, serialize_config, write_cdf_csv,
                              write_csv, write_gaps_csv, write_orbit_csv, write_report_json)
from schottky_gaps.orbit import enumerate_by_depth
from schottky_gaps.render import circles_svg, histogram_svg

SYM_TEXT = """\
# symmetric example
arc1 = pi/3, 7pi/12
arc2 = pi, 7pi/12
arc3 = 5*pi/3, 7pi/12
T = 1414.2135623730951
seed = 7
"""


@pytest.mark.parametrize("text,value", [("7pi/12", 7 * math.pi / 12), ("5*pi/3", 5 * math.pi / 3),
                                        ("-pi/4", -math.pi / 4), ("pi", math.pi), ("1.5", 1.5),
                                        ("π/2", math.pi / 2), ("2e-1", 0.2)])
def test_parse_angle(text, value):
    assert parse_angle(text) == value


@pytest.mark.parametrize("text", ["", "pie", "1/0", "pi pi", "abc"])
def test_parse_angle_rejects(text):
    with pytest.raises(ValueError):
        parse_angle(text)


def test_symbolic_arcs_are_exact():
    cfg = parse_config(SYM_TEXT)
    assert cfg.arcs == RunConfig().arcs
    assert cfg.T == math.sqrt(2) * 1e3 and cfg.seed == 7


def test_config_round_trip():
    cfg = RunConfig(T=500.0, interval=(0.695204, 2.980334), r0_override=0.05, delta_method="slope-fit",
                    histogram_bin=0.1, seed=3, output_dir="out", canvas_size=600, stroke_width=0.25,
                    render_depth=6)
    assert parse_config(serialize_config(cfg)) == cfg


@settings(max_examples=50, deadline=None)
@given(T=st.floats(10, 1e6), seed=st.integers(0, 2**63 - 1), bin_=st.floats(1e-3, 10))
def test_config_round_trip_property(T, seed, bin_):
    cfg = RunConfig(T=T, seed=seed, histogram_bin=bin_)
    assert parse_config(serialize_config(cfg)) == cfg


def test_angles_normalized():
    cfg = parse_config("interval = -pi/4, 7.0\n")
    assert all(0 <= x < 2 * math.pi for x in cfg.interval)


@pytest.mark.parametrize("text,line", [
    ("arc1 = pi/3, 7pi/12\nfoo = 1\n", 2),
    ("T = 1\nT = 2\n", 2),
    ("\n\nT = -3\n", 3),
    ("seed = x\n", 1),
    ("arc1 = 0.1, 1.0\narc2 = pi, 1.0\narc3 = 4.5, 1.0\n", 1),
    ("no equals sign\n", 1),
])
def test_config_errors_name_the_line(text, line):
    with pytest.raises(ConfigError, match=rf"cfg:{line}\b"):
        parse_config(text, "cfg")


def test_partial_arcs_rejected():
    with pytest.raises(ConfigError, match="missing"):
        parse_config("arc1 = pi/3, 7pi/12\n", "cfg")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.cfg")


def test_output_dir_precedence(tmp_path, monkeypatch):
    cfg = RunConfig(output_dir="from_config")
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert str(resolve_output_dir(cfg)) == "from_config"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert resolve_output_dir(cfg) == tmp_path
    assert str(resolve_output_dir(cfg, "cli")) == "cli"


def test_metadata_has_hash_seed_version():
    cfg = RunConfig(seed=5)
    meta = metadata(cfg, "gaps", T=10.0)
    assert {"config_hash", "seed", "version", "command"} <= set(meta)
    assert meta["config_hash"] == RunConfig(seed=5, output_dir="elsewhere").config_hash()
    assert meta["config_hash"] != RunConfig(seed=6).config_hash()


# ---------------------------------------------------------------- CSV

def test_empty_orbit_is_header_only(tmp_path):
    p = write_orbit_csv(tmp_path / "o.csv", [], {"k": "v"})
    meta, header, rows = read_csv(p)
    assert header == ["word", "length", "theta", "kappa", "norm"] and rows == []
    assert meta == {"k": "v"}


def test_depth_three_orbit_rows(cfg, tmp_path):
    p = write_orbit_csv(tmp_path / "o.csv", enumerate_by_depth(cfg, 3))
    _, rows = read_orbit_csv(p)
    assert len(rows) == 1 + 3 + 6 + 12
    lengths = np.bincount([r["length"] for r in rows])
    assert list(lengths[1:]) == [3 * 2 ** (k - 1) for k in (1, 2, 3)]


def test_orbit_round_trip_bit_exact(cfg, tmp_path):
    pts = enumerate_by_depth(cfg, 6)
    _, rows = read_orbit_csv(write_orbit_csv(tmp_path / "o.csv", pts))
    for p, r in zip(pts, rows):
        assert r["word"] == p.word and r["theta"] == p.theta and r["kappa"] == p.norm_sq
        assert r["norm"] == math.sqrt(p.norm_sq)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=30))
def test_cdf_round_trip_bit_exact(tmp_path_factory, values):
    p = tmp_path_factory.mktemp("cdf") / "cdf.csv"
    s = np.array(values)
    F = np.linspace(0, 1, s.size)
    _, s2, F2 = read_cdf_csv(write_cdf_csv(p, s, F))
    assert np.array_equal(s, s2) and np.array_equal(F, F2)


def test_fmt_float_has_17_digits():
    assert float(fmt_float(0.1)) == 0.1
    assert fmt_float(1 / 3) == "0.33333333333333331"


def test_gaps_csv(orbit_cache, tmp_path):
    t = compute_gaps(orbit_cache(50.0), 50.0)
    _, header, rows = read_csv(write_gaps_csv(tmp_path / "g.csv", t))
    assert header[-1] == "scaled" and len(rows) == len(t.gaps)
    assert [float(r[-1]) for r in rows] == t.scaled.tolist()


def test_write_failure_has_path_context(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError, match="file"):
        write_csv(blocker / "sub" / "x.csv", ("a",), [])
    with pytest.raises(OSError):
        write_report_json(blocker / "r.json", {})


# ---------------------------------------------------------------- JSON

def test_report_round_trip(tmp_path):
    data = {"x": 0.1 + 0.2, "arr": np.array([1.5, 2.5]), "n": np.int64(3), "nested": {"t": (1, 2)}}
    meta, back = read_report_json(write_report_json(tmp_path / "r.json", data, {"seed": 1}))
    assert meta == {"seed": 1}
    assert back == {"x": 0.1 + 0.2, "arr": [1.5, 2.5], "n": 3, "nested": {"t": [1, 2]}}


def test_report_is_key_order_independent():
    assert dumps_report({"a": 1, "b": 2}) == dumps_report({"b": 2, "a": 1})


# ---------------------------------------------------------------- SVG

def test_circles_svg(cfg):
    svg = circles_svg(cfg, depth=4, meta={"seed": 0})
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert "seed: 0" in svg
    # unit circle, clip circle, three isometry circles and the visible orbit circles
    assert svg.count("<circle") >= 2 + 3 + 1 + 3
    assert svg == circles_svg(cfg, depth=4, meta={"seed": 0})


def test_histogram_svg_skips_empty_bins():
    svg = histogram_svg([0, 1, 2, 3], [0.5, 0.0, 0.25])
    assert svg.count("<rect") == 1 + 2
