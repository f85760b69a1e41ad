import math

import numpy as np
import pytest

from motiv import glyphs
from motiv.frames import frame_by_name
from motiv.glyphs import (
    Glyph,
    GlyphScales,
    build_glyphs,
    county_anchors,
    layout_map,
    resolve_overlaps,
)

from conftest import mk_county, mk_dataset, mk_tweet


def _glyph(fips, x, y, hw=4.0, up=2.0, low=2.0):
    return Glyph(fips=fips, anchor=(x, y), half_width=hw,
                 upper_radius=up, lower_radius=low, color_value=0.0)


def _oracle_max_penetration(placed: list[Glyph]) -> float:
    """Independent O(n^2) collision sweep over the final positions."""
    worst = 0.0
    for i in range(len(placed)):
        for j in range(i + 1, len(placed)):
            gi, gj = placed[i], placed[j]
            dx = gj.position[0] - gi.position[0]
            dy = gj.position[1] - gi.position[1]
            sum_a = gi.half_width + gj.half_width
            sum_b = (max(gi.upper_radius, gi.lower_radius)
                     + max(gj.upper_radius, gj.lower_radius))
            s2 = (dx / sum_a) ** 2 + (dy / sum_b) ** 2
            if s2 >= 1.0:
                continue
            dist = math.hypot(dx, dy)
            s = math.sqrt(s2)
            depth = sum_a if dist < 1e-12 else dist * (1.0 - s) / s
            worst = max(worst, depth)
    return worst


# --- glyph shapes -----------------------------------------------------------------

def _shape_dataset():
    counties = [
        mk_county("17001", population=10_000, cell=(0, 0)),
        mk_county("17003", population=1_000_000, cell=(1, 0)),
        mk_county("17005", population=250_000, cell=(2, 0)),
    ]
    care = ["Care"]
    tweets = (
        [mk_tweet(f"f{i}", care, stance="for", fips="17003") for i in range(9)]
        + [mk_tweet(f"a{i}", care, stance="against", fips="17003") for i in range(4)]
    )
    return mk_dataset(tweets, counties)


def test_zero_counts_give_sliver_radii():
    ds = _shape_dataset()
    by_fips = {g.fips: g for g in build_glyphs(ds)}
    assert by_fips["17001"].upper_radius == 1.0
    assert by_fips["17001"].lower_radius == 1.0


def test_max_population_gets_max_width():
    ds = _shape_dataset()
    by_fips = {g.fips: g for g in build_glyphs(ds)}
    scales = glyphs.DEFAULT_GLYPH_SCALES
    assert by_fips["17003"].half_width == pytest.approx(scales.w_max / 2)
    assert by_fips["17001"].half_width == pytest.approx(scales.w_min / 2)
    assert (scales.w_min / 2 < by_fips["17005"].half_width < scales.w_max / 2)


def test_sqrt_count_scaling_ratio():
    # counts 9 for / 4 against: radii ratio must be 3:2
    ds = _shape_dataset()
    g = {g.fips: g for g in build_glyphs(ds, frame=frame_by_name("Care"))}["17003"]
    assert g.upper_radius / g.lower_radius == pytest.approx(1.5, abs=1e-12)
    assert g.upper_radius == pytest.approx(glyphs.DEFAULT_GLYPH_SCALES.r_max)


def test_linear_count_scaling():
    ds = _shape_dataset()
    scales = GlyphScales(mode="linear")
    g = {g.fips: g for g in build_glyphs(ds, frame=frame_by_name("Care"),
                                         scales=scales)}["17003"]
    assert g.upper_radius / g.lower_radius == pytest.approx(9 / 4, abs=1e-12)


def test_shape_invariant_under_tweet_reordering():
    ds = _shape_dataset()
    reordered = mk_dataset(list(reversed(ds.tweets)), list(ds.counties.values()))
    a = build_glyphs(ds)
    b = build_glyphs(reordered)
    for ga, gb in zip(a, b):
        assert (ga.fips, ga.half_width, ga.upper_radius, ga.lower_radius) == \
               (gb.fips, gb.half_width, gb.upper_radius, gb.lower_radius)


def test_county_without_demographics_included_when_tweeted():
    counties = [
        mk_county("17001", population=50_000, cell=(0, 0)),
        mk_county("17003", population=None, dem=None, rep=None, cell=(1, 0)),
    ]
    ds = mk_dataset([mk_tweet("t1", ["Care"], fips="17003")], counties)
    by_fips = {g.fips: g for g in build_glyphs(ds)}
    assert "17003" in by_fips
    assert by_fips["17003"].half_width == glyphs.DEFAULT_GLYPH_SCALES.w_min / 2
    assert by_fips["17003"].color_value is None  # leaning unknown


def test_anchors_fit_viewport(dataset):
    anchors = county_anchors(dataset)
    vp = glyphs.DEFAULT_VIEWPORT
    for x, y in anchors.values():
        assert vp.padding - 1e-9 <= x <= vp.width - vp.padding + 1e-9
        assert vp.padding - 1e-9 <= y <= vp.height - vp.padding + 1e-9


# --- overlap resolution ---------------------------------------------------------------

def test_single_glyph_stays_at_anchor():
    layout = resolve_overlaps([_glyph("a", 100.0, 100.0)])
    assert layout.glyphs[0].position == (100.0, 100.0)
    assert layout.converged
    assert layout.total_displacement == 0.0


def test_distant_glyphs_stay_at_anchors():
    layout = resolve_overlaps([
        _glyph("a", 50.0, 50.0), _glyph("b", 500.0, 300.0),
    ])
    assert layout.glyphs[0].position == (50.0, 50.0)
    assert layout.glyphs[1].position == (500.0, 300.0)
    assert layout.converged
    assert layout.residual_penetration == 0.0


def test_coincident_anchors_separate():
    layout = resolve_overlaps([
        _glyph("b", 200.0, 200.0), _glyph("a", 200.0, 200.0),
    ])
    assert _oracle_max_penetration(layout.glyphs) <= 0.05
    positions = [g.position for g in layout.glyphs]
    assert positions[0] != positions[1]
    assert layout.total_displacement > 0.0
    assert math.isfinite(layout.total_displacement)


def test_layout_processes_in_fips_order_regardless_of_input_order():
    shuffled = [_glyph("c", 10.0, 10.0), _glyph("a", 10.0, 10.0),
                _glyph("b", 10.0, 10.0)]
    ordered = [_glyph("a", 10.0, 10.0), _glyph("b", 10.0, 10.0),
               _glyph("c", 10.0, 10.0)]
    out1 = resolve_overlaps(shuffled)
    out2 = resolve_overlaps(ordered)
    assert [g.fips for g in out1.glyphs] == ["a", "b", "c"]
    for g1, g2 in zip(out1.glyphs, out2.glyphs):
        assert g1.position == g2.position


def test_layout_bitwise_deterministic():
    rng = np.random.default_rng(123)
    items = [
        _glyph(f"{i:05d}", *rng.uniform(0, 300, 2),
               hw=rng.uniform(2, 10), up=rng.uniform(1, 8), low=rng.uniform(1, 8))
        for i in range(80)
    ]
    def clone(gs):
        return [Glyph(g.fips, g.anchor, g.half_width, g.upper_radius,
                      g.lower_radius, g.color_value) for g in gs]
    out1 = resolve_overlaps(clone(items))
    out2 = resolve_overlaps(clone(items))
    assert all(g1.position == g2.position
               for g1, g2 in zip(out1.glyphs, out2.glyphs))
    assert out1.iterations == out2.iterations
    assert out1.residual_penetration == out2.residual_penetration


def test_converged_layout_has_no_residual_penetration():
    rng = np.random.default_rng(7)
    items = [
        _glyph(f"{i:05d}", *rng.uniform(0, 400, 2),
               hw=rng.uniform(2, 6), up=rng.uniform(1, 4), low=rng.uniform(1, 4))
        for i in range(60)
    ]
    layout = resolve_overlaps(items)
    if layout.converged:
        assert layout.residual_penetration <= 0.05
    assert _oracle_max_penetration(layout.glyphs) == pytest.approx(
        layout.residual_penetration, abs=1e-12)


def test_layout_map_end_to_end(dataset):
    layout = layout_map(dataset)
    assert len(layout.glyphs) == len(dataset.counties)
    assert all(g.position is not None for g in layout.glyphs)
    assert math.isfinite(layout.total_displacement)
