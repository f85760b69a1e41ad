"""Distorted-ellipse county glyphs and the overlap-resolving layout.

A glyph is an upper half-ellipse with semi-axes (half_width, upper_radius)
joined to a lower half-ellipse (half_width, lower_radius): width encodes
population, the radii encode for/against tweet counts. Overlap resolution
treats each glyph as its bounding ellipse (half_width, max radius) and runs
a deterministic spring relaxation in the kernels module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from motiv import geo, kernels
from motiv.analytics import CountyAggregate, county_aggregates, county_color_value
from motiv.corpus import Dataset
from motiv.frames import MoralFrame


@dataclass(frozen=True)
class GlyphScales:
    w_min: float = 4.0
    w_max: float = 40.0
    r_max: float = 30.0
    mode: str = "sqrt"  # or "linear"


DEFAULT_GLYPH_SCALES = GlyphScales()


@dataclass(frozen=True)
class Viewport:
    width: float = 960.0
    height: float = 600.0
    padding: float = 40.0


DEFAULT_VIEWPORT = Viewport()


@dataclass
class Glyph:
    fips: str
    anchor: tuple[float, float]
    half_width: float
    upper_radius: float
    lower_radius: float
    color_value: Optional[float]
    position: Optional[tuple[float, float]] = None


@dataclass
class GlyphLayout:
    glyphs: list[Glyph]
    iterations: int
    converged: bool
    residual_penetration: float
    total_displacement: float


def county_anchors(dataset: Dataset,
                   viewport: Viewport = DEFAULT_VIEWPORT) -> dict[str, tuple[float, float]]:
    """Mercator county centroids affinely fitted into the viewport.

    The scale is computed over all counties in the dataset so different
    frame filters share identical geometry. Screen y grows downward.
    """
    merc: dict[str, tuple[float, float]] = {}
    for fips in sorted(dataset.counties):
        (x, y), _exact = geo.county_anchor(dataset.counties[fips].rings)
        merc[fips] = (x, y)
    xs = [p[0] for p in merc.values()]
    ys = [p[1] for p in merc.values()]
    min_x, max_x = min(xs), max(xs)
    min_y, max_y = min(ys), max(ys)
    span_x = max_x - min_x
    span_y = max_y - min_y
    avail_w = viewport.width - 2 * viewport.padding
    avail_h = viewport.height - 2 * viewport.padding
    if span_x <= 0.0 and span_y <= 0.0:
        scale = 1.0
    else:
        sx = avail_w / span_x if span_x > 0 else math.inf
        sy = avail_h / span_y if span_y > 0 else math.inf
        scale = min(sx, sy)
    off_x = viewport.padding + 0.5 * (avail_w - span_x * scale)
    off_y = viewport.padding + 0.5 * (avail_h - span_y * scale)
    return {
        fips: (off_x + (x - min_x) * scale, off_y + (max_y - y) * scale)
        for fips, (x, y) in merc.items()
    }


def _radius(count: int, count_max: int, scales: GlyphScales) -> float:
    if count == 0:
        return 1.0
    if count_max <= 0:
        return 1.0
    if scales.mode == "linear":
        return scales.r_max * count / count_max
    return scales.r_max * math.sqrt(count) / math.sqrt(count_max)


def build_glyphs(dataset: Dataset, frame: Optional[MoralFrame] = None,
                 color_feature: str = "leaning",
                 scales: GlyphScales = DEFAULT_GLYPH_SCALES,
                 viewport: Viewport = DEFAULT_VIEWPORT,
                 aggregates: Optional[dict[str, CountyAggregate]] = None
                 ) -> list[Glyph]:
    """Glyphs for every county with population data or at least one tweet.

    half_width maps sqrt(population) onto [w_min/2, w_max/2] over the
    included counties; the radii map sqrt(stance count) onto (0, r_max] with
    zero counts drawn as a sliver of radius 1.
    """
    if aggregates is None:
        aggregates = county_aggregates(dataset)
    anchors = county_anchors(dataset, viewport)
    frame_name = frame.name if frame is not None else None

    included = []
    for fips in sorted(dataset.counties):
        county = dataset.counties[fips]
        if (county.population or 0) > 0 or aggregates[fips].total_tweets >= 1:
            included.append(fips)

    pops = [dataset.counties[f].population for f in included
            if dataset.counties[f].population is not None]
    sqrt_min = math.sqrt(min(pops)) if pops else 0.0
    sqrt_max = math.sqrt(max(pops)) if pops else 0.0
    count_max = 0
    for fips in included:
        n_for, n_against = aggregates[fips].stance_counts(frame_name)
        count_max = max(count_max, n_for, n_against)

    glyphs = []
    for fips in included:
        county = dataset.counties[fips]
        if county.population is None:
            half_width = scales.w_min / 2.0
        elif sqrt_max == sqrt_min:
            half_width = scales.w_max / 2.0
        else:
            t = (math.sqrt(county.population) - sqrt_min) / (sqrt_max - sqrt_min)
            half_width = scales.w_min / 2.0 + t * (scales.w_max - scales.w_min) / 2.0
        n_for, n_against = aggregates[fips].stance_counts(frame_name)
        glyphs.append(Glyph(
            fips=fips,
            anchor=anchors[fips],
            half_width=half_width,
            upper_radius=_radius(n_for, count_max, scales),
            lower_radius=_radius(n_against, count_max, scales),
            color_value=county_color_value(county, dataset, color_feature),
        ))
    return glyphs


def resolve_overlaps(glyphs: list[Glyph], spring: float = 0.1,
                     tol: float = 0.05, max_iter: int = 300) -> GlyphLayout:
    """Position glyphs so bounding ellipses separate; deterministic.

    Input is processed in ascending FIPS order; coincident anchors are
    pre-perturbed by (1e-3 * rank, 0) within each coincident group. A layout
    that stops on the displacement tolerance is re-checked for residual
    penetration; non-convergence returns best-effort positions flagged.
    """
    ordered = sorted(glyphs, key=lambda g: g.fips)
    n = len(ordered)
    anchors = np.array([g.anchor for g in ordered], dtype=np.float64).reshape(n, 2)
    start = anchors.copy()
    seen: dict[tuple[float, float], int] = {}
    for i, g in enumerate(ordered):
        rank = seen.get(g.anchor, 0)
        if rank:
            start[i, 0] += 1e-3 * rank
        seen[g.anchor] = rank + 1
    semi_a = np.array([g.half_width for g in ordered], dtype=np.float64)
    semi_b = np.array([max(g.upper_radius, g.lower_radius) for g in ordered],
                      dtype=np.float64)
    positions, iterations, converged, residual = kernels.relax_layout(
        anchors, start, semi_a, semi_b, spring, tol, max_iter
    )
    total = float(np.sqrt(((positions - anchors) ** 2).sum(axis=1)).sum())
    for i, g in enumerate(ordered):
        g.position = (float(positions[i, 0]), float(positions[i, 1]))
    return GlyphLayout(
        glyphs=ordered,
        iterations=iterations,
        converged=converged,
        residual_penetration=residual,
        total_displacement=total,
    )


def layout_map(dataset: Dataset, frame: Optional[MoralFrame] = None,
               color_feature: str = "leaning",
               scales: GlyphScales = DEFAULT_GLYPH_SCALES,
               viewport: Viewport = DEFAULT_VIEWPORT) -> GlyphLayout:
    """Build glyphs and resolve overlaps in one step."""
    return resolve_overlaps(build_glyphs(
        dataset, frame=frame, color_feature=color_feature,
        scales=scales, viewport=viewport,
    ))
