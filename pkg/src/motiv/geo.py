"""County assignment from tweet bounding boxes.

Overlap fractions are computed in planar lon/lat space: the fractions compare
areas of the same small bbox, where projection distortion cancels to first
order. Rings are closed (first vertex == last); outer rings are
counter-clockwise and holes clockwise, so signed areas of clipped rings sum
directly to the net intersection area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from motiv import kernels

MAX_MERCATOR_LAT = 85.06
DEFAULT_OVERLAP_THRESHOLD = 0.25

Bbox = tuple[float, float, float, float]  # (min_lon, min_lat, max_lon, max_lat)


@dataclass(frozen=True)
class OverlapResult:
    fips: str
    overlap_fraction: float


def ring_area(ring) -> float:
    """Absolute shoelace area of one closed ring (planar degrees squared)."""
    return abs(kernels.ring_signed_area(np.asarray(ring, dtype=np.float64)))


def rings_area(rings: Iterable) -> float:
    """Net area of a normalized multi-ring polygon (outer rings minus holes)."""
    total = 0.0
    for ring in rings:
        total += kernels.ring_signed_area(np.asarray(ring, dtype=np.float64))
    return max(total, 0.0)


def clip_ring_to_rect(ring, rect: Bbox) -> np.ndarray:
    """Clip a closed ring to an axis-aligned rectangle (Sutherland-Hodgman).

    Returns a closed ring, or an empty (0, 2) array when disjoint. The
    rectangle must be non-degenerate.
    """
    min_lon, min_lat, max_lon, max_lat = rect
    if not (min_lon < max_lon and min_lat < max_lat):
        raise ValueError(f"degenerate clip rectangle {rect!r}")
    return kernels.clip_ring_to_rect(
        np.asarray(ring, dtype=np.float64), min_lon, min_lat, max_lon, max_lat
    )


def rings_bbox(rings: Sequence) -> Bbox:
    min_lon = math.inf
    min_lat = math.inf
    max_lon = -math.inf
    max_lat = -math.inf
    for ring in rings:
        arr = np.asarray(ring, dtype=np.float64)
        min_lon = min(min_lon, float(arr[:, 0].min()))
        max_lon = max(max_lon, float(arr[:, 0].max()))
        min_lat = min(min_lat, float(arr[:, 1].min()))
        max_lat = max(max_lat, float(arr[:, 1].max()))
    return (min_lon, min_lat, max_lon, max_lat)


def _bbox_intersects(a: Bbox, b: Bbox) -> bool:
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


def _bbox_contains(b: Bbox, x: float, y: float) -> bool:
    return b[0] <= x <= b[2] and b[1] <= y <= b[3]


class CountyIndex:
    """County geometries with bounding-box prefiltering for repeated assignment.

    `rings_by_fips` maps a FIPS code to its normalized ring list. Entries are
    kept in ascending FIPS order, which fixes the deterministic tie-break.
    """

    def __init__(self, rings_by_fips: Mapping[str, Sequence]):
        self._entries: list[tuple[str, list[np.ndarray], Bbox]] = []
        for fips in sorted(rings_by_fips):
            rings = [np.asarray(r, dtype=np.float64) for r in rings_by_fips[fips]]
            self._entries.append((fips, rings, rings_bbox(rings)))

    def __len__(self) -> int:
        return len(self._entries)

    def overlaps(self, bbox: Bbox) -> list[OverlapResult]:
        """Overlap fraction per candidate county, ascending FIPS, zeros skipped."""
        min_lon, min_lat, max_lon, max_lat = bbox
        bbox_area = (max_lon - min_lon) * (max_lat - min_lat)
        if bbox_area <= 0.0:
            x, y = _bbox_center(bbox)
            hit = self._containing_county(x, y)
            return [OverlapResult(hit, 1.0)] if hit is not None else []
        results = []
        for fips, rings, cbox in self._entries:
            if not _bbox_intersects(bbox, cbox):
                continue
            inter = 0.0
            for ring in rings:
                clipped = kernels.clip_ring_to_rect(
                    ring, min_lon, min_lat, max_lon, max_lat
                )
                if clipped.shape[0]:
                    inter += kernels.ring_signed_area(clipped)
            if inter > 0.0:
                results.append(OverlapResult(fips, min(inter / bbox_area, 1.0)))
        return results

    def assign(self, bbox: Bbox,
               threshold: float = DEFAULT_OVERLAP_THRESHOLD
               ) -> Optional[tuple[str, float]]:
        """Argmax-overlap county if its fraction meets the threshold, else None.

        A zero-area bbox is treated as a point: the first county (ascending
        FIPS) containing it wins with fraction 1.0. Ties at the maximum
        fraction break toward the lower FIPS.
        """
        best: Optional[tuple[str, float]] = None
        for res in self.overlaps(bbox):
            if best is None or res.overlap_fraction > best[1]:
                best = (res.fips, res.overlap_fraction)
        if best is not None and best[1] >= threshold:
            return best
        return None

    def assign_many(self, bboxes: Iterable[Bbox],
                    threshold: float = DEFAULT_OVERLAP_THRESHOLD
                    ) -> list[Optional[tuple[str, float]]]:
        """Assign a sequence of bboxes; output order matches input order."""
        return [self.assign(b, threshold) for b in bboxes]

    def _containing_county(self, x: float, y: float) -> Optional[str]:
        for fips, rings, cbox in self._entries:
            if not _bbox_contains(cbox, x, y):
                continue
            if kernels.point_in_rings(x, y, rings):
                return fips
        return None


def _bbox_center(bbox: Bbox) -> tuple[float, float]:
    return (0.5 * (bbox[0] + bbox[2]), 0.5 * (bbox[1] + bbox[3]))


def assign_county(bbox: Bbox, rings_by_fips: Mapping[str, Sequence],
                  threshold: float = DEFAULT_OVERLAP_THRESHOLD
                  ) -> Optional[tuple[str, float]]:
    """One-shot assignment; build a CountyIndex for repeated queries."""
    return CountyIndex(rings_by_fips).assign(bbox, threshold)


def mercator(lon: float, lat: float) -> tuple[float, float]:
    """Project lon/lat degrees to planar Mercator with unit earth radius.

    Callers scale the result to screen units. Latitudes at or beyond
    +-85.06 degrees are rejected (polar singularity).
    """
    if abs(lat) >= MAX_MERCATOR_LAT:
        raise ValueError(f"latitude {lat} out of Mercator range (+-{MAX_MERCATOR_LAT})")
    x = math.radians(lon)
    # asinh(tan(phi)) == ln(tan(pi/4 + phi/2)), exact at phi = 0
    y = math.asinh(math.tan(math.radians(lat)))
    return (x, y)


def _ring_centroid(ring: np.ndarray) -> Optional[tuple[float, float]]:
    """Area-weighted centroid of one closed ring; None when area is ~zero."""
    arr = np.asarray(ring, dtype=np.float64)
    x = arr[:-1, 0]
    y = arr[:-1, 1]
    xn = arr[1:, 0]
    yn = arr[1:, 1]
    cross = x * yn - xn * y
    area = 0.5 * float(cross.sum())
    if abs(area) < 1e-12:
        return None
    cx = float(((x + xn) * cross).sum()) / (6.0 * area)
    cy = float(((y + yn) * cross).sum()) / (6.0 * area)
    return (cx, cy)


def county_anchor(rings: Sequence) -> tuple[tuple[float, float], bool]:
    """Mercator anchor for a county: centroid of its largest outer ring.

    Returns ((x, y), exact). `exact` is False when no ring has usable area
    and the bbox center was used instead.
    """
    best_ring = None
    best_area = 0.0
    for ring in rings:
        signed = kernels.ring_signed_area(np.asarray(ring, dtype=np.float64))
        if signed > best_area:
            best_area = signed
            best_ring = ring
    if best_ring is not None:
        centroid = _ring_centroid(np.asarray(best_ring, dtype=np.float64))
        if centroid is not None:
            return (mercator(centroid[0], centroid[1]), True)
    bbox = rings_bbox(rings)
    cx, cy = _bbox_center(bbox)
    return (mercator(cx, cy), False)
