"""Domain types, file parsers, and the FIPS join producing an immutable Dataset.

Ingestion boundary is flat files: tweets.csv, counties.geojson,
demographics.csv, covid.csv. A built Dataset round-trips through a single
zip archive (see save_dataset/load_dataset) whose bytes are deterministic
for identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
import re
import zipfile
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from motiv import geo, kernels
from motiv.frames import FRAME_INDEX, MoralFrame, frame_by_name

DATASET_FORMAT = "motiv-dataset/1"

TWEET_COLUMNS = [
    "id", "timestamp", "text", "retweet_count", "stance", "vividness",
    "frames", "min_lon", "min_lat", "max_lon", "max_lat",
]
DEMOGRAPHICS_COLUMNS = [
    "fips", "population", "dem_votes", "rep_votes", "median_income", "mask_usage",
]
COVID_COLUMNS = ["fips", "date", "cases", "deaths"]

STANCES = ("for", "against")

_HASHTAG_RE = re.compile(r"#(\w+)", re.UNICODE)


class IngestError(Exception):
    """Fatal ingest problem: unreadable file, bad header, invariant violation."""


@dataclass(frozen=True)
class Tweet:
    id: str
    timestamp: datetime
    text: str
    retweet_count: int
    stance: str
    vividness: bool
    frames: frozenset[MoralFrame]
    bbox: tuple[float, float, float, float]
    county_fips: Optional[str] = None
    sentiment_score: Optional[float] = None
    sentiment_class: Optional[str] = None


@dataclass(frozen=True)
class CovidPoint:
    date: date
    cases: int
    deaths: int


@dataclass(frozen=True, eq=False)
class County:
    fips: str
    name: str
    rings: tuple[np.ndarray, ...]  # closed; outer CCW, holes CW; read-only arrays
    population: Optional[int] = None
    dem_votes: Optional[int] = None
    rep_votes: Optional[int] = None
    median_income: Optional[float] = None
    mask_usage: Optional[float] = None
    covid_series: tuple[CovidPoint, ...] = ()

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return geo.rings_bbox(self.rings)

    @property
    def has_demographics(self) -> bool:
        return self.population is not None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable joined corpus: every tweet's county_fips resolves in counties."""

    tweets: tuple[Tweet, ...]
    counties: Mapping[str, County]
    topic_label: str = ""
    time_range: Optional[tuple[datetime, datetime]] = None

    def tweets_with_frame(self, frame: MoralFrame) -> list[Tweet]:
        return [t for t in self.tweets if frame in t.frames]


@dataclass
class ParseReport:
    parsed: int = 0
    retained: int = 0
    dropped: int = 0
    rejected: int = 0
    drop_reasons: Counter = field(default_factory=Counter)
    diagnostics: list[str] = field(default_factory=list)

    def check_conservation(self) -> bool:
        return self.parsed == self.retained + self.dropped + self.rejected


def _parse_timestamp(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.strip().replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _open_csv(path) -> io.TextIOWrapper:
    try:
        return open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def _require_header(reader: csv.DictReader, expected: Sequence[str], path) -> None:
    got = reader.fieldnames
    if got is None or list(got) != list(expected):
        raise IngestError(
            f"{path}: expected header {','.join(expected)}, got "
            f"{','.join(got) if got else '<empty>'}"
        )


def load_tweets(path) -> tuple[list[Tweet], ParseReport]:
    """Parse the tweet CSV; derived fields are left unset.

    Rows with no stance or an empty frame set are dropped (counted, not
    errors); malformed rows are rejected with a line-numbered diagnostic.
    parsed == retained + dropped + rejected always holds.
    """
    report = ParseReport()
    tweets: list[Tweet] = []
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        _require_header(reader, TWEET_COLUMNS, path)
        for row in reader:
            report.parsed += 1
            line = reader.line_num
            try:
                stance = (row["stance"] or "").strip().lower()
                frames_raw = (row["frames"] or "").strip()
                if not stance:
                    report.dropped += 1
                    report.drop_reasons["no_stance"] += 1
                    continue
                if not frames_raw:
                    report.dropped += 1
                    report.drop_reasons["no_frames"] += 1
                    continue
                if stance not in STANCES:
                    raise ValueError(f"invalid stance {row['stance']!r}")
                frames = frozenset(
                    frame_by_name(part) for part in frames_raw.split(";") if part.strip()
                )
                tweet_id = (row["id"] or "").strip()
                if not tweet_id:
                    raise ValueError("empty id")
                retweets = int(row["retweet_count"])
                if retweets < 0:
                    raise ValueError(f"negative retweet_count {retweets}")
                vivid_raw = (row["vividness"] or "").strip()
                if vivid_raw not in ("0", "1"):
                    raise ValueError(f"vividness must be 0 or 1, got {vivid_raw!r}")
                bbox = (
                    float(row["min_lon"]), float(row["min_lat"]),
                    float(row["max_lon"]), float(row["max_lat"]),
                )
                if not (bbox[0] <= bbox[2] and bbox[1] <= bbox[3]):
                    raise ValueError(f"inverted bbox {bbox}")
                tweets.append(Tweet(
                    id=tweet_id,
                    timestamp=_parse_timestamp(row["timestamp"]),
                    text=row["text"] or "",
                    retweet_count=retweets,
                    stance=stance,
                    vividness=vivid_raw == "1",
                    frames=frames,
                    bbox=bbox,
                ))
                report.retained += 1
            except (ValueError, KeyError, TypeError) as exc:
                report.rejected += 1
                report.diagnostics.append(f"{path}:{line}: rejected row: {exc}")
    return tweets, report


def stance_from_hashtags(text: str, support_tags: set[str],
                         oppose_tags: set[str]) -> str:
    """Hashtag-majority stance: 'for', 'against', or 'undetermined' on a tie.

    Tag sets must be non-empty, lowercase, and disjoint; occurrences are
    counted case-insensitively, duplicates included.
    """
    for name, tags in (("support", support_tags), ("oppose", oppose_tags)):
        if not tags:
            raise ValueError(f"{name}_tags must be non-empty")
        if any(t != t.lower() for t in tags):
            raise ValueError(f"{name}_tags must be lowercase")
    if support_tags & oppose_tags:
        raise ValueError("support and oppose tag sets must be disjoint")
    tags_in_text = [m.lower() for m in _HASHTAG_RE.findall(text)]
    n_support = sum(1 for t in tags_in_text if t in support_tags)
    n_oppose = sum(1 for t in tags_in_text if t in oppose_tags)
    if n_support > n_oppose:
        return "for"
    if n_oppose > n_support:
        return "against"
    return "undetermined"


def _normalize_ring(coords, feature_id: str) -> np.ndarray:
    arr = np.asarray(coords, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 4:
        raise IngestError(f"county {feature_id}: ring must have >= 4 lon/lat vertices")
    if not (arr[0] == arr[-1]).all():
        raise IngestError(f"county {feature_id}: ring is not closed (first != last)")
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def _orient(ring: np.ndarray, ccw: bool) -> np.ndarray:
    signed = kernels.ring_signed_area(ring)
    if (signed > 0) != ccw and signed != 0:
        flipped = np.ascontiguousarray(ring[::-1])
        flipped.flags.writeable = False
        return flipped
    return ring


def _polygon_rings(polygon_coords, feature_id: str) -> list[np.ndarray]:
    rings = []
    for i, coords in enumerate(polygon_coords):
        ring = _normalize_ring(coords, feature_id)
        rings.append(_orient(ring, ccw=(i == 0)))
    return rings


def load_counties(path) -> dict[str, tuple[str, tuple[np.ndarray, ...]]]:
    """Parse counties.geojson into fips -> (name, normalized rings)."""
    try:
        raw = Path(path).read_text("utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return _counties_from_geojson(raw, path)


def _counties_from_geojson(raw: str, path) -> dict[str, tuple[str, tuple[np.ndarray, ...]]]:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON: {exc}") from exc
    if data.get("type") != "FeatureCollection":
        raise IngestError(f"{path}: expected a FeatureCollection")
    out: dict[str, tuple[str, tuple[np.ndarray, ...]]] = {}
    for feature in data.get("features", []):
        props = feature.get("properties", {})
        fips = str(props.get("GEOID", "")).strip()
        name = str(props.get("NAME", "")).strip()
        if not fips:
            raise IngestError(f"{path}: feature missing GEOID property")
        if fips in out:
            raise IngestError(f"{path}: duplicate county {fips}")
        geom = feature.get("geometry", {})
        gtype = geom.get("type")
        rings: list[np.ndarray] = []
        if gtype == "Polygon":
            rings.extend(_polygon_rings(geom["coordinates"], fips))
        elif gtype == "MultiPolygon":
            for poly in geom["coordinates"]:
                rings.extend(_polygon_rings(poly, fips))
        else:
            raise IngestError(f"county {fips}: unsupported geometry type {gtype!r}")
        out[fips] = (name, tuple(rings))
    return out


def _opt_float(raw: str, lo=None, hi=None, what="value") -> Optional[float]:
    raw = (raw or "").strip()
    if not raw:
        return None
    value = float(raw)
    if lo is not None and value < lo or hi is not None and value > hi:
        raise ValueError(f"{what} {value} out of range")
    return value


def load_demographics(path) -> dict[str, dict]:
    """Parse demographics.csv into fips -> field dict (mask_usage may be None)."""
    out: dict[str, dict] = {}
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        _require_header(reader, DEMOGRAPHICS_COLUMNS, path)
        for row in reader:
            line = reader.line_num
            try:
                fips = row["fips"].strip()
                population = int(row["population"])
                if population <= 0:
                    raise ValueError(f"population must be > 0, got {population}")
                dem = int(row["dem_votes"])
                rep = int(row["rep_votes"])
                if dem < 0 or rep < 0:
                    raise ValueError("vote counts must be >= 0")
                out[fips] = {
                    "population": population,
                    "dem_votes": dem,
                    "rep_votes": rep,
                    "median_income": float(row["median_income"]),
                    "mask_usage": _opt_float(row["mask_usage"], 0.0, 1.0, "mask_usage"),
                }
            except (ValueError, KeyError) as exc:
                raise IngestError(f"{path}:{line}: {exc}") from exc
    return out


def load_covid(path) -> dict[str, tuple[CovidPoint, ...]]:
    """Parse covid.csv (cumulative) into fips -> ordered series.

    Dates must be strictly increasing and cumulative counts non-decreasing
    per county; violations are fatal and name the FIPS and date.
    """
    series: dict[str, list[CovidPoint]] = {}
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        _require_header(reader, COVID_COLUMNS, path)
        for row in reader:
            line = reader.line_num
            try:
                fips = row["fips"].strip()
                day = date.fromisoformat(row["date"].strip())
                cases = int(row["cases"])
                deaths = int(row["deaths"])
                if cases < 0 or deaths < 0:
                    raise ValueError("cumulative counts must be >= 0")
            except (ValueError, KeyError) as exc:
                raise IngestError(f"{path}:{line}: {exc}") from exc
            points = series.setdefault(fips, [])
            if points:
                last = points[-1]
                if day <= last.date:
                    raise IngestError(
                        f"covid series for {fips}: dates not strictly increasing at {day}"
                    )
                if cases < last.cases or deaths < last.deaths:
                    raise IngestError(
                        f"covid series for {fips}: cumulative counts decrease at {day}"
                    )
            points.append(CovidPoint(day, cases, deaths))
    return {fips: tuple(points) for fips, points in series.items()}


@dataclass
class BuildReport:
    n_input_tweets: int = 0
    n_retained: int = 0
    n_unassigned: int = 0
    n_unknown_fips: int = 0
    time_range_defined: bool = True
    diagnostics: list[str] = field(default_factory=list)


def build_dataset(
    tweets: Sequence[Tweet],
    counties_geo: Mapping[str, tuple[str, tuple[np.ndarray, ...]]],
    demographics: Mapping[str, dict],
    covid: Mapping[str, tuple[CovidPoint, ...]],
    assignments: Sequence[Optional[tuple[str, float]]],
    topic_label: str = "",
) -> tuple[Dataset, BuildReport]:
    """Join tweets, county geometry, demographics and covid series by FIPS.

    `assignments` is aligned with `tweets` (output of CountyIndex.assign_many).
    Tweets without a valid assignment are excluded and counted; counties
    without demographics are retained with those fields absent.
    """
    if len(assignments) != len(tweets):
        raise ValueError("assignments must align with tweets")
    report = BuildReport(n_input_tweets=len(tweets))

    counties: dict[str, County] = {}
    for fips in sorted(counties_geo):
        name, rings = counties_geo[fips]
        demo = demographics.get(fips)
        if demo is None:
            report.diagnostics.append(f"county {fips}: no demographics row")
            demo = {}
        counties[fips] = County(
            fips=fips,
            name=name,
            rings=rings,
            population=demo.get("population"),
            dem_votes=demo.get("dem_votes"),
            rep_votes=demo.get("rep_votes"),
            median_income=demo.get("median_income"),
            mask_usage=demo.get("mask_usage"),
            covid_series=covid.get(fips, ()),
        )
    for fips in demographics:
        if fips not in counties_geo:
            report.diagnostics.append(f"demographics row for unknown county {fips}")
    for fips in covid:
        if fips not in counties_geo:
            report.diagnostics.append(f"covid series for unknown county {fips}")

    kept: list[Tweet] = []
    for tweet, assignment in zip(tweets, assignments):
        if assignment is None:
            report.n_unassigned += 1
            continue
        fips, _fraction = assignment
        if fips not in counties:
            report.n_unknown_fips += 1
            report.diagnostics.append(
                f"tweet {tweet.id}: assigned county {fips} not in county table"
            )
            continue
        kept.append(replace(tweet, county_fips=fips))
    report.n_retained = len(kept)

    time_range: Optional[tuple[datetime, datetime]] = None
    if kept:
        stamps = [t.timestamp for t in kept]
        time_range = (min(stamps), max(stamps))
    else:
        report.time_range_defined = False

    dataset = Dataset(
        tweets=tuple(kept),
        counties=MappingProxyType(counties),
        topic_label=topic_label,
        time_range=time_range,
    )
    return dataset, report


# --- dataset archive -------------------------------------------------------

def _format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _tweets_csv_bytes(tweets: Iterable[Tweet]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TWEET_COLUMNS + ["county_fips", "sentiment_score", "sentiment_class"])
    for t in tweets:
        frames = ";".join(sorted((f.name for f in t.frames),
                                 key=lambda n: FRAME_INDEX[n]))
        writer.writerow([
            t.id, _format_timestamp(t.timestamp), t.text, t.retweet_count,
            t.stance, "1" if t.vividness else "0", frames,
            repr(t.bbox[0]), repr(t.bbox[1]), repr(t.bbox[2]), repr(t.bbox[3]),
            t.county_fips or "",
            "" if t.sentiment_score is None else repr(t.sentiment_score),
            t.sentiment_class or "",
        ])
    return buf.getvalue().encode("utf-8")


def _counties_geojson_bytes(counties: Mapping[str, County]) -> bytes:
    features = []
    for fips in sorted(counties):
        county = counties[fips]
        polygons: list[list[list[list[float]]]] = []
        # Outer rings (positive signed area) start a polygon; holes attach to
        # the polygon opened most recently.
        for ring in county.rings:
            coords = [[float(x), float(y)] for x, y in ring]
            if kernels.ring_signed_area(ring) >= 0 or not polygons:
                polygons.append([coords])
            else:
                polygons[-1].append(coords)
        geometry = (
            {"type": "Polygon", "coordinates": polygons[0]}
            if len(polygons) == 1
            else {"type": "MultiPolygon", "coordinates": polygons}
        )
        features.append({
            "type": "Feature",
            "properties": {"GEOID": fips, "NAME": county.name},
            "geometry": geometry,
        })
    doc = {"type": "FeatureCollection", "features": features}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _demographics_csv_bytes(counties: Mapping[str, County]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DEMOGRAPHICS_COLUMNS)
    for fips in sorted(counties):
        c = counties[fips]
        if not c.has_demographics:
            continue
        writer.writerow([
            fips, c.population, c.dem_votes, c.rep_votes,
            repr(c.median_income) if c.median_income is not None else "",
            repr(c.mask_usage) if c.mask_usage is not None else "",
        ])
    return buf.getvalue().encode("utf-8")


def _covid_csv_bytes(counties: Mapping[str, County]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COVID_COLUMNS)
    for fips in sorted(counties):
        for point in counties[fips].covid_series:
            writer.writerow([fips, point.date.isoformat(), point.cases, point.deaths])
    return buf.getvalue().encode("utf-8")


def save_dataset(dataset: Dataset, path) -> None:
    """Write the dataset archive; bytes are deterministic for equal content."""
    manifest = {
        "format": DATASET_FORMAT,
        "topic_label": dataset.topic_label,
        "time_range": (
            [_format_timestamp(dataset.time_range[0]),
             _format_timestamp(dataset.time_range[1])]
            if dataset.time_range is not None else None
        ),
        "n_tweets": len(dataset.tweets),
        "n_counties": len(dataset.counties),
    }
    entries = [
        ("manifest.json", json.dumps(manifest, sort_keys=True, indent=2).encode("utf-8")),
        ("tweets.csv", _tweets_csv_bytes(dataset.tweets)),
        ("counties.geojson", _counties_geojson_bytes(dataset.counties)),
        ("demographics.csv", _demographics_csv_bytes(dataset.counties)),
        ("covid.csv", _covid_csv_bytes(dataset.counties)),
    ]
    with zipfile.ZipFile(path, "w") as zf:
        for name, payload in entries:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, payload)


def load_dataset(path) -> Dataset:
    """Load a dataset archive written by save_dataset."""
    try:
        zf = zipfile.ZipFile(path)
    except (OSError, zipfile.BadZipFile) as exc:
        raise IngestError(f"cannot open dataset archive {path}: {exc}") from exc
    with zf:
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except KeyError:
            raise IngestError(f"{path}: not a dataset archive (no manifest.json)")
        if manifest.get("format") != DATASET_FORMAT:
            raise IngestError(
                f"{path}: unsupported archive format {manifest.get('format')!r}"
            )
        counties_geo = _parse_counties_bytes(zf.read("counties.geojson"), path)
        demographics = _parse_demographics_bytes(zf.read("demographics.csv"), path)
        covid = _parse_covid_bytes(zf.read("covid.csv"), path)
        tweets = _parse_archive_tweets(zf.read("tweets.csv"), path)

    counties: dict[str, County] = {}
    for fips in sorted(counties_geo):
        name, rings = counties_geo[fips]
        demo = demographics.get(fips, {})
        counties[fips] = County(
            fips=fips, name=name, rings=rings,
            population=demo.get("population"),
            dem_votes=demo.get("dem_votes"),
            rep_votes=demo.get("rep_votes"),
            median_income=demo.get("median_income"),
            mask_usage=demo.get("mask_usage"),
            covid_series=covid.get(fips, ()),
        )
    for tweet in tweets:
        if tweet.county_fips not in counties:
            raise IngestError(
                f"{path}: tweet {tweet.id} references unknown county {tweet.county_fips}"
            )
    time_range = None
    if manifest.get("time_range"):
        lo, hi = manifest["time_range"]
        time_range = (_parse_timestamp(lo), _parse_timestamp(hi))
    return Dataset(
        tweets=tuple(tweets),
        counties=MappingProxyType(counties),
        topic_label=manifest.get("topic_label", ""),
        time_range=time_range,
    )


def _parse_counties_bytes(payload: bytes, path):
    return _counties_from_geojson(payload.decode("utf-8"), path)


def _parse_demographics_bytes(payload: bytes, path):
    reader = csv.DictReader(io.StringIO(payload.decode("utf-8")))
    out = {}
    for row in reader:
        out[row["fips"]] = {
            "population": int(row["population"]),
            "dem_votes": int(row["dem_votes"]),
            "rep_votes": int(row["rep_votes"]),
            "median_income": float(row["median_income"]) if row["median_income"] else None,
            "mask_usage": float(row["mask_usage"]) if row["mask_usage"] else None,
        }
    return out


def _parse_covid_bytes(payload: bytes, path):
    reader = csv.DictReader(io.StringIO(payload.decode("utf-8")))
    series: dict[str, list[CovidPoint]] = {}
    for row in reader:
        series.setdefault(row["fips"], []).append(
            CovidPoint(date.fromisoformat(row["date"]), int(row["cases"]), int(row["deaths"]))
        )
    return {fips: tuple(points) for fips, points in series.items()}


def _parse_archive_tweets(payload: bytes, path) -> list[Tweet]:
    reader = csv.DictReader(io.StringIO(payload.decode("utf-8")))
    tweets = []
    for row in reader:
        frames = frozenset(
            frame_by_name(part) for part in row["frames"].split(";") if part
        )
        tweets.append(Tweet(
            id=row["id"],
            timestamp=_parse_timestamp(row["timestamp"]),
            text=row["text"],
            retweet_count=int(row["retweet_count"]),
            stance=row["stance"],
            vividness=row["vividness"] == "1",
            frames=frames,
            bbox=(float(row["min_lon"]), float(row["min_lat"]),
                  float(row["max_lon"]), float(row["max_lat"])),
            county_fips=row["county_fips"] or None,
            sentiment_score=float(row["sentiment_score"]) if row["sentiment_score"] else None,
            sentiment_class=row["sentiment_class"] or None,
        ))
    return tweets
