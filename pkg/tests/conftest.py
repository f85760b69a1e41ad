"""Shared fixtures: a deterministic synthetic corpus on a 6x6 county grid.

The generator pins the counts the tests assert against: 220 CSV rows split
into 200 geo-assignable tweets (150 inside-cell boxes, 35 points, 15 boxes
straddling two cells at a 60/40 split), 7 geo-excluded rows, 8 dropped rows
(missing stance/frames) and 5 malformed rows. The corpus spans exactly
2020-03-01 .. 2020-06-30 (122 days).
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from types import MappingProxyType
from typing import Optional

import pytest

from motiv import corpus, sentiment
from motiv.cli import run_ingest
from motiv.frames import FRAMES, MoralFrame, frame_by_name

GRID_LON0 = -100.0
GRID_LAT0 = 35.0
GRID_N = 6

START = datetime(2020, 3, 1, 6, 0, tzinfo=timezone.utc)
END = datetime(2020, 6, 30, 18, 0, tzinfo=timezone.utc)

HOLE_FIPS = "17005"
ISLAND_FIPS = "17013"
NO_DEMOGRAPHICS_FIPS = "17071"
NO_COVID_FIPS = "17069"
NO_MASK_FIPS = "17003"

POSITIVE_WORDS = ["love", "hope", "great", "safe", "care", "thank", "brave", "peace"]
NEGATIVE_WORDS = ["death", "fear", "hate", "terrible", "lies", "danger", "sick", "awful"]
FILLER_WORDS = ["the", "orders", "people", "staying", "home", "county", "today",
                "everyone", "please", "news", "again", "outside", "week"]


def _fips_list() -> list[str]:
    return [f"17{2 * i + 1:03d}" for i in range(GRID_N * GRID_N)]


def _cell_of(fips: str) -> tuple[int, int]:
    idx = (int(fips[2:]) - 1) // 2
    return (idx % GRID_N, idx // GRID_N)


def _square(x0: float, y0: float, x1: float, y1: float) -> list[list[float]]:
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]


@dataclass
class FixtureInfo:
    tweets: Path
    counties: Path
    demographics: Path
    covid: Path
    parsed: int = 0
    retained_parse: int = 0
    dropped: int = 0
    rejected: int = 0
    assignable: int = 0
    geo_excluded: int = 0
    n_straddle: int = 0
    fips: list[str] = field(default_factory=list)


def write_corpus_files(root: Path) -> FixtureInfo:
    rng = random.Random(20200301)
    fips_list = _fips_list()
    info = FixtureInfo(
        tweets=root / "tweets.csv",
        counties=root / "counties.geojson",
        demographics=root / "demographics.csv",
        covid=root / "covid.csv",
        fips=fips_list,
    )

    # --- counties.geojson ---
    features = []
    for fips in fips_list:
        col, row = _cell_of(fips)
        x0 = GRID_LON0 + col
        y0 = GRID_LAT0 + row
        if fips == HOLE_FIPS:
            geometry = {
                "type": "Polygon",
                "coordinates": [
                    _square(x0, y0, x0 + 1, y0 + 1),
                    _square(x0 + 0.4, y0 + 0.4, x0 + 0.6, y0 + 0.6),
                ],
            }
        elif fips == ISLAND_FIPS:
            geometry = {
                "type": "MultiPolygon",
                "coordinates": [
                    [_square(x0, y0, x0 + 1, y0 + 1)],
                    [_square(GRID_LON0 - 2.5, GRID_LAT0 + 2.0,
                             GRID_LON0 - 2.3, GRID_LAT0 + 2.2)],
                ],
            }
        else:
            geometry = {
                "type": "Polygon",
                "coordinates": [_square(x0, y0, x0 + 1, y0 + 1)],
            }
        features.append({
            "type": "Feature",
            "properties": {"GEOID": fips, "NAME": f"Grid County {fips[-3:]}"},
            "geometry": geometry,
        })
    info.counties.write_text(
        json.dumps({"type": "FeatureCollection", "features": features}), "utf-8"
    )

    # --- demographics.csv (median_income = 2*population + 1, noiseless) ---
    with open(info.demographics, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(corpus.DEMOGRAPHICS_COLUMNS)
        for fips in fips_list:
            if fips == NO_DEMOGRAPHICS_FIPS:
                continue
            population = rng.randrange(9_000, 2_000_000)
            dem = rng.randrange(1_000, population // 2 + 1_000)
            rep = rng.randrange(1_000, population // 2 + 1_000)
            mask = "" if fips == NO_MASK_FIPS else f"{rng.uniform(0.2, 0.95):.3f}"
            writer.writerow([fips, population, dem, rep, 2 * population + 1, mask])

    # --- covid.csv (weekly cumulative) ---
    with open(info.covid, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(corpus.COVID_COLUMNS)
        for fips in fips_list:
            if fips == NO_COVID_FIPS:
                continue
            rate = rng.uniform(0.00005, 0.001)
            cases = 0
            day = START.date()
            for week in range(18):
                cases += int(10_000 * rate * (week + 1))
                writer.writerow([fips, (day + timedelta(days=7 * week)).isoformat(),
                                 cases, cases // 20])

    # --- tweets.csv ---
    def text_for(frame_names: list[str], stance: str) -> str:
        words = [rng.choice(FILLER_WORDS) for _ in range(rng.randrange(4, 9))]
        mood = POSITIVE_WORDS if rng.random() < 0.5 else NEGATIVE_WORDS
        for _ in range(rng.randrange(0, 3)):
            words.insert(rng.randrange(len(words)), rng.choice(mood))
        return " ".join(words)

    def pick_frames() -> list[str]:
        weights = {f.name: 1.0 for f in FRAMES}
        weights["Care"] = 5.0
        weights["Harm"] = 3.0
        names = list(weights)
        chosen = {rng.choices(names, weights=[weights[n] for n in names])[0]}
        if rng.random() < 0.25:
            chosen.add(rng.choice(names))
        return sorted(chosen)

    def pick_stance(frame_names: list[str]) -> str:
        if "Freedom" in frame_names or "Oppression" in frame_names:
            return "against" if rng.random() < 0.7 else "for"
        return "for" if rng.random() < 0.65 else "against"

    def retweets(frame_names: list[str]) -> int:
        base = int(rng.paretovariate(1.2)) - 1
        if "Care" in frame_names:
            base += 50
        return min(base, 3000)

    n_inside, n_points, n_straddle = 150, 35, 15
    info.n_straddle = n_straddle
    info.assignable = n_inside + n_points + n_straddle

    stamps = [START, END]
    span = int((END - START).total_seconds())
    while len(stamps) < info.assignable:
        stamps.append(START + timedelta(seconds=rng.randrange(span)))
    rng.shuffle(stamps)

    rows = []
    serial = 0

    def add_row(ts: Optional[datetime], stance: str, frames: str,
                bbox: tuple[float, float, float, float],
                ts_override: Optional[str] = None,
                retweet_override: Optional[str] = None) -> None:
        nonlocal serial
        frame_names = [p for p in frames.split(";") if p]
        rt = retweets(frame_names) if retweet_override is None else retweet_override
        rows.append([
            f"t{serial:04d}",
            ts_override if ts_override is not None else ts.isoformat().replace("+00:00", "Z"),
            text_for(frame_names, stance),
            rt,
            stance,
            "1" if rng.random() < 0.2 else "0",
            frames,
            repr(bbox[0]), repr(bbox[1]), repr(bbox[2]), repr(bbox[3]),
        ])
        serial += 1

    stamp_iter = iter(stamps)

    for _ in range(n_inside):
        fips = rng.choice(fips_list)
        col, row = _cell_of(fips)
        if fips == HOLE_FIPS:
            cx = GRID_LON0 + col + rng.uniform(0.08, 0.30)
            cy = GRID_LAT0 + row + rng.uniform(0.08, 0.30)
        else:
            cx = GRID_LON0 + col + rng.uniform(0.15, 0.85)
            cy = GRID_LAT0 + row + rng.uniform(0.15, 0.85)
        hw = rng.uniform(0.02, 0.07)
        hh = rng.uniform(0.02, 0.07)
        frames = ";".join(pick_frames())
        add_row(next(stamp_iter), pick_stance(frames.split(";")), frames,
                (cx - hw, cy - hh, cx + hw, cy + hh))

    for _ in range(n_points):
        fips = rng.choice([f for f in fips_list if f != HOLE_FIPS])
        col, row = _cell_of(fips)
        px = GRID_LON0 + col + rng.uniform(0.1, 0.9)
        py = GRID_LAT0 + row + rng.uniform(0.1, 0.9)
        frames = ";".join(pick_frames())
        add_row(next(stamp_iter), pick_stance(frames.split(";")), frames,
                (px, py, px, py))

    for _ in range(n_straddle):
        col = rng.randrange(GRID_N - 1)
        row = rng.randrange(GRID_N)
        edge = GRID_LON0 + col + 1.0
        cy = GRID_LAT0 + row + rng.uniform(0.3, 0.7)
        # 60% of the box west of the edge, 40% east: argmax fraction 0.6
        frames = ";".join(pick_frames())
        add_row(next(stamp_iter), pick_stance(frames.split(";")), frames,
                (edge - 0.6, cy - 0.2, edge + 0.4, cy + 0.2))

    # geo-excluded: 4 outside the grid, 3 spread over 9 cells (max 1/9 < 0.25)
    for _ in range(4):
        px = rng.uniform(-80.0, -75.0)
        py = rng.uniform(30.0, 34.0)
        frames = ";".join(pick_frames())
        add_row(START + timedelta(days=rng.randrange(120)),
                pick_stance(frames.split(";")), frames,
                (px, py, px + 0.1, py + 0.1))
    for _ in range(3):
        ccol = rng.randrange(1, GRID_N - 1)
        crow = rng.randrange(1, GRID_N - 1)
        cx = GRID_LON0 + ccol + 0.5
        cy = GRID_LAT0 + crow + 0.5
        frames = ";".join(pick_frames())
        add_row(START + timedelta(days=rng.randrange(120)),
                pick_stance(frames.split(";")), frames,
                (cx - 1.5, cy - 1.5, cx + 1.5, cy + 1.5))
    info.geo_excluded = 7

    # dropped rows: 4 without stance, 4 without frames
    for _ in range(4):
        add_row(START + timedelta(days=rng.randrange(120)), "", "Care",
                (GRID_LON0 + 0.4, GRID_LAT0 + 0.4, GRID_LON0 + 0.5, GRID_LAT0 + 0.5))
    for _ in range(4):
        add_row(START + timedelta(days=rng.randrange(120)), "for", "",
                (GRID_LON0 + 0.4, GRID_LAT0 + 0.4, GRID_LON0 + 0.5, GRID_LAT0 + 0.5))
    info.dropped = 8

    # rejected rows: unknown frame x2, bad retweet count, inverted bbox, bad timestamp
    base_bbox = (GRID_LON0 + 0.4, GRID_LAT0 + 0.4, GRID_LON0 + 0.5, GRID_LAT0 + 0.5)
    add_row(START, "for", "Liberty", base_bbox)
    add_row(START, "against", "Care;Liberty", base_bbox)
    add_row(START, "for", "Care", base_bbox, retweet_override="abc")
    add_row(START, "for", "Harm",
            (GRID_LON0 + 0.6, GRID_LAT0 + 0.4, GRID_LON0 + 0.4, GRID_LAT0 + 0.5))
    add_row(None, "for", "Care", base_bbox, ts_override="not-a-timestamp")
    info.rejected = 5

    info.parsed = len(rows)
    info.retained_parse = info.parsed - info.dropped - info.rejected
    rng.shuffle(rows)
    with open(info.tweets, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(corpus.TWEET_COLUMNS)
        writer.writerows(rows)
    return info


@pytest.fixture(scope="session")
def fixture_info(tmp_path_factory) -> FixtureInfo:
    root = tmp_path_factory.mktemp("corpus")
    return write_corpus_files(root)


@pytest.fixture(scope="session")
def dataset(fixture_info) -> corpus.Dataset:
    ds, _report = run_ingest(
        fixture_info.tweets, fixture_info.counties,
        fixture_info.demographics, fixture_info.covid,
        topic="stay-at-home",
    )
    return ds


@pytest.fixture(scope="session")
def ingest_report(fixture_info) -> dict:
    _ds, report = run_ingest(
        fixture_info.tweets, fixture_info.counties,
        fixture_info.demographics, fixture_info.covid,
        topic="stay-at-home",
    )
    return report


# --- tiny inline builders for unit tests ------------------------------------

def mk_tweet(tweet_id: str, frames: list[str], stance: str = "for",
             retweets: int = 0, vivid: bool = False,
             fips: Optional[str] = "17001",
             ts: datetime = START,
             score: Optional[float] = 0.0,
             klass: Optional[str] = "neutral",
             bbox=( -99.6, 35.4, -99.5, 35.5)) -> corpus.Tweet:
    return corpus.Tweet(
        id=tweet_id, timestamp=ts, text="", retweet_count=retweets,
        stance=stance, vividness=vivid,
        frames=frozenset(frame_by_name(f) for f in frames),
        bbox=bbox, county_fips=fips,
        sentiment_score=score, sentiment_class=klass,
    )


def mk_county(fips: str = "17001", population: Optional[int] = 1000,
              dem: Optional[int] = 60, rep: Optional[int] = 40,
              cell: tuple[int, int] = (0, 0)) -> corpus.County:
    import numpy as np

    col, row = cell
    x0 = GRID_LON0 + col
    y0 = GRID_LAT0 + row
    ring = np.array(_square(x0, y0, x0 + 1, y0 + 1), dtype=float)
    ring.flags.writeable = False
    return corpus.County(
        fips=fips, name=f"County {fips}", rings=(ring,),
        population=population, dem_votes=dem, rep_votes=rep,
        median_income=None if population is None else float(population),
        mask_usage=0.5 if population is not None else None,
    )


def mk_dataset(tweets: list[corpus.Tweet],
               counties: Optional[list[corpus.County]] = None,
               topic: str = "test") -> corpus.Dataset:
    if counties is None:
        fips_seen = sorted({t.county_fips for t in tweets})
        counties = [
            mk_county(f, cell=(i % GRID_N, i // GRID_N))
            for i, f in enumerate(fips_seen)
        ]
    time_range = None
    if tweets:
        stamps = [t.timestamp for t in tweets]
        time_range = (min(stamps), max(stamps))
    return corpus.Dataset(
        tweets=tuple(tweets),
        counties=MappingProxyType({c.fips: c for c in counties}),
        topic_label=topic,
        time_range=time_range,
    )


@pytest.fixture()
def tiny_lexicon() -> sentiment.Lexicon:
    return sentiment.Lexicon(
        entries={"good": 1.9, "bad": -1.9, "great": 3.0, "awful": -2.5},
        boosters={"very": 1.0, "slightly": -0.5},
        negators=frozenset({"not", "never"}),
    )
