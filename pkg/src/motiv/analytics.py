"""Frame summaries, county aggregates, political leaning, and timeline layout.

Everything here is a pure derivation from an immutable Dataset. Multi-frame
tweets count once in each frame they express, so per-frame counts may sum to
more than the tweet total.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from datetime import datetime, time, timedelta, timezone
from typing import Callable, Optional

from motiv.corpus import County, Dataset, Tweet
from motiv.frames import FRAMES, MoralFrame

BIN_WIDTH_CANDIDATES_DAYS = (1, 3, 7, 14, 30)
MAX_BINS = 60


def political_leaning(county: County) -> Optional[int]:
    """Democratic minus republican votes; None when either count is missing."""
    if county.dem_votes is None or county.rep_votes is None:
        return None
    return county.dem_votes - county.rep_votes


def covid_cases_at(county: County, when: datetime) -> Optional[float]:
    """Cumulative cases per capita at a date (last report on or before it)."""
    if county.population is None or not county.covid_series:
        return None
    dates = [p.date for p in county.covid_series]
    idx = bisect_right(dates, when.date())
    if idx == 0:
        return 0.0
    return county.covid_series[idx - 1].cases / county.population


def county_covid_rate(county: County, time_range) -> Optional[float]:
    """Peak cumulative cases per capita within the dataset time range."""
    if county.population is None or not county.covid_series or time_range is None:
        return None
    lo = time_range[0].date()
    hi = time_range[1].date()
    in_range = [p.cases for p in county.covid_series if lo <= p.date <= hi]
    if not in_range:
        return None
    return max(in_range) / county.population


# --- feature registry (timeline/map colors and GAM design tables) ----------

COUNTY_FEATURES: dict[str, Callable[[County, Dataset], Optional[float]]] = {
    "population": lambda c, d: None if c.population is None else float(c.population),
    "median_income": lambda c, d: c.median_income,
    "mask_usage": lambda c, d: c.mask_usage,
    "dem_votes": lambda c, d: None if c.dem_votes is None else float(c.dem_votes),
    "rep_votes": lambda c, d: None if c.rep_votes is None else float(c.rep_votes),
    "leaning": lambda c, d: (
        None if political_leaning(c) is None else float(political_leaning(c))
    ),
    "covid_rate": lambda c, d: county_covid_rate(c, d.time_range),
}

TWEET_FEATURES: dict[str, Callable[[Tweet, County, Dataset], Optional[float]]] = {
    "sentiment": lambda t, c, d: t.sentiment_score,
    "retweet_count": lambda t, c, d: float(t.retweet_count),
    "vividness": lambda t, c, d: 1.0 if t.vividness else 0.0,
    "stance_for": lambda t, c, d: 1.0 if t.stance == "for" else 0.0,
    "covid_cases": lambda t, c, d: covid_cases_at(c, t.timestamp),
}

TIMELINE_COLOR_FEATURES = tuple(sorted(TWEET_FEATURES) + sorted(COUNTY_FEATURES))
MAP_COLOR_FEATURES = tuple(sorted(COUNTY_FEATURES))


def tweet_color_value(tweet: Tweet, dataset: Dataset, feature: str) -> Optional[float]:
    county = dataset.counties[tweet.county_fips]
    if feature in TWEET_FEATURES:
        return TWEET_FEATURES[feature](tweet, county, dataset)
    if feature in COUNTY_FEATURES:
        return COUNTY_FEATURES[feature](county, dataset)
    raise ValueError(
        f"unknown color feature {feature!r}; valid: {', '.join(TIMELINE_COLOR_FEATURES)}"
    )


def county_color_value(county: County, dataset: Dataset, feature: str) -> Optional[float]:
    if feature not in COUNTY_FEATURES:
        raise ValueError(
            f"unknown color feature {feature!r}; valid: {', '.join(MAP_COLOR_FEATURES)}"
        )
    return COUNTY_FEATURES[feature](county, dataset)


# --- frame summaries --------------------------------------------------------

@dataclass(frozen=True)
class FrameSummary:
    frame: MoralFrame
    n_tweets: int
    n_for: int
    n_against: int
    retweets_for: int
    retweets_against: int
    vivid_fraction: float
    sentiment_counts: tuple[int, int, int]  # (positive, neutral, negative)
    party_fraction_dem: float


def frame_summary(dataset: Dataset, frame: MoralFrame) -> FrameSummary:
    """Aggregate every tweet whose frame set contains `frame`."""
    n = n_for = n_against = rt_for = rt_against = vivid = 0
    pos = neu = neg = 0
    dem = known_leaning = 0
    for tweet in dataset.tweets:
        if frame not in tweet.frames:
            continue
        n += 1
        if tweet.stance == "for":
            n_for += 1
            rt_for += tweet.retweet_count
        else:
            n_against += 1
            rt_against += tweet.retweet_count
        if tweet.vividness:
            vivid += 1
        if tweet.sentiment_class == "positive":
            pos += 1
        elif tweet.sentiment_class == "negative":
            neg += 1
        elif tweet.sentiment_class == "neutral":
            neu += 1
        leaning = political_leaning(dataset.counties[tweet.county_fips])
        if leaning is not None:
            known_leaning += 1
            if leaning > 0:
                dem += 1
    return FrameSummary(
        frame=frame,
        n_tweets=n,
        n_for=n_for,
        n_against=n_against,
        retweets_for=rt_for,
        retweets_against=rt_against,
        vivid_fraction=vivid / n if n else 0.0,
        sentiment_counts=(pos, neu, neg),
        party_fraction_dem=dem / known_leaning if known_leaning else 0.0,
    )


def all_frame_summaries(dataset: Dataset) -> list[FrameSummary]:
    """Summaries for the 12 frames in canonical order."""
    return [frame_summary(dataset, frame) for frame in FRAMES]


def _sentiment_balance(s: FrameSummary) -> float:
    pos, _neu, neg = s.sentiment_counts
    return (pos - neg) / s.n_tweets if s.n_tweets else 0.0


SORT_KEYS: dict[str, Callable[[FrameSummary], float]] = {
    "stance_share": lambda s: s.n_for / s.n_tweets if s.n_tweets else 0.0,
    "popularity": lambda s: s.retweets_for + s.retweets_against + s.n_tweets,
    "vividness": lambda s: s.vivid_fraction,
    "sentiment": _sentiment_balance,
    "party": lambda s: s.party_fraction_dem,
}


def sort_frames(summaries: list[FrameSummary], key: str,
                direction: str = "desc") -> list[FrameSummary]:
    """Stable sort of summaries by a named statistic; ties keep input order."""
    if key not in SORT_KEYS:
        raise ValueError(f"unknown sort key {key!r}; valid: {', '.join(sorted(SORT_KEYS))}")
    if direction not in ("asc", "desc"):
        raise ValueError(f"direction must be asc or desc, got {direction!r}")
    return sorted(summaries, key=SORT_KEYS[key], reverse=(direction == "desc"))


# --- county aggregates ------------------------------------------------------

@dataclass(frozen=True)
class CountyAggregate:
    fips: str
    counts: dict[str, dict[str, int]]  # frame name -> {"for": n, "against": n}
    total_tweets: int
    total_for: int
    total_against: int
    leaning: Optional[int]

    def stance_counts(self, frame_name: Optional[str]) -> tuple[int, int]:
        """(for, against) counts for one frame, or per-tweet totals when None."""
        if frame_name is None:
            return (self.total_for, self.total_against)
        per_frame = self.counts[frame_name]
        return (per_frame["for"], per_frame["against"])


def county_aggregates(dataset: Dataset) -> dict[str, CountyAggregate]:
    """Per-county tweet counts split by frame and stance, for every county."""
    counts = {
        fips: {f.name: {"for": 0, "against": 0} for f in FRAMES}
        for fips in dataset.counties
    }
    totals = {fips: [0, 0, 0] for fips in dataset.counties}  # all, for, against
    for tweet in dataset.tweets:
        tally = totals[tweet.county_fips]
        tally[0] += 1
        tally[1 if tweet.stance == "for" else 2] += 1
        for frame in tweet.frames:
            counts[tweet.county_fips][frame.name][tweet.stance] += 1
    return {
        fips: CountyAggregate(
            fips=fips,
            counts=counts[fips],
            total_tweets=totals[fips][0],
            total_for=totals[fips][1],
            total_against=totals[fips][2],
            leaning=political_leaning(dataset.counties[fips]),
        )
        for fips in sorted(dataset.counties)
    }


# --- timeline ----------------------------------------------------------------

@dataclass(frozen=True)
class TimelineScales:
    h_min: float = 4.0
    h_unit: float = 6.0
    mode: str = "log2"  # or "linear"


DEFAULT_TIMELINE_SCALES = TimelineScales()


@dataclass(frozen=True)
class TimelineTile:
    tweet_id: str
    y_offset: float
    height: float
    color_value: Optional[float]


@dataclass(frozen=True)
class TimelineBin:
    start: datetime
    end: datetime
    tiles_above: tuple[TimelineTile, ...]
    tiles_below: tuple[TimelineTile, ...]
    strip_sentiment_mean: Optional[float]


@dataclass(frozen=True)
class TimelineLayout:
    bins: tuple[TimelineBin, ...]
    bin_width: Optional[timedelta]
    frame: Optional[str]
    color_feature: str

    @property
    def tile_count(self) -> int:
        return sum(len(b.tiles_above) + len(b.tiles_below) for b in self.bins)


def choose_bin_width(time_range: tuple[datetime, datetime]) -> timedelta:
    """Smallest width from {1, 3, 7, 14, 30} days giving at most 60 bins.

    Spans longer than 1800 days fall back to 30-day bins.
    """
    days = (time_range[1].date() - time_range[0].date()).days + 1
    for width in BIN_WIDTH_CANDIDATES_DAYS:
        if math.ceil(days / width) <= MAX_BINS:
            return timedelta(days=width)
    return timedelta(days=BIN_WIDTH_CANDIDATES_DAYS[-1])


def tile_height(retweet_count: int, scales: TimelineScales) -> float:
    if scales.mode == "linear":
        return scales.h_min + scales.h_unit * retweet_count
    return scales.h_min + scales.h_unit * math.log2(1.0 + retweet_count)


def _stack(tweets: list[Tweet], dataset: Dataset, feature: str,
           scales: TimelineScales) -> tuple[TimelineTile, ...]:
    """Tiles sorted most-retweeted first; y_offsets are prefix sums of heights."""
    ordered = sorted(tweets, key=lambda t: (-t.retweet_count, t.id))
    tiles = []
    offset = 0.0
    for tweet in ordered:
        height = tile_height(tweet.retweet_count, scales)
        tiles.append(TimelineTile(
            tweet_id=tweet.id,
            y_offset=offset,
            height=height,
            color_value=tweet_color_value(tweet, dataset, feature),
        ))
        offset += height
    return tuple(tiles)


def layout_timeline(dataset: Dataset, frame: Optional[MoralFrame] = None,
                    color_feature: str = "sentiment",
                    scales: TimelineScales = DEFAULT_TIMELINE_SCALES
                    ) -> TimelineLayout:
    """Bucket tweets into time bins, stance above/below the axis.

    Bins cover the full dataset time range even when a frame filter is
    active, anchored at midnight UTC of the first day.
    """
    if color_feature not in TWEET_FEATURES and color_feature not in COUNTY_FEATURES:
        raise ValueError(
            f"unknown color feature {color_feature!r}; "
            f"valid: {', '.join(TIMELINE_COLOR_FEATURES)}"
        )
    if dataset.time_range is None:
        return TimelineLayout(bins=(), bin_width=None,
                              frame=frame.name if frame else None,
                              color_feature=color_feature)
    width = choose_bin_width(dataset.time_range)
    anchor = datetime.combine(dataset.time_range[0].date(), time(0),
                              tzinfo=timezone.utc)
    n_bins = (dataset.time_range[1] - anchor) // width + 1

    selected = dataset.tweets if frame is None else dataset.tweets_with_frame(frame)
    buckets: list[list[Tweet]] = [[] for _ in range(n_bins)]
    for tweet in selected:
        buckets[(tweet.timestamp - anchor) // width].append(tweet)

    bins = []
    for k, bucket in enumerate(buckets):
        above = [t for t in bucket if t.stance == "for"]
        below = [t for t in bucket if t.stance == "against"]
        scores = [t.sentiment_score for t in bucket if t.sentiment_score is not None]
        bins.append(TimelineBin(
            start=anchor + k * width,
            end=anchor + (k + 1) * width,
            tiles_above=_stack(above, dataset, color_feature, scales),
            tiles_below=_stack(below, dataset, color_feature, scales),
            strip_sentiment_mean=sum(scores) / len(scores) if scores else None,
        ))
    return TimelineLayout(bins=tuple(bins), bin_width=width,
                          frame=frame.name if frame else None,
                          color_feature=color_feature)
