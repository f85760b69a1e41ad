"""HTTP/JSON API for the coordinated-views UI.

All endpoints are read-only over an immutable Dataset loaded at startup;
POST /api/gam is pure (fits a model per request, mutates nothing). Payload
builders are plain functions shared with the CLI export path so both emit
byte-identical JSON. Layout geometry is serialized with at most 9
significant digits; model coefficients keep full precision.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from starlette.exceptions import HTTPException as StarletteHTTPException

from motiv import analytics, gam, glyphs
from motiv.corpus import County, Dataset, Tweet
from motiv.frames import FRAME_INDEX, FRAMES, frame_by_name

GEOMETRY_DIGITS = 9


class ApiException(Exception):
    """Carried to the client as the single ApiError body of a non-2xx response."""

    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def dump_json(payload) -> bytes:
    """Canonical JSON bytes: compact, UTF-8, NaN/Inf rejected."""
    return json.dumps(payload, ensure_ascii=False, allow_nan=False,
                      separators=(",", ":")).encode("utf-8")


def _sig(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    return float(f"{value:.{GEOMETRY_DIGITS}g}")


def _iso(ts) -> str:
    return ts.isoformat().replace("+00:00", "Z")


# --- payload builders ---------------------------------------------------------

def build_frames_payload() -> list[dict]:
    return [
        {"name": f.name, "polarity": f.polarity.value, "pair_id": f.pair_id}
        for f in FRAMES
    ]


def _summary_dict(s: analytics.FrameSummary) -> dict:
    pos, neu, neg = s.sentiment_counts
    return {
        "frame": s.frame.name,
        "polarity": s.frame.polarity.value,
        "pair_id": s.frame.pair_id,
        "n_tweets": s.n_tweets,
        "n_for": s.n_for,
        "n_against": s.n_against,
        "retweets_for": s.retweets_for,
        "retweets_against": s.retweets_against,
        "vivid_fraction": s.vivid_fraction,
        "sentiment_counts": {"positive": pos, "neutral": neu, "negative": neg},
        "party_fraction_dem": s.party_fraction_dem,
    }


def build_summary_payload(dataset: Dataset, sort: Optional[str] = None,
                          direction: str = "desc") -> dict:
    summaries = analytics.all_frame_summaries(dataset)
    if sort is not None:
        summaries = analytics.sort_frames(summaries, sort, direction)
    return {
        "sort": sort,
        "dir": direction if sort is not None else None,
        "summaries": [_summary_dict(s) for s in summaries],
    }


def _tweet_detail(tweet: Tweet, dataset: Dataset) -> dict:
    county = dataset.counties[tweet.county_fips]
    return {
        "id": tweet.id,
        "timestamp": _iso(tweet.timestamp),
        "text": tweet.text,
        "retweet_count": tweet.retweet_count,
        "stance": tweet.stance,
        "vividness": tweet.vividness,
        "frames": sorted((f.name for f in tweet.frames), key=FRAME_INDEX.__getitem__),
        "county_fips": tweet.county_fips,
        "county_name": county.name,
        "sentiment_score": tweet.sentiment_score,
        "sentiment_class": tweet.sentiment_class,
    }


def _county_detail(county: County, dataset: Dataset, total_tweets: int) -> dict:
    return {
        "fips": county.fips,
        "name": county.name,
        "population": county.population,
        "dem_votes": county.dem_votes,
        "rep_votes": county.rep_votes,
        "median_income": county.median_income,
        "mask_usage": county.mask_usage,
        "leaning": analytics.political_leaning(county),
        "covid_rate": analytics.county_covid_rate(county, dataset.time_range),
        "total_tweets": total_tweets,
    }


def _parse_frame(name: Optional[str]):
    if name is None or name == "":
        return None
    try:
        return frame_by_name(name)
    except KeyError as exc:
        raise ApiException(400, "bad_request", str(exc)) from exc


def build_timeline_payload(dataset: Dataset, frame_name: Optional[str] = None,
                           color_feature: str = "sentiment") -> dict:
    frame = _parse_frame(frame_name)
    try:
        layout = analytics.layout_timeline(dataset, frame=frame,
                                           color_feature=color_feature)
    except ValueError as exc:
        raise ApiException(400, "bad_request", str(exc)) from exc

    def tiles(side) -> list[dict]:
        return [
            {
                "tweet_id": t.tweet_id,
                "y_offset": _sig(t.y_offset),
                "height": _sig(t.height),
                "color_value": _sig(t.color_value),
            }
            for t in side
        ]

    tweet_ids: set[str] = set()
    bins = []
    for b in layout.bins:
        bins.append({
            "start": _iso(b.start),
            "end": _iso(b.end),
            "strip_sentiment_mean": _sig(b.strip_sentiment_mean),
            "tiles_above": tiles(b.tiles_above),
            "tiles_below": tiles(b.tiles_below),
        })
        tweet_ids.update(t.tweet_id for t in b.tiles_above)
        tweet_ids.update(t.tweet_id for t in b.tiles_below)
    by_id = {t.id: t for t in dataset.tweets}
    return {
        "frame": layout.frame,
        "color_feature": layout.color_feature,
        "bin_width_days": (layout.bin_width.days if layout.bin_width else None),
        "bins": bins,
        "tweets": {
            tid: _tweet_detail(by_id[tid], dataset) for tid in sorted(tweet_ids)
        },
    }


def build_map_payload(dataset: Dataset, frame_name: Optional[str] = None,
                      color_feature: str = "leaning") -> dict:
    frame = _parse_frame(frame_name)
    aggregates = analytics.county_aggregates(dataset)
    try:
        layout = glyphs.layout_map(dataset, frame=frame, color_feature=color_feature)
    except ValueError as exc:
        raise ApiException(400, "bad_request", str(exc)) from exc
    viewport = glyphs.DEFAULT_VIEWPORT
    return {
        "frame": frame.name if frame else None,
        "color_feature": color_feature,
        "viewport": {"width": viewport.width, "height": viewport.height},
        "layout": {
            "iterations": layout.iterations,
            "converged": layout.converged,
            "residual_penetration": _sig(layout.residual_penetration),
            "total_displacement": _sig(layout.total_displacement),
        },
        "glyphs": [
            {
                "fips": g.fips,
                "anchor": [_sig(g.anchor[0]), _sig(g.anchor[1])],
                "position": [_sig(g.position[0]), _sig(g.position[1])],
                "half_width": _sig(g.half_width),
                "upper_radius": _sig(g.upper_radius),
                "lower_radius": _sig(g.lower_radius),
                "color_value": _sig(g.color_value),
                "county": _county_detail(
                    dataset.counties[g.fips], dataset,
                    aggregates[g.fips].total_tweets,
                ),
            }
            for g in layout.glyphs
        ],
    }


def build_gam_payload(dataset: Dataset, spec_dict: dict) -> dict:
    spec = gam.spec_from_dict(spec_dict)
    model, _table = gam.fit_dataset(dataset, spec)
    pd_list = []
    for term in model.terms:
        pd = gam.partial_dependence(model, term.spec.feature)
        pd_list.append({
            "feature": pd.feature,
            "kind": term.spec.kind,
            "grid": [float(v) for v in pd.grid],
            "values": [float(v) for v in pd.values],
            "se_band": (
                [float(v) for v in pd.se_band] if pd.se_band is not None else None
            ),
        })
    if model.all_linear:
        p_values = gam.linear_pvalues(model)
        p_note = None
    else:
        p_values = None
        p_note = ("p-values are reported only for all-linear models; "
                  "spline terms do not carry a calibrated test")
    return {
        "model": {
            "target": spec.target,
            "granularity": spec.granularity,
            "n_rows": model.n_rows,
            "n_dropped": model.n_dropped,
            "intercept": model.intercept,
            "edf": model.edf,
            "rss": model.rss,
            "gcv_score": model.gcv_score,
            "lambda": model.lambda_shared,
            "terms": [
                {
                    "feature": t.spec.feature,
                    "kind": t.spec.kind,
                    "lambda": t.lam,
                    "coefficients": [float(v) for v in t.coef],
                }
                for t in model.terms
            ],
        },
        "p_values": p_values,
        "p_values_note": p_note,
        "partial_dependence": pd_list,
    }


def build_brush_payload(dataset: Dataset, fips: str) -> dict:
    county = dataset.counties.get(fips)
    if county is None:
        raise ApiException(404, "not_found", f"unknown county {fips!r}")
    ids = [t.id for t in dataset.tweets if t.county_fips == fips]
    return {
        "fips": fips,
        "county": _county_detail(county, dataset, len(ids)),
        "tweet_ids": ids,
    }


def build_meta_payload(dataset: Dataset) -> dict:
    return {
        "topic_label": dataset.topic_label,
        "n_tweets": len(dataset.tweets),
        "n_counties": len(dataset.counties),
        "time_range": (
            [_iso(dataset.time_range[0]), _iso(dataset.time_range[1])]
            if dataset.time_range else None
        ),
        "sort_keys": sorted(analytics.SORT_KEYS),
        "timeline_color_features": list(analytics.TIMELINE_COLOR_FEATURES),
        "map_color_features": list(analytics.MAP_COLOR_FEATURES),
        "gam_features": {
            "per_county": gam.per_county_feature_names(),
            "per_tweet": gam.per_tweet_feature_names(),
        },
    }


# --- app ------------------------------------------------------------------------

def _json_response(payload, status: int = 200) -> Response:
    return Response(content=dump_json(payload), status_code=status,
                    media_type="application/json")


def _error_response(status: int, code: str, message: str, detail=None) -> Response:
    return _json_response(
        {"code": code, "message": message, "detail": detail}, status
    )


def create_app(dataset: Dataset, cors_origins: tuple[str, ...] = ("*",)) -> FastAPI:
    app = FastAPI(title="motiv", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiException)
    async def _api_error(_request: Request, exc: ApiException):
        return _error_response(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return _error_response(400, "bad_request", "invalid request", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "bad_request"
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def _internal_error(_request: Request, exc: Exception):
        return _error_response(500, "internal", f"internal error: {exc}")

    @app.get("/api/frames")
    def frames():
        return _json_response(build_frames_payload())

    @app.get("/api/meta")
    def meta():
        return _json_response(build_meta_payload(dataset))

    @app.get("/api/summary")
    def summary(sort: Optional[str] = None, dir: str = "desc"):
        try:
            return _json_response(build_summary_payload(dataset, sort, dir))
        except ValueError as exc:
            raise ApiException(400, "bad_request", str(exc)) from exc

    @app.get("/api/timeline")
    def timeline(frame: Optional[str] = None, color: str = "sentiment"):
        return _json_response(build_timeline_payload(dataset, frame, color))

    @app.get("/api/map")
    def map_panel(frame: Optional[str] = None, color: str = "leaning"):
        return _json_response(build_map_payload(dataset, frame, color))

    @app.post("/api/gam")
    async def gam_fit(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            raise ApiException(400, "bad_request", f"malformed JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ApiException(400, "bad_request", "model spec must be a JSON object")
        try:
            payload = build_gam_payload(dataset, body)
        except gam.GamSpecError as exc:
            raise ApiException(400, "bad_request", str(exc)) from exc
        except gam.GamFitError as exc:
            raise ApiException(422, "degenerate_model", str(exc)) from exc
        return _json_response(payload)

    @app.get("/api/brush/county/{fips}")
    def brush_county(fips: str):
        return _json_response(build_brush_payload(dataset, fips))

    @app.get("/api/tweets/{tweet_id}")
    def tweet_detail(tweet_id: str):
        for tweet in dataset.tweets:
            if tweet.id == tweet_id:
                return _json_response(_tweet_detail(tweet, dataset))
        raise ApiException(404, "not_found", f"unknown tweet {tweet_id!r}")

    return app
