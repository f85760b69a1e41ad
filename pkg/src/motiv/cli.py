"""Operator entry point: ingest corpora, serve the API, fit models, export panels.

Exit codes: 0 success, 2 input error, 3 model error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from motiv import corpus, gam, sentiment
from motiv.frames import FRAMES
from motiv.geo import CountyIndex
from motiv.server import (
    ApiException,
    build_gam_payload,
    build_map_payload,
    build_summary_payload,
    build_timeline_payload,
    create_app,
    dump_json,
)

ENV_DATA = "MOTIV_DATA"


def run_ingest(tweets_path, counties_path, demographics_path, covid_path,
               threshold: float = 0.25, topic: str = "",
               lexicon: sentiment.Lexicon | None = None):
    """parsing -> sentiment -> geo-assignment -> join; returns (dataset, report)."""
    tweets, parse_report = corpus.load_tweets(tweets_path)
    counties_geo = corpus.load_counties(counties_path)
    demographics = corpus.load_demographics(demographics_path)
    covid = corpus.load_covid(covid_path)

    lex = lexicon if lexicon is not None else sentiment.default_lexicon()
    scored = []
    for tweet in tweets:
        score = sentiment.score_text(tweet.text, lex)
        scored.append(replace(tweet, sentiment_score=score,
                              sentiment_class=sentiment.classify(score)))

    index = CountyIndex({fips: rings for fips, (_n, rings) in counties_geo.items()})
    assignments = index.assign_many([t.bbox for t in scored], threshold)
    dataset, build_report = corpus.build_dataset(
        scored, counties_geo, demographics, covid, assignments, topic_label=topic
    )

    frame_counts = {f.name: 0 for f in FRAMES}
    for tweet in dataset.tweets:
        for frame in tweet.frames:
            frame_counts[frame.name] += 1
    covered = len({t.county_fips for t in dataset.tweets})
    report = {
        "rows": {
            "parsed": parse_report.parsed,
            "retained_after_parse": parse_report.retained,
            "dropped": parse_report.dropped,
            "dropped_by_reason": dict(sorted(parse_report.drop_reasons.items())),
            "rejected": parse_report.rejected,
        },
        "geo": {
            "assigned": build_report.n_retained,
            "excluded_no_assignment": build_report.n_unassigned,
            "excluded_unknown_fips": build_report.n_unknown_fips,
            "overlap_threshold": threshold,
        },
        "frame_counts": frame_counts,
        "county_coverage": {
            "with_tweets": covered,
            "total": len(dataset.counties),
        },
        "time_range_defined": build_report.time_range_defined,
        "diagnostics": parse_report.diagnostics + build_report.diagnostics,
    }
    return dataset, report


def _report_text(report: dict) -> str:
    rows = report["rows"]
    geo = report["geo"]
    lines = [
        "ingest report",
        "=============",
        f"rows parsed:            {rows['parsed']}",
        f"  retained after parse: {rows['retained_after_parse']}",
        f"  dropped:              {rows['dropped']} {rows['dropped_by_reason']}",
        f"  rejected (malformed): {rows['rejected']}",
        f"geo-assigned:           {geo['assigned']} "
        f"(threshold {geo['overlap_threshold']})",
        f"  excluded, no county:  {geo['excluded_no_assignment']}",
        f"  excluded, bad fips:   {geo['excluded_unknown_fips']}",
        "",
        "frame counts:",
    ]
    for name, count in report["frame_counts"].items():
        lines.append(f"  {name:<12} {count}")
    cov = report["county_coverage"]
    lines.append("")
    lines.append(f"county coverage: {cov['with_tweets']} of {cov['total']}")
    if report["diagnostics"]:
        lines.append("")
        lines.append("diagnostics:")
        lines.extend(f"  {d}" for d in report["diagnostics"])
    lines.append("")
    return "\n".join(lines)


def _gam_report_text(payload: dict) -> str:
    model = payload["model"]
    lines = [
        "model report",
        "============",
        f"target:      {model['target']} ({model['granularity']})",
        f"rows:        {model['n_rows']} (dropped {model['n_dropped']})",
        f"intercept:   {model['intercept']:.6g}",
        f"edf:         {model['edf']:.4f}",
        f"rss:         {model['rss']:.6g}",
        f"gcv:         {model['gcv_score']:.6g}",
        f"lambda:      {model['lambda']}",
        "",
        f"{'term':<20} {'kind':<8} {'slope':>12} {'se':>12} {'p':>10}",
    ]
    p_values = payload.get("p_values") or {}
    for term in model["terms"]:
        stats = p_values.get(term["feature"])
        if stats:
            lines.append(
                f"{term['feature']:<20} {term['kind']:<8} "
                f"{stats['beta']:>12.5g} {stats['se']:>12.5g} {stats['p']:>10.4g}"
            )
        else:
            lines.append(f"{term['feature']:<20} {term['kind']:<8} "
                         f"{'-':>12} {'-':>12} {'-':>10}")
    if payload.get("p_values_note"):
        lines.append("")
        lines.append(f"note: {payload['p_values_note']}")
    lines.append("")
    return "\n".join(lines)


def _color_hex(value, lo: float, hi: float) -> str:
    """Blue-to-red ramp over [lo, hi]; gray for missing values."""
    if value is None:
        return "#999999"
    t = 0.5 if hi <= lo else (value - lo) / (hi - lo)
    r = round(40 + t * (200 - 40))
    b = round(200 + t * (40 - 200))
    return f"#{r:02x}50{b:02x}"


def build_map_svg(payload: dict) -> str:
    """Render the map payload as SVG: one path element per glyph."""
    viewport = payload["viewport"]
    values = [g["color_value"] for g in payload["glyphs"]
              if g["color_value"] is not None]
    lo = min(values) if values else 0.0
    hi = max(values) if values else 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{viewport["width"]:g}" height="{viewport["height"]:g}" '
        f'viewBox="0 0 {viewport["width"]:g} {viewport["height"]:g}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
    ]
    for g in payload["glyphs"]:
        x, y = g["position"]
        hw = g["half_width"]
        up = g["upper_radius"]
        low = g["lower_radius"]
        d = (f"M {x - hw} {y} "
             f"A {hw} {up} 0 0 1 {x + hw} {y} "
             f"A {hw} {low} 0 0 1 {x - hw} {y} Z")
        fill = _color_hex(g["color_value"], lo, hi)
        parts.append(
            f'<path d="{d}" fill="{fill}" fill-opacity="0.8" '
            f'stroke="#333333" stroke-width="0.5" data-fips="{g["fips"]}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_ingest(args) -> int:
    dataset, report = run_ingest(
        args.tweets, args.counties, args.demographics, args.covid,
        threshold=args.overlap_threshold, topic=args.topic,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus.save_dataset(dataset, out)
    out.with_suffix(out.suffix + ".report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    out.with_suffix(out.suffix + ".report.txt").write_text(_report_text(report), "utf-8")
    print(f"wrote {out} ({report['geo']['assigned']} tweets, "
          f"{report['county_coverage']['total']} counties)")
    return 0


def _load_archive(args) -> corpus.Dataset:
    path = args.data or os.environ.get(ENV_DATA)
    if not path:
        raise corpus.IngestError(
            f"no dataset archive: pass --data or set {ENV_DATA}"
        )
    return corpus.load_dataset(path)


def _cmd_serve(args) -> int:
    import uvicorn

    dataset = _load_archive(args)
    app = create_app(dataset, cors_origins=tuple(args.cors_origin))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_fit(args) -> int:
    dataset = _load_archive(args)
    try:
        spec_dict = json.loads(Path(args.spec).read_text("utf-8"))
    except OSError as exc:
        raise corpus.IngestError(f"cannot read spec {args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise corpus.IngestError(f"{args.spec}: invalid JSON: {exc}") from exc
    payload = build_gam_payload(dataset, spec_dict)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.with_suffix(".json").write_bytes(dump_json(payload))
    out.with_suffix(".txt").write_text(_gam_report_text(payload), "utf-8")
    print(f"wrote {out.with_suffix('.json')} and {out.with_suffix('.txt')}")
    return 0


def _cmd_export(args) -> int:
    dataset = _load_archive(args)
    if args.panel == "timeline":
        payload = build_timeline_payload(dataset, args.frame,
                                         args.color or "sentiment")
    elif args.panel == "map":
        payload = build_map_payload(dataset, args.frame, args.color or "leaning")
    elif args.panel == "summary":
        payload = build_summary_payload(dataset, args.sort, args.dir)
    else:  # unreachable through argparse choices
        raise corpus.IngestError(f"unknown panel {args.panel!r}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(dump_json(payload))
    written = [str(out)]
    if args.panel == "map":
        svg_path = out.with_suffix(".svg")
        svg_path.write_text(build_map_svg(payload), "utf-8")
        written.append(str(svg_path))
    print(f"wrote {', '.join(written)}")
    return 0


def _threshold(raw: str) -> float:
    value = float(raw)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("overlap threshold must be in (0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motiv",
        description="Moral-framing microblog analytics: ingest, serve, fit, export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="build a dataset archive from flat files")
    p_ingest.add_argument("--tweets", required=True)
    p_ingest.add_argument("--counties", required=True)
    p_ingest.add_argument("--demographics", required=True)
    p_ingest.add_argument("--covid", required=True)
    p_ingest.add_argument("--out", required=True, help="archive path (.zip)")
    p_ingest.add_argument("--overlap-threshold", type=_threshold, default=0.25)
    p_ingest.add_argument("--topic", default="")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_serve = sub.add_parser("serve", help="serve the HTTP/JSON API")
    p_serve.add_argument("--data", help=f"dataset archive (default ${ENV_DATA})")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8040)
    p_serve.add_argument("--cors-origin", action="append", default=["*"])
    p_serve.set_defaults(func=_cmd_serve)

    p_fit = sub.add_parser("fit", help="fit a model spec against an archive")
    p_fit.add_argument("--data", help=f"dataset archive (default ${ENV_DATA})")
    p_fit.add_argument("--spec", required=True, help="model spec JSON file")
    p_fit.add_argument("--out", required=True, help="report path prefix")
    p_fit.set_defaults(func=_cmd_fit)

    p_export = sub.add_parser("export", help="write a panel payload to disk")
    p_export.add_argument("--data", help=f"dataset archive (default ${ENV_DATA})")
    p_export.add_argument("--panel", required=True,
                          choices=["map", "timeline", "summary"])
    p_export.add_argument("--frame")
    p_export.add_argument("--color")
    p_export.add_argument("--sort")
    p_export.add_argument("--dir", default="desc", choices=["asc", "desc"])
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except corpus.IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (gam.GamSpecError, gam.GamFitError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    except ApiException as exc:
        if exc.code in ("bad_request", "not_found"):
            print(f"error: {exc.message}", file=sys.stderr)
            return 2
        print(f"model error: {exc.message}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
