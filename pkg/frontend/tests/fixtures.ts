/** Handwritten fixture payloads mirroring the server's JSON schema. */

import type {
  FrameDescriptor,
  GamPayload,
  MapPayload,
  MetaPayload,
  SummaryPayload,
  TimelinePayload,
} from "../src/types.js";

export const FRAME_NAMES = [
  "Care", "Harm", "Loyalty", "Betrayal", "Authority", "Subversion",
  "Purity", "Degradation", "Fairness", "Injustice", "Freedom", "Oppression",
] as const;

export const framesFixture: FrameDescriptor[] = FRAME_NAMES.map((name, i) => ({
  name,
  polarity: i % 2 === 0 ? "virtue" : "vice",
  pair_id: Math.floor(i / 2) + 1,
}));

export const summaryFixture: SummaryPayload = {
  sort: null,
  dir: null,
  summaries: framesFixture.map((f, i) => ({
    frame: f.name,
    polarity: f.polarity,
    pair_id: f.pair_id,
    n_tweets: 20 - i,
    n_for: 12 - i,
    n_against: 8,
    retweets_for: 100 - 5 * i,
    retweets_against: 40,
    vivid_fraction: i / 24,
    sentiment_counts: { positive: 6, neutral: 10 - i > 0 ? 10 - i : 0, negative: 4 },
    party_fraction_dem: 0.5,
  })),
};

export const timelineFixture: TimelinePayload = {
  frame: null,
  color_feature: "sentiment",
  bin_width_days: 3,
  bins: [
    {
      start: "2020-03-01T00:00:00Z",
      end: "2020-03-04T00:00:00Z",
      strip_sentiment_mean: 0.21,
      tiles_above: [
        { tweet_id: "t1", y_offset: 0.0, height: 10.0, color_value: 0.4 },
        { tweet_id: "t2", y_offset: 10.0, height: 4.0, color_value: -0.1 },
      ],
      tiles_below: [
        { tweet_id: "t3", y_offset: 0.0, height: 6.0, color_value: null },
      ],
    },
    {
      start: "2020-03-04T00:00:00Z",
      end: "2020-03-07T00:00:00Z",
      strip_sentiment_mean: null,
      tiles_above: [],
      tiles_below: [],
    },
  ],
  tweets: {
    t1: {
      id: "t1", timestamp: "2020-03-01T06:00:00Z", text: "stay home please",
      retweet_count: 3, stance: "for", vividness: false, frames: ["Care"],
      county_fips: "17001", county_name: "Grid County 001",
      sentiment_score: 0.4, sentiment_class: "positive",
    },
    t2: {
      id: "t2", timestamp: "2020-03-02T06:00:00Z", text: "reopen now",
      retweet_count: 0, stance: "for", vividness: true, frames: ["Freedom"],
      county_fips: "17003", county_name: "Grid County 003",
      sentiment_score: -0.1, sentiment_class: "neutral",
    },
    t3: {
      id: "t3", timestamp: "2020-03-03T06:00:00Z", text: "this is harmful",
      retweet_count: 1, stance: "against", vividness: false, frames: ["Harm"],
      county_fips: "17001", county_name: "Grid County 001",
      sentiment_score: null, sentiment_class: null,
    },
  },
};

export const mapFixture: MapPayload = {
  frame: null,
  color_feature: "leaning",
  viewport: { width: 960, height: 600 },
  layout: {
    iterations: 12,
    converged: true,
    residual_penetration: 0.0,
    total_displacement: 3.5,
  },
  glyphs: [
    {
      fips: "17001",
      anchor: [200, 300], position: [198, 301],
      half_width: 12, upper_radius: 8, lower_radius: 3, color_value: 40,
      county: {
        fips: "17001", name: "Grid County 001", population: 50_000,
        dem_votes: 120, rep_votes: 80, median_income: 100_001,
        mask_usage: 0.6, leaning: 40, covid_rate: 0.01, total_tweets: 2,
      },
    },
    {
      fips: "17003",
      anchor: [420, 180], position: [420, 180],
      half_width: 6, upper_radius: 1, lower_radius: 1, color_value: -25,
      county: {
        fips: "17003", name: "Grid County 003", population: 9_000,
        dem_votes: 30, rep_votes: 55, median_income: 18_001,
        mask_usage: null, leaning: -25, covid_rate: null, total_tweets: 1,
      },
    },
  ],
};

export const metaFixture: MetaPayload = {
  topic_label: "stay-at-home",
  n_tweets: 3,
  n_counties: 2,
  time_range: ["2020-03-01T06:00:00Z", "2020-03-06T18:00:00Z"],
  sort_keys: ["party", "popularity", "sentiment", "stance_share", "vividness"],
  timeline_color_features: ["sentiment", "retweet_count", "leaning"],
  map_color_features: ["leaning", "population"],
  gam_features: {
    per_county: ["population", "median_income", "leaning", "care_for"],
    per_tweet: ["retweet_count", "sentiment", "vividness", "care"],
  },
};

export const gamLinearFixture: GamPayload = {
  model: {
    target: "median_income",
    granularity: "per_county",
    n_rows: 35, n_dropped: 1,
    intercept: 12.5, edf: 2.0, rss: 1.25e-12, gcv_score: 3.2e-15,
    lambda: null,
    terms: [{ feature: "population", kind: "linear", lambda: 0.0,
              coefficients: [1.1] }],
  },
  p_values: {
    population: { beta: 2.0, se: 1e-8, t: 2e8, p: 1e-12 },
  },
  p_values_note: null,
  partial_dependence: [
    {
      feature: "population", kind: "linear",
      grid: Array.from({ length: 50 }, (_, i) => 9_000 + i * 1_000),
      values: Array.from({ length: 50 }, (_, i) => (i - 24.5) * 2_000),
      se_band: Array.from({ length: 50 }, () => 10.0),
    },
  ],
};

export const gamSplineFixture: GamPayload = {
  model: {
    ...gamLinearFixture.model,
    terms: [{ feature: "population", kind: "spline", lambda: 0.1,
              coefficients: [0.1, 0.2, 0.3] }],
    lambda: 0.1,
  },
  p_values: null,
  p_values_note:
    "p-values are reported only for all-linear models; spline terms do not carry a calibrated test",
  partial_dependence: [
    {
      feature: "population", kind: "spline",
      grid: Array.from({ length: 50 }, (_, i) => 9_000 + i * 1_000),
      values: Array.from({ length: 50 }, (_, i) => Math.sin(i / 8) * 500),
      se_band: null,
    },
  ],
};

/** Install a fetch stub that routes URLs to fixtures and records calls. */
export function stubFetch(
  overrides: Record<string, unknown> = {},
): { calls: { url: string; body: unknown }[] } {
  const calls: { url: string; body: unknown }[] = [];
  const routes: [RegExp, () => unknown][] = [
    [/\/api\/frames$/, () => framesFixture],
    [/\/api\/meta$/, () => metaFixture],
    [/\/api\/summary/, () => overrides["summary"] ?? summaryFixture],
    [/\/api\/timeline/, () => overrides["timeline"] ?? timelineFixture],
    [/\/api\/map/, () => overrides["map"] ?? mapFixture],
    [/\/api\/gam$/, () => overrides["gam"] ?? gamLinearFixture],
  ];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({
      url,
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    for (const [pattern, supply] of routes) {
      if (pattern.test(url.split("?")[0] ?? url)) {
        const payload = supply();
        if (payload instanceof Error) {
          return new Response(
            JSON.stringify({ code: "bad_request", message: payload.message, detail: null }),
            { status: 400, headers: { "content-type": "application/json" } },
          );
        }
        return new Response(JSON.stringify(payload), {
          status: 200, headers: { "content-type": "application/json" },
        });
      }
    }
    return new Response(
      JSON.stringify({ code: "not_found", message: `no route for ${url}`, detail: null }),
      { status: 404, headers: { "content-type": "application/json" } },
    );
  }) as typeof fetch;
  return { calls };
}
