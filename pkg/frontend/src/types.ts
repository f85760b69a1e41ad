/** Payload shapes mirroring the analytics server's JSON responses. */

export interface FrameDescriptor {
  name: string;
  polarity: "virtue" | "vice";
  pair_id: number;
}

export interface SentimentCounts {
  positive: number;
  neutral: number;
  negative: number;
}

export interface FrameSummary {
  frame: string;
  polarity: "virtue" | "vice";
  pair_id: number;
  n_tweets: number;
  n_for: number;
  n_against: number;
  retweets_for: number;
  retweets_against: number;
  vivid_fraction: number;
  sentiment_counts: SentimentCounts;
  party_fraction_dem: number;
}

export interface SummaryPayload {
  sort: string | null;
  dir: string | null;
  summaries: FrameSummary[];
}

export interface TimelineTile {
  tweet_id: string;
  y_offset: number;
  height: number;
  color_value: number | null;
}

export interface TimelineBin {
  start: string;
  end: string;
  strip_sentiment_mean: number | null;
  tiles_above: TimelineTile[];
  tiles_below: TimelineTile[];
}

export interface TweetDetail {
  id: string;
  timestamp: string;
  text: string;
  retweet_count: number;
  stance: "for" | "against";
  vividness: boolean;
  frames: string[];
  county_fips: string;
  county_name: string;
  sentiment_score: number | null;
  sentiment_class: string | null;
}

export interface TimelinePayload {
  frame: string | null;
  color_feature: string;
  bin_width_days: number | null;
  bins: TimelineBin[];
  tweets: Record<string, TweetDetail>;
}

export interface CountyDetail {
  fips: string;
  name: string;
  population: number | null;
  dem_votes: number | null;
  rep_votes: number | null;
  median_income: number | null;
  mask_usage: number | null;
  leaning: number | null;
  covid_rate: number | null;
  total_tweets: number;
}

export interface GlyphPayload {
  fips: string;
  anchor: [number, number];
  position: [number, number];
  half_width: number;
  upper_radius: number;
  lower_radius: number;
  color_value: number | null;
  county: CountyDetail;
}

export interface MapPayload {
  frame: string | null;
  color_feature: string;
  viewport: { width: number; height: number };
  layout: {
    iterations: number;
    converged: boolean;
    residual_penetration: number;
    total_displacement: number;
  };
  glyphs: GlyphPayload[];
}

export interface TermStats {
  beta: number;
  se: number;
  t: number;
  p: number;
}

export interface PartialDependencePayload {
  feature: string;
  kind: "linear" | "spline";
  grid: number[];
  values: number[];
  se_band: number[] | null;
}

export interface GamPayload {
  model: {
    target: string;
    granularity: string;
    n_rows: number;
    n_dropped: number;
    intercept: number;
    edf: number;
    rss: number;
    gcv_score: number;
    lambda: number | null;
    terms: { feature: string; kind: string; lambda: number; coefficients: number[] }[];
  };
  p_values: Record<string, TermStats> | null;
  p_values_note: string | null;
  partial_dependence: PartialDependencePayload[];
}

export interface MetaPayload {
  topic_label: string;
  n_tweets: number;
  n_counties: number;
  time_range: [string, string] | null;
  sort_keys: string[];
  timeline_color_features: string[];
  map_color_features: string[];
  gam_features: { per_county: string[]; per_tweet: string[] };
}

export interface ApiError {
  code: string;
  message: string;
  detail: unknown;
}

export interface ModelSpecDraft {
  target: string;
  terms: { feature: string; kind: "linear" | "spline" }[];
  granularity: "per_county" | "per_tweet";
}
