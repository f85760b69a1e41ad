/** Timeline panel: stance-split tile stacks per time bin.
 *
 * Geometry (y offsets, heights) is drawn verbatim from the server payload;
 * the client only maps it into screen pixels. Hover shows the tweet
 * tooltip; click brushes the tweet's county.
 */

import { clear, divergingColor, el, sequentialColor, svg } from "../dom.js";
import type { Store } from "../state.js";
import type { TimelinePayload, TimelineTile } from "../types.js";

const WIDTH = 920;
const HEIGHT = 400;
const STRIP_HEIGHT = 10;
const AXIS_GAP = 2;

function tooltipText(payload: TimelinePayload, tile: TimelineTile): string {
  const tweet = payload.tweets[tile.tweet_id];
  if (!tweet) return tile.tweet_id;
  return [
    tweet.text,
    `county: ${tweet.county_name} (${tweet.county_fips})`,
    `frames: ${tweet.frames.join(", ")}`,
    `stance: ${tweet.stance}, retweets: ${tweet.retweet_count}`,
  ].join("\n");
}

export function renderTimeline(
  container: HTMLElement,
  payload: TimelinePayload,
  store: Store,
): void {
  clear(container);
  const tileCount = payload.bins.reduce(
    (acc, b) => acc + b.tiles_above.length + b.tiles_below.length, 0);
  if (!payload.bins.length || tileCount === 0) {
    container.appendChild(el("p", { class: "empty-note" }, "no tweets"));
    return;
  }

  const colorValues = payload.bins.flatMap((b) =>
    [...b.tiles_above, ...b.tiles_below]
      .map((t) => t.color_value)
      .filter((v): v is number => v !== null));
  const colorLo = colorValues.length ? Math.min(...colorValues) : 0;
  const colorHi = colorValues.length ? Math.max(...colorValues) : 1;

  const stackExtent = Math.max(
    1,
    ...payload.bins.map((b) => {
      const top = b.tiles_above.reduce((acc, t) => Math.max(acc, t.y_offset + t.height), 0);
      const bottom = b.tiles_below.reduce((acc, t) => Math.max(acc, t.y_offset + t.height), 0);
      return Math.max(top, bottom);
    }),
  );
  const half = (HEIGHT - STRIP_HEIGHT - 2 * AXIS_GAP) / 2;
  const scale = half / stackExtent;
  const axisY = half + AXIS_GAP;
  const binWidth = WIDTH / payload.bins.length;

  const root = svg("svg", {
    class: "timeline-svg",
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
  });
  root.appendChild(svg("line", {
    class: "axis",
    x1: "0", y1: String(axisY), x2: String(WIDTH), y2: String(axisY),
  }));

  const strips = payload.bins
    .map((b) => b.strip_sentiment_mean)
    .filter((v): v is number => v !== null);
  const stripLo = strips.length ? Math.min(...strips) : -1;
  const stripHi = strips.length ? Math.max(...strips) : 1;

  payload.bins.forEach((bin, index) => {
    const x = index * binWidth;
    const drawSide = (tiles: TimelineTile[], above: boolean) => {
      for (const tile of tiles) {
        const heightPx = tile.height * scale;
        const y = above
          ? axisY - AXIS_GAP - (tile.y_offset + tile.height) * scale
          : axisY + AXIS_GAP + tile.y_offset * scale;
        const tweet = payload.tweets[tile.tweet_id];
        const rect = svg("rect", {
          class: "tile",
          "data-tweet": tile.tweet_id,
          "data-fips": tweet ? tweet.county_fips : "",
          "data-height": String(tile.height),
          x: (x + 1).toFixed(2),
          y: y.toFixed(2),
          width: Math.max(binWidth - 2, 1).toFixed(2),
          height: Math.max(heightPx, 0.75).toFixed(2),
          fill: divergingColor(tile.color_value, colorLo, colorHi),
        });
        const title = svg("title");
        title.textContent = tooltipText(payload, tile);
        rect.appendChild(title);
        rect.addEventListener("click", () => {
          store.brushFips(tweet ? tweet.county_fips : null);
        });
        root.appendChild(rect);
      }
    };
    drawSide(bin.tiles_above, true);
    drawSide(bin.tiles_below, false);

    const strip = svg("rect", {
      class: "strip",
      x: x.toFixed(2),
      y: String(HEIGHT - STRIP_HEIGHT),
      width: binWidth.toFixed(2),
      height: String(STRIP_HEIGHT - 2),
      fill: sequentialColor(bin.strip_sentiment_mean, stripLo, stripHi),
    });
    const title = svg("title");
    title.textContent = bin.strip_sentiment_mean === null
      ? `${bin.start.slice(0, 10)}: no tweets`
      : `${bin.start.slice(0, 10)}: mean sentiment ${bin.strip_sentiment_mean.toFixed(3)}`;
    strip.appendChild(title);
    root.appendChild(strip);
  });

  container.appendChild(root);
  applyTimelineBrush(container, store.current.brushedFips);
}

/** Highlight every tile whose tweet belongs to the brushed county. */
export function applyTimelineBrush(
  container: HTMLElement,
  fips: string | null,
): void {
  container.querySelectorAll<SVGRectElement>("rect.tile").forEach((rect) => {
    rect.classList.toggle(
      "brushed",
      fips !== null && rect.getAttribute("data-fips") === fips,
    );
  });
}
