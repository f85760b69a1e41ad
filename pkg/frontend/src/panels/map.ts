/** Glyph map panel: one distorted-ellipse path per county at the
 * server-resolved position. Click brushes the county; hover shows the
 * county tooltip.
 */

import { clear, divergingColor, el, formatNumber, svg } from "../dom.js";
import type { Store } from "../state.js";
import type { GlyphPayload, MapPayload } from "../types.js";

export function glyphPath(glyph: GlyphPayload): string {
  const [x, y] = glyph.position;
  const hw = glyph.half_width;
  return (
    `M ${x - hw} ${y} ` +
    `A ${hw} ${glyph.upper_radius} 0 0 1 ${x + hw} ${y} ` +
    `A ${hw} ${glyph.lower_radius} 0 0 1 ${x - hw} ${y} Z`
  );
}

function tooltip(glyph: GlyphPayload): string {
  const county = glyph.county;
  return [
    `${county.name} (${county.fips})`,
    `population: ${formatNumber(county.population)}`,
    `leaning: ${formatNumber(county.leaning)}`,
    `tweets: ${county.total_tweets}`,
    `mask usage: ${formatNumber(county.mask_usage)}`,
  ].join("\n");
}

export function renderMap(
  container: HTMLElement,
  payload: MapPayload,
  store: Store,
): void {
  clear(container);
  if (!payload.glyphs.length) {
    container.appendChild(el("p", { class: "empty-note" }, "no counties"));
    return;
  }
  const values = payload.glyphs
    .map((g) => g.color_value)
    .filter((v): v is number => v !== null);
  const lo = values.length ? Math.min(...values) : 0;
  const hi = values.length ? Math.max(...values) : 1;

  const root = svg("svg", {
    class: "map-svg",
    viewBox: `0 0 ${payload.viewport.width} ${payload.viewport.height}`,
    width: String(payload.viewport.width),
    height: String(payload.viewport.height),
  });
  for (const glyph of payload.glyphs) {
    const path = svg("path", {
      class: "glyph",
      "data-fips": glyph.fips,
      d: glyphPath(glyph),
      fill: divergingColor(glyph.color_value, lo, hi),
    });
    const title = svg("title");
    title.textContent = tooltip(glyph);
    path.appendChild(title);
    path.addEventListener("click", () => {
      const current = store.current.brushedFips;
      store.brushFips(current === glyph.fips ? null : glyph.fips);
    });
    root.appendChild(path);
  }
  container.appendChild(root);

  if (!payload.layout.converged) {
    container.appendChild(el(
      "p", { class: "layout-note" },
      `layout did not fully converge (${payload.layout.iterations} iterations)`,
    ));
  }
  applyMapBrush(container, store.current.brushedFips);
}

/** Outline the brushed county's glyph. */
export function applyMapBrush(container: HTMLElement, fips: string | null): void {
  container.querySelectorAll<SVGPathElement>("path.glyph").forEach((path) => {
    path.classList.toggle(
      "brushed",
      fips !== null && path.getAttribute("data-fips") === fips,
    );
  });
}
