/** Wires the four panels to the API and the shared state store.
 *
 * Panels refetch when the state they depend on changes; every fetch is
 * guarded by the store's sequence numbers so stale responses are dropped.
 * Brushing never refetches: it only toggles highlight classes, so a page
 * refresh restores an unbrushed view.
 */

import { ApiClient, resolveBaseUrl } from "./api.js";
import { clear, el } from "./dom.js";
import { buildGlyphLegend } from "./legend.js";
import {
  buildInferencePanel,
  fitErrorMessage,
  type InferencePanel,
} from "./panels/inference.js";
import { applyMapBrush, renderMap } from "./panels/map.js";
import { renderSummary } from "./panels/summary.js";
import { applyTimelineBrush, renderTimeline } from "./panels/timeline.js";
import { Store } from "./state.js";

export interface AppHandles {
  store: Store;
  client: ApiClient;
  refreshAll: () => Promise<void>;
}

function panelError(container: HTMLElement, message: string): void {
  clear(container);
  container.appendChild(el("p", { class: "panel-error" }, message));
}

export async function startApp(
  root: HTMLElement,
  client: ApiClient,
): Promise<AppHandles> {
  const store = new Store();

  const banner = el("div", { class: "error-banner", hidden: "hidden" });
  const summaryBox = el("section", { class: "panel summary-panel", id: "summary" });
  const timelineBox = el("section", { class: "panel timeline-panel", id: "timeline" });
  const mapBox = el("section", { class: "panel map-panel", id: "map" });
  const inferenceBox = el("section", {
    class: "panel inference-panel", id: "inference",
  });
  const legendBox = el("aside", { class: "legend-box" });
  legendBox.appendChild(buildGlyphLegend());

  root.appendChild(banner);
  for (const [box, title] of [
    [summaryBox, "frame summary"],
    [timelineBox, "timeline"],
    [mapBox, "county map"],
    [inferenceBox, "inference"],
  ] as const) {
    const wrap = el("div", { class: "panel-wrap" });
    wrap.appendChild(el("h2", {}, title));
    wrap.appendChild(box);
    root.appendChild(wrap);
  }
  root.appendChild(legendBox);

  const showBanner = (message: string) => {
    banner.hidden = false;
    banner.textContent = message;
  };

  const refreshSummary = async () => {
    const seq = store.nextSequence("summary");
    const { sortKey, sortDir } = store.current;
    try {
      const payload = await client.summary(sortKey, sortDir);
      if (!store.isCurrent("summary", seq)) return;
      renderSummary(summaryBox, payload, store);
    } catch (err) {
      if (!store.isCurrent("summary", seq)) return;
      summaryBox.classList.add("stale");
      showBanner(`summary fetch failed: ${fitErrorMessage(err)}`);
    }
  };

  const refreshTimeline = async () => {
    const seq = store.nextSequence("timeline");
    const { selectedFrame, colorFeature } = store.current;
    try {
      const payload = await client.timeline(selectedFrame, colorFeature);
      if (!store.isCurrent("timeline", seq)) return;
      timelineBox.classList.remove("stale");
      renderTimeline(timelineBox, payload, store);
    } catch (err) {
      if (!store.isCurrent("timeline", seq)) return;
      timelineBox.classList.add("stale");
      panelError(timelineBox, `timeline unavailable: ${fitErrorMessage(err)}`);
    }
  };

  const refreshMap = async () => {
    const seq = store.nextSequence("map");
    const { selectedFrame, mapColorFeature } = store.current;
    try {
      const payload = await client.map(selectedFrame, mapColorFeature);
      if (!store.isCurrent("map", seq)) return;
      mapBox.classList.remove("stale");
      store.setKnownFips(payload.glyphs.map((g) => g.fips));
      renderMap(mapBox, payload, store);
    } catch (err) {
      if (!store.isCurrent("map", seq)) return;
      mapBox.classList.add("stale");
      panelError(mapBox, `map unavailable: ${fitErrorMessage(err)}`);
    }
  };

  let inference: InferencePanel | null = null;
  const submitModel = async (spec: Parameters<ApiClient["fitModel"]>[0]) => {
    const seq = store.nextSequence("gam");
    try {
      const payload = await client.fitModel(spec);
      if (!store.isCurrent("gam", seq)) return;
      inference?.showResult(payload);
    } catch (err) {
      if (!store.isCurrent("gam", seq)) return;
      inference?.showError(fitErrorMessage(err));
    }
  };

  store.subscribe((_state, changed) => {
    if (changed.has("selectedFrame")) {
      void refreshSummary();
      void refreshTimeline();
      void refreshMap();
    }
    if (changed.has("sortKey") || changed.has("sortDir")) {
      void refreshSummary();
    }
    if (changed.has("colorFeature")) {
      void refreshTimeline();
    }
    if (changed.has("mapColorFeature")) {
      void refreshMap();
    }
    if (changed.has("brushedFips")) {
      applyTimelineBrush(timelineBox, _state.brushedFips);
      applyMapBrush(mapBox, _state.brushedFips);
    }
  });

  const refreshAll = async () => {
    await Promise.all([refreshSummary(), refreshTimeline(), refreshMap()]);
  };

  try {
    const [frames, meta] = await Promise.all([client.frames(), client.meta()]);
    store.setKnownFrames(frames.map((f) => f.name));
    inference = buildInferencePanel(inferenceBox, meta, (spec) => {
      void submitModel(spec);
    });
  } catch (err) {
    showBanner(`could not reach the analytics API: ${fitErrorMessage(err)}`);
    panelError(inferenceBox, "inference unavailable");
  }
  await refreshAll();
  return { store, client, refreshAll };
}

export function bootstrapFromDocument(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const client = new ApiClient(resolveBaseUrl(window.location));
  void startApp(root, client);
}
