/** Summary panel: one row per moral frame with stacked feature bars.
 *
 * Rows are clickable (sets the frame filter); column headers toggle the
 * sort key and direction. Every number drawn comes straight from the
 * server's summary payload.
 */

import { clear, el } from "../dom.js";
import type { Store } from "../state.js";
import type { FrameSummary, SummaryPayload } from "../types.js";

const BAR_WIDTH = 140;

const SORTABLE: { key: string; label: string }[] = [
  { key: "stance_share", label: "stance" },
  { key: "popularity", label: "popularity" },
  { key: "vividness", label: "vividness" },
  { key: "sentiment", label: "sentiment" },
  { key: "party", label: "party" },
];

function stackedBar(
  parts: { value: number; css: string; title: string }[],
): HTMLElement {
  const total = parts.reduce((acc, p) => acc + p.value, 0);
  const bar = el("div", { class: "bar" });
  for (const part of parts) {
    const width = total > 0 ? (part.value / total) * BAR_WIDTH : 0;
    const seg = el("span", {
      class: `seg ${part.css}`,
      style: `width:${width.toFixed(2)}px`,
      title: `${part.title}: ${part.value}`,
    });
    bar.appendChild(seg);
  }
  return bar;
}

function frameRow(summary: FrameSummary, store: Store): HTMLElement {
  const row = el("div", {
    class: "summary-row",
    "data-frame": summary.frame,
    role: "button",
    tabindex: "0",
  });
  if (store.current.selectedFrame === summary.frame) {
    row.classList.add("selected");
  }
  row.appendChild(el("span", { class: "frame-name" },
    `${summary.frame} (${summary.polarity})`));

  // stance bar split by retweet mass, mirroring the panel encoding
  row.appendChild(stackedBar([
    { value: summary.n_for + summary.retweets_for, css: "for", title: "for" },
    {
      value: summary.n_against + summary.retweets_against,
      css: "against",
      title: "against",
    },
  ]));
  row.appendChild(stackedBar([
    { value: summary.vivid_fraction, css: "vivid", title: "vivid share" },
    { value: 1 - summary.vivid_fraction, css: "plain", title: "non-vivid" },
  ]));
  row.appendChild(stackedBar([
    { value: summary.sentiment_counts.positive, css: "pos", title: "positive" },
    { value: summary.sentiment_counts.neutral, css: "neu", title: "neutral" },
    { value: summary.sentiment_counts.negative, css: "neg", title: "negative" },
  ]));
  row.appendChild(stackedBar([
    { value: summary.party_fraction_dem, css: "dem", title: "democratic share" },
    { value: 1 - summary.party_fraction_dem, css: "rep", title: "republican share" },
  ]));
  row.appendChild(el("span", { class: "count" }, String(summary.n_tweets)));

  row.addEventListener("click", () => {
    const current = store.current.selectedFrame;
    store.selectFrame(current === summary.frame ? null : summary.frame);
  });
  return row;
}

export function renderSummary(
  container: HTMLElement,
  payload: SummaryPayload,
  store: Store,
): void {
  clear(container);
  const header = el("div", { class: "summary-header" });
  header.appendChild(el("span", { class: "frame-name" }, "frame"));
  for (const { key, label } of SORTABLE) {
    const btn = el("button", { class: "sort-btn", "data-sort": key }, label);
    if (payload.sort === key) {
      btn.classList.add("active");
      btn.textContent = `${label} ${payload.dir === "asc" ? "↑" : "↓"}`;
    }
    btn.addEventListener("click", () => store.toggleSort(key));
    header.appendChild(btn);
  }
  container.appendChild(header);
  for (const summary of payload.summaries) {
    container.appendChild(frameRow(summary, store));
  }
}
