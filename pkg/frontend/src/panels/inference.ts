/** Inference panel: model-builder form plus one partial-dependence chart
 * per term. P-values render only for all-linear fits; otherwise the
 * server's explanatory note appears in their place. Fit errors (422) show
 * inline and keep the form state.
 */

import { ApiRequestError } from "../api.js";
import { clear, el, svg } from "../dom.js";
import type {
  GamPayload,
  MetaPayload,
  ModelSpecDraft,
  PartialDependencePayload,
} from "../types.js";

const CHART_W = 260;
const CHART_H = 160;
const PAD = 28;

function pdChart(pd: PartialDependencePayload): SVGElement {
  const root = svg("svg", {
    class: "pd-chart",
    "data-feature": pd.feature,
    viewBox: `0 0 ${CHART_W} ${CHART_H}`,
    width: String(CHART_W),
    height: String(CHART_H),
  });
  const xs = pd.grid;
  const ys = pd.values;
  const first = xs[0];
  const last = xs[xs.length - 1];
  if (first === undefined || last === undefined) return root;
  const bandLo = pd.se_band ? ys.map((v, i) => v - (pd.se_band![i] ?? 0)) : ys;
  const bandHi = pd.se_band ? ys.map((v, i) => v + (pd.se_band![i] ?? 0)) : ys;
  const yLo = Math.min(...bandLo);
  const yHi = Math.max(...bandHi);
  const spanX = last - first || 1;
  const spanY = yHi - yLo || 1;
  const px = (x: number) => PAD + ((x - first) / spanX) * (CHART_W - 2 * PAD);
  const py = (y: number) => CHART_H - PAD - ((y - yLo) / spanY) * (CHART_H - 2 * PAD);

  if (pd.se_band) {
    const upper = xs.map((x, i) => `${px(x)},${py(bandHi[i] ?? 0)}`);
    const lower = xs.map((x, i) => `${px(x)},${py(bandLo[i] ?? 0)}`).reverse();
    root.appendChild(svg("polygon", {
      class: "se-band",
      points: [...upper, ...lower].join(" "),
    }));
  }
  root.appendChild(svg("polyline", {
    class: "pd-line",
    points: xs.map((x, i) => `${px(x)},${py(ys[i] ?? 0)}`).join(" "),
    fill: "none",
  }));
  root.appendChild(svg("text", {
    class: "pd-label", x: String(CHART_W / 2), y: "12", "text-anchor": "middle",
  }, `${pd.feature} (${pd.kind})`));
  root.appendChild(svg("text", {
    class: "pd-tick", x: String(PAD), y: String(CHART_H - 8),
  }, first.toPrecision(3)));
  root.appendChild(svg("text", {
    class: "pd-tick", x: String(CHART_W - PAD), y: String(CHART_H - 8),
    "text-anchor": "end",
  }, last.toPrecision(3)));
  return root;
}

function renderResult(target: HTMLElement, payload: GamPayload): void {
  clear(target);
  const model = payload.model;
  target.appendChild(el(
    "p", { class: "model-stats" },
    `n=${model.n_rows} (dropped ${model.n_dropped}), edf=${model.edf.toFixed(2)}, ` +
    `gcv=${model.gcv_score.toPrecision(4)}` +
    (model.lambda !== null ? `, lambda=${model.lambda.toPrecision(3)}` : ""),
  ));

  if (payload.p_values) {
    const table = el("table", { class: "pvalues" });
    const head = el("tr");
    for (const label of ["term", "slope", "se", "p"]) {
      head.appendChild(el("th", {}, label));
    }
    table.appendChild(head);
    for (const [feature, stats] of Object.entries(payload.p_values)) {
      const row = el("tr", { "data-term": feature });
      row.appendChild(el("td", {}, feature));
      row.appendChild(el("td", {}, stats.beta.toPrecision(4)));
      row.appendChild(el("td", {}, stats.se.toPrecision(4)));
      row.appendChild(el("td", { class: "p-value" }, stats.p.toPrecision(3)));
      table.appendChild(row);
    }
    target.appendChild(table);
  } else if (payload.p_values_note) {
    target.appendChild(el("p", { class: "pvalues-note" }, payload.p_values_note));
  }

  const charts = el("div", { class: "pd-charts" });
  for (const pd of payload.partial_dependence) {
    charts.appendChild(pdChart(pd));
  }
  target.appendChild(charts);
}

export interface InferencePanel {
  root: HTMLElement;
  readSpec: () => ModelSpecDraft | null;
  showResult: (payload: GamPayload) => void;
  showError: (message: string) => void;
}

export function buildInferencePanel(
  container: HTMLElement,
  meta: MetaPayload,
  onSubmit: (spec: ModelSpecDraft) => void,
): InferencePanel {
  clear(container);
  const form = el("form", { class: "model-form" });
  const granularity = el("select", { class: "granularity", name: "granularity" });
  granularity.appendChild(el("option", { value: "per_county" }, "per county"));
  granularity.appendChild(el("option", { value: "per_tweet" }, "per tweet"));

  const target = el("select", { class: "target", name: "target" });
  const termsBox = el("div", { class: "terms" });

  const rebuildFeatureChoices = () => {
    const features = granularity.value === "per_tweet"
      ? meta.gam_features.per_tweet
      : meta.gam_features.per_county;
    clear(target);
    for (const feature of features) {
      target.appendChild(el("option", { value: feature }, feature));
    }
    clear(termsBox);
    for (const feature of features) {
      const label = el("label", { class: "term-choice" });
      const box = el("input", {
        type: "checkbox", value: feature, "data-feature": feature,
      });
      const kind = el("select", { class: "kind", "data-kind-for": feature });
      kind.appendChild(el("option", { value: "linear" }, "linear"));
      kind.appendChild(el("option", { value: "spline" }, "spline"));
      label.appendChild(box);
      label.appendChild(el("span", {}, feature));
      label.appendChild(kind);
      termsBox.appendChild(label);
    }
  };
  rebuildFeatureChoices();
  granularity.addEventListener("change", rebuildFeatureChoices);

  const submit = el("button", { type: "submit", class: "fit-btn" }, "fit model");
  const error = el("p", { class: "fit-error", hidden: "hidden" });
  const result = el("div", { class: "fit-result" });

  form.appendChild(el("label", {}, "granularity "));
  form.appendChild(granularity);
  form.appendChild(el("label", {}, " target "));
  form.appendChild(target);
  form.appendChild(termsBox);
  form.appendChild(submit);
  container.appendChild(form);
  container.appendChild(error);
  container.appendChild(result);

  const readSpec = (): ModelSpecDraft | null => {
    const terms: ModelSpecDraft["terms"] = [];
    termsBox.querySelectorAll<HTMLInputElement>("input[type=checkbox]").forEach(
      (box) => {
        if (!box.checked) return;
        const feature = box.getAttribute("data-feature")!;
        const kindSel = termsBox.querySelector<HTMLSelectElement>(
          `select[data-kind-for="${feature}"]`);
        terms.push({
          feature,
          kind: (kindSel?.value as "linear" | "spline") ?? "linear",
        });
      });
    if (!terms.length) return null;
    return {
      target: target.value,
      terms,
      granularity: granularity.value as ModelSpecDraft["granularity"],
    };
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const spec = readSpec();
    if (!spec) {
      error.hidden = false;
      error.textContent = "pick at least one input term";
      return;
    }
    error.hidden = true;
    onSubmit(spec);
  });

  return {
    root: container,
    readSpec,
    showResult: (payload) => {
      error.hidden = true;
      renderResult(result, payload);
    },
    showError: (message) => {
      error.hidden = false;
      error.textContent = message;
    },
  };
}

export function fitErrorMessage(err: unknown): string {
  if (err instanceof ApiRequestError && err.body) {
    return `${err.body.code}: ${err.body.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
