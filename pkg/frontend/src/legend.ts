/** Always-available explanation of the map glyph encoding. */

import { el, svg } from "./dom.js";

export function buildGlyphLegend(): HTMLElement {
  const box = el("details", { class: "glyph-legend", open: "open" });
  box.appendChild(el("summary", {}, "glyph legend"));

  const diagram = svg("svg", {
    class: "legend-svg", viewBox: "0 0 260 120", width: "260", height: "120",
  });
  diagram.appendChild(svg("path", {
    d: "M 60 60 A 50 34 0 0 1 160 60 A 50 16 0 0 1 60 60 Z",
    class: "legend-glyph",
  }));
  diagram.appendChild(svg("line", {
    x1: "60", y1: "60", x2: "160", y2: "60", class: "legend-axis",
  }));
  diagram.appendChild(svg("text", { x: "110", y: "14", "text-anchor": "middle" },
    "upper radius: tweets for"));
  diagram.appendChild(svg("text", { x: "110", y: "104", "text-anchor": "middle" },
    "lower radius: tweets against"));
  diagram.appendChild(svg("text", { x: "200", y: "64" }, "width:"));
  diagram.appendChild(svg("text", { x: "200", y: "78" }, "population"));
  box.appendChild(diagram);
  box.appendChild(el(
    "p", { class: "legend-note" },
    "color encodes the selected county feature; click a glyph to brush its county",
  ));
  return box;
}
