/** Tiny DOM/SVG builders; no framework, panels draw directly. */

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export function svg(
  tag: string,
  attrs: Record<string, string> = {},
  text?: string,
): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Diverging blue -> gray -> red ramp over [lo, hi]; gray for null. */
export function divergingColor(
  value: number | null,
  lo: number,
  hi: number,
): string {
  if (value === null || !isFinite(value)) return "#b5b5b5";
  const t = hi <= lo ? 0.5 : Math.min(1, Math.max(0, (value - lo) / (hi - lo)));
  const r = Math.round(42 + t * (198 - 42));
  const g = Math.round(98 + (0.5 - Math.abs(t - 0.5)) * 60);
  const b = Math.round(198 + t * (42 - 198));
  return `rgb(${r},${g},${b})`;
}

/** Sequential light -> dark ramp for magnitudes (e.g. sentiment strip). */
export function sequentialColor(
  value: number | null,
  lo: number,
  hi: number,
): string {
  if (value === null || !isFinite(value)) return "#e8e8e8";
  const t = hi <= lo ? 0.5 : Math.min(1, Math.max(0, (value - lo) / (hi - lo)));
  const shade = Math.round(235 - t * 180);
  return `rgb(${shade},${shade},${Math.min(255, shade + 20)})`;
}

export function formatNumber(value: number | null, digits = 3): string {
  if (value === null) return "n/a";
  if (Number.isInteger(value)) return String(value);
  return value.toPrecision(digits);
}
