/**
 * SVG rendering of one feature panel: the shape function drawn as a step
 * function over the bin edges, with the published (noisy) bin counts as a
 * background density bar chart. Bins are drag-editable along y; an overlay
 * series (e.g. a monotonize preview) renders dashed on top.
 */

import type { FeatureEntry } from "./modelFormat.js";

export interface ChartCallbacks {
  /** fired while dragging and once on release with the final value */
  onBinEdit?: (bin: number, value: number, commit: boolean) => void;
  onBinSelect?: (bin: number) => void;
}

const W = 640;
const H = 300;
const PAD = { left: 54, right: 12, top: 10, bottom: 30 };
const SVG_NS = "http://www.w3.org/2000/svg";

interface Layout {
  /** pixel x of the left edge of each bin, plus the trailing right edge */
  xs: number[];
  y: (value: number) => number;
  yInv: (px: number) => number;
  lo: number;
  hi: number;
}

function computeLayout(entry: FeatureEntry, overlay: number[] | null): Layout {
  const values = overlay ? entry.shape.concat(overlay) : entry.shape;
  let lo = Math.min(0, ...values);
  let hi = Math.max(0, ...values);
  if (hi - lo < 1e-12) {
    lo -= 1;
    hi += 1;
  }
  const margin = 0.08 * (hi - lo);
  lo -= margin;
  hi += margin;
  const innerW = W - PAD.left - PAD.right;
  const innerH = H - PAD.top - PAD.bottom;
  const n = entry.shape.length;
  const xs: number[] = [];
  if (entry.kind === "numeric") {
    const edges = entry.edges!;
    const span = edges[edges.length - 1] - edges[0];
    for (const e of edges) xs.push(PAD.left + ((e - edges[0]) / span) * innerW);
  } else {
    for (let i = 0; i <= n; i++) xs.push(PAD.left + (i / n) * innerW);
  }
  return {
    xs,
    y: (v) => PAD.top + ((hi - v) / (hi - lo)) * innerH,
    yInv: (px) => hi - ((px - PAD.top) / innerH) * (hi - lo),
    lo,
    hi,
  };
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string | number>): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function fmt(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 10_000 || a < 0.001)) return v.toExponential(2);
  return String(Math.round(v * 10_000) / 10_000);
}

export function renderChart(
  container: HTMLElement,
  entry: FeatureEntry,
  overlay: number[] | null,
  callbacks: ChartCallbacks = {},
): void {
  container.textContent = "";
  const svg = el("svg", { viewBox: `0 0 ${W} ${H}`, class: "shape-chart" });
  const layout = computeLayout(entry, overlay);
  const n = entry.shape.length;

  // density bars from the published counts (floored at 0 for display only)
  const maxCount = Math.max(1, ...entry.counts);
  const baseY = H - PAD.bottom;
  for (let b = 0; b < n; b++) {
    const h = (Math.max(entry.counts[b], 0) / maxCount) * (H - PAD.top - PAD.bottom) * 0.35;
    svg.appendChild(el("rect", {
      x: layout.xs[b], y: baseY - h, width: Math.max(layout.xs[b + 1] - layout.xs[b] - 1, 1),
      height: h, class: "density-bar",
    }));
  }

  // zero line and y-axis labels
  svg.appendChild(el("line", {
    x1: PAD.left, x2: W - PAD.right, y1: layout.y(0), y2: layout.y(0), class: "zero-line",
  }));
  for (const v of [layout.lo, 0, layout.hi]) {
    const label = el("text", { x: 4, y: layout.y(v) + 4, class: "axis-label" });
    label.textContent = fmt(v);
    svg.appendChild(label);
  }
  // x-axis extent labels
  const xLabels = entry.kind === "numeric"
    ? [fmt(entry.edges![0]), fmt(entry.edges![entry.edges!.length - 1])]
    : [entry.vocabulary![0], entry.vocabulary![n - 1]];
  const left = el("text", { x: PAD.left, y: H - 8, class: "axis-label" });
  left.textContent = xLabels[0];
  const right = el("text", { x: W - PAD.right, y: H - 8, class: "axis-label", "text-anchor": "end" });
  right.textContent = xLabels[1];
  svg.appendChild(left);
  svg.appendChild(right);

  // the step function: one horizontal segment per bin
  const path: string[] = [];
  for (let b = 0; b < n; b++) {
    const y = layout.y(entry.shape[b]);
    path.push(`${b === 0 ? "M" : "L"}${layout.xs[b]},${y}`, `L${layout.xs[b + 1]},${y}`);
  }
  svg.appendChild(el("path", { d: path.join(" "), class: "shape-line" }));

  if (overlay) {
    const op: string[] = [];
    for (let b = 0; b < n; b++) {
      const y = layout.y(overlay[b]);
      op.push(`${b === 0 ? "M" : "L"}${layout.xs[b]},${y}`, `L${layout.xs[b + 1]},${y}`);
    }
    svg.appendChild(el("path", { d: op.join(" "), class: "overlay-line" }));
  }

  // drag handles, one per bin
  for (let b = 0; b < n; b++) {
    const handle = el("rect", {
      x: layout.xs[b], y: 0, width: Math.max(layout.xs[b + 1] - layout.xs[b], 1), height: H,
      class: "bin-hit", "data-bin": b,
    });
    attachDrag(handle, svg, b, layout, callbacks);
    svg.appendChild(handle);
  }

  container.appendChild(svg);
}

function attachDrag(handle: SVGRectElement, svg: SVGSVGElement, bin: number,
                    layout: Layout, callbacks: ChartCallbacks): void {
  let dragging = false;

  const valueAt = (event: PointerEvent): number => {
    const rect = svg.getBoundingClientRect();
    const px = ((event.clientY - rect.top) / rect.height) * H;
    return layout.yInv(px);
  };

  handle.addEventListener("pointerdown", (event) => {
    dragging = true;
    handle.setPointerCapture(event.pointerId);
    callbacks.onBinSelect?.(bin);
  });
  handle.addEventListener("pointermove", (event) => {
    if (dragging) callbacks.onBinEdit?.(bin, valueAt(event), false);
  });
  handle.addEventListener("pointerup", (event) => {
    if (!dragging) return;
    dragging = false;
    callbacks.onBinEdit?.(bin, valueAt(event), true);
  });
}
