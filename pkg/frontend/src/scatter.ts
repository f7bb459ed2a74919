// SVG scatter plot of an experiment report: one color per group.

import { groupRows, makeScale, type ScatterRow } from "./csv.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const GROUP_COLORS: Record<string, string> = {
  positive: "#2e7d32",
  noise: "#f9a825",
  negative: "#c62828",
};

export function renderScatter(
  container: HTMLElement,
  rows: ScatterRow[],
  width = 460,
  height = 360,
): SVGSVGElement {
  container.textContent = "";
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "scatter");
  if (rows.length === 0) {
    container.appendChild(svg);
    return svg;
  }
  const scale = makeScale(rows, width, height);
  for (const row of rows) {
    const [px, py] = scale.toPx(row.x, row.y);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", px.toFixed(1));
    dot.setAttribute("cy", py.toFixed(1));
    dot.setAttribute("r", row.group === "noise" ? "3.5" : "4.5");
    dot.setAttribute("fill", GROUP_COLORS[row.group] ?? "#555");
    dot.setAttribute("fill-opacity", row.group === "noise" ? "0.65" : "0.9");
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent = `${row.group} ${row.label} (score ${row.score.toFixed(3)})`;
    dot.appendChild(tip);
    svg.appendChild(dot);
  }
  let ly = 18;
  for (const [group, members] of groupRows(rows)) {
    const swatch = document.createElementNS(SVG_NS, "circle");
    swatch.setAttribute("cx", "14");
    swatch.setAttribute("cy", String(ly));
    swatch.setAttribute("r", "5");
    swatch.setAttribute("fill", GROUP_COLORS[group] ?? "#555");
    svg.appendChild(swatch);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", "24");
    label.setAttribute("y", String(ly + 4));
    label.setAttribute("class", "legend");
    label.textContent = `${group} (${members.length})`;
    svg.appendChild(label);
    ly += 18;
  }
  container.appendChild(svg);
  return svg;
}
