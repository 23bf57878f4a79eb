/** Comparison view: one violin per method x target, drawn from the report's
 * density curves and quartiles. The view never recomputes statistics; it
 * scales served curves into the viewbox and prints served numbers.
 */

import { clear, el, fmtPct } from "../dom.js";
import type { UiState } from "../state.js";
import type { CellDoc, DensityDoc } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const W = 120;
const H = 160;
const HALF = 28;

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

/** Mirror the density curve around a vertical axis; y spans the error grid. */
function violinSvg(density: DensityDoc): SVGElement {
  const { grid, density: values } = density;
  const lo = grid[0];
  const hi = grid[grid.length - 1];
  const span = hi - lo || 1;
  const peak = Math.max(...values) || 1;
  let argmax = 0;
  for (let i = 1; i < values.length; i++) if (values[i] > values[argmax]) argmax = i;

  const y = (g: number) => H - ((g - lo) / span) * H;
  const x = (v: number) => (v / peak) * HALF;

  const right = grid.map((g, i) => `${(W / 2 + x(values[i])).toFixed(2)},${y(g).toFixed(2)}`);
  const left = grid
    .slice()
    .reverse()
    .map((g, i) => {
      const v = values[values.length - 1 - i];
      return `${(W / 2 - x(v)).toFixed(2)},${y(g).toFixed(2)}`;
    });

  const svg = svgEl("svg", {
    class: "violin",
    width: String(W),
    height: String(H),
    viewBox: `0 0 ${W} ${H}`,
    "data-argmax-grid": String(grid[argmax]),
  });
  svg.append(svgEl("polygon", { class: "violin-body", points: [...right, ...left].join(" ") }));
  for (const [cls, q] of [
    ["quartile q1", density.quartiles.q1],
    ["quartile median", density.quartiles.median],
    ["quartile q3", density.quartiles.q3],
  ] as const) {
    svg.append(
      svgEl("line", {
        class: cls,
        x1: String(W / 2 - HALF),
        x2: String(W / 2 + HALF),
        y1: y(q).toFixed(2),
        y2: y(q).toFixed(2),
        "data-value": String(q),
      }),
    );
  }
  return svg;
}

function cellBox(cell: CellDoc): HTMLElement {
  const box = el("div", { class: "violin-cell", "data-method": cell.method, "data-target": cell.target });
  if (cell.error !== null) {
    box.append(el("p", { class: "cell-failed" }, [`failed: ${cell.error}`]));
    return box;
  }
  if (cell.density) box.append(violinSvg(cell.density));
  const q = cell.quartiles;
  box.append(
    el("p", { class: "cell-stats" }, [
      el("span", { class: "cell-mean", title: String(cell.mean) }, [
        `mean ${cell.mean === null ? "n/a" : fmtPct(cell.mean)}`,
      ]),
      el(
        "span",
        { class: "cell-quartiles", title: q ? `${q.q1} / ${q.median} / ${q.q3}` : "" },
        q ? [` q1 ${fmtPct(q.q1)} med ${fmtPct(q.median)} q3 ${fmtPct(q.q3)}`] : [""],
      ),
      el("span", { class: "cell-n" }, [` n=${cell.n_test}`]),
    ]),
  );
  return box;
}

export function renderComparison(root: HTMLElement, state: UiState): void {
  clear(root);
  root.append(el("h2", {}, ["method comparison"]));
  if (!state.report) {
    root.append(el("p", { class: "placeholder" }, ["run a comparison to see per-method error violins"]));
    return;
  }
  const report = state.report;
  root.append(
    el("p", { class: "report-meta" }, [
      `dataset ${report.dataset_id}, seed ${report.split.seed}, ` +
        `${report.split.train_indices.length} train / ${report.split.test_indices.length} test`,
    ]),
  );
  const header = el("tr", {}, [
    el("th", {}, ["target"]),
    ...report.methods.map((m) => el("th", { class: "method-head" }, [m])),
  ]);
  const rows = report.targets.map((t) =>
    el("tr", { "data-target": t }, [
      el("td", {}, [t]),
      ...report.methods.map((m) => {
        const td = el("td", {});
        td.append(cellBox(report.cells[m][t]));
        return td;
      }),
    ]),
  );
  root.append(el("table", { class: "comparison-grid" }, [header, ...rows]));
}
