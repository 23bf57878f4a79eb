/** Small DOM helpers; no framework. */

type Attrs = Record<string, string | number | boolean | EventListener>;
type Child = Node | string;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: Child[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key.startsWith("on") && typeof value === "function") {
      node.addEventListener(key.slice(2), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, String(value));
    }
  }
  for (const child of children) {
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Percentage cell: fixed two decimals, exact value preserved in title. */
export function pctCell(value: number | null): HTMLElement {
  if (value === null) {
    return el("td", { class: "num undefined-pct", title: "baseline prediction not positive" }, ["n/a"]);
  }
  return el("td", { class: "num", title: String(value) }, [`${value.toFixed(2)}%`]);
}

/** Plain numeric cell, four significant-ish decimals with the exact value in title. */
export function numCell(value: number | null, digits = 4): HTMLElement {
  if (value === null) return el("td", { class: "num" }, ["n/a"]);
  return el("td", { class: "num", title: String(value) }, [value.toFixed(digits)]);
}

export function fmtPct(value: number): string {
  return `${value.toFixed(2)}%`;
}
