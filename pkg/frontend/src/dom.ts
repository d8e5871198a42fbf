// DOM projection of a SessionView. Deliberately dumb: wipe and rebuild
// on every state change; all intelligence lives in view.ts.

import type { AttributeView, FeatureView, SessionView } from "./view.js";

export interface Handlers {
  toggleFeature(name: string, want: number): void;
  setAttribute(name: string, value: number): void;
  setAttributeRange(name: string, lo: number, hi: number): void;
  retract(decisionId: number): void;
}

const FLAG_LABEL: Record<string, string> = {
  "forced-in": "forced in",
  "forced-out": "forced out",
  "user-selected": "selected",
  "user-deselected": "deselected",
  "open": "",
  "pending": "computing…",
};

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, cls?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function featureRow(f: FeatureView, h: Handlers): HTMLElement {
  const row = el("div", `feature state-${f.state}`);
  row.style.paddingLeft = `${f.depth * 1.4}rem`;
  row.dataset.feature = f.name;

  const box = el("input") as HTMLInputElement;
  box.type = "checkbox";
  box.checked = f.state === "forced-in" || f.state === "user-selected";
  box.indeterminate = f.state === "open" || f.state === "pending";
  // enabled only when the server's Ready domain still offers a choice
  box.disabled = !(f.selectable || f.deselectable);
  box.addEventListener("change", () => {
    if (f.selectable || f.deselectable) {
      h.toggleFeature(f.name, box.checked ? 1 : 0);
    }
  });
  row.append(box);

  row.append(el("span", "name", f.name));
  if (f.relation) row.append(el("span", "relation", f.relation));
  const flag = FLAG_LABEL[f.state];
  if (flag) {
    row.append(el("span", `badge badge-${f.state}`, flag));
  }
  return row;
}

function attributeRow(a: AttributeView, h: Handlers): HTMLElement {
  const row = el("div", a.pending ? "attribute pending" : "attribute");
  row.dataset.attribute = a.name;
  row.append(el("span", "name", `${a.owner}.${a.name}`));
  if (a.pending) {
    row.append(el("span", "badge badge-pending", "computing…"));
    return row;
  }
  if (a.hidden) {
    row.append(el("span", "badge", "owner not selected"));
    return row;
  }
  const select = valueSelect(a.allowed, "—");
  select.disabled = a.allowed.length <= 1;
  select.addEventListener("change", () => {
    if (select.value !== "") h.setAttribute(a.name, Number(select.value));
  });
  row.append(select);

  if (a.allowed.length > 1) {
    // alternatively restrict to a sub-range of the allowed values
    const lo = valueSelect(a.allowed, "min");
    const hi = valueSelect(a.allowed, "max");
    const apply = el("button", "range-apply", "limit") as HTMLButtonElement;
    apply.addEventListener("click", () => {
      if (lo.value !== "" && hi.value !== "" &&
          Number(lo.value) <= Number(hi.value)) {
        h.setAttributeRange(a.name, Number(lo.value), Number(hi.value));
      }
    });
    row.append(lo, hi, apply);
  }
  return row;
}

function valueSelect(allowed: number[], blankLabel: string): HTMLSelectElement {
  const select = el("select") as HTMLSelectElement;
  const blank = el("option", undefined, blankLabel) as HTMLOptionElement;
  blank.value = "";
  select.append(blank);
  for (const v of allowed) {
    const opt = el("option", undefined, String(v)) as HTMLOptionElement;
    opt.value = String(v);
    select.append(opt);
  }
  return select;
}

export function render(root: HTMLElement, view: SessionView, h: Handlers): void {
  root.replaceChildren();

  const status = el("div", "statusbar");
  status.append(el("span", "epoch", `epoch ${view.epoch}`));
  status.append(el("span", view.complete ? "done" : "busy",
                   view.complete ? "consequences ready" : "computing…"));
  root.append(status);

  const tree = el("div", "tree");
  for (const f of view.features) tree.append(featureRow(f, h));
  root.append(tree);

  if (view.attributes.length) {
    const attrs = el("div", "attributes");
    attrs.append(el("h3", undefined, "Attributes"));
    for (const a of view.attributes) attrs.append(attributeRow(a, h));
    root.append(attrs);
  }

  const list = el("div", "decisions");
  list.append(el("h3", undefined, "Decisions"));
  if (!view.decisions.length) {
    list.append(el("p", "empty", "none yet"));
  }
  for (const d of view.decisions) {
    const row = el("div", "decision");
    row.append(el("span", undefined, d.label));
    const btn = el("button", "retract", "retract") as HTMLButtonElement;
    btn.addEventListener("click", () => h.retract(d.id));
    row.append(btn);
    list.append(row);
  }
  root.append(list);
}

export function renderError(root: HTMLElement, message: string): void {
  root.replaceChildren(el("div", "error-banner", message));
}
