// Pure derivation of the rendered view from the model tree and the
// session state. No requests, no DOM: given equal inputs this yields
// an equal view, which is what the replay test checks.

import type { ModelTree } from "./modeltree.js";
import { featureDepth, featurePreOrder } from "./modeltree.js";
import type { DecisionJson, Interval } from "./types.js";
import type { SessionState } from "./state.js";
import { intervalsContain, intervalsList } from "./types.js";

export type FeatureFlag =
  | "forced-in"
  | "forced-out"
  | "open"
  | "user-selected"
  | "user-deselected"
  | "pending";

export interface FeatureView {
  name: string;
  depth: number;
  relation: string; // how the feature hangs under its parent, "" for root
  state: FeatureFlag;
  /** Which of select/deselect the user may still do (empty if pending). */
  selectable: boolean;
  deselectable: boolean;
  decisionId: number | null;
}

export interface AttributeView {
  name: string;
  owner: string;
  pending: boolean;
  /** Values currently allowed (enabled controls), ascending. */
  allowed: number[];
  /** Hidden entirely when the owner is forced out (domain {0}). */
  hidden: boolean;
  decisionId: number | null;
}

export interface DecisionView {
  id: number;
  variable: string;
  label: string;
}

export interface SessionView {
  epoch: number;
  complete: boolean;
  features: FeatureView[];
  attributes: AttributeView[];
  decisions: DecisionView[];
}

function decisionOn(decisions: DecisionJson[], variable: string): DecisionJson | null {
  // at most one user decision per variable is posted by this client
  for (const d of decisions) {
    if (d.variable === variable) return d;
  }
  return null;
}

function relationLabel(tree: ModelTree, name: string): string {
  const node = tree.features.get(name);
  if (!node || !node.parent) return "";
  const parent = tree.features.get(node.parent);
  for (const rel of parent?.relations ?? []) {
    if (rel.children.includes(name)) return rel.kind;
  }
  return "";
}

function featureFlag(values: Interval[] | undefined,
                     decision: DecisionJson | null): FeatureFlag {
  if (!values) return "pending";
  const has0 = intervalsContain(values, 0);
  const has1 = intervalsContain(values, 1);
  if (decision && decision.restriction.kind === "assign") {
    return decision.restriction.value === 1 ? "user-selected" : "user-deselected";
  }
  if (has1 && !has0) return "forced-in";
  if (has0 && !has1) return "forced-out";
  return "open";
}

export function deriveView(tree: ModelTree, state: SessionState): SessionView {
  const features: FeatureView[] = featurePreOrder(tree).map((name) => {
    const values = state.ready.get(name);
    const decision = decisionOn(state.decisions, name);
    const flag = featureFlag(values, decision);
    return {
      name,
      depth: featureDepth(tree, name),
      relation: relationLabel(tree, name),
      state: flag,
      selectable: !!values && intervalsContain(values, 1) && flag === "open",
      deselectable: !!values && intervalsContain(values, 0) && flag === "open",
      decisionId: decision ? decision.id : null,
    };
  });

  const attributes: AttributeView[] = tree.attributes.map((a) => {
    const values = state.ready.get(a.name);
    const decision = decisionOn(state.decisions, a.name);
    const pending = !values;
    const allowed = values ? intervalsList(values) : [];
    const hidden = !pending && allowed.length === 1 && allowed[0] === 0 &&
      !(a.lo <= 0 && 0 <= a.hi);
    return {
      name: a.name,
      owner: a.owner,
      pending,
      allowed,
      hidden,
      decisionId: decision ? decision.id : null,
    };
  });

  const decisions: DecisionView[] = state.decisions.map((d) => ({
    id: d.id,
    variable: d.variable,
    label: restrictionLabel(d),
  }));

  return {
    epoch: state.epoch,
    complete: state.complete,
    features,
    attributes,
    decisions,
  };
}

function restrictionLabel(d: DecisionJson): string {
  const r = d.restriction;
  if (r.kind === "assign") return `${d.variable} = ${r.value}`;
  if (r.kind === "exclude") return `${d.variable} != ${r.value}`;
  return `${d.variable} in [${r.lo}..${r.hi}]`;
}
