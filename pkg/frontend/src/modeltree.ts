// Structural reading of model text: just enough of the format to draw
// the feature tree and attribute widgets. Constraint expressions are
// skipped; the server remains the authority on semantics.

export interface RelationNode {
  kind: "mandatory" | "optional" | "or" | "xor";
  children: string[];
}

export interface FeatureNode {
  name: string;
  parent: string | null;
  relations: RelationNode[];
}

export interface AttributeNode {
  name: string;
  owner: string;
  lo: number;
  hi: number;
}

export interface ModelTree {
  root: string;
  features: Map<string, FeatureNode>;
  attributes: AttributeNode[];
}

const ITEM_KEYWORDS = new Set(["feature", "attribute", "constraint"]);

function tokenize(text: string): string[] {
  const noComments = text.replace(/\/\/[^\n]*/g, " ");
  const re = /[A-Za-z][A-Za-z0-9_]*|-?\d+|\.\.|[{}\[\](),:.]|\S/g;
  return noComments.match(re) ?? [];
}

/** Parse the declarations of a model file; throws Error on malformed
 * structure (the server reports precise diagnostics, this is a guard). */
export function parseModelTree(text: string): ModelTree {
  const toks = tokenize(text);
  let i = 0;
  const peek = () => toks[i];
  const next = () => toks[i++];
  const expect = (t: string) => {
    const got = next();
    if (got !== t) throw new Error(`expected '${t}', found '${got ?? "end"}'`);
  };

  const declared: { name: string; relations: RelationNode[] }[] = [];
  const attributes: AttributeNode[] = [];

  while (i < toks.length) {
    const kw = next();
    if (kw === "feature") {
      const name = next();
      expect("{");
      const relations: RelationNode[] = [];
      while (peek() !== "}") {
        const kind = next();
        if (kind === "mandatory" || kind === "optional") {
          relations.push({ kind, children: [next()] });
        } else if (kind === "or" || kind === "xor") {
          expect("{");
          const children = [next()];
          while (peek() === ",") {
            next();
            children.push(next());
          }
          expect("}");
          relations.push({ kind, children });
        } else {
          throw new Error(`unexpected '${kind}' in feature body`);
        }
      }
      expect("}");
      declared.push({ name, relations });
    } else if (kw === "attribute") {
      const owner = next();
      expect(".");
      const name = next();
      expect(":");
      expect("int");
      expect("[");
      const lo = parseInt(next(), 10);
      expect("..");
      const hi = parseInt(next(), 10);
      expect("]");
      attributes.push({ name, owner, lo, hi });
    } else if (kw === "constraint") {
      while (i < toks.length && !ITEM_KEYWORDS.has(peek())) next();
    } else {
      throw new Error(`unexpected top-level token '${kw}'`);
    }
  }

  if (declared.length === 0) throw new Error("no features declared");
  const features = new Map<string, FeatureNode>();
  for (const d of declared) {
    features.set(d.name, { name: d.name, parent: null, relations: d.relations });
  }
  for (const d of declared) {
    for (const rel of d.relations) {
      for (const child of rel.children) {
        if (!features.has(child)) {
          features.set(child, { name: child, parent: d.name, relations: [] });
        } else {
          features.get(child)!.parent = d.name;
        }
      }
    }
  }
  return { root: declared[0].name, features, attributes };
}

/** Feature names in pre-order from the root (render order). */
export function featurePreOrder(tree: ModelTree): string[] {
  const out: string[] = [];
  const walk = (name: string) => {
    out.push(name);
    const node = tree.features.get(name);
    if (!node) return;
    for (const rel of node.relations) {
      for (const child of rel.children) walk(child);
    }
  };
  walk(tree.root);
  return out;
}

export function featureDepth(tree: ModelTree, name: string): number {
  let depth = 0;
  let cur = tree.features.get(name);
  while (cur && cur.parent) {
    depth++;
    cur = tree.features.get(cur.parent);
  }
  return depth;
}
