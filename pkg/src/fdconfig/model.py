"""Extended feature models: data types, text format, validation.

A model is a tree of features (mandatory/optional edges, or/xor groups)
plus bounded integer attributes owned by features and cross-tree
constraint expressions. Models are immutable after construction and
safely shareable across threads.

Feature ids are their names; attribute ids are their bare names (unique
across the whole model) and are written qualified as Owner.name in the
text format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ParseError

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

MAX_ATTR_DOMAIN = 1_000_000
MAX_EXPR_DEPTH = 64

KEYWORDS = {
    "feature", "mandatory", "optional", "or", "xor",
    "attribute", "constraint", "int", "true", "false",
}


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class FeatureRef:
    """A feature used in an expression; 0/1 valued, usable in both
    integer and Boolean positions."""

    feature: str


@dataclass(frozen=True)
class AttrRef:
    attr: str


@dataclass(frozen=True)
class Add:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Sub:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Mul:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Neg:
    a: "Expr"


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Not:
    a: "Expr"


@dataclass(frozen=True)
class And:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Or:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Implies:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Iff:
    a: "Expr"
    b: "Expr"


Expr = Union[IntLit, BoolLit, FeatureRef, AttrRef, Add, Sub, Mul, Neg,
             Cmp, Not, And, Or, Implies, Iff]


def expr_depth(e: Expr) -> int:
    if isinstance(e, (IntLit, BoolLit, FeatureRef, AttrRef)):
        return 1
    if isinstance(e, (Neg, Not)):
        return 1 + expr_depth(e.a)
    return 1 + max(expr_depth(e.a), expr_depth(e.b))


# --------------------------------------------------------------------------
# Model structure


@dataclass(frozen=True)
class Relation:
    """One child relation of a feature: a mandatory/optional edge
    (one child) or an or/xor group (>= 2 children)."""

    kind: str  # mandatory | optional | or | xor
    children: tuple[str, ...]


@dataclass(frozen=True)
class Feature:
    id: str
    name: str
    parent: Optional[str]
    relations: tuple[Relation, ...] = ()


@dataclass(frozen=True)
class Attribute:
    id: str
    owner: str
    name: str
    lo: int
    hi: int


@dataclass
class FeatureModel:
    root: str
    features: dict[str, Feature]
    attributes: dict[str, Attribute]
    cross_constraints: tuple[Expr, ...]

    def feature_order(self) -> list[str]:
        """Feature names in pre-order from the root (declaration order of
        relations breaks ties). The canonical variable order."""
        out: list[str] = []
        stack = [self.root]
        while stack:
            f = stack.pop()
            out.append(f)
            rels = self.features[f].relations
            kids = [c for rel in rels for c in rel.children]
            stack.extend(reversed(kids))
        return out

    def variable_names(self) -> list[str]:
        """Features in pre-order, then attributes in declaration order."""
        return self.feature_order() + list(self.attributes)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: str = ""

    def __str__(self):
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.code}: {self.message}{loc}"


# --------------------------------------------------------------------------
# Tokenizer

_SYMBOLS = ("<=>", "=>", "&&", "||", "!=", "<=", ">=", "..",
            "{", "}", "[", "]", "(", ")", ",", ":", ".", "=", "<", ">",
            "+", "-", "*", "!")


@dataclass(frozen=True)
class _Tok:
    kind: str  # name | int | sym | kw | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "name"
            toks.append(_Tok(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(_Tok("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        # declaration site and body of each declared feature
        self.decls: dict[str, tuple[list[Relation], _Tok]] = {}
        self.decl_order: list[str] = []
        self.attrs: dict[str, Attribute] = {}
        self.attr_toks: dict[str, _Tok] = {}
        self.constraints: list[tuple[Expr, _Tok]] = []
        # attribute refs seen in expressions: (owner, name, token)
        self.attr_refs: list[tuple[str, str, _Tok]] = []
        self.feature_refs: list[tuple[str, _Tok]] = []

    # token helpers

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok: Optional[_Tok] = None):
        t = tok or self.peek()
        raise ParseError(msg, t.line, t.col)

    def expect_sym(self, sym: str) -> _Tok:
        t = self.peek()
        if t.kind != "sym" or t.text != sym:
            self.fail(f"expected {sym!r}, found {t.text!r}" if t.kind != "eof"
                      else f"expected {sym!r}, found end of input")
        return self.next()

    def expect_kw(self, kw: str) -> _Tok:
        t = self.peek()
        if t.kind != "kw" or t.text != kw:
            self.fail(f"expected keyword {kw!r}")
        return self.next()

    def expect_name(self) -> _Tok:
        t = self.peek()
        if t.kind != "name":
            if t.kind == "kw":
                self.fail(f"{t.text!r} is a keyword and cannot be used as a name")
            self.fail("expected a name")
        return self.next()

    def at_sym(self, sym: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == sym

    def at_kw(self, kw: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text == kw

    # grammar

    def parse(self) -> FeatureModel:
        while self.peek().kind != "eof":
            t = self.peek()
            if self.at_kw("feature"):
                self.feature_decl()
            elif self.at_kw("attribute"):
                self.attr_decl()
            elif self.at_kw("constraint"):
                self.constraint_decl()
            else:
                self.fail(f"expected a declaration, found {t.text!r}")
        return self.build()

    def feature_decl(self):
        self.expect_kw("feature")
        name_tok = self.expect_name()
        if name_tok.text in self.decls:
            self.fail(f"duplicate feature declaration {name_tok.text!r}", name_tok)
        self.expect_sym("{")
        rels: list[Relation] = []
        while not self.at_sym("}"):
            rels.append(self.child_rel())
        self.expect_sym("}")
        self.decls[name_tok.text] = (rels, name_tok)
        self.decl_order.append(name_tok.text)

    def child_rel(self) -> Relation:
        t = self.peek()
        if self.at_kw("mandatory") or self.at_kw("optional"):
            self.next()
            child = self.expect_name()
            return Relation(t.text, (child.text,))
        if self.at_kw("or") or self.at_kw("xor"):
            self.next()
            self.expect_sym("{")
            names = [self.expect_name()]
            self.expect_sym(",")
            names.append(self.expect_name())
            while self.at_sym(","):
                self.next()
                names.append(self.expect_name())
            self.expect_sym("}")
            seen = set()
            for nt in names:
                if nt.text in seen:
                    self.fail(f"duplicate child {nt.text!r} in group", nt)
                seen.add(nt.text)
            return Relation(t.text, tuple(n.text for n in names))
        self.fail("expected 'mandatory', 'optional', 'or' or 'xor'")

    def attr_decl(self):
        self.expect_kw("attribute")
        owner = self.expect_name()
        self.expect_sym(".")
        name = self.expect_name()
        self.expect_sym(":")
        self.expect_kw("int")
        self.expect_sym("[")
        lo = self.signed_int()
        self.expect_sym("..")
        hi = self.signed_int()
        self.expect_sym("]")
        if name.text in self.attrs:
            self.fail(f"duplicate attribute name {name.text!r}", name)
        if lo > hi:
            self.fail(f"empty attribute domain [{lo}..{hi}]", name)
        if hi - lo + 1 > MAX_ATTR_DOMAIN:
            self.fail(f"attribute domain larger than {MAX_ATTR_DOMAIN} values", name)
        self.attrs[name.text] = Attribute(name.text, owner.text, name.text, lo, hi)
        self.attr_toks[name.text] = owner

    def signed_int(self) -> int:
        sign = 1
        if self.at_sym("-"):
            self.next()
            sign = -1
        t = self.peek()
        if t.kind != "int":
            self.fail("expected an integer")
        self.next()
        return sign * int(t.text)

    def constraint_decl(self):
        tok = self.expect_kw("constraint")
        expr, sort = self.iff_expr()
        if sort == "int":
            self.fail("constraint must be a Boolean expression", tok)
        if expr_depth(expr) > MAX_EXPR_DEPTH:
            self.fail(f"expression deeper than {MAX_EXPR_DEPTH}", tok)
        self.constraints.append((expr, tok))

    # expressions: each parse method returns (node, sort) where sort is
    # 'int', 'bool' or 'feat' (feature refs bridge both worlds)

    def require_bool(self, sort: str, tok: _Tok):
        if sort == "int":
            self.fail("expected a Boolean expression, found an integer one", tok)

    def require_int(self, sort: str, tok: _Tok):
        if sort == "bool":
            self.fail("expected an integer expression, found a Boolean one", tok)

    def iff_expr(self):
        node, sort = self.impl_expr()
        while self.at_sym("<=>"):
            op = self.next()
            self.require_bool(sort, op)
            rhs, rsort = self.impl_expr()
            self.require_bool(rsort, op)
            node, sort = Iff(node, rhs), "bool"
        return node, sort

    def impl_expr(self):
        node, sort = self.or_expr()
        if self.at_sym("=>"):
            op = self.next()
            self.require_bool(sort, op)
            rhs, rsort = self.impl_expr()  # right-assoc
            self.require_bool(rsort, op)
            return Implies(node, rhs), "bool"
        return node, sort

    def or_expr(self):
        node, sort = self.and_expr()
        while self.at_sym("||"):
            op = self.next()
            self.require_bool(sort, op)
            rhs, rsort = self.and_expr()
            self.require_bool(rsort, op)
            node, sort = Or(node, rhs), "bool"
        return node, sort

    def and_expr(self):
        node, sort = self.not_expr()
        while self.at_sym("&&"):
            op = self.next()
            self.require_bool(sort, op)
            rhs, rsort = self.not_expr()
            self.require_bool(rsort, op)
            node, sort = And(node, rhs), "bool"
        return node, sort

    def not_expr(self):
        if self.at_sym("!"):
            op = self.next()
            node, sort = self.not_expr()
            self.require_bool(sort, op)
            return Not(node), "bool"
        return self.cmp_expr()

    def cmp_expr(self):
        node, sort = self.sum_expr()
        t = self.peek()
        if t.kind == "sym" and t.text in ("=", "!=", "<", "<=", ">", ">="):
            op = self.next()
            self.require_int(sort, op)
            rhs, rsort = self.sum_expr()
            self.require_int(rsort, op)
            return Cmp(op.text, node, rhs), "bool"
        return node, sort

    def sum_expr(self):
        node, sort = self.term_expr()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.next()
            self.require_int(sort, op)
            rhs, rsort = self.term_expr()
            self.require_int(rsort, op)
            node = Add(node, rhs) if op.text == "+" else Sub(node, rhs)
            sort = "int"
        return node, sort

    def term_expr(self):
        node, sort = self.factor_expr()
        while self.at_sym("*"):
            op = self.next()
            self.require_int(sort, op)
            rhs, rsort = self.factor_expr()
            self.require_int(rsort, op)
            node, sort = Mul(node, rhs), "int"
        return node, sort

    def factor_expr(self):
        if self.at_sym("-"):
            op = self.next()
            node, sort = self.factor_expr()
            self.require_int(sort, op)
            if isinstance(node, IntLit):  # fold so -5 round-trips
                return IntLit(-node.value), "int"
            return Neg(node), "int"
        return self.primary_expr()

    def primary_expr(self):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text)), "int"
        if t.kind == "kw" and t.text in ("true", "false"):
            self.next()
            return BoolLit(t.text == "true"), "bool"
        if t.kind == "sym" and t.text == "(":
            self.next()
            node, sort = self.iff_expr()
            self.expect_sym(")")
            return node, sort
        if t.kind == "name":
            self.next()
            if self.at_sym("."):
                self.next()
                attr = self.expect_name()
                self.attr_refs.append((t.text, attr.text, t))
                return AttrRef(attr.text), "int"
            self.feature_refs.append((t.text, t))
            return FeatureRef(t.text), "feat"
        self.fail(f"expected an expression, found {t.text!r}"
                  if t.kind != "eof" else "expected an expression, found end of input")

    # model assembly and static checks

    def build(self) -> FeatureModel:
        if not self.decl_order:
            raise ParseError("model must declare at least one feature", 1, 1)
        root = self.decl_order[0]

        parents: dict[str, str] = {}
        known: dict[str, _Tok] = {name: tok for name, (_, tok) in self.decls.items()}
        for name, (rels, _) in self.decls.items():
            for rel in rels:
                for child in rel.children:
                    ct = self._child_tok(name, rel, child)
                    if child == root:
                        self.fail(f"duplicate use of root feature {child!r} as a child", ct)
                    if child == name:
                        self.fail(f"feature {child!r} cannot be its own child", ct)
                    if child in parents:
                        self.fail(f"feature {child!r} already has a parent "
                                  f"({parents[child]!r})", ct)
                    parents[child] = name
                    known.setdefault(child, ct)

        for name, (_, tok) in self.decls.items():
            if name != root and name not in parents:
                self.fail(f"feature {name!r} is declared but never appears as a child",
                          tok)

        # reachability: declared-but-unparented features were rejected above,
        # so a cycle among declared features is the remaining non-tree case
        reached = set()
        stack = [root]
        while stack:
            f = stack.pop()
            if f in reached:
                continue
            reached.add(f)
            if f in self.decls:
                for rel in self.decls[f][0]:
                    stack.extend(rel.children)
        for name, tok in known.items():
            if name not in reached:
                self.fail(f"feature {name!r} is not reachable from the root "
                          f"{root!r} (non-tree feature graph)", tok)

        features: dict[str, Feature] = {}
        stack = [root]
        while stack:
            f = stack.pop()
            rels = tuple(self.decls[f][0]) if f in self.decls else ()
            features[f] = Feature(f, f, parents.get(f), rels)
            kids = [c for rel in rels for c in rel.children]
            stack.extend(reversed(kids))

        for attr_name, owner_tok in self.attr_toks.items():
            a = self.attrs[attr_name]
            if a.owner not in features:
                self.fail(f"attribute owner {a.owner!r} is not a feature", owner_tok)
            if attr_name in features:
                self.fail(f"attribute name {attr_name!r} collides with a feature name",
                          owner_tok)

        for fname, tok in self.feature_refs:
            if fname not in features:
                if fname in self.attrs:
                    self.fail(f"attribute {fname!r} must be referenced as "
                              f"{self.attrs[fname].owner}.{fname}", tok)
                self.fail(f"unknown feature {fname!r}", tok)
        for owner, aname, tok in self.attr_refs:
            a = self.attrs.get(aname)
            if a is None or a.owner != owner:
                self.fail(f"unknown attribute {owner}.{aname}", tok)

        return FeatureModel(
            root=root,
            features=features,
            attributes=dict(self.attrs),
            cross_constraints=tuple(e for e, _ in self.constraints),
        )

    def _child_tok(self, fname: str, rel: Relation, child: str) -> _Tok:
        # diagnostics only: fall back to the declaration site
        return self.decls[fname][1]


def parse_model(text: str) -> FeatureModel:
    """Parse model text; raises ParseError (with line/column) on any
    grammar violation, duplicate name, unknown reference, type error or
    non-tree feature graph."""
    try:
        return _Parser(text).parse()
    except RecursionError:
        raise ParseError("expression nesting too deep", 0, 0) from None


# --------------------------------------------------------------------------
# Serializer

_LEVEL = {
    Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Cmp: 6,
    Add: 7, Sub: 7, Mul: 8, Neg: 9,
    IntLit: 10, BoolLit: 10, FeatureRef: 10, AttrRef: 10,
}


def _fmt(e: Expr, attrs: dict[str, Attribute]) -> str:
    lvl = _LEVEL[type(e)]

    def sub(child: Expr, *, tight: bool) -> str:
        """tight=True parenthesizes children at the same level too
        (right operands of left-associative operators)."""
        s = _fmt(child, attrs)
        clvl = _LEVEL[type(child)]
        if clvl < lvl or (tight and clvl == lvl):
            return f"({s})"
        return s

    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, FeatureRef):
        return e.feature
    if isinstance(e, AttrRef):
        return f"{attrs[e.attr].owner}.{e.attr}"
    if isinstance(e, Neg):
        return f"-{sub(e.a, tight=False)}"
    if isinstance(e, Not):
        return f"!{sub(e.a, tight=False)}"
    if isinstance(e, Cmp):
        return f"{sub(e.a, tight=False)} {e.op} {sub(e.b, tight=False)}"
    if isinstance(e, Add):
        return f"{sub(e.a, tight=False)} + {sub(e.b, tight=True)}"
    if isinstance(e, Sub):
        return f"{sub(e.a, tight=False)} - {sub(e.b, tight=True)}"
    if isinstance(e, Mul):
        return f"{sub(e.a, tight=False)} * {sub(e.b, tight=True)}"
    if isinstance(e, And):
        return f"{sub(e.a, tight=False)} && {sub(e.b, tight=True)}"
    if isinstance(e, Or):
        return f"{sub(e.a, tight=False)} || {sub(e.b, tight=True)}"
    if isinstance(e, Implies):
        return f"{sub(e.a, tight=True)} => {sub(e.b, tight=False)}"  # right-assoc
    if isinstance(e, Iff):
        return f"{sub(e.a, tight=False)} <=> {sub(e.b, tight=True)}"
    raise TypeError(f"not an expression: {e!r}")


def serialize_model(m: FeatureModel) -> str:
    """Canonical text for a valid model; parse_model(serialize_model(m))
    is structurally equal to m."""
    lines: list[str] = []
    for fname in m.feature_order():
        f = m.features[fname]
        if not f.relations and fname != m.root:
            continue  # leaves appear only as children
        if not f.relations:
            lines.append(f"feature {fname} {{}}")
            continue
        lines.append(f"feature {fname} {{")
        for rel in f.relations:
            if rel.kind in ("mandatory", "optional"):
                lines.append(f"  {rel.kind} {rel.children[0]}")
            else:
                lines.append(f"  {rel.kind} {{ {', '.join(rel.children)} }}")
        lines.append("}")
    for a in m.attributes.values():
        lines.append(f"attribute {a.owner}.{a.name} : int[{a.lo}..{a.hi}]")
    for e in m.cross_constraints:
        lines.append(f"constraint {_fmt(e, m.attributes)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Validation of programmatically built models


def _expr_sort(e: Expr, m: FeatureModel, out: list[Diagnostic], where: str) -> str:
    """Returns 'int', 'bool', 'feat' or 'err' while collecting diagnostics."""
    def want_int(child) -> bool:
        s = _expr_sort(child, m, out, where)
        if s == "bool":
            out.append(Diagnostic("TypeError", "integer operand expected", where))
            return False
        return s != "err"

    def want_bool(child) -> bool:
        s = _expr_sort(child, m, out, where)
        if s == "int":
            out.append(Diagnostic("TypeError", "Boolean operand expected", where))
            return False
        return s != "err"

    if isinstance(e, IntLit):
        return "int"
    if isinstance(e, BoolLit):
        return "bool"
    if isinstance(e, FeatureRef):
        if e.feature not in m.features:
            out.append(Diagnostic("UnknownRef", f"unknown feature {e.feature!r}", where))
            return "err"
        return "feat"
    if isinstance(e, AttrRef):
        if e.attr not in m.attributes:
            out.append(Diagnostic("UnknownRef", f"unknown attribute {e.attr!r}", where))
            return "err"
        return "int"
    if isinstance(e, (Add, Sub, Mul)):
        ok = want_int(e.a) & want_int(e.b)
        return "int" if ok else "err"
    if isinstance(e, Neg):
        return "int" if want_int(e.a) else "err"
    if isinstance(e, Cmp):
        if e.op not in ("=", "!=", "<", "<=", ">", ">="):
            out.append(Diagnostic("TypeError", f"unknown comparison {e.op!r}", where))
        ok = want_int(e.a) & want_int(e.b)
        return "bool" if ok else "err"
    if isinstance(e, Not):
        return "bool" if want_bool(e.a) else "err"
    if isinstance(e, (And, Or, Implies, Iff)):
        ok = want_bool(e.a) & want_bool(e.b)
        return "bool" if ok else "err"
    out.append(Diagnostic("TypeError", f"not an expression node: {e!r}", where))
    return "err"


def validate(m: FeatureModel) -> list[Diagnostic]:
    """Structural invariant check. Empty result iff the model is valid;
    diagnostics name the violated invariant and its location."""
    out: list[Diagnostic] = []

    for fid, f in m.features.items():
        where = f"feature {fid}"
        if f.id != fid or f.name != fid:
            out.append(Diagnostic("InconsistentId",
                                  "feature id, name and table key must agree", where))
        if not NAME_RE.match(f.name or ""):
            out.append(Diagnostic("BadName", f"invalid feature name {f.name!r}", where))
        for rel in f.relations:
            if rel.kind in ("mandatory", "optional"):
                if len(rel.children) != 1:
                    out.append(Diagnostic("BadRelation",
                                          f"{rel.kind} relation needs exactly one child",
                                          where))
            elif rel.kind in ("or", "xor"):
                if len(rel.children) < 2:
                    out.append(Diagnostic("GroupTooSmall",
                                          f"{rel.kind} group needs at least 2 children",
                                          where))
            else:
                out.append(Diagnostic("BadRelation",
                                      f"unknown relation kind {rel.kind!r}", where))
            for c in rel.children:
                if c not in m.features:
                    out.append(Diagnostic("UnknownRef",
                                          f"child {c!r} is not a declared feature",
                                          where))

    if m.root not in m.features:
        out.append(Diagnostic("NonTree", f"root {m.root!r} is not a declared feature"))
        return out

    # each feature is the child of exactly one relation; root of none
    child_count: dict[str, int] = {fid: 0 for fid in m.features}
    for f in m.features.values():
        for rel in f.relations:
            for c in rel.children:
                if c in child_count:
                    child_count[c] += 1
    for fid, cnt in child_count.items():
        where = f"feature {fid}"
        if fid == m.root:
            if cnt != 0:
                out.append(Diagnostic("NonTree", "root cannot be a child", where))
            if m.features[fid].parent is not None:
                out.append(Diagnostic("NonTree", "root cannot have a parent", where))
        else:
            if cnt == 0:
                out.append(Diagnostic("NonTree", "feature has no parent", where))
            elif cnt > 1:
                out.append(Diagnostic("NonTree", "feature has several parents", where))

    # parent fields agree with relation membership
    for f in m.features.values():
        if f.id == m.root:
            continue
        p = f.parent
        if p is None or p not in m.features:
            out.append(Diagnostic("NonTree",
                                  f"feature {f.id!r} has a missing parent link",
                                  f"feature {f.id}"))
            continue
        listed = any(f.id in rel.children for rel in m.features[p].relations)
        if not listed:
            out.append(Diagnostic("NonTree",
                                  f"parent {p!r} does not list {f.id!r} as a child",
                                  f"feature {f.id}"))

    # reachability (cycle detection)
    reached = set()
    stack = [m.root]
    while stack:
        fid = stack.pop()
        if fid in reached or fid not in m.features:
            continue
        reached.add(fid)
        for rel in m.features[fid].relations:
            stack.extend(rel.children)
    for fid in m.features:
        if fid not in reached:
            out.append(Diagnostic("NonTree", "feature not reachable from root",
                                  f"feature {fid}"))

    for aid, a in m.attributes.items():
        where = f"attribute {aid}"
        if a.id != aid or a.name != aid:
            out.append(Diagnostic("InconsistentId",
                                  "attribute id, name and table key must agree", where))
        if not NAME_RE.match(a.name or ""):
            out.append(Diagnostic("BadName", f"invalid attribute name {a.name!r}", where))
        if a.owner not in m.features:
            out.append(Diagnostic("UnknownRef",
                                  f"attribute owner {a.owner!r} is not a feature", where))
        if a.lo > a.hi:
            out.append(Diagnostic("EmptyAttributeDomain",
                                  f"[{a.lo}..{a.hi}] contains no values", where))
        elif a.hi - a.lo + 1 > MAX_ATTR_DOMAIN:
            out.append(Diagnostic("DomainTooLarge",
                                  f"more than {MAX_ATTR_DOMAIN} values", where))
        if aid in m.features:
            out.append(Diagnostic("NameCollision",
                                  f"attribute {aid!r} collides with a feature name",
                                  where))

    for idx, e in enumerate(m.cross_constraints):
        where = f"constraint #{idx}"
        sort = _expr_sort(e, m, out, where)
        if sort == "int":
            out.append(Diagnostic("TypeError",
                                  "cross constraint must be Boolean", where))
        if expr_depth(e) > MAX_EXPR_DEPTH:
            out.append(Diagnostic("ExprTooDeep",
                                  f"expression deeper than {MAX_EXPR_DEPTH}", where))

    return out
