"""Compile a feature model into a solver store.

Encoding: feature variables are 0/1; an attribute variable carries
{0} ∪ [lo..hi] where 0 encodes "owner deselected" (if 0 also lies in
[lo..hi], it is additionally a legal value while selected; the brute
force tests use the same rule). Tree rules become linear comparisons
and variable equalities; cross-tree expressions are decomposed into the
solver's constraint forms with fresh auxiliary 0/1 and product
variables. Emission order is fixed (pre-order tree walk, attributes,
then cross constraints in declaration order) so compiled stores are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import model as fm
from .domain import Domain
from .errors import TranslateError
from .solver import (
    BoolClause,
    EqVar,
    LinearCmp,
    Mark,
    MulEq,
    ReifLinearCmp,
    Solver,
    DEFAULT_NODE_BUDGET,
)

INT64_MAX = 2**63 - 1


@dataclass
class VariableMap:
    """Bidirectional name <-> solver-variable map over model variables
    (auxiliaries introduced by the encoding are deliberately absent)."""

    feature_vars: dict[str, int] = field(default_factory=dict)
    attr_vars: dict[str, int] = field(default_factory=dict)
    names: dict[int, str] = field(default_factory=dict)

    def add_feature(self, name: str, var: int) -> None:
        self.feature_vars[name] = var
        self.names[var] = name

    def add_attr(self, name: str, var: int) -> None:
        self.attr_vars[name] = var
        self.names[var] = name

    def var_of(self, name: str) -> Optional[int]:
        v = self.feature_vars.get(name)
        if v is None:
            v = self.attr_vars.get(name)
        return v

    def model_vars(self) -> list[tuple[str, int]]:
        """(name, var) pairs: features in pre-order, then attributes."""
        return [*self.feature_vars.items(), *self.attr_vars.items()]


@dataclass
class CompiledModel:
    model: fm.FeatureModel
    solver: Solver
    vmap: VariableMap
    ground_mark: Optional[Mark] = None
    model_conseq: Optional[object] = None  # cache set by consequences


class _Emitter:
    def __init__(self, solver: Solver, vmap: VariableMap):
        self.s = solver
        self.vmap = vmap
        self.n_aux = 0

    def aux_bool(self) -> int:
        self.n_aux += 1
        return self.s.add_var(Domain.boolean(), f"_b{self.n_aux}")

    def aux_int(self, lo: int, hi: int) -> int:
        self._check64(lo)
        self._check64(hi)
        self.n_aux += 1
        return self.s.add_var(Domain.interval(lo, hi), f"_t{self.n_aux}")

    @staticmethod
    def _check64(v: int) -> None:
        if abs(v) > INT64_MAX:
            raise TranslateError("intermediate bound exceeds signed 64-bit range")

    def form_bounds(self, coeffs: dict[int, int], const: int) -> tuple[int, int]:
        lo = hi = const
        mag = abs(const)  # bound on any partial sum, kernel-arithmetic safe
        for v, c in coeffs.items():
            d = self.s.current_domain(v)
            a, b = c * d.lb, c * d.ub
            lo += min(a, b)
            hi += max(a, b)
            mag += max(abs(a), abs(b))
        self._check64(mag)
        return lo, hi

    # -- integer expressions as linear forms (coeffs, const)

    def int_form(self, e: fm.Expr) -> tuple[dict[int, int], int]:
        if isinstance(e, fm.IntLit):
            self._check64(e.value)
            return {}, e.value
        if isinstance(e, fm.FeatureRef):
            return {self.vmap.feature_vars[e.feature]: 1}, 0
        if isinstance(e, fm.AttrRef):
            return {self.vmap.attr_vars[e.attr]: 1}, 0
        if isinstance(e, fm.Add):
            fa, ca = self.int_form(e.a)
            fb, cb = self.int_form(e.b)
            return self._combine(fa, fb, 1), ca + cb
        if isinstance(e, fm.Sub):
            fa, ca = self.int_form(e.a)
            fb, cb = self.int_form(e.b)
            return self._combine(fa, fb, -1), ca - cb
        if isinstance(e, fm.Neg):
            fa, ca = self.int_form(e.a)
            return {v: -c for v, c in fa.items()}, -ca
        if isinstance(e, fm.Mul):
            fa, ca = self.int_form(e.a)
            fb, cb = self.int_form(e.b)
            if not fa:  # constant * form
                self._check64(ca)
                return {v: ca * c for v, c in fb.items()}, ca * cb
            if not fb:
                self._check64(cb)
                return {v: cb * c for v, c in fa.items()}, ca * cb
            x = self.materialize(fa, ca)
            y = self.materialize(fb, cb)
            dx, dy = self.s.current_domain(x), self.s.current_domain(y)
            prods = (dx.lb * dy.lb, dx.lb * dy.ub, dx.ub * dy.lb, dx.ub * dy.ub)
            z = self.aux_int(min(prods), max(prods))
            self.s.post(MulEq(x, y, z))
            return {z: 1}, 0
        raise TranslateError(f"not an integer expression: {e!r}")

    @staticmethod
    def _combine(fa: dict[int, int], fb: dict[int, int], sign: int) -> dict[int, int]:
        out = dict(fa)
        for v, c in fb.items():
            nc = out.get(v, 0) + sign * c
            if nc:
                out[v] = nc
            else:
                out.pop(v, None)
        return out

    def materialize(self, coeffs: dict[int, int], const: int) -> int:
        """A single variable equal to the linear form."""
        if const == 0 and len(coeffs) == 1:
            v, c = next(iter(coeffs.items()))
            if c == 1:
                return v
        lo, hi = self.form_bounds(coeffs, const)
        t = self.aux_int(lo, hi)
        terms = tuple(sorted(coeffs.items())) + ((t, -1),)
        self.s.post(LinearCmp(terms, "=", -const))
        return t

    def linear_of_cmp(self, e: fm.Cmp) -> LinearCmp | bool:
        """e as a LinearCmp over variables; a plain bool when constant."""
        fa, ca = self.int_form(e.a)
        fb, cb = self.int_form(e.b)
        coeffs = self._combine(fa, fb, -1)
        k = cb - ca
        self._check64(k)
        if not coeffs:
            return {"=": ca == cb, "!=": ca != cb, "<": ca < cb,
                    "<=": ca <= cb, ">": ca > cb, ">=": ca >= cb}[e.op]
        self.form_bounds(coeffs, 0)  # overflow guard on the combined form
        return LinearCmp(tuple(sorted(coeffs.items())), e.op, k)

    # -- Boolean expressions as 0/1 variables (Tseitin-style)

    def bool_var(self, e: fm.Expr) -> int:
        if isinstance(e, fm.FeatureRef):
            return self.vmap.feature_vars[e.feature]
        if isinstance(e, fm.BoolLit):
            b = self.aux_bool()
            self.s.post(LinearCmp(((b, 1),), "=", int(e.value)))
            return b
        if isinstance(e, fm.Not):
            a = self.bool_var(e.a)
            b = self.aux_bool()
            self.s.post(BoolClause(pos=(b, a)))
            self.s.post(BoolClause(neg=(b, a)))
            return b
        if isinstance(e, fm.And):
            a, c = self.bool_var(e.a), self.bool_var(e.b)
            b = self.aux_bool()
            self.s.post(BoolClause(pos=(a,), neg=(b,)))
            self.s.post(BoolClause(pos=(c,), neg=(b,)))
            self.s.post(BoolClause(pos=(b,), neg=(a, c)))
            return b
        if isinstance(e, fm.Or):
            a, c = self.bool_var(e.a), self.bool_var(e.b)
            b = self.aux_bool()
            self.s.post(BoolClause(pos=(a, c), neg=(b,)))
            self.s.post(BoolClause(pos=(b,), neg=(a,)))
            self.s.post(BoolClause(pos=(b,), neg=(c,)))
            return b
        if isinstance(e, fm.Implies):
            a, c = self.bool_var(e.a), self.bool_var(e.b)
            b = self.aux_bool()
            self.s.post(BoolClause(pos=(c,), neg=(b, a)))
            self.s.post(BoolClause(pos=(b, a)))
            self.s.post(BoolClause(pos=(b,), neg=(c,)))
            return b
        if isinstance(e, fm.Iff):
            a, c = self.bool_var(e.a), self.bool_var(e.b)
            b = self.aux_bool()
            self.s.post(BoolClause(pos=(c,), neg=(b, a)))
            self.s.post(BoolClause(pos=(a,), neg=(b, c)))
            self.s.post(BoolClause(pos=(b, a, c)))
            self.s.post(BoolClause(pos=(b,), neg=(a, c)))
            return b
        if isinstance(e, fm.Cmp):
            lin = self.linear_of_cmp(e)
            if isinstance(lin, bool):
                return self.bool_var(fm.BoolLit(lin))
            b = self.aux_bool()
            self.s.post(ReifLinearCmp(b, lin))
            return b
        raise TranslateError(f"not a Boolean expression: {e!r}")

    # -- top-level constraint emission

    def _disjuncts(self, e: fm.Expr) -> list[fm.Expr]:
        if isinstance(e, fm.Or):
            return self._disjuncts(e.a) + self._disjuncts(e.b)
        if isinstance(e, fm.Implies):
            neg = e.a.a if isinstance(e.a, fm.Not) else fm.Not(e.a)
            return self._disjuncts(neg) + self._disjuncts(e.b)
        return [e]

    def _literal(self, e: fm.Expr) -> tuple[int, bool]:
        """(var, polarity) for a disjunct, via an auxiliary if complex."""
        if isinstance(e, fm.FeatureRef):
            return self.vmap.feature_vars[e.feature], True
        if isinstance(e, fm.Not) and isinstance(e.a, fm.FeatureRef):
            return self.vmap.feature_vars[e.a.feature], False
        return self.bool_var(e), True

    def emit_constraint(self, e: fm.Expr) -> None:
        if isinstance(e, fm.And):
            self.emit_constraint(e.a)
            self.emit_constraint(e.b)
            return
        if isinstance(e, fm.BoolLit):
            if not e.value:
                self.s.post(BoolClause())  # empty clause: unsatisfiable
            return
        if isinstance(e, fm.Cmp):
            lin = self.linear_of_cmp(e)
            if isinstance(lin, bool):
                self.emit_constraint(fm.BoolLit(lin))
            else:
                self.s.post(lin)
            return
        if isinstance(e, (fm.Or, fm.Implies, fm.Not, fm.FeatureRef)):
            pos, neg = [], []
            for d in self._disjuncts(e):
                v, polarity = self._literal(d)
                (pos if polarity else neg).append(v)
            self.s.post(BoolClause(pos=tuple(pos), neg=tuple(neg)))
            return
        # anything else (Iff at top level): one auxiliary pinned true
        v = self.bool_var(e)
        self.s.post(BoolClause(pos=(v,)))


def compile_model(m: fm.FeatureModel,
                  node_budget: int = DEFAULT_NODE_BUDGET) -> CompiledModel:
    """Translate a valid model; raises TranslateError when validation
    fails or any intermediate bound risks 64-bit overflow."""
    diags = fm.validate(m)
    if diags:
        raise TranslateError("; ".join(str(d) for d in diags))

    solver = Solver(node_budget=node_budget)
    vmap = VariableMap()
    for name in m.feature_order():
        vmap.add_feature(name, solver.add_var(Domain.boolean(), name))
    for a in m.attributes.values():
        dom = Domain(((0, 0), (a.lo, a.hi)))
        vmap.add_attr(a.id, solver.add_var(dom, a.id))

    em = _Emitter(solver, vmap)
    fv = vmap.feature_vars

    solver.post(LinearCmp(((fv[m.root], 1),), "=", 1))
    for name in m.feature_order():
        p = fv[name]
        for rel in m.features[name].relations:
            kids = [fv[c] for c in rel.children]
            if rel.kind == "mandatory":
                solver.post(EqVar(kids[0], p))
            elif rel.kind == "optional":
                solver.post(LinearCmp(((kids[0], 1), (p, -1)), "<=", 0))
            else:
                for c in kids:
                    solver.post(LinearCmp(((c, 1), (p, -1)), "<=", 0))
                op = ">=" if rel.kind == "or" else "="
                terms = tuple((c, 1) for c in kids) + ((p, -1),)
                solver.post(LinearCmp(terms, op, 0))

    for a in m.attributes.values():
        f = fv[a.owner]
        av = vmap.attr_vars[a.id]
        zero = em.aux_bool()  # zero=1 <=> attribute carries the sentinel 0
        solver.post(ReifLinearCmp(zero, LinearCmp(((av, 1),), "=", 0)))
        solver.post(BoolClause(pos=(f, zero)))  # deselected owner forces 0
        if not (a.lo <= 0 <= a.hi):
            solver.post(BoolClause(neg=(f, zero)))  # selected owner forbids 0

    for e in m.cross_constraints:
        em.emit_constraint(e)

    return CompiledModel(model=m, solver=solver, vmap=vmap)


def project(solution: tuple[int, ...], vmap: VariableMap) -> dict[str, int]:
    """Restrict a total solver assignment to the model's variables."""
    return {name: solution[var] for name, var in vmap.model_vars()}
