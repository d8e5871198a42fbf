"""Finite-domain solver kernel.

Propagation to fixpoint over a small constraint vocabulary, depth-first
search with trailing, and named marks so the store can be reset from
outside. One instance is a single-owner mutable object: exactly one
actor may mutate or search it at a time.

Consistency levels: bounds consistency for linear comparisons and
products, domain consistency for clauses, variable equality and
effectively-unary constraints. Propagation is sound (never removes a
value that occurs in a solution of the current store); search makes the
overall solution set exact.
"""

from __future__ import annotations

import enum
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from . import kernels
from .domain import Domain
from .errors import (
    DeadMarkError,
    EmptyDomainError,
    FdConfigError,
    ResourceLimitError,
    SearchCancelled,
    UnknownVarError,
)

DEFAULT_NODE_BUDGET = 10_000_000

CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


class Status(enum.Enum):
    CONSISTENT = "consistent"
    FAILED = "failed"


class EnumResult(enum.Enum):
    EXHAUSTED_ALL = "exhausted_all"
    STOPPED_EARLY = "stopped_early"
    LIMIT_HIT = "limit_hit"


class CancelToken:
    """Cooperative cancellation flag, pollable from search loops."""

    def __init__(self):
        self._event = threading.Event()

    def set(self) -> None:
        self._event.set()

    def is_set(self) -> bool:
        return self._event.is_set()


# --------------------------------------------------------------------------
# Constraint vocabulary (the public specs a caller may post)


@dataclass(frozen=True)
class LinearCmp:
    """sum(coef * var) op k over integer variables."""

    coeffs: tuple[tuple[int, int], ...]  # (var, coef) pairs
    op: str
    k: int

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")
        object.__setattr__(self, "coeffs", tuple((v, c) for v, c in self.coeffs))


@dataclass(frozen=True)
class MulEq:
    """x * y = z."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class ReifLinearCmp:
    """b = 1  <=>  inner holds (b is a 0/1 variable)."""

    b: int
    inner: LinearCmp


@dataclass(frozen=True)
class BoolClause:
    """Disjunction: some pos var is 1 or some neg var is 0."""

    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pos", tuple(self.pos))
        object.__setattr__(self, "neg", tuple(self.neg))


@dataclass(frozen=True)
class EqVar:
    x: int
    y: int


ConstraintSpec = LinearCmp | MulEq | ReifLinearCmp | BoolClause | EqVar


def _merge_coeffs(coeffs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    acc: dict[int, int] = {}
    for v, c in coeffs:
        acc[v] = acc.get(v, 0) + c
    return tuple(sorted((v, c) for v, c in acc.items() if c != 0))


def _canon_linear(spec: LinearCmp):
    """Normalize op to one of 'le', 'eq', 'ne' (negating coefficients for
    the >-family). Returns (kind, vars, coefs, k) with merged terms."""
    merged = _merge_coeffs(spec.coeffs)
    op, k = spec.op, spec.k
    if op == "<":
        op, k = "<=", k - 1
    elif op == ">":
        op, k = ">=", k + 1
    if op == ">=":
        merged = tuple((v, -c) for v, c in merged)
        op, k = "<=", -k
    kind = {"<=": "le", "=": "eq", "!=": "ne"}[op]
    vs = tuple(v for v, _ in merged)
    cs = tuple(c for _, c in merged)
    return kind, vs, cs, k


def _const_cmp(kind: str, k: int) -> bool:
    if kind == "le":
        return 0 <= k
    if kind == "eq":
        return 0 == k
    return 0 != k


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# --------------------------------------------------------------------------
# Propagators (internal)


class _Prop:
    spec: ConstraintSpec

    def vars(self) -> tuple[int, ...]:
        raise NotImplementedError

    def run(self, s: "Solver") -> bool:
        raise NotImplementedError


class _ConstProp(_Prop):
    def __init__(self, spec, truth: bool):
        self.spec = spec
        self.truth = truth

    def vars(self):
        return ()

    def run(self, s):
        return self.truth


def _prop_le(s: "Solver", vs, cs, k) -> bool:
    los = [s._domains[v].lb for v in vs]
    his = [s._domains[v].ub for v in vs]
    tightened = kernels.tighten_le(cs, los, his, k)
    if tightened is None:
        return False
    for i, v in enumerate(vs):
        lo, hi = tightened[i]
        if lo > los[i] or hi < his[i]:
            if not s._narrow(v, s._domains[v].clip(lo, hi)):
                return False
    return True


def _prop_ne(s: "Solver", vs, cs, k) -> bool:
    unfixed = -1
    rest = 0
    for i, v in enumerate(vs):
        d = s._domains[v]
        if d.is_singleton:
            rest += cs[i] * d.value
        elif unfixed >= 0:
            return True  # two open terms: nothing to prune
        else:
            unfixed = i
    if unfixed < 0:
        return rest != k
    c = cs[unfixed]
    if (k - rest) % c == 0:
        v = vs[unfixed]
        return s._narrow(v, s._domains[v].remove((k - rest) // c))
    return True


class _LinearProp(_Prop):
    def __init__(self, spec, kind, vs, cs, k):
        self.spec = spec
        self.kind = kind
        self.vs = vs
        self.cs = cs
        self.k = k
        if kind == "eq":
            self.neg_cs = tuple(-c for c in cs)

    def vars(self):
        return self.vs

    def run(self, s):
        if self.kind == "le":
            return _prop_le(s, self.vs, self.cs, self.k)
        if self.kind == "eq":
            return _prop_le(s, self.vs, self.cs, self.k) and _prop_le(
                s, self.vs, self.neg_cs, -self.k
            )
        return _prop_ne(s, self.vs, self.cs, self.k)


class _ReifProp(_Prop):
    """b=1 <=> (sum op k); propagates both directions plus entailment."""

    def __init__(self, spec, b, kind, vs, cs, k):
        self.spec = spec
        self.b = b
        self.kind = kind
        self.vs = vs
        self.cs = cs
        self.k = k
        self.neg_cs = tuple(-c for c in cs)

    def vars(self):
        return (self.b, *self.vs)

    def _run_inner(self, s, kind, cs, k) -> bool:
        if kind == "le":
            return _prop_le(s, self.vs, cs, k)
        if kind == "eq":
            return _prop_le(s, self.vs, cs, k) and _prop_le(
                s, self.vs, tuple(-c for c in cs), -k
            )
        return _prop_ne(s, self.vs, cs, k)

    def run(self, s):
        db = s._domains[self.b]
        has0 = 0 in db
        has1 = 1 in db
        if not has0 and not has1:
            return False
        if has1 and not has0:
            return self._run_inner(s, self.kind, self.cs, self.k)
        if has0 and not has1:
            # negation: !(<=k) is >=k+1, !(=k) is !=k, !(!=k) is =k
            if self.kind == "le":
                return self._run_inner(s, "le", self.neg_cs, -(self.k + 1))
            if self.kind == "eq":
                return self._run_inner(s, "ne", self.cs, self.k)
            return self._run_inner(s, "eq", self.cs, self.k)
        # b undecided: look for entailment at the bounds level
        los = [s._domains[v].lb for v in self.vs]
        his = [s._domains[v].ub for v in self.vs]
        smin, smax = kernels.sum_bounds(self.cs, los, his)
        truth: Optional[bool] = None
        if self.kind == "le":
            if smax <= self.k:
                truth = True
            elif smin > self.k:
                truth = False
        elif self.kind == "eq":
            if smin == smax == self.k:
                truth = True
            elif self.k < smin or self.k > smax:
                truth = False
        else:  # ne
            if smin == smax == self.k:
                truth = False
            elif self.k < smin or self.k > smax:
                truth = True
        if truth is None:
            return True
        return s._narrow(self.b, s._domains[self.b].clip(int(truth), int(truth)))


class _ClauseProp(_Prop):
    def __init__(self, spec, pos, neg):
        self.spec = spec
        self.pos = pos
        self.neg = neg

    def vars(self):
        return (*self.pos, *self.neg)

    def run(self, s):
        open_lit = None
        nopen = 0
        for v in self.pos:
            d = s._domains[v]
            has1 = 1 in d
            if has1:
                if 0 not in d:
                    return True  # satisfied
                open_lit = (v, 1)
                nopen += 1
        for v in self.neg:
            d = s._domains[v]
            has0 = 0 in d
            if has0:
                if 1 not in d:
                    return True
                open_lit = (v, 0)
                nopen += 1
        if nopen == 0:
            return False  # every literal false
        if nopen == 1:
            v, val = open_lit
            return s._narrow(v, s._domains[v].clip(val, val))
        return True


class _EqVarProp(_Prop):
    def __init__(self, spec, x, y):
        self.spec = spec
        self.x = x
        self.y = y

    def vars(self):
        return (self.x, self.y)

    def run(self, s):
        nd = s._domains[self.x].intersect(s._domains[self.y])
        return s._narrow(self.x, nd) and s._narrow(self.y, nd)


class _MulProp(_Prop):
    """x*y = z with bounds reasoning (corner products / quotients)."""

    def __init__(self, spec, x, y, z):
        self.spec = spec
        self.x = x
        self.y = y
        self.z = z

    def vars(self):
        return (self.x, self.y, self.z)

    @staticmethod
    def _quot_bounds(zlo, zhi, ylo, yhi):
        corners_lo = min(
            _ceil_div(zlo, ylo), _ceil_div(zlo, yhi),
            _ceil_div(zhi, ylo), _ceil_div(zhi, yhi),
        )
        corners_hi = max(
            zlo // ylo, zlo // yhi, zhi // ylo, zhi // yhi,
        )
        return corners_lo, corners_hi

    def run(self, s):
        dx, dy, dz = s._domains[self.x], s._domains[self.y], s._domains[self.z]
        xl, xh, yl, yh = dx.lb, dx.ub, dy.lb, dy.ub
        prods = (xl * yl, xl * yh, xh * yl, xh * yh)
        if not s._narrow(self.z, dz.clip(min(prods), max(prods))):
            return False
        dz = s._domains[self.z]
        zl, zh = dz.lb, dz.ub
        if yl > 0 or yh < 0:  # y sign-constant: divide through
            lo, hi = self._quot_bounds(zl, zh, yl, yh)
            if not s._narrow(self.x, s._domains[self.x].clip(lo, hi)):
                return False
        dx = s._domains[self.x]
        xl, xh = dx.lb, dx.ub
        if xl > 0 or xh < 0:
            lo, hi = self._quot_bounds(zl, zh, xl, xh)
            if not s._narrow(self.y, s._domains[self.y].clip(lo, hi)):
                return False
        return True


# --------------------------------------------------------------------------
# Marks


class Mark:
    """A named, resettable position in the solver's history."""

    __slots__ = ("label", "seq", "trail_pos", "n_constraints", "n_vars",
                 "status", "alive", "_owner")

    def __init__(self, owner, label, seq, trail_pos, n_constraints, n_vars, status):
        self.label = label
        self.seq = seq
        self.trail_pos = trail_pos
        self.n_constraints = n_constraints
        self.n_vars = n_vars
        self.status = status
        self.alive = True
        self._owner = owner

    def __repr__(self):
        state = "live" if self.alive else "dead"
        return f"Mark({self.label!r}, trail={self.trail_pos}, {state})"


class _LimitStop(Exception):
    pass


class _VisitorStop(Exception):
    pass


# --------------------------------------------------------------------------
# The solver


class Solver:
    def __init__(self, node_budget: int = DEFAULT_NODE_BUDGET):
        self.node_budget = node_budget
        self._domains: list[Domain] = []
        self._var_names: list[str] = []
        self._constraints: list[_Prop] = []
        self._watchers: list[list[int]] = []
        self._trail: list = []
        self._marks: list[Mark] = []
        self._mark_seq = 0
        self._status = Status.CONSISTENT
        self._queue: deque[int] = deque()
        self._inq: set[int] = set()
        self._searching = False

    # -- introspection

    @property
    def status(self) -> Status:
        return self._status

    @property
    def num_vars(self) -> int:
        return len(self._domains)

    @property
    def trail_length(self) -> int:
        return len(self._trail)

    def current_domain(self, v: int) -> Domain:
        self._check_var(v)
        return self._domains[v]

    def domains_snapshot(self) -> tuple[Domain, ...]:
        return tuple(self._domains)

    def _check_var(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < len(self._domains):
            raise UnknownVarError(f"variable {v} does not exist")

    # -- construction

    def add_var(self, d: Domain, name: str = "") -> int:
        if self._searching:
            raise FdConfigError("cannot add variables while a search is running")
        if d.is_empty:
            raise EmptyDomainError("cannot create a variable with an empty domain")
        v = len(self._domains)
        self._domains.append(d)
        self._var_names.append(name or f"v{v}")
        self._watchers.append([])
        self._trail.append(("v",))
        return v

    def var_name(self, v: int) -> str:
        self._check_var(v)
        return self._var_names[v]

    def post(self, spec: ConstraintSpec) -> Status:
        if self._searching:
            raise FdConfigError("cannot post constraints while a search is running")
        prop = self._make_prop(spec)
        cid = len(self._constraints)
        self._constraints.append(prop)
        self._trail.append(("c",))
        for v in sorted(set(prop.vars())):
            self._watchers[v].append(cid)
            self._trail.append(("w", v))
        if self._status is Status.FAILED:
            return self._status
        self._schedule(cid)
        if not self._fixpoint():
            self._status = Status.FAILED
        return self._status

    def propagate(self) -> Status:
        if self._status is Status.FAILED:
            return self._status
        for cid in range(len(self._constraints)):
            self._schedule(cid)
        if not self._fixpoint():
            self._status = Status.FAILED
        return self._status

    def _make_prop(self, spec: ConstraintSpec) -> _Prop:
        if isinstance(spec, LinearCmp):
            kind, vs, cs, k = _canon_linear(spec)
            for v in vs:
                self._check_var(v)
            if not vs:
                return _ConstProp(spec, _const_cmp(kind, k))
            return _LinearProp(spec, kind, vs, cs, k)
        if isinstance(spec, ReifLinearCmp):
            self._check_var(spec.b)
            kind, vs, cs, k = _canon_linear(spec.inner)
            for v in vs:
                self._check_var(v)
            if not vs:
                truth = _const_cmp(kind, k)
                return _LinearProp(
                    LinearCmp(((spec.b, 1),), "=", int(truth)),
                    "eq", (spec.b,), (1,), int(truth),
                )
            return _ReifProp(spec, spec.b, kind, vs, cs, k)
        if isinstance(spec, BoolClause):
            for v in (*spec.pos, *spec.neg):
                self._check_var(v)
            if set(spec.pos) & set(spec.neg):
                return _ConstProp(spec, True)
            if not spec.pos and not spec.neg:
                return _ConstProp(spec, False)
            return _ClauseProp(spec, tuple(dict.fromkeys(spec.pos)),
                               tuple(dict.fromkeys(spec.neg)))
        if isinstance(spec, EqVar):
            self._check_var(spec.x)
            self._check_var(spec.y)
            if spec.x == spec.y:
                return _ConstProp(spec, True)
            return _EqVarProp(spec, spec.x, spec.y)
        if isinstance(spec, MulEq):
            for v in (spec.x, spec.y, spec.z):
                self._check_var(v)
            return _MulProp(spec, spec.x, spec.y, spec.z)
        raise TypeError(f"not a constraint spec: {spec!r}")

    # -- propagation machinery

    def _narrow(self, v: int, nd: Domain) -> bool:
        old = self._domains[v]
        if nd == old:
            return True
        self._trail.append(("d", v, old))
        self._domains[v] = nd
        if nd.is_empty:
            return False
        for cid in self._watchers[v]:
            self._schedule(cid)
        return True

    def _schedule(self, cid: int) -> None:
        if cid not in self._inq:
            self._inq.add(cid)
            self._queue.append(cid)

    def _fixpoint(self) -> bool:
        q = self._queue
        while q:
            cid = q.popleft()
            self._inq.discard(cid)
            if not self._constraints[cid].run(self):
                q.clear()
                self._inq.clear()
                return False
        return True

    # -- trailing and marks

    def _undo_to(self, pos: int) -> None:
        trail = self._trail
        while len(trail) > pos:
            entry = trail.pop()
            tag = entry[0]
            if tag == "d":
                self._domains[entry[1]] = entry[2]
            elif tag == "w":
                self._watchers[entry[1]].pop()
            elif tag == "c":
                self._constraints.pop()
            else:  # "v"
                self._domains.pop()
                self._var_names.pop()
                self._watchers.pop()

    def mark(self, label: str = "") -> Mark:
        self._mark_seq += 1
        m = Mark(self, label, self._mark_seq, len(self._trail),
                 len(self._constraints), len(self._domains), self._status)
        self._marks.append(m)
        return m

    def reset_to(self, m: Mark) -> None:
        if m._owner is not self:
            raise DeadMarkError("mark belongs to a different solver")
        if not m.alive:
            raise DeadMarkError(f"mark {m.label!r} was invalidated by an earlier reset")
        self._undo_to(m.trail_pos)
        self._status = m.status
        self._queue.clear()
        self._inq.clear()
        while self._marks and self._marks[-1].seq > m.seq:
            dead = self._marks.pop()
            dead.alive = False
        assert len(self._constraints) == m.n_constraints
        assert len(self._domains) == m.n_vars

    # -- search

    def _select_var(self) -> Optional[int]:
        best = None
        best_size = None
        for v, d in enumerate(self._domains):
            sz = d.size
            if sz > 1 and (best_size is None or sz < best_size):
                best, best_size = v, sz
                if sz == 2:
                    break  # cannot do better than 2 among unfixed vars
        return best

    def solve_first(self, cancel: Optional[CancelToken] = None,
                    node_budget: Optional[int] = None) -> Optional[tuple[int, ...]]:
        """First solution in the deterministic search order, or None.

        The store is left exactly as it was, whatever the outcome.
        """
        found: list[tuple[int, ...]] = []

        def grab(sol):
            found.append(sol)
            return False

        self.enumerate(1, grab, cancel=cancel, node_budget=node_budget)
        return found[0] if found else None

    def enumerate(self, limit: int, visit: Callable,
                  cancel: Optional[CancelToken] = None,
                  node_budget: Optional[int] = None) -> EnumResult:
        """Visit each solution exactly once, ascending-value DFS over the
        smallest-domain-first variable order. visit may return False to
        stop early. State (domains, trail, marks) is fully restored."""
        if limit < 1:
            raise ValueError("limit must be >= 1")
        if self._status is Status.FAILED:
            return EnumResult.EXHAUSTED_ALL
        budget = node_budget if node_budget is not None else self.node_budget
        base = len(self._trail)
        self._searching = True
        nodes = 0
        visited = 0
        # explicit DFS stack (frames: var, values, next index, trail pos)
        # so depth is bounded by memory, not the interpreter's call stack
        stack: list[list] = []

        try:
            while True:
                v = self._select_var()
                if v is None:
                    visited += 1
                    if visit(tuple(d.lb for d in self._domains)) is False:
                        raise _VisitorStop
                    if visited >= limit:
                        raise _LimitStop
                else:
                    stack.append([v, list(self._domains[v].values()), 0,
                                  len(self._trail)])
                while stack:
                    frame = stack[-1]
                    self._undo_to(frame[3])
                    if frame[2] >= len(frame[1]):
                        stack.pop()
                        continue
                    value = frame[1][frame[2]]
                    frame[2] += 1
                    nodes += 1
                    if nodes > budget:
                        raise ResourceLimitError(budget)
                    if cancel is not None and cancel.is_set():
                        raise SearchCancelled("search cancelled")
                    self._narrow(frame[0], Domain.interval(value, value))
                    if self._fixpoint():
                        break  # descend: pick the next variable
                else:
                    return EnumResult.EXHAUSTED_ALL
        except _VisitorStop:
            return EnumResult.STOPPED_EARLY
        except _LimitStop:
            return EnumResult.LIMIT_HIT
        finally:
            self._searching = False
            self._undo_to(base)
