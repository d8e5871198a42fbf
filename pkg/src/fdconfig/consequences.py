"""Valid domains: for each model variable, the set of values occurring
in at least one solution of the current store.

Two independent methods compute them: full enumeration (also yields the
solution count) and probing, which after one propagation pass posts
v=d for each unwitnessed candidate value and asks for a single solution,
reusing every returned solution as a witness for all variables it fixes.
Probing delivers per-variable results incrementally through a callback,
which is what makes the anytime session contract possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .domain import Domain
from .errors import InfeasibleModelError, ResourceLimitError, SearchCancelled
from .solver import CancelToken, EnumResult, LinearCmp, Status
from .translate import CompiledModel

DEFAULT_ENUM_LIMIT = 1_000_000

EmitFn = Callable[[str, Domain], None]


@dataclass
class Consequences:
    """Per-variable valid domains plus how they were obtained.

    variables preserves the canonical order (features pre-order, then
    attributes in declaration order). solution_count is only known when
    enumeration ran to exhaustion.
    """

    variables: dict[str, Domain]
    method: str  # "enumerate" | "probe"
    complete: bool
    solution_count: Optional[int] = None
    cancelled: bool = False
    stats: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "variables": {
                name: {"values": [[lo, hi] for lo, hi in dom.ivs]}
                for name, dom in self.variables.items()
            },
            "complete": self.complete,
            "solutionCount": self.solution_count,
        }


def _empty_result(cm: CompiledModel, method: str) -> Consequences:
    empty = Domain()
    return Consequences(
        variables={name: empty for name, _ in cm.vmap.model_vars()},
        method=method,
        complete=True,
        solution_count=0 if method == "enumerate" else None,
    )


def valid_domains_enumerate(cm: CompiledModel,
                            limit: int = DEFAULT_ENUM_LIMIT) -> Consequences:
    """Union of projected values over all solutions (up to limit).

    Hitting the limit or the search node budget yields a partial result
    marked incomplete rather than an error.
    """
    order = cm.vmap.model_vars()
    acc: dict[str, set[int]] = {name: set() for name, _ in order}
    count = 0

    def visit(sol):
        nonlocal count
        count += 1
        for name, var in order:
            acc[name].add(sol[var])

    try:
        res = cm.solver.enumerate(limit, visit)
        complete = res is EnumResult.EXHAUSTED_ALL
    except ResourceLimitError:
        complete = False
    return Consequences(
        variables={name: Domain((v, v) for v in vals)
                   for (name, _), vals in zip(order, acc.values())},
        method="enumerate",
        complete=complete,
        solution_count=count if complete else None,
    )


def valid_domains_probe(cm: CompiledModel,
                        cancel: Optional[CancelToken] = None,
                        emit: Optional[EmitFn] = None) -> Consequences:
    """Valid domains by feasibility probes with witness reuse.

    Emits each variable's finished domain as soon as it is known. On
    cancellation the result carries exactly the variables emitted so
    far (complete=False); their entries equal the uncancelled result's.
    """
    s = cm.solver
    order = cm.vmap.model_vars()
    outer = s.mark("probe")
    probes = 0
    per_var: dict[str, int] = {}
    out: dict[str, Domain] = {}  # emitted so far; the partial result on cancel
    try:
        if s.propagate() is Status.FAILED:
            result = _empty_result(cm, "probe")
            _emit_all(result, emit)
            return result

        witnessed: dict[str, set[int]] = {name: set() for name, _ in order}
        first = s.solve_first(cancel=cancel)
        if first is None:
            result = _empty_result(cm, "probe")
            _emit_all(result, emit)
            return result
        _witness(witnessed, order, first)

        for name, var in order:
            per_var[name] = 0
            seen = witnessed[name]
            for value in list(s.current_domain(var).values()):
                if value in seen:
                    continue
                if cancel is not None and cancel.is_set():
                    raise SearchCancelled("probing cancelled")
                probes += 1
                per_var[name] += 1
                m = s.mark()
                try:
                    st = s.post(LinearCmp(((var, 1),), "=", value))
                    sol = s.solve_first(cancel=cancel) if st is Status.CONSISTENT else None
                finally:
                    s.reset_to(m)
                if sol is not None:
                    _witness(witnessed, order, sol)
            dom = Domain((v, v) for v in seen)
            out[name] = dom
            if emit is not None:
                emit(name, dom)
        return Consequences(variables=out, method="probe", complete=True,
                            stats={"probes": probes, "per_var": per_var})
    except SearchCancelled:
        return Consequences(variables=dict(out), method="probe",
                            complete=False, cancelled=True,
                            stats={"probes": probes, "per_var": per_var})
    finally:
        s.reset_to(outer)


def _witness(witnessed, order, sol) -> None:
    for name, var in order:
        witnessed[name].add(sol[var])


def _emit_all(result: Consequences, emit: Optional[EmitFn]) -> None:
    if emit is not None:
        for name, dom in result.variables.items():
            emit(name, dom)


def model_consequences(cm: CompiledModel) -> Consequences:
    """Feasibility check plus full valid domains, cached immutably on the
    compiled model. Raises InfeasibleModelError when no product exists."""
    if cm.model_conseq is not None:
        return cm.model_conseq  # type: ignore[return-value]
    if cm.solver.solve_first() is None:
        raise InfeasibleModelError("the model admits no product")
    conseq = valid_domains_probe(cm)
    cm.model_conseq = conseq
    return conseq


@dataclass(frozen=True)
class ModelAnalyses:
    dead: frozenset[str]
    core: frozenset[str]
    count: int


def analyses(cm: CompiledModel,
             limit: int = DEFAULT_ENUM_LIMIT) -> ModelAnalyses:
    """Dead features (never selectable), core features (always selected)
    and the solution count."""
    try:
        mc = model_consequences(cm)
    except InfeasibleModelError:
        feats = list(cm.vmap.feature_vars)
        return ModelAnalyses(dead=frozenset(feats), core=frozenset(feats), count=0)
    dead = frozenset(f for f in cm.vmap.feature_vars if 1 not in mc.variables[f])
    core = frozenset(f for f in cm.vmap.feature_vars if 0 not in mc.variables[f])
    counted = valid_domains_enumerate(cm, limit)
    count = counted.solution_count if counted.complete else -1
    return ModelAnalyses(dead=dead, core=core, count=count)
