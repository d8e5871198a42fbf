"""Interactive configuration sessions.

A session owns one compiled model and its solver. The solver state is
always ground + the decision list replayed in order; retraction of any
decision (chronological or not) resets to the ground mark and replays
the survivors. After every decision or retraction the user consequences
are recomputed by probing; each variable flips to Pending and comes
back Ready incrementally, so clients can keep configuring on variables
that are already Ready while the computation is still running.

Mutations are serialized per session; a new mutation cancels any
in-flight recomputation (its partial results are discarded by epoch
checks). Readers take consistent snapshots without blocking the
computation.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from queue import SimpleQueue
from typing import Optional

from .consequences import model_consequences, valid_domains_probe
from .domain import Domain
from .errors import (
    EMPTY_INTERSECTION,
    UNKNOWN_VARIABLE,
    VARIABLE_PENDING,
    DecisionRejected,
    FdConfigError,
    ResourceLimitError,
    UnknownDecisionError,
)
from .model import FeatureModel
from .solver import CancelToken, DEFAULT_NODE_BUDGET, LinearCmp, Status
from .translate import compile_model


@dataclass(frozen=True)
class Restriction:
    """A unary domain restriction on one variable."""

    kind: str  # assign | exclude | range
    value: Optional[int] = None
    lo: Optional[int] = None
    hi: Optional[int] = None

    def __post_init__(self):
        if self.kind == "assign" or self.kind == "exclude":
            if not isinstance(self.value, int):
                raise ValueError(f"{self.kind} needs an integer value")
        elif self.kind == "range":
            if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
                raise ValueError("range needs integer bounds")
            if self.lo > self.hi:
                raise ValueError(f"empty range [{self.lo}..{self.hi}]")
        else:
            raise ValueError(f"unknown restriction kind {self.kind!r}")

    @classmethod
    def assign(cls, value: int) -> "Restriction":
        return cls("assign", value=value)

    @classmethod
    def exclude(cls, value: int) -> "Restriction":
        return cls("exclude", value=value)

    @classmethod
    def range(cls, lo: int, hi: int) -> "Restriction":
        return cls("range", lo=lo, hi=hi)

    def allowed_within(self, dom: Domain) -> Domain:
        if self.kind == "assign":
            return dom.clip(self.value, self.value)
        if self.kind == "exclude":
            return dom.remove(self.value)
        return dom.clip(self.lo, self.hi)

    def constraints(self, var: int) -> list[LinearCmp]:
        if self.kind == "assign":
            return [LinearCmp(((var, 1),), "=", self.value)]
        if self.kind == "exclude":
            return [LinearCmp(((var, 1),), "!=", self.value)]
        return [LinearCmp(((var, 1),), ">=", self.lo),
                LinearCmp(((var, 1),), "<=", self.hi)]

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Restriction":
        return cls(kind=d.get("kind"), value=d.get("value"),
                   lo=d.get("lo"), hi=d.get("hi"))


@dataclass(frozen=True)
class Decision:
    id: int
    variable: str
    restriction: Restriction
    created_at: float

    def to_json_dict(self) -> dict:
        return {"id": self.id, "variable": self.variable,
                "restriction": self.restriction.to_json_dict()}


@dataclass(frozen=True)
class VariableState:
    ready: bool
    values: Optional[Domain]  # None while Pending


@dataclass(frozen=True)
class SessionSnapshot:
    epoch: int
    decisions: tuple[Decision, ...]
    variables: dict[str, VariableState]
    computing: bool

    def to_json_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "computing": self.computing,
            "decisions": [d.to_json_dict() for d in self.decisions],
            "variables": {
                name: {
                    "ready": st.ready,
                    "values": [[lo, hi] for lo, hi in st.values.ivs]
                    if st.values is not None else None,
                }
                for name, st in self.variables.items()
            },
        }


class Session:
    """One interactive configuration over one compiled model."""

    def __init__(self, compiled, model_conseq, inline_recompute: bool = False):
        self.id = uuid.uuid4().hex
        self.compiled = compiled
        self.model_conseq = model_conseq
        self.ground = compiled.ground_mark
        self.inline = inline_recompute
        self.epoch = 0
        self.computing = False
        self.last_error: Optional[str] = None
        self.decisions: list[Decision] = []
        self._next_decision_id = 1
        self._ready: dict[str, Domain] = dict(model_conseq.variables)
        self._cond = threading.Condition()
        self._op = threading.RLock()  # serializes post/retract/close
        self._solver_lock = threading.Lock()
        self._cancel: Optional[CancelToken] = None
        self._worker: Optional[threading.Thread] = None
        self._subscribers: list[SimpleQueue] = []

    # -- queries

    def variable_names(self) -> list[str]:
        return [name for name, _ in self.compiled.vmap.model_vars()]

    def get_state(self) -> SessionSnapshot:
        with self._cond:
            variables = {}
            for name, _ in self.compiled.vmap.model_vars():
                dom = self._ready.get(name)
                variables[name] = VariableState(ready=dom is not None, values=dom)
            return SessionSnapshot(
                epoch=self.epoch,
                decisions=tuple(self.decisions),
                variables=variables,
                computing=self.computing,
            )

    def wait_ready(self, timeout: Optional[float] = None) -> bool:
        """Block until the current recomputation finishes (or timeout);
        True when every variable is Ready for the current epoch."""
        with self._cond:
            ok = self._cond.wait_for(lambda: not self.computing, timeout)
            return ok and len(self._ready) == len(self.compiled.vmap.names)

    # -- event stream

    def subscribe(self) -> SimpleQueue:
        """Queue of events, starting with a replay of the current epoch's
        Ready set so late subscribers converge immediately."""
        with self._cond:
            q: SimpleQueue = SimpleQueue()
            q.put({"type": "epoch", "epoch": self.epoch})
            for name, dom in self._ready.items():
                q.put(_ready_event(self.epoch, name, dom))
            if not self.computing:
                q.put({"type": "complete", "epoch": self.epoch})
            self._subscribers.append(q)
            return q

    def unsubscribe(self, q: SimpleQueue) -> None:
        with self._cond:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _push_event(self, event: dict) -> None:
        # caller holds self._cond
        for q in self._subscribers:
            q.put(event)

    # -- mutations

    def post_decision(self, variable: str, restriction: Restriction) -> Decision:
        with self._op:
            with self._cond:
                if variable not in self.compiled.vmap.feature_vars and \
                        variable not in self.compiled.vmap.attr_vars:
                    raise DecisionRejected(UNKNOWN_VARIABLE, variable)
                ready_dom = self._ready.get(variable)
                if ready_dom is None:
                    raise DecisionRejected(
                        VARIABLE_PENDING,
                        f"{variable} has no consequences yet for epoch {self.epoch}")
                if restriction.allowed_within(ready_dom).is_empty:
                    raise DecisionRejected(
                        EMPTY_INTERSECTION,
                        f"{restriction.kind} on {variable} excludes every valid value")
            self._cancel_inflight()
            var = self.compiled.vmap.var_of(variable)
            with self._solver_lock:
                for c in restriction.constraints(var):
                    st = self.compiled.solver.post(c)
                    if st is not Status.CONSISTENT:
                        raise FdConfigError(
                            "internal: accepted decision made the store infeasible")
            decision = Decision(self._next_decision_id, variable, restriction,
                                time.time())
            self._next_decision_id += 1
            with self._cond:
                self.decisions.append(decision)
                self._bump_epoch()
            self._start_recompute()
            return decision

    def retract_decision(self, decision_id: int) -> None:
        with self._op:
            with self._cond:
                survivors = [d for d in self.decisions if d.id != decision_id]
                if len(survivors) == len(self.decisions):
                    raise UnknownDecisionError(f"no decision with id {decision_id}")
            self._cancel_inflight()
            with self._solver_lock:
                solver = self.compiled.solver
                solver.reset_to(self.ground)
                for d in survivors:
                    var = self.compiled.vmap.var_of(d.variable)
                    for c in d.restriction.constraints(var):
                        st = solver.post(c)
                        if st is not Status.CONSISTENT:
                            raise FdConfigError(
                                "internal: replay of remaining decisions failed")
            with self._cond:
                self.decisions = survivors
                self._bump_epoch()
            self._start_recompute()

    def close(self) -> None:
        with self._op:
            self._cancel_inflight()

    def _bump_epoch(self) -> None:
        # caller holds self._cond
        self.epoch += 1
        self._ready = {}
        self.computing = True
        self.last_error = None
        self._push_event({"type": "epoch", "epoch": self.epoch})
        self._cond.notify_all()

    def _cancel_inflight(self) -> None:
        if self._cancel is not None:
            self._cancel.set()
        worker = self._worker
        if worker is not None and worker.is_alive():
            worker.join()
        self._worker = None
        self._cancel = None

    def _start_recompute(self) -> None:
        token = CancelToken()
        self._cancel = token
        epoch = self.epoch
        if self.inline:
            self._recompute(epoch, token)
        else:
            t = threading.Thread(target=self._recompute, args=(epoch, token),
                                 name=f"fdconfig-session-{self.id[:8]}", daemon=True)
            self._worker = t
            t.start()

    def _recompute(self, epoch: int, token: CancelToken) -> None:
        def emit(name: str, dom: Domain) -> None:
            with self._cond:
                if self.epoch != epoch or token.is_set():
                    return
                self._ready[name] = dom
                self._push_event(_ready_event(epoch, name, dom))
                self._cond.notify_all()

        with self._solver_lock:
            if token.is_set():
                return
            try:
                result = valid_domains_probe(self.compiled, cancel=token, emit=emit)
            except ResourceLimitError as exc:
                with self._cond:
                    if self.epoch == epoch:
                        self.computing = False
                        self.last_error = str(exc)
                        self._cond.notify_all()
                return
        with self._cond:
            if self.epoch == epoch and not token.is_set() and result.complete:
                self.computing = False
                self._push_event({"type": "complete", "epoch": epoch})
                self._cond.notify_all()


def _ready_event(epoch: int, name: str, dom: Domain) -> dict:
    return {"type": "variableReady", "epoch": epoch, "variable": name,
            "values": [[lo, hi] for lo, hi in dom.ivs]}


def create_session(m: FeatureModel,
                   node_budget: int = DEFAULT_NODE_BUDGET,
                   inline_recompute: bool = False) -> Session:
    """Compile, pre-process and wrap a model in a fresh session.

    Raises InfeasibleModelError when the model has no products,
    TranslateError when it does not validate.
    """
    cm = compile_model(m, node_budget=node_budget)
    cm.solver.propagate()
    conseq = model_consequences(cm)
    cm.ground_mark = cm.solver.mark("ground")
    return Session(cm, conseq, inline_recompute=inline_recompute)


# -- transcripts (CLI replay format)


def apply_transcript(session: Session, steps: list[dict],
                     timeout: float = 60.0) -> None:
    """Apply decision/retraction steps in order. Decisions are objects
    {"variable":..., "restriction": {...}}; retractions are
    {"retract": i} where i is the index of an earlier decision step.
    Raises ValueError naming the failing step."""
    decision_ids: dict[int, int] = {}  # transcript index -> decision id
    for idx, step in enumerate(steps):
        if not session.wait_ready(timeout):
            raise ValueError(f"step {idx}: timed out waiting for consequences")
        if "retract" in step:
            target = step["retract"]
            if target not in decision_ids:
                raise ValueError(f"step {idx}: no decision at transcript index {target}")
            try:
                session.retract_decision(decision_ids.pop(target))
            except UnknownDecisionError as exc:
                raise ValueError(f"step {idx}: {exc}") from exc
            continue
        try:
            restriction = Restriction.from_json_dict(step["restriction"])
            decision = session.post_decision(step["variable"], restriction)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"step {idx}: malformed step ({exc})") from exc
        except DecisionRejected as exc:
            raise ValueError(f"step {idx}: rejected ({exc.reason})") from exc
        decision_ids[idx] = decision.id
    if not session.wait_ready(timeout):
        raise ValueError("timed out waiting for final consequences")
