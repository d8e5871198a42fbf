"""Valid-domain computation: both methods, cancellation, analyses."""

import random

import pytest

from fdconfig import (
    analyses,
    compile_model,
    model_consequences,
    parse_model,
    valid_domains_enumerate,
    valid_domains_probe,
)

from fdconfig.errors import InfeasibleModelError
from fdconfig.solver import CancelToken, LinearCmp

from conftest import M1_CONSEQUENCES
from oracle import bf_valid_domains, domains_of, random_model


class TripAfter(CancelToken):
    """Cancellation token that fires after n polls."""

    def __init__(self, n: int):
        super().__init__()
        self.left = n

    def is_set(self) -> bool:
        if super().is_set():
            return True
        self.left -= 1
        if self.left <= 0:
            self.set()
            return True
        return False


def test_m1_enumerate(m1_compiled):
    c = valid_domains_enumerate(m1_compiled)
    assert c.complete
    assert c.solution_count == 7
    assert {k: set(v) for k, v in c.variables.items()} == M1_CONSEQUENCES


def test_m1_probe_equals_enumerate(m1_compiled):
    en = valid_domains_enumerate(m1_compiled)
    pr = valid_domains_probe(m1_compiled)
    assert pr.complete
    assert pr.variables == en.variables
    assert list(pr.variables) == list(en.variables)  # same canonical order


def test_unsatisfiable_model():
    m = parse_model("feature A { optional B }\nconstraint A && !A")
    cm = compile_model(m)
    en = valid_domains_enumerate(cm)
    assert en.solution_count == 0
    assert all(d.is_empty for d in en.variables.values())
    pr = valid_domains_probe(cm)
    assert pr.complete
    assert pr.variables == en.variables
    with pytest.raises(InfeasibleModelError):
        model_consequences(cm)


def test_decision_narrows_consequences(m1_compiled):
    s = m1_compiled.solver
    hd = m1_compiled.vmap.feature_vars["HD"]
    mark = s.mark()
    s.post(LinearCmp(((hd, 1),), "=", 1))
    c = valid_domains_enumerate(m1_compiled)
    assert c.solution_count == 3
    assert set(c.variables["Basic"]) == {0}
    assert set(c.variables["GPS"]) == {1}
    assert set(c.variables["price"]) == {1, 2, 3}
    s.reset_to(mark)


def test_no_probes_for_fixed_variables(m1_compiled):
    c = valid_domains_probe(m1_compiled)
    # Phone and Screen are singletons after propagation: witnessed by the
    # initial feasibility solution, never probed
    assert c.stats["per_var"]["Phone"] == 0
    assert c.stats["per_var"]["Screen"] == 0


def test_probe_leaves_solver_untouched(m1_compiled):
    s = m1_compiled.solver
    before = (s.domains_snapshot(), s.trail_length)
    valid_domains_probe(m1_compiled)
    assert (s.domains_snapshot(), s.trail_length) == before


def test_cancelled_probe_is_prefix(m1_compiled):
    full = valid_domains_probe(m1_compiled)
    emitted = []
    token = TripAfter(3)
    partial = valid_domains_probe(m1_compiled, cancel=token,
                                  emit=lambda n, d: emitted.append(n))
    assert not partial.complete and partial.cancelled
    assert list(partial.variables) == emitted
    order = list(full.variables)
    assert emitted == order[:len(emitted)]  # emission order is canonical
    for name in emitted:
        assert partial.variables[name] == full.variables[name]


def test_cancel_prefix_property_random():
    rng = random.Random(4242)
    checked = 0
    for _ in range(40):
        m = random_model(rng)
        cm = compile_model(m)
        full = valid_domains_probe(cm)
        assert full.complete
        n = rng.randint(1, 20)
        cm2 = compile_model(m)
        partial = valid_domains_probe(cm2, cancel=TripAfter(n))
        for name, dom in partial.variables.items():
            assert dom == full.variables[name]
        checked += len(partial.variables)
    assert checked  # some prefixes were non-trivial


def test_enumerate_node_budget_marks_incomplete(m1):
    from fdconfig import compile_model as cc

    cm = cc(m1, node_budget=5)
    c = valid_domains_enumerate(cm)
    assert not c.complete
    assert c.solution_count is None
    full = valid_domains_enumerate(compile_model(m1))
    for name, dom in c.variables.items():  # partial union is a subset
        assert set(dom) <= set(full.variables[name])


def test_enumerate_limit_marks_incomplete(m1_compiled):
    c = valid_domains_enumerate(m1_compiled, limit=3)
    assert not c.complete
    assert c.solution_count is None


def test_methods_equal_on_random_models():
    rng = random.Random(777)
    for _ in range(60):
        m = random_model(rng)
        cm = compile_model(m)
        en = valid_domains_enumerate(cm)
        pr = valid_domains_probe(cm)
        bf = domains_of(bf_valid_domains(m))
        assert pr.variables == en.variables
        assert {k: v for k, v in en.variables.items()} == bf


def test_model_consequences_cached(m1_compiled):
    a = model_consequences(m1_compiled)
    b = model_consequences(m1_compiled)
    assert a is b
    assert {k: set(v) for k, v in a.variables.items()} == M1_CONSEQUENCES


def test_analyses_m1(m1_compiled):
    res = analyses(m1_compiled)
    assert res.dead == frozenset()
    assert res.core == {"Phone", "Screen"}
    assert res.count == 7


def test_analyses_root_always_core():
    m = parse_model("feature R { optional A }")
    res = analyses(compile_model(m))
    assert "R" in res.core


def test_analyses_dead_feature():
    m = parse_model("feature R { optional A }\nconstraint !A")
    res = analyses(compile_model(m))
    assert res.dead == {"A"}
    assert res.count == 1


def test_json_shape(m1_compiled):
    c = valid_domains_enumerate(m1_compiled)
    d = c.to_json_dict()
    assert d["complete"] is True
    assert d["solutionCount"] == 7
    assert d["variables"]["price"] == {"values": [[0, 3]]}
    assert list(d["variables"]) == ["Phone", "Screen", "Basic", "HD", "GPS", "price"]
    p = valid_domains_probe(m1_compiled).to_json_dict()
    assert p["solutionCount"] is None
    assert p["variables"] == d["variables"]
