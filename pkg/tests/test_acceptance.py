"""Acceptance suite: one test per criterion, each prints a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines live.
Every expected value is produced by the brute-force oracle in
tests/oracle.py (direct semantic evaluation, independent of the solver).
"""

import json
import random
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import httpx

from fdconfig import (
    compile_model,
    create_session,
    model_consequences,
    parse_model,
    project,
    valid_domains_enumerate,
    valid_domains_probe,
)
from fdconfig.session import Restriction
from fdconfig.solver import CancelToken

from conftest import M1_CONSEQUENCES, M1_AFTER_HD, M1_TEXT
from oracle import (
    all_products,
    bf_valid_domains,
    domains_of,
    random_feasible_model,
    random_model,
)
from test_server import (
    LiveServer,
    snapshot_ready,
    values_set,
    wait_all_ready,
)

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "benchmarks"))
from bench_kernels import desk_model_text  # noqa: E402


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\n[acceptance] {name}: FAIL")
        raise
    print(f"\n[acceptance] {name}: PASS")


def corpus(seed=20240, size=200):
    rng = random.Random(seed)
    return [random_model(rng) for _ in range(size)]


def as_key(product):
    return tuple(sorted(product.items()))


def ready_map(session):
    snap = session.get_state()
    return {k: set(v.values) for k, v in snap.variables.items() if v.ready}


def test_oracle_equivalence_encoding():
    with criterion("oracle equivalence (encoding), 200 random models"):
        start = time.perf_counter()
        for i, m in enumerate(corpus()):
            cm = compile_model(m)
            got = set()
            cm.solver.enumerate(
                100_000, lambda sol: got.add(as_key(project(sol, cm.vmap))))
            want = {as_key(p) for p in all_products(m)}
            assert got == want, f"model #{i} diverges from the oracle"
        elapsed = time.perf_counter() - start
        assert elapsed < 60, f"corpus took {elapsed:.1f}s (limit 60s)"


def test_oracle_equivalence_consequences():
    with criterion("oracle equivalence (consequences), 200 random models"):
        for i, m in enumerate(corpus()):
            cm = compile_model(m)
            en = valid_domains_enumerate(cm)
            pr = valid_domains_probe(cm)
            bf = domains_of(bf_valid_domains(m))
            assert en.complete and pr.complete, f"model #{i} incomplete"
            assert pr.variables == en.variables, f"model #{i}: probe != enumerate"
            assert dict(en.variables) == bf, f"model #{i}: methods != brute force"


def test_m1_fixture():
    with criterion("M1 fixture: count 7, consequences, after Assign(HD,1)"):
        m = parse_model(M1_TEXT)
        cm = compile_model(m)
        en = valid_domains_enumerate(cm)
        assert en.solution_count == 7
        assert {k: set(v) for k, v in en.variables.items()} == M1_CONSEQUENCES

        oracle_map = bf_valid_domains(m)
        assert oracle_map == M1_CONSEQUENCES  # fixture agrees with the oracle

        s = create_session(m, inline_recompute=True)
        s.post_decision("HD", Restriction.assign(1))
        assert ready_map(s) == M1_AFTER_HD
        assert bf_valid_domains(m, filters={"HD": {1}}) == M1_AFTER_HD
        s.close()


def test_feasibility_guarantee():
    with criterion("feasibility: 1000 decision sequences, zero infeasible"):
        rng = random.Random(1789)
        models = [random_feasible_model(rng, max_features=6, max_attrs=1,
                                        max_attr_span=4, max_cross=2)
                  for _ in range(100)]
        sequences = 0
        while sequences < 1000:
            m = models[sequences % len(models)]
            s = create_session(m, inline_recompute=True)
            for _ in range(rng.randint(1, 3)):
                snap = s.get_state()
                options = [(n, st.values) for n, st in snap.variables.items()
                           if st.ready and not st.values.is_empty]
                name, dom = options[rng.randrange(len(options))]
                values = list(dom)
                roll = rng.random()
                if roll < 0.5 or len(values) == 1:
                    r = Restriction.assign(rng.choice(values))
                elif roll < 0.8:
                    r = Restriction.exclude(rng.choice(values))
                else:
                    lo = rng.choice(values)
                    hi = rng.choice([v for v in values if v >= lo])
                    r = Restriction.range(lo, hi)
                s.post_decision(name, r)
                assert s.compiled.solver.solve_first() is not None, \
                    "store became infeasible after an accepted decision"
            s.close()
            sequences += 1


def test_retraction_equivalence():
    with criterion("retraction equivalence (incl. non-chronological)"):
        rng = random.Random(4321)
        for _ in range(40):
            m = random_feasible_model(rng, max_features=6, max_attrs=1)
            s = create_session(m, inline_recompute=True)
            for _ in range(rng.randint(2, 7)):
                snap = s.get_state()
                live = list(snap.decisions)
                if live and rng.random() < 0.45:
                    s.retract_decision(rng.choice(live).id)  # any position
                    continue
                options = [(n, st.values) for n, st in snap.variables.items()
                           if st.ready and st.values.size > 1]
                if not options:
                    continue
                name, dom = options[rng.randrange(len(options))]
                s.post_decision(name, Restriction.assign(rng.choice(list(dom))))
            survivors = list(s.get_state().decisions)
            fresh = create_session(m, inline_recompute=True)
            for d in survivors:
                fresh.post_decision(d.variable, d.restriction)
            assert s.compiled.solver.domains_snapshot() == \
                fresh.compiled.solver.domains_snapshot()
            assert ready_map(s) == ready_map(fresh)
            assert [d.restriction for d in s.get_state().decisions] == \
                [d.restriction for d in fresh.get_state().decisions]
            fresh.close()
            s.close()


def test_ground_reset_exactness():
    with criterion("ground-state reset restores domains bit-identically"):
        rng = random.Random(9999)
        for _ in range(30):
            m = random_feasible_model(rng, max_features=6, max_attrs=1)
            s = create_session(m, inline_recompute=True)
            ground_snapshot = s.compiled.solver.domains_snapshot()
            for _ in range(rng.randint(1, 5)):
                snap = s.get_state()
                options = [(n, st.values) for n, st in snap.variables.items()
                           if st.ready and not st.values.is_empty]
                name, dom = options[rng.randrange(len(options))]
                s.post_decision(name, Restriction.assign(rng.choice(list(dom))))
            s.compiled.solver.reset_to(s.ground)
            assert s.compiled.solver.domains_snapshot() == ground_snapshot
            s.close()


class TripAfter(CancelToken):
    def __init__(self, n):
        super().__init__()
        self.left = n

    def is_set(self):
        if super().is_set():
            return True
        self.left -= 1
        if self.left <= 0:
            self.set()
            return True
        return False


def test_anytime_consistency():
    with criterion("anytime: cancelled probes are exact prefixes; "
                   "no cross-epoch Ready results"):
        rng = random.Random(31415)
        for _ in range(30):
            m = random_model(rng)
            full = valid_domains_probe(compile_model(m))
            partial = valid_domains_probe(compile_model(m),
                                          cancel=TripAfter(rng.randint(1, 25)))
            order = list(full.variables)
            got = list(partial.variables)
            assert got == order[:len(got)], "emission order broke"
            for name, dom in partial.variables.items():
                assert dom == full.variables[name], \
                    "cancelled entry differs from the uncancelled result"

        # epoch safety under rapid supersession (threaded sessions)
        m = parse_model(M1_TEXT)
        s = create_session(m)
        events = s.subscribe()
        for _ in range(10):
            d = s.post_decision("GPS", Restriction.assign(1))
            s.retract_decision(d.id)
        assert s.wait_ready(30)
        final_epoch = s.get_state().epoch
        seen_epoch = -1
        while True:
            ev = events.get(timeout=30)
            if ev["type"] == "epoch":
                assert ev["epoch"] > seen_epoch
                seen_epoch = ev["epoch"]
            else:
                assert ev["epoch"] == seen_epoch, \
                    f"epoch {ev['epoch']} result surfaced during {seen_epoch}"
            if ev["type"] == "complete" and ev["epoch"] == final_epoch:
                break
        assert ready_map(s) == M1_CONSEQUENCES
        s.close()


def test_desk_scale_performance():
    with criterion("desk scale: 50f/10a consequences < 5s, decision < 2s"):
        m = parse_model(desk_model_text(50, 10))
        cm = compile_model(m)
        t0 = time.perf_counter()
        conseq = model_consequences(cm)
        t_conseq = time.perf_counter() - t0
        assert conseq.complete

        s = create_session(m, inline_recompute=True)
        open_feats = [n for n, st in s.get_state().variables.items()
                      if st.ready and st.values.size > 1]
        t0 = time.perf_counter()
        s.post_decision(open_feats[0], Restriction.assign(1))
        t_decision = time.perf_counter() - t0
        assert s.wait_ready(10)
        s.close()

        print(f"\n[acceptance]   consequences {t_conseq:.2f}s, "
              f"decision {t_decision:.2f}s")
        assert t_conseq < 5.0, f"model consequences took {t_conseq:.2f}s"
        assert t_decision < 2.0, f"decision recompute took {t_decision:.2f}s"


def test_api_equivalence():
    with criterion("API: HTTP interleavings equal direct session calls; "
                   "event stream matches snapshots"):
        script = [
            ("post", "HD", Restriction.assign(1)),
            ("post", "price", Restriction.range(2, 3)),
            ("retract", 0, None),
            ("post", "GPS", Restriction.assign(1)),
            ("retract", 3, None),
            ("post", "Basic", Restriction.exclude(0)),
        ]
        direct = create_session(parse_model(M1_TEXT), inline_recompute=True)
        ids = {}
        for i, (kind, arg, r) in enumerate(script):
            if kind == "post":
                ids[i] = direct.post_decision(arg, r).id
            else:
                direct.retract_decision(ids[arg])
        direct_snap = direct.get_state().to_json_dict()
        direct.close()

        with LiveServer() as srv, httpx.Client() as c:
            r = c.post(f"{srv.base}/models", content=M1_TEXT.encode())
            mid = r.json()["modelId"]
            r = c.post(f"{srv.base}/sessions", json={"modelId": mid})
            sid = r.json()["sessionId"]
            hids = {}
            for i, (kind, arg, restriction) in enumerate(script):
                wait_all_ready(c, srv.base, sid)
                if kind == "post":
                    resp = c.post(
                        f"{srv.base}/sessions/{sid}/decisions",
                        json={"variable": arg,
                              "restriction": restriction.to_json_dict()})
                    assert resp.status_code == 201, resp.text
                    hids[i] = resp.json()["decisionId"]
                else:
                    resp = c.delete(
                        f"{srv.base}/sessions/{sid}/decisions/{hids[arg]}")
                    assert resp.status_code == 204
            snap = wait_all_ready(c, srv.base, sid)
            assert snap["epoch"] == direct_snap["epoch"]
            assert snap["variables"] == direct_snap["variables"]
            assert [d["restriction"] for d in snap["decisions"]] == \
                [d["restriction"] for d in direct_snap["decisions"]]

            # completed epoch's variableReady events equal the snapshot
            ready_from_events = {}
            with c.stream("GET", f"{srv.base}/sessions/{sid}/events",
                          timeout=30) as resp:
                for line in resp.iter_lines():
                    if not line.strip():
                        continue
                    ev = json.loads(line)
                    if ev["type"] == "variableReady":
                        assert ev["epoch"] == snap["epoch"]
                        ready_from_events[ev["variable"]] = \
                            values_set(ev["values"])
                    if ev["type"] == "complete":
                        break
            assert ready_from_events == snapshot_ready(snap)
