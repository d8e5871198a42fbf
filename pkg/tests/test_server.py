"""HTTP API: endpoint contracts, error codes, event streams, and
equivalence with direct session-module calls."""

import json
import socket
import threading
import time

import httpx
import pytest
import uvicorn

from fdconfig import create_session
from fdconfig.server import create_app
from fdconfig.session import Restriction

from conftest import M1_CONSEQUENCES, M1_AFTER_HD, M1_TEXT

WAIT = 30.0


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class LiveServer:
    def __init__(self, **app_kwargs):
        self.port = free_port()
        config = uvicorn.Config(create_app(**app_kwargs), host="127.0.0.1",
                                port=self.port, log_level="error")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self):
        self.thread.start()
        deadline = time.time() + WAIT
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        self.base = f"http://127.0.0.1:{self.port}"
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(WAIT)


@pytest.fixture(scope="module")
def live():
    with LiveServer() as srv:
        yield srv


def values_set(values):
    return {v for lo, hi in values for v in range(lo, hi + 1)}


def snapshot_ready(snap: dict):
    return {name: values_set(st["values"])
            for name, st in snap["variables"].items() if st["ready"]}


def wait_all_ready(client, base, sid):
    deadline = time.time() + WAIT
    while True:
        snap = client.get(f"{base}/sessions/{sid}").json()
        if not snap["computing"]:
            return snap
        if time.time() > deadline:
            raise TimeoutError("session never became ready")
        time.sleep(0.01)


def make_session(client, base, text=M1_TEXT):
    r = client.post(f"{base}/models", content=text.encode())
    assert r.status_code == 201, r.text
    mid = r.json()["modelId"]
    r = client.post(f"{base}/sessions", json={"modelId": mid})
    assert r.status_code == 201, r.text
    return r.json()["sessionId"], r.json()["state"]


def test_post_model_ok(live):
    with httpx.Client() as c:
        r = c.post(f"{live.base}/models", content=M1_TEXT.encode())
        assert r.status_code == 201
        body = r.json()
        conseq = body["modelConsequences"]
        assert conseq["complete"] is True
        got = {n: values_set(v["values"]) for n, v in conseq["variables"].items()}
        assert got == M1_CONSEQUENCES


def test_post_model_errors(live):
    with httpx.Client() as c:
        r = c.post(f"{live.base}/models", content=b"")
        assert r.status_code == 422
        assert r.json()["code"] == "parse_error"

        r = c.post(f"{live.base}/models", content=b"feature A { mandatory A }")
        assert r.status_code == 422
        assert r.json()["code"] == "parse_error"
        assert "line" in r.json()["details"]

        bad = "feature A { optional B }\nconstraint A && !A"
        r = c.post(f"{live.base}/models", content=bad.encode())
        assert r.status_code == 422
        assert r.json()["code"] == "infeasible_model"


def test_session_lifecycle(live):
    with httpx.Client() as c:
        sid, state = make_session(c, live.base)
        assert state["epoch"] == 0
        assert not state["computing"]
        assert snapshot_ready(state) == M1_CONSEQUENCES

        r = c.get(f"{live.base}/sessions/{sid}")
        assert r.status_code == 200
        assert r.json() == state

        r = c.get(f"{live.base}/sessions/zzz")
        assert r.status_code == 404
        assert r.json()["code"] == "unknown_session"


def test_decisions_roundtrip(live):
    with httpx.Client() as c:
        sid, _ = make_session(c, live.base)
        r = c.post(f"{live.base}/sessions/{sid}/decisions",
                   json={"variable": "HD",
                         "restriction": {"kind": "assign", "value": 1}})
        assert r.status_code == 201
        did = r.json()["decisionId"]
        assert r.json()["epoch"] == 1

        snap = wait_all_ready(c, live.base, sid)
        assert snapshot_ready(snap) == M1_AFTER_HD
        assert [d["id"] for d in snap["decisions"]] == [did]

        r = c.delete(f"{live.base}/sessions/{sid}/decisions/{did}")
        assert r.status_code == 204
        snap = wait_all_ready(c, live.base, sid)
        assert snap["decisions"] == []
        assert snapshot_ready(snap) == M1_CONSEQUENCES

        r = c.delete(f"{live.base}/sessions/{sid}/decisions/{did}")
        assert r.status_code == 404
        assert r.json()["code"] == "unknown_decision"


def test_decision_rejections(live):
    with httpx.Client() as c:
        sid, _ = make_session(c, live.base)
        r = c.post(f"{live.base}/sessions/{sid}/decisions",
                   json={"variable": "Phone",
                         "restriction": {"kind": "assign", "value": 0}})
        assert r.status_code == 409
        assert r.json()["code"] == "empty_intersection"

        r = c.post(f"{live.base}/sessions/{sid}/decisions",
                   json={"variable": "Nope",
                         "restriction": {"kind": "assign", "value": 1}})
        assert r.status_code == 404
        assert r.json()["code"] == "unknown_variable"

        r = c.post(f"{live.base}/sessions/{sid}/decisions",
                   json={"variable": "price",
                         "restriction": {"kind": "range", "lo": 3, "hi": 1}})
        assert r.status_code == 422
        assert r.json()["code"] == "invalid_restriction"


def read_events(response, sid_done):
    """Collect NDJSON events until the predicate says stop."""
    events = []
    for line in response.iter_lines():
        if not line.strip():
            continue  # keep-alive
        ev = json.loads(line)
        events.append(ev)
        if sid_done(events):
            break
    return events


def test_event_stream(live):
    with httpx.Client() as c:
        sid, _ = make_session(c, live.base)
        with c.stream("GET", f"{live.base}/sessions/{sid}/events",
                      timeout=WAIT) as resp:
            events = read_events(
                resp, lambda evs: evs[-1].get("type") == "complete")
        assert events[0] == {"type": "epoch", "epoch": 0}
        ready = {ev["variable"]: values_set(ev["values"])
                 for ev in events[1:-1]}
        assert ready == M1_CONSEQUENCES
        assert events[-1] == {"type": "complete", "epoch": 0}


def test_event_stream_follows_decision(live):
    with httpx.Client() as c:
        sid, _ = make_session(c, live.base)
        with c.stream("GET", f"{live.base}/sessions/{sid}/events",
                      timeout=WAIT) as resp:
            it = resp.iter_lines()

            def next_event():
                for line in it:
                    if line.strip():
                        return json.loads(line)
                raise AssertionError("stream ended")

            while next_event().get("type") != "complete":
                pass
            r = c.post(f"{live.base}/sessions/{sid}/decisions",
                       json={"variable": "HD",
                             "restriction": {"kind": "assign", "value": 1}})
            assert r.status_code == 201
            ev = next_event()
            assert ev == {"type": "epoch", "epoch": 1}
            ready = {}
            while True:
                ev = next_event()
                if ev["type"] == "complete":
                    assert ev["epoch"] == 1
                    break
                assert ev["epoch"] == 1
                ready[ev["variable"]] = values_set(ev["values"])
            # events for the completed epoch match the snapshot
            snap = wait_all_ready(c, live.base, sid)
            assert ready == snapshot_ready(snap) == M1_AFTER_HD


def test_http_equals_direct_session_calls(live, m1):
    script = [
        ("post", "HD", Restriction.assign(1)),
        ("post", "price", Restriction.range(2, 3)),
        ("retract", 0, None),
        ("post", "Basic", Restriction.exclude(1)),
    ]
    direct = create_session(m1, inline_recompute=True)
    ids = {}
    for i, (kind, arg, r) in enumerate(script):
        if kind == "post":
            ids[i] = direct.post_decision(arg, r).id
        else:
            direct.retract_decision(ids[arg])

    with httpx.Client() as c:
        sid, _ = make_session(c, live.base)
        hids = {}
        for i, (kind, arg, r) in enumerate(script):
            wait_all_ready(c, live.base, sid)
            if kind == "post":
                resp = c.post(f"{live.base}/sessions/{sid}/decisions",
                              json={"variable": arg,
                                    "restriction": r.to_json_dict()})
                assert resp.status_code == 201
                hids[i] = resp.json()["decisionId"]
            else:
                resp = c.delete(
                    f"{live.base}/sessions/{sid}/decisions/{hids[arg]}")
                assert resp.status_code == 204
        snap = wait_all_ready(c, live.base, sid)

    direct_snap = direct.get_state().to_json_dict()
    assert snap["epoch"] == direct_snap["epoch"]
    assert snap["variables"] == direct_snap["variables"]
    assert [(d["variable"], d["restriction"]) for d in snap["decisions"]] == \
        [(d["variable"], d["restriction"]) for d in direct_snap["decisions"]]
    direct.close()


def test_cli_replay_equals_server_driven(live, tmp_path, capsys):
    """The replay command and the HTTP API agree on the same transcript."""
    from fdconfig.cli import main as cli_main

    steps = [
        {"variable": "HD", "restriction": {"kind": "assign", "value": 1}},
        {"variable": "price", "restriction": {"kind": "range", "lo": 2, "hi": 3}},
        {"retract": 0},
    ]
    model_path = tmp_path / "m1.fm"
    model_path.write_text(M1_TEXT)
    transcript_path = tmp_path / "steps.json"
    transcript_path.write_text(json.dumps(steps))
    assert cli_main(["replay", str(model_path), str(transcript_path)]) == 0
    cli_snap = json.loads(capsys.readouterr().out)

    with httpx.Client() as c:
        sid, _ = make_session(c, live.base)
        ids = {}
        for i, step in enumerate(steps):
            wait_all_ready(c, live.base, sid)
            if "retract" in step:
                r = c.delete(f"{live.base}/sessions/{sid}/decisions"
                             f"/{ids[step['retract']]}")
                assert r.status_code == 204
            else:
                r = c.post(f"{live.base}/sessions/{sid}/decisions", json=step)
                assert r.status_code == 201
                ids[i] = r.json()["decisionId"]
        http_snap = wait_all_ready(c, live.base, sid)

    assert cli_snap == http_snap


def test_session_eviction():
    with LiveServer(session_cap=2) as srv:
        with httpx.Client() as c:
            r = c.post(f"{srv.base}/models", content=M1_TEXT.encode())
            mid = r.json()["modelId"]
            sids = []
            for _ in range(3):
                r = c.post(f"{srv.base}/sessions", json={"modelId": mid})
                sids.append(r.json()["sessionId"])
            assert c.get(f"{srv.base}/sessions/{sids[0]}").status_code == 404
            assert c.get(f"{srv.base}/sessions/{sids[1]}").status_code == 200
            assert c.get(f"{srv.base}/sessions/{sids[2]}").status_code == 200
