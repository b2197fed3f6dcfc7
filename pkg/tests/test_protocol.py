import json
import pathlib
import threading
import urllib.request

from lambda_lab.protocol import SessionStore, handle_request, make_server

FIXTURE = pathlib.Path(__file__).parent / "fixtures" / "protocol_golden.json"


def canonical(obj):
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def test_golden_exchange_replays_byte_identically():
    exchange = json.loads(FIXTURE.read_text(encoding="utf-8"))
    store = SessionStore()
    for i, pair in enumerate(exchange):
        response = handle_request(store, pair["request"])
        assert canonical(response) == canonical(pair["response"]), (
            f"exchange {i} ({pair['request']['op']}) diverged"
        )


def test_golden_fixture_covers_core_ops():
    exchange = json.loads(FIXTURE.read_text(encoding="utf-8"))
    ops = {pair["request"]["op"] for pair in exchange}
    assert {"open", "outline", "render", "action", "edit", "hover", "complete"} <= ops
    actions = {
        pair["request"]["action"]["type"]
        for pair in exchange
        if pair["request"]["op"] == "action"
    }
    assert {"beta", "alpha", "focus", "undo", "redo"} <= actions


def test_unknown_op():
    store = SessionStore()
    response = handle_request(store, {"v": 1, "op": "nonsense", "sessionId": "x"})
    assert response["ok"] is False
    assert response["warning"]["code"] == "unknown_op"


def test_version_mismatch_refused():
    store = SessionStore()
    response = handle_request(store, {"v": 2, "op": "outline", "sessionId": "x"})
    assert response["ok"] is False
    assert response["warning"]["code"] == "unsupported_version"


def test_missing_version_refused():
    store = SessionStore()
    response = handle_request(store, {"op": "outline", "sessionId": "x"})
    assert response["warning"]["code"] == "unsupported_version"


def test_unknown_session():
    store = SessionStore()
    response = handle_request(store, {"v": 1, "op": "outline", "sessionId": "nope"})
    assert response["warning"]["code"] == "unknown_session"


def test_open_generates_session_id_when_absent():
    store = SessionStore()
    response = handle_request(store, {"v": 1, "op": "open", "text": "{ x }"})
    assert response["ok"] and response["result"]["sessionId"]


def test_open_accepts_config_text():
    store = SessionStore()
    response = handle_request(
        store,
        {
            "v": 1,
            "op": "open",
            "sessionId": "cfg",
            "text": "{ \\x y. x }",
            "config": "multi_binding_delimiter = whitespace\n",
        },
    )
    assert response["ok"], response
    render = handle_request(
        store, {"v": 1, "op": "render", "sessionId": "cfg", "itemId": "#1"}
    )
    assert render["result"]["render"]["text"] == "λx. λy. x"


def test_open_rejects_bad_config():
    store = SessionStore()
    response = handle_request(
        store,
        {"v": 1, "op": "open", "sessionId": "cfg", "text": "", "config": "zap = 1\n"},
    )
    assert response["warning"]["code"] == "bad_config"


def test_action_source_edit_applies_to_client_buffer():
    store = SessionStore()
    opened = handle_request(
        store, {"v": 1, "op": "open", "sessionId": "s", "text": "{ (λx. x) y }"}
    )
    buffer = opened["result"]["sourceText"]
    acted = handle_request(
        store,
        {
            "v": 1,
            "op": "action",
            "sessionId": "s",
            "itemId": "#1",
            "action": {"type": "beta", "path": ""},
        },
    )
    edit = acted["result"]["sourceEdit"]
    span = edit["span"]
    lines = buffer.split("\n")
    start = sum(len(l) + 1 for l in lines[: span["startLine"] - 1]) + span["startCol"] - 1
    end = sum(len(l) + 1 for l in lines[: span["endLine"] - 1]) + span["endCol"] - 1
    patched = buffer[:start] + edit["newText"] + buffer[end:]
    assert patched == acted["result"]["sourceText"]


def test_http_round_trip():
    server = make_server(0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:

        def rpc(payload):
            req = urllib.request.Request(
                f"http://127.0.0.1:{port}/rpc",
                data=json.dumps(payload).encode("utf-8"),
                headers={"Content-Type": "application/json"},
            )
            with urllib.request.urlopen(req) as resp:
                return json.loads(resp.read().decode("utf-8"))

        opened = rpc({"v": 1, "op": "open", "sessionId": "h", "text": "{ (λx. x) y }"})
        assert opened["ok"]
        model = rpc({"v": 1, "op": "render", "sessionId": "h", "itemId": "#1"})
        assert model["result"]["render"]["redexCount"] == 1
        bad = rpc({"v": 1, "op": "what", "sessionId": "h"})
        assert bad["warning"]["code"] == "unknown_op"
    finally:
        server.shutdown()
        server.server_close()


def test_http_rejects_invalid_json():
    server = make_server(0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        req = urllib.request.Request(
            f"http://127.0.0.1:{port}/rpc", data=b"this is not json"
        )
        with urllib.request.urlopen(req) as resp:
            body = json.loads(resp.read().decode("utf-8"))
        assert body["warning"]["code"] == "bad_request"
    finally:
        server.shutdown()
        server.server_close()
