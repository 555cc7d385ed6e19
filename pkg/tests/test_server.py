import json

import pytest
from fastapi.testclient import TestClient

from kinetobench.server import make_app
from kinetobench.session import PROTOCOL_VERSION


@pytest.fixture()
def client(session_config):
    app = make_app(session_config)
    with TestClient(app) as c:
        yield c


def hello_frame(version=PROTOCOL_VERSION):
    return {"kind": "hello", "version": version}


def recv_until(ws, kind, limit=50):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg.get("kind") == kind:
            return msg
    raise AssertionError(f"no {kind} frame within {limit} messages")


class TestHandshake:
    def test_hello_roundtrip(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps(hello_frame()))
            reply = json.loads(ws.receive_text())
            assert reply["kind"] == "hello"
            assert reply["version"] == PROTOCOL_VERSION
            assert reply["model"]["kind"] == "five_bar"
            assert reply["model_hash"]
            cfg = reply["session_config"]
            assert cfg["rates"]["haptic_hz"] == 1000
            assert cfg["force_decimation"] == 1000 // 60

    def test_version_mismatch_rejected(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps(hello_frame(version=99)))
            reply = json.loads(ws.receive_text())
            assert reply["kind"] == "error"
            assert reply["code"] == "bad_version"
            assert "99" in reply["reason"]

    def test_non_hello_first_frame_rejected(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"kind": "pointer", "seq": 1, "t": 0, "x": 0, "y": 0}))
            reply = json.loads(ws.receive_text())
            assert reply["kind"] == "error"
            assert reply["code"] == "malformed"


class TestStreaming:
    def test_snapshots_flow(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps(hello_frame()))
            json.loads(ws.receive_text())  # hello reply
            snap = recv_until(ws, "snapshot")
            assert "tick" in snap and "force" in snap and "indices" in snap

    def test_pointer_moves_target(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps(hello_frame()))
            json.loads(ws.receive_text())
            ws.send_text(json.dumps(
                {"kind": "pointer", "seq": 1, "t": 0, "x": 4.0, "y": 6.0}
            ))
            for _ in range(100):
                snap = recv_until(ws, "snapshot")
                if snap["target"] == [4.0, 6.0]:
                    break
            else:
                raise AssertionError("pointer never reached the engine")

    def test_set_mode(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps(hello_frame()))
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"kind": "set_mode", "s1": "+", "s2": "-"}))
            for _ in range(100):
                snap = recv_until(ws, "snapshot")
                if snap["posture"] and snap["posture"]["mode"] == "+-":
                    break
            else:
                raise AssertionError("mode change never took effect")

    def test_malformed_frame_closes(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(json.dumps(hello_frame()))
            json.loads(ws.receive_text())
            ws.send_text("{broken json")
            reply = recv_until(ws, "error")
            assert reply["code"] == "malformed"


class TestMultiClient:
    def test_observer_is_read_only(self, client):
        with client.websocket_connect("/ws") as w1, client.websocket_connect("/ws") as w2:
            w1.send_text(json.dumps(hello_frame()))
            json.loads(w1.receive_text())
            w2.send_text(json.dumps(hello_frame()))
            json.loads(w2.receive_text())
            w2.send_text(json.dumps(
                {"kind": "pointer", "seq": 1, "t": 0, "x": 4.0, "y": 6.0}
            ))
            reply = recv_until(w2, "error")
            assert reply["code"] == "not_driver"

    def test_both_receive_snapshots(self, client):
        with client.websocket_connect("/ws") as w1, client.websocket_connect("/ws") as w2:
            w1.send_text(json.dumps(hello_frame()))
            json.loads(w1.receive_text())
            w2.send_text(json.dumps(hello_frame()))
            json.loads(w2.receive_text())
            s1 = recv_until(w1, "snapshot")
            s2 = recv_until(w2, "snapshot")
            assert set(s1) == set(s2)  # identical frame schema on both streams
