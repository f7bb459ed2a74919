import hashlib
import json

import pytest
from fastapi.testclient import TestClient

from modalflow.backends import default_registry
from modalflow.flowdocs import bundled_flow_doc
from modalflow.flows import Engine, RunStatus, parse_flow_spec
from modalflow.media import Artifact, content_hash
from modalflow.mocks import mock_text_to_image
from modalflow.remote import decode_payload, encode_payload
from modalflow.service import ServiceConfig, create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(ServiceConfig(data_dir=tmp_path / "data", default_user="tester"))
    with TestClient(app) as c:
        yield c


def style_image_obj(seed=4):
    return encode_payload(mock_text_to_image("swirl", seed=seed, width=64, height=64))


def post_flow(client, name):
    resp = client.post("/flows", content=bundled_flow_doc(name))
    assert resp.status_code == 200, resp.text
    return resp.json()["flow_id"]


class TestFlows:
    def test_bundled_flow_accepted(self, client):
        flow_id = post_flow(client, "text-image-style")
        assert flow_id.startswith("flow-")
        doc = client.get(f"/flows/{flow_id}").json()
        assert doc["name"] == "text-image-style"

    def test_cyclic_flow_gets_report(self, client):
        doc = {
            "name": "cyclic",
            "nodes": [
                {"id": "a", "kind": "TextGen"},
                {"id": "b", "kind": "Chat"},
            ],
            "edges": [["a", "out", "b", "in"], ["b", "out", "a", "in"]],
            "inputs": [],
            "outputs": ["b"],
        }
        resp = client.post("/flows", content=json.dumps(doc))
        assert resp.status_code == 422
        kinds = {i["kind"] for i in resp.json()["report"]}
        assert "CycleDetected" in kinds

    def test_malformed_body(self, client):
        resp = client.post("/flows", content="{nope")
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "bad_request"

    def test_validate_endpoint_does_not_store(self, client):
        resp = client.post("/flows/validate", content=bundled_flow_doc("text-image-style"))
        assert resp.status_code == 200
        assert resp.json() == {"report": []}
        assert client.get("/flows").json()["flows"] == []
        bad = client.post("/flows/validate", content="{broken")
        assert bad.json()["report"][0]["kind"] == "Syntax"

    def test_stagekinds_listed(self, client):
        kinds = client.get("/stagekinds").json()
        by_name = {k["kind"]: k for k in kinds}
        assert len(by_name) == 12
        assert by_name["StyleTransfer"]["inputs"] == [["content", "image"], ["style", "image"]]
        assert by_name["Tts"]["checkpointable"] is False


class TestRuns:
    def test_checkpoint_free_run_completes(self, client):
        doc = {
            "name": "nochk",
            "nodes": [{"id": "a", "kind": "TextGen", "params": {"length": 12}}],
            "edges": [],
            "inputs": [["a", "in", "text"]],
            "outputs": ["a"],
        }
        resp = client.post("/flows", content=json.dumps(doc))
        flow_id = resp.json()["flow_id"]
        run = client.post(
            "/runs",
            json={
                "flow_id": flow_id,
                "inputs": {"a.in": {"modality": "text", "encoding": "utf8", "data": "go"}},
            },
        ).json()
        assert run["status"] == "completed"
        assert "a" in run["artifacts"]
        assert run["registered"]["a"].startswith("maid://tester/text/")

    def test_unknown_flow(self, client):
        resp = client.post("/runs", json={"flow_id": "flow-999", "inputs": {}})
        assert resp.status_code == 404

    def test_checkpoint_cycle_via_endpoints(self, client):
        flow_id = post_flow(client, "image-story-av")
        run = client.post(
            "/runs",
            json={
                "flow_id": flow_id,
                "inputs": {"caption.in": encode_payload(mock_text_to_image("bay", seed=9))},
            },
        ).json()
        assert run["status"] == "awaiting_edit"
        assert run["awaiting_node"] == "story"
        pending = run["pending"]["story"]
        edited = {"modality": "text", "encoding": "utf8", "data": pending["data"] + " and then"}
        done = client.post(
            f"/runs/{run['run_id']}/checkpoint",
            json={"node_id": "story", "artifact": edited},
        ).json()
        assert done["status"] == "completed"
        assert set(done["registered"]) == {"story", "narration", "clip"}
        # the committed story is parented on the raw pending output
        assert done["artifacts"]["story"]["parent_ids"] == [pending["artifact_id"]]

    def test_checkpoint_after_completion_conflicts(self, client):
        flow_id = post_flow(client, "image-story-av")
        run = client.post(
            "/runs",
            json={
                "flow_id": flow_id,
                "inputs": {"caption.in": encode_payload(mock_text_to_image("bay", seed=9))},
            },
        ).json()
        pending = run["pending"]["story"]
        keep = {"modality": "text", "encoding": "utf8", "data": pending["data"]}
        client.post(
            f"/runs/{run['run_id']}/checkpoint", json={"node_id": "story", "artifact": keep}
        )
        again = client.post(
            f"/runs/{run['run_id']}/checkpoint", json={"node_id": "story", "artifact": keep}
        )
        assert again.status_code == 409
        assert again.json()["error"]["code"] == "conflict"

    def test_get_run_view(self, client):
        flow_id = post_flow(client, "image-story-av")
        run = client.post(
            "/runs",
            json={
                "flow_id": flow_id,
                "inputs": {"caption.in": encode_payload(mock_text_to_image("bay", seed=1))},
            },
        ).json()
        view = client.get(f"/runs/{run['run_id']}").json()
        assert view["status"] == "awaiting_edit"
        assert view["awaiting_node"] == "story"
        assert client.get("/runs/zzz").status_code == 404

    def test_thin_adapter_matches_direct_calls(self, client):
        """The endpoint path and the module path produce identical payload bytes."""
        flow_id = post_flow(client, "text-image-style")
        text_in = {"modality": "text", "encoding": "utf8", "data": "a quiet street"}
        style_in = style_image_obj()
        run = client.post(
            "/runs",
            json={"flow_id": flow_id, "inputs": {"draft.in": text_in, "styled.style": style_in}},
        ).json()
        pending = run["pending"]["draft"]
        done = client.post(
            f"/runs/{run['run_id']}/checkpoint",
            json={
                "node_id": "draft",
                "artifact": {"modality": "text", "encoding": "utf8", "data": pending["data"]},
            },
        ).json()
        via_api = content_hash(decode_payload(done["artifacts"]["styled"]))

        spec = parse_flow_spec(bundled_flow_doc("text-image-style"))
        engine = Engine(default_registry())
        direct = engine.start_run(
            spec,
            {
                ("draft", "in"): Artifact.new("a quiet street"),
                ("styled", "style"): Artifact.new(decode_payload(style_image_obj())),
            },
        )
        direct = engine.submit_checkpoint_edit(
            direct.run_id, "draft", direct.pending["draft"]
        )
        assert direct.status is RunStatus.COMPLETED
        assert via_api == content_hash(direct.artifacts["styled"])


class TestRegistry:
    def test_register_lookup_search(self, client):
        art = {"modality": "text", "encoding": "utf8", "data": "the lantern festival"}
        record = client.post("/registry/register", json={"artifact": art}).json()
        uri = record["uri"]
        assert uri.startswith("maid://tester/text/")
        got = client.get(f"/registry/{uri}")
        assert got.status_code == 200
        assert got.json() == record
        via_query = client.get("/registry/record", params={"uri": uri})
        assert via_query.json() == record
        res = client.post("/registry/search", json={"artifact": art, "k": 1}).json()
        assert res["results"][0]["uri"] == uri
        assert res["results"][0]["score"] == pytest.approx(1.0, abs=1e-6)

    def test_unknown_uri_404(self, client):
        resp = client.get("/registry/maid://nobody/text/19700101/0-0")
        assert resp.status_code == 404

    def test_search_empty_segment_404(self, client):
        art = {"modality": "text", "encoding": "utf8", "data": "x"}
        resp = client.post("/registry/search", json={"artifact": art, "k": 1})
        assert resp.status_code == 404

    def test_search_masked_image_finds_original(self, client):
        img = mock_text_to_image("target", seed=5, width=64, height=64)
        record = client.post(
            "/registry/register", json={"artifact": encode_payload(img)}
        ).json()
        for j in range(5):
            other = mock_text_to_image(f"other {j}", seed=100 + j, width=64, height=64)
            client.post("/registry/register", json={"artifact": encode_payload(other)})
        arr = img.to_array().copy()
        arr[10:42, 8:40, :] = 0
        from modalflow.media import ImageBuf

        masked = ImageBuf.from_array(arr)
        res = client.post(
            "/registry/search", json={"artifact": encode_payload(masked), "k": 3}
        ).json()
        assert res["results"][0]["uri"] == record["uri"]

    def test_get_endpoints_do_not_mutate(self, client, tmp_path):
        art = {"modality": "text", "encoding": "utf8", "data": "stable state"}
        record = client.post("/registry/register", json={"artifact": art}).json()

        def state_digest():
            reg = (tmp_path / "data" / "registry.jsonl").read_bytes()
            vec = (tmp_path / "data" / "vectors.urix").read_bytes()
            return hashlib.sha256(reg + vec).hexdigest()

        before = state_digest()
        client.get(f"/registry/{record['uri']}")
        client.get("/health")
        client.get("/stagekinds")
        client.get("/flows")
        assert state_digest() == before


class TestExperimentEndpoint:
    def test_fig5_csv_has_three_groups(self, client):
        resp = client.get("/experiments/fig5", params={"n": 6, "m": 6, "seed": 1})
        assert resp.status_code == 200
        lines = resp.text.strip().splitlines()
        assert lines[0] == "group,label,x,y,score"
        groups = {line.split(",")[0] for line in lines[1:]}
        assert groups == {"positive", "noise", "negative"}
        assert float(resp.headers["X-Accuracy"]) >= 0.9

    def test_unknown_experiment(self, client):
        assert client.get("/experiments/fig7").status_code == 404
