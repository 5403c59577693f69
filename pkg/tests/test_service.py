"""HTTP endpoints: happy paths plus validation and error mapping."""

import asyncio
from pathlib import Path

import httpx
import numpy as np
import pytest

import paretogen
from paretogen.service import app

TINY_CONFIG = {
    "problem": {"name": "svc2d", "kind": "multiwell", "n": 2, "d": 2,
                "anchors": [[0.0, 0.0], [1.0, 1.0]]},
    "algorithm": "img",
    "schedule": {"T": 4},
    "img": {"N": 2, "M": 2, "tau": 2},
    "seeds": [0],
}


def api(method: str, path: str, json_body=None) -> httpx.Response:
    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://test") as client:
            if method == "get":
                return await client.get(path)
            return await client.post(path, json=json_body)
    return asyncio.run(go())


def test_health():
    resp = api("get", "/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["version"] == paretogen.__version__


def test_runs_endpoint(tmp_path):
    resp = api("post", "/runs", {"config": TINY_CONFIG, "out_dir": str(tmp_path)})
    assert resp.status_code == 200
    body = resp.json()
    assert body["algorithm"] == "img"
    assert body["seeds"] == [0]
    assert body["evaluations_per_seed"] == 8
    assert body["out_dir"] == str(tmp_path)
    run_dir = Path(body["run_dirs"][0])
    assert run_dir == tmp_path / "img" / "seed_0"
    assert (run_dir / "DONE").exists()
    assert body["summary"]["problem"] == "svc2d"


def test_runs_seed_override(tmp_path):
    resp = api("post", "/runs",
               {"config": TINY_CONFIG, "seed": 7, "out_dir": str(tmp_path)})
    assert resp.status_code == 200
    body = resp.json()
    assert body["seeds"] == [7]
    assert body["run_dirs"] == [str(tmp_path / "img" / "seed_7")]


def test_runs_rejects_inconsistent_budget():
    bad = dict(TINY_CONFIG, budget=999)
    resp = api("post", "/runs", {"config": bad})
    # config validation fails while parsing the request body
    assert resp.status_code == 422
    assert "inconsistent" in resp.text


def test_runs_maps_runtime_errors_to_400(tmp_path):
    bad = dict(TINY_CONFIG)
    bad["model"] = {"weights": [1.0], "means": [[0.0, 0.0, 0.0]],
                    "covariances": [[1.0, 1.0, 1.0]]}
    resp = api("post", "/runs", {"config": bad, "out_dir": str(tmp_path)})
    assert resp.status_code == 400
    assert "dimension" in resp.json()["detail"]


@pytest.fixture(scope="module")
def svc_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc-runs")
    resp = api("post", "/runs", {"config": TINY_CONFIG, "out_dir": str(root)})
    assert resp.status_code == 200
    return root


def test_summarize_endpoint(svc_run):
    resp = api("post", "/summarize", {"run_dirs": [str(svc_run)]})
    assert resp.status_code == 200
    body = resp.json()
    assert body["problem"] == "svc2d"
    assert body["checkpoints"] == [1, 2, 4, 8]
    assert all(row["algorithm"] == "img" for row in body["table"])


def test_summarize_missing_dirs(tmp_path):
    resp = api("post", "/summarize", {"run_dirs": [str(tmp_path / "nope")]})
    assert resp.status_code == 400


def test_fronts_endpoint(svc_run, tmp_path):
    out_file = tmp_path / "front.csv"
    resp = api("post", "/fronts",
               {"run_dirs": [str(svc_run)], "out_file": str(out_file)})
    assert resp.status_code == 200
    body = resp.json()
    assert body["pooled_sizes"] == {"img": 2}
    assert sum(body["contributions"].values()) == body["front_size"]
    assert out_file.exists()


def test_fronts_missing_dirs(tmp_path):
    resp = api("post", "/fronts", {"run_dirs": [str(tmp_path / "nope")]})
    assert resp.status_code == 400


def test_preferences_endpoint():
    resp = api("post", "/preferences", {"N": 5, "n": 3, "source": "qmc", "seed": 3})
    assert resp.status_code == 200
    body = resp.json()
    vecs = np.asarray(body["vectors"])
    assert vecs.shape == (5, 3)
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-12)
    assert np.all(vecs > 0.0)
    assert body["min_geodesic"] > 0.0


def test_preferences_single_vector_has_no_geodesic():
    resp = api("post", "/preferences", {"N": 1, "n": 4})
    assert resp.status_code == 200
    assert resp.json()["min_geodesic"] is None


def test_preferences_validation():
    assert api("post", "/preferences", {"N": 0, "n": 3}).status_code == 422
    assert api("post", "/preferences", {"N": 4, "n": 3, "source": "grid"}).status_code == 422
    # eps too large for the floor to be feasible
    resp = api("post", "/preferences", {"N": 4, "n": 3, "eps": 1.0})
    assert resp.status_code == 400


def test_hypervolume_endpoint():
    pts = [[-1.0, -0.5], [-0.5, -1.0]]
    resp = api("post", "/hypervolume", {"points": pts})
    assert resp.status_code == 200
    body = resp.json()
    assert body["value"] == pytest.approx(0.75)
    assert body["stderr"] is None

    resp = api("post", "/hypervolume",
               {"points": pts, "method": "mc", "samples": 200_000, "seed": 1})
    body = resp.json()
    assert body["stderr"] is not None
    assert abs(body["value"] - 0.75) < 4 * body["stderr"] + 1e-12


def test_hypervolume_exact_rejects_high_dim():
    pts = [[-1.0, -1.0, -1.0, -1.0]]
    resp = api("post", "/hypervolume", {"points": pts})
    assert resp.status_code == 400


def test_pareto_endpoint():
    pts = [[-1.0, -0.1], [-0.5, -0.5], [-0.2, -0.2], [-0.1, -1.0]]
    resp = api("post", "/pareto", {"points": pts})
    assert resp.status_code == 200
    assert resp.json()["indices"] == [0, 1, 3]
