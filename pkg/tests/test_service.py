import pytest

from matcomp.cli import ServiceClient

DIAG = {"field": {"kind": "gf2"}, "rows": 2, "cols": 2,
        "entries": [[0, 0, "1"], [1, 1, "1"]]}


@pytest.fixture(scope="module")
def client():
    return ServiceClient(None)


def test_health(client):
    import asyncio

    import httpx

    async def go():
        transport = httpx.ASGITransport(app=client._app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://matcomp.local") as c:
            return await c.get("/health")

    resp = asyncio.run(go())
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_complete_endpoint(client):
    status, body = client.post("/v1/complete", {"matrix": DIAG})
    assert status == 200
    assert body["rank"] == 1 and body["deviation_bound"] == 0
    assert body["cluster_ranks"] == [1, 1]
    assert len(body["matrix"]["entries"]) == 4
    assert body["trace"] is None

    status2, body2 = client.post("/v1/complete", {"matrix": DIAG, "include_trace": True,
                                                  "subdiag": False, "approx_trim": False})
    assert status2 == 200 and body2["trace"]


def test_complete_deterministic_bytes(client):
    import json

    a = client.post("/v1/complete", {"matrix": DIAG})
    b = client.post("/v1/complete", {"matrix": DIAG})
    assert json.dumps(a[1], sort_keys=True) == json.dumps(b[1], sort_keys=True)


def test_decompose_endpoint(client):
    status, body = client.post("/v1/decompose", {"matrix": DIAG})
    assert status == 200
    assert body["junk_rows"] == [] and body["junk_cols"] == []
    assert body["clusters"] == [{"rows": [0], "cols": [0]}, {"rows": [1], "cols": [1]}]

    all_junk = {"field": {"kind": "gf2"}, "rows": 2, "cols": 2, "entries": []}
    status2, body2 = client.post("/v1/decompose", {"matrix": all_junk})
    assert status2 == 200
    assert body2["clusters"] == []
    assert body2["junk_rows"] == [0, 1] and body2["junk_cols"] == [0, 1]


def test_simulate_endpoint(client):
    req = {"n": 6, "k_values": [0, 1, 36], "trials": 4, "seed": 11, "include_raw": True}
    status, body = client.post("/v1/simulate", req)
    assert status == 200
    agg = {row["k"]: row for row in body["aggregated"]}
    assert agg[0]["mean_clusters"] == 0.0
    assert agg[1]["mean_clusters"] == 1.0
    assert agg[36]["mean_clusters"] == 1.0 and agg[36]["stddev"] == 0.0
    assert len(body["raw"]) == 12
    status2, body2 = client.post("/v1/simulate", req)
    assert body == body2


def test_oracle_endpoint(client):
    status, body = client.post("/v1/oracle", {"matrix": DIAG})
    assert status == 200 and body["mr"] == 1
    witness_entries = {(r, c): v for r, c, v in body["witness"]["entries"]}
    assert witness_entries == {(0, 0): "1", (0, 1): "1", (1, 0): "1", (1, 1): "1"}

    big = {"field": {"kind": "gf2"}, "rows": 6, "cols": 6, "entries": []}
    status2, body2 = client.post("/v1/oracle", {"matrix": big})
    assert status2 == 422 and body2["detail"]["code"] == "budget-exceeded"

    rational = {"field": {"kind": "rational"}, "rows": 1, "cols": 1, "entries": []}
    status3, body3 = client.post("/v1/oracle", {"matrix": rational})
    assert status3 == 400 and body3["detail"]["code"] == "unsupported-field"


def test_trim_endpoint(client):
    dup = {"field": {"kind": "rational"}, "rows": 2, "cols": 2,
           "entries": [[0, 0, "1"], [0, 1, "1"], [1, 0, "2"], [1, 1, "2"]]}
    status, body = client.post("/v1/trim", {"matrix": dup})
    assert status == 200
    assert body["core"]["rows"] == 1 and body["core"]["cols"] == 1
    assert body["approximate_count"] == 0
    recs = body["log"]["records"]
    assert recs[0]["axis"] == "col" and recs[0]["index"] == 0
    assert recs[0]["coefficients"] == ["1"]


def test_exact_values_survive_the_wire(client):
    rational = {"field": {"kind": "rational"}, "rows": 2, "cols": 2,
                "entries": [[0, 0, "1/3"], [0, 1, "2/7"], [1, 1, "5/21"]]}
    status, body = client.post("/v1/complete", {"matrix": rational})
    assert status == 200
    values = {(r, c): v for r, c, v in body["matrix"]["entries"]}
    assert values[(0, 0)] == "1/3" and values[(0, 1)] == "2/7"
    assert values[(1, 1)] == "5/21"

    real = {"field": {"kind": "real", "tolerance": 1e-9}, "rows": 1, "cols": 2,
            "entries": [[0, 0, "0.1"]]}
    status2, body2 = client.post("/v1/complete", {"matrix": real})
    assert status2 == 200
    vals2 = {(r, c): v for r, c, v in body2["matrix"]["entries"]}
    assert float(vals2[(0, 0)]) == 0.1


def test_gfp_field_over_the_wire(client):
    gf5 = {"field": {"kind": "gfp", "modulus": 5}, "rows": 2, "cols": 2,
           "entries": [[0, 0, "2"], [1, 1, "3"]]}
    status, body = client.post("/v1/complete", {"matrix": gf5})
    assert status == 200 and body["rank"] == 1
    status2, body2 = client.post("/v1/oracle", {"matrix": gf5})
    assert status2 == 200 and body2["mr"] == 1


def test_invalid_matrix_rejected(client):
    bad = {"field": {"kind": "gf2"}, "rows": 1, "cols": 1, "entries": [[5, 5, "1"]]}
    status, body = client.post("/v1/complete", {"matrix": bad})
    assert status == 400 and body["detail"]["code"] == "invalid-input"

    bad_field = {"field": {"kind": "gfp", "modulus": 4}, "rows": 1, "cols": 1,
                 "entries": []}
    status2, body2 = client.post("/v1/decompose", {"matrix": bad_field})
    assert status2 == 400
