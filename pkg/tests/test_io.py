from __future__ import annotations

import json

import numpy as np
import pytest

from rankattach import io as rio
from rankattach.generator import ProcessParams, generate


def same(a, b):
    assert a.params == b.params
    assert np.array_equal(a.degrees, b.degrees)
    assert a.snapshots == b.snapshots
    assert a.trajectories.keys() == b.trajectories.keys()
    for v in a.trajectories:
        assert np.array_equal(a.trajectories[v], b.trajectories[v])
    assert (a.edges is None) == (b.edges is None)
    if a.edges is not None:
        assert np.array_equal(a.edges, b.edges)
    assert a.rng_draws == b.rng_draws


@pytest.fixture(params=[False, True], ids=["no-edges", "edges"])
def result(request):
    params = ProcessParams(
        n=700, d=2, scheme="random:2", seed=5, track=(3, 50), snapshot_times=(10, 700), keep_edges=request.param, pinned={50: 7}
    )
    return generate(params)


def test_json_round_trip(result, tmp_path):
    same(result, rio.loads(rio.dumps(result)))
    path = rio.save_json(result, tmp_path / "r.json")
    same(result, rio.load_result(path))
    assert json.loads(path.read_text())["schema"] == 1


def test_npz_round_trip_and_stable_bytes(result, tmp_path):
    a = rio.save_npz(result, tmp_path / "a.npz")
    b = rio.save_npz(result, tmp_path / "b.npz")
    assert a.read_bytes() == b.read_bytes()
    same(result, rio.load_result(a))


def test_schema_mismatch(result, tmp_path):
    data = rio.result_to_dict(result)
    data["schema"] = 2
    with pytest.raises(rio.SchemaError):
        rio.result_from_dict(data)
