import math
import numpy as np
import pytest

from aks import exact_trajectory
from algebra import Su2Vec
from artifact_store import ArtifactStore
from phase import R2Pt, SystemId

TODA_START = R2Pt(q=-0.5 * math.log(2.0), p=0.0)


@pytest.fixture
def store(tmp_path):
    return ArtifactStore(base_dir=str(tmp_path / "artifacts"))


@pytest.fixture
def traj():
    return exact_trajectory(SystemId.toda(), TODA_START, 1.0, 11)


def test_same_trajectory_same_id(store, traj):
    first = store.save(traj)
    second = store.save(exact_trajectory(SystemId.toda(), TODA_START, 1.0, 11))
    assert first == second
    assert len(store.list_artifacts()) == 1


def test_deviation_changes_id(store, traj):
    assert store.save(traj) != store.save(traj, np.zeros(11))


def test_load_round_trip(store, traj):
    artifact_id = store.save(traj)
    loaded = store.load(artifact_id)
    assert loaded is not None
    assert loaded.system == traj.system
    np.testing.assert_array_equal(loaded.state_array(), traj.state_array())


def test_metadata(store, traj):
    artifact_id = store.save(traj, np.zeros(11))
    meta = store.metadata(artifact_id)
    assert meta["method"] == "exact"
    assert meta["row_count"] == 11
    assert meta["columns"][-1] == "deviation"
    assert meta["system"]["kind"] == "r2"


def test_missing_artifact(store):
    assert store.load("0" * 32) is None
    assert store.metadata("0" * 32) is None


def test_delete(store, traj):
    artifact_id = store.save(traj)
    assert store.delete(artifact_id)
    assert store.load(artifact_id) is None
    assert not store.delete(artifact_id)
    assert store.list_artifacts() == []


def test_list_filters_by_kind(store, traj):
    toda_id = store.save(traj)
    orbit = exact_trajectory(SystemId.orbit(), Su2Vec(a1=0.6, a3=0.8), 1.0, 5)
    orbit_id = store.save(orbit)
    assert {a["id"] for a in store.list_artifacts()} == {toda_id, orbit_id}
    [entry] = store.list_artifacts(system_kind="orbit")
    assert entry["id"] == orbit_id
    assert entry["row_count"] == 5
