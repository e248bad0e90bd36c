import math
import pytest

from aks import exact_trajectory
from algebra import Su2Vec
from errors import InputError
from groups import BEl
from momentum_join import MomentumJoiner, compare_files
from phase import R2Params, SystemId, r2_preimage, tb_preimage, tsu2_preimage
from schemas import Trajectory
from trajectory_io import write_trajectory

X0 = Su2Vec(a1=-0.6, a2=0.0, a3=0.8)


@pytest.fixture
def dual_files(tmp_path):
    plane = SystemId.plane(R2Params.toda())
    runs = [
        ("plane.parquet", plane, r2_preimage(plane.r2, X0)),
        ("tb.json", SystemId.cotangent_b(), tb_preimage(X0, BEl(a=1.4, b=0.3, c=-0.2))),
        ("tsu2.csv", SystemId.cotangent_su2(math.pi), tsu2_preimage(X0, chi=0.5, eta3=0.1)),
        ("orbit.csv", SystemId.orbit(), X0),
    ]
    paths = []
    for name, system, state0 in runs:
        traj = exact_trajectory(system, state0, 2.0, 41)
        fmt = name.rsplit(".", 1)[1]
        paths.append(write_trajectory(traj, tmp_path / name, fmt))
    return paths


def test_dual_systems_agree(dual_files):
    report = MomentumJoiner(tolerance=1e-9).compare(dual_files)
    assert report.passed
    assert [row.matched_samples for row in report.rows] == [41, 41, 41]
    assert all(row.max_deviation < 1e-9 for row in report.rows)


def test_different_initial_data_fail(tmp_path, dual_files):
    other = exact_trajectory(SystemId.orbit(), Su2Vec(a1=0.0, a2=-0.6, a3=0.8), 2.0, 41)
    path = write_trajectory(other, tmp_path / "other.csv", "csv")
    report = compare_files([dual_files[0], path], tolerance=1e-9)
    assert not report.passed
    assert report.rows[0].max_deviation > 0.1


def test_disjoint_times_fail(tmp_path, dual_files):
    shifted = Trajectory.from_states(SystemId.orbit(), "exact", [0.01, 0.02, 0.03], [X0] * 3)
    path = write_trajectory(shifted, tmp_path / "shifted.csv", "csv")
    report = MomentumJoiner().compare([dual_files[3], path])
    row = report.rows[0]
    assert row.matched_samples == 0
    assert row.max_deviation is None
    assert not report.passed


def test_deviation_frame(dual_files):
    frame = MomentumJoiner().deviation_frame(dual_files[3], dual_files[1])
    assert list(frame.columns) == ["t", "deviation"]
    assert len(frame) == 41
    assert frame["deviation"].max() < 1e-9


def test_needs_two_files(dual_files):
    with pytest.raises(InputError):
        MomentumJoiner().compare(dual_files[:1])
