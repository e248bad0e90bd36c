import json
import math
import numpy as np
import pandas as pd
import pytest

from aks import exact_trajectory
from algebra import Su2Vec
from errors import InputError
from groups import BEl
from oracle import residual_report, rk4_integrate
from phase import R2Pt, SystemId, tb_preimage, tsu2_preimage
from trajectory_io import (
    frame_columns,
    infer_system,
    read_frame,
    read_trajectory,
    render_trajectory,
    trajectory_frame,
    write_trajectory,
)

TODA_START = R2Pt(q=-0.5 * math.log(2.0), p=0.0)
X0 = Su2Vec(a1=0.6, a2=0.0, a3=0.8)


@pytest.fixture
def toda_traj():
    return exact_trajectory(SystemId.toda(), TODA_START, 1.0, 21)


class TestLayout:
    def test_plane_columns(self):
        assert frame_columns(SystemId.toda()) == ["t", "q", "p", "energy", "j1", "j2", "j3"]

    def test_orbit_columns(self):
        assert frame_columns(SystemId.orbit()) == ["t", "j1", "j2", "j3", "energy"]

    def test_tsu2_columns(self):
        assert frame_columns(SystemId.cotangent_su2(0.0))[1:8] == [
            "re_alpha", "im_alpha", "re_beta", "im_beta", "eta1", "eta2", "eta3",
        ]

    def test_deviation_column(self, toda_traj):
        df = trajectory_frame(toda_traj, np.zeros(21))
        assert list(df.columns)[-1] == "deviation"
        with pytest.raises(InputError):
            trajectory_frame(toda_traj, np.zeros(5))

    def test_csv_render(self, toda_traj):
        text = render_trajectory(toda_traj, "csv")
        lines = text.splitlines()
        assert lines[0] == "t,q,p,energy,j1,j2,j3"
        assert len(lines) == 22

    def test_json_render(self, toda_traj):
        payload = json.loads(render_trajectory(toda_traj, "json"))
        assert payload["metadata"]["method"] == "exact"
        assert payload["metadata"]["system"]["kind"] == "r2"
        assert len(payload["samples"]) == 21
        assert set(payload["samples"][0]) == {"t", "q", "p", "energy", "j1", "j2", "j3"}

    def test_parquet_has_no_text_form(self, toda_traj):
        with pytest.raises(InputError):
            render_trajectory(toda_traj, "parquet")


class TestRoundTrip:
    @pytest.mark.parametrize("fmt", ["csv", "json", "parquet"])
    def test_report_survives_round_trip(self, tmp_path, toda_traj, fmt):
        path = write_trajectory(toda_traj, tmp_path / f"toda.{fmt}", fmt)
        back = read_trajectory(path)
        assert back.system == toda_traj.system
        np.testing.assert_array_equal(back.state_array(), toda_traj.state_array())
        assert residual_report(back) == residual_report(toda_traj)

    def test_tsu2_csv_infers_leaf(self, tmp_path):
        state0 = tsu2_preimage(Su2Vec(a2=0.6, a3=0.8), chi=0.4, eta3=0.2)
        traj = exact_trajectory(SystemId.cotangent_su2(math.pi / 2), state0, 0.5, 6)
        back = read_trajectory(write_trajectory(traj, tmp_path / "tsu2.csv", "csv"))
        assert back.system.kind == "tsu2"
        assert back.system.theta == pytest.approx(math.pi / 2, abs=1e-12)

    def test_rk4_metadata_kept_in_parquet(self, tmp_path):
        traj = rk4_integrate(SystemId.orbit(), X0, 0.5, h=1e-2, samples=6)
        back = read_trajectory(write_trajectory(traj, tmp_path / "orbit.parquet", "parquet"))
        assert back.method == "rk4"
        assert back.step == 1e-2

    def test_explicit_system_overrides_header(self, tmp_path):
        state0 = tb_preimage(X0, BEl(a=1.1))
        traj = exact_trajectory(SystemId.cotangent_b(), state0, 0.5, 6)
        path = write_trajectory(traj, tmp_path / "tb.csv", "csv")
        assert read_trajectory(path, SystemId.cotangent_b()).system.kind == "tb"


class TestInference:
    def test_orbit_header(self):
        assert infer_system(["t", "j1", "j2", "j3", "energy"], [0, 0, 0, 1, 0.5]).kind == "orbit"

    def test_plane_header_reads_as_toda(self):
        assert infer_system(["t", "q", "p", "energy", "j1", "j2", "j3"], [0] * 7) == SystemId.toda()

    def test_unknown_header(self):
        with pytest.raises(InputError):
            infer_system(["t", "x", "energy"], [0, 0, 0])


class TestFiles:
    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_frame(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        pd.DataFrame(columns=["t", "q", "p"]).to_csv(path, index=False)
        with pytest.raises(InputError):
            read_trajectory(path)

    def test_atomic_write_leaves_no_temporaries(self, tmp_path, toda_traj):
        write_trajectory(toda_traj, tmp_path / "out" / "toda.csv", "csv")
        assert [p.name for p in (tmp_path / "out").iterdir()] == ["toda.csv"]
