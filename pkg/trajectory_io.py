"""
Trajectory files for the PL-duality lab.

Writes trajectories as CSV, JSON or parquet with one row per sample and
reads them back into validated Trajectory objects. CSV floats use 17
significant digits so a re-read file reproduces every state bit-exactly.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Literal, Optional, Sequence
import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq
from loguru import logger

from errors import InputError
from phase import STATE_COLUMNS, SystemId, orbit_coords, state_from_array
from algebra import Su2Vec
from schemas import Trajectory

Format = Literal["csv", "json", "parquet"]

MOMENTUM_COLUMNS = ["j1", "j2", "j3"]
FLOAT_FORMAT = "%.17g"
_METADATA_KEY = b"plt_metadata"


def frame_columns(system: SystemId) -> list[str]:
    """Column order of a trajectory file, time first."""
    if system.kind == "orbit":
        return ["t", *MOMENTUM_COLUMNS, "energy"]
    return ["t", *system.columns, "energy", *MOMENTUM_COLUMNS]


def trajectory_metadata(traj: Trajectory) -> dict:
    return {
        "system": traj.system.model_dump(mode="json"),
        "method": traj.method,
        "step": traj.step,
        "samples": len(traj.samples),
    }


def trajectory_frame(traj: Trajectory, deviation: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Flatten a trajectory into a DataFrame with the file column layout.

    Args:
        traj: Trajectory to flatten
        deviation: Optional per-sample exact-vs-RK4 deviation column

    Returns:
        DataFrame with columns from frame_columns (plus deviation)
    """
    rows = []
    for s in traj.samples:
        if traj.system.kind == "orbit":
            rows.append([s.t, *s.momentum, s.energy])
        else:
            rows.append([s.t, *s.state, s.energy, *s.momentum])
    df = pd.DataFrame(rows, columns=frame_columns(traj.system), dtype=float)
    if deviation is not None:
        if len(deviation) != len(df):
            raise InputError(f"Deviation column has {len(deviation)} values for {len(df)} samples")
        df["deviation"] = np.asarray(deviation, dtype=float)
    return df


def render_trajectory(
    traj: Trajectory,
    fmt: Format = "csv",
    deviation: Optional[Sequence[float]] = None,
) -> str:
    """Text form of a trajectory (csv or json)."""
    df = trajectory_frame(traj, deviation)
    if fmt == "csv":
        return df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if fmt == "json":
        samples = [
            {column: float(value) for column, value in zip(df.columns, row)}
            for row in df.itertuples(index=False, name=None)
        ]
        return json.dumps({"metadata": trajectory_metadata(traj), "samples": samples}, indent=2) + "\n"
    raise InputError(f"Format {fmt} has no text form")


def _atomic_target(path: Path) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    return tmp


def write_trajectory(
    traj: Trajectory,
    path: str | Path,
    fmt: Format = "csv",
    deviation: Optional[Sequence[float]] = None,
) -> Path:
    """
    Write a trajectory file atomically (temporary file, then rename).

    Returns:
        Path of the written file
    """
    path = Path(path)
    tmp = _atomic_target(path)
    try:
        if fmt == "parquet":
            table = pa.Table.from_pandas(trajectory_frame(traj, deviation), preserve_index=False)
            metadata = dict(table.schema.metadata or {})
            metadata[_METADATA_KEY] = json.dumps(trajectory_metadata(traj)).encode()
            pq.write_table(table.replace_schema_metadata(metadata), tmp)
        else:
            with open(tmp, "w", encoding="utf-8", newline="") as f:
                f.write(render_trajectory(traj, fmt, deviation))
        os.replace(tmp, path)
    except Exception as e:
        if os.path.exists(tmp):
            os.remove(tmp)
        logger.error(f"Writing {path} failed: {e}")
        raise

    logger.info(f"Wrote {len(traj.samples)} {traj.system.kind} samples to: {path}")
    return path


def infer_system(columns: Sequence[str], first_row: Sequence[float]) -> SystemId:
    """
    Recover the system of a CSV file from its header.

    Plane files are read as Toda; the leaf angle of a T*SU(2) file comes
    from the momentum image of its first row.
    """
    state = [c for c in columns if c not in ("t", "energy", "deviation", *MOMENTUM_COLUMNS)]
    if not state:
        return SystemId.orbit()
    for kind, expected in STATE_COLUMNS.items():
        if state == expected:
            break
    else:
        raise InputError(f"Unrecognized trajectory columns: {list(columns)}")
    if kind == "r2":
        return SystemId.toda()
    if kind == "tb":
        return SystemId.cotangent_b()
    lookup = dict(zip(columns, first_row))
    leaf = orbit_coords(Su2Vec(a1=lookup["j1"], a2=lookup["j2"], a3=lookup["j3"]))
    if leaf is None:
        raise InputError("Cannot infer the leaf angle of a T*SU(2) file on a zero-dimensional leaf")
    return SystemId.cotangent_su2(leaf.theta)


def _frame_to_trajectory(df: pd.DataFrame, system: SystemId, method: str, step: Optional[float]) -> Trajectory:
    state_columns = MOMENTUM_COLUMNS if system.kind == "orbit" else system.columns
    missing = [c for c in ["t", *state_columns] if c not in df.columns]
    if missing:
        raise InputError(f"Trajectory file lacks columns {missing}")
    states = [state_from_array(system, row) for row in df[state_columns].to_numpy(dtype=float)]
    return Trajectory.from_states(system, method, df["t"].to_numpy(dtype=float), states, step=step)


def read_frame(path: str | Path) -> tuple[pd.DataFrame, Optional[dict]]:
    """Read a trajectory file into a DataFrame plus its stored metadata, if any."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"Trajectory file not found: {path}")
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            payload = json.loads(path.read_text(encoding="utf-8"))
            return pd.DataFrame(payload["samples"]), payload.get("metadata")
        if suffix == ".parquet":
            table = pq.read_table(path)
            raw = (table.schema.metadata or {}).get(_METADATA_KEY)
            return table.to_pandas(), json.loads(raw) if raw else None
        return pd.read_csv(path, float_precision="round_trip"), None
    except (OSError, ValueError, KeyError, pa.ArrowInvalid) as e:
        logger.error(f"Reading {path} failed: {e}")
        raise InputError(f"Cannot read trajectory file {path}: {str(e)}")


def read_trajectory(path: str | Path, system: Optional[SystemId] = None) -> Trajectory:
    """
    Read and re-validate a trajectory file.

    Momentum and energy are recomputed from the stored states.

    Args:
        path: CSV, JSON or parquet file written by write_trajectory
        system: System of the file; taken from stored metadata or the CSV header when omitted

    Returns:
        Trajectory
    """
    df, metadata = read_frame(path)
    if df.empty:
        raise InputError(f"Trajectory file {path} has no samples")
    method, step = "exact", None
    if metadata is not None:
        method = metadata.get("method", "exact")
        step = metadata.get("step")
        if system is None:
            system = SystemId.model_validate(metadata["system"])
    if system is None:
        system = infer_system(list(df.columns), df.iloc[0].tolist())

    traj = _frame_to_trajectory(df, system, method, step)
    logger.info(f"Read {len(traj.samples)} {system.kind} samples from: {path}")
    return traj
