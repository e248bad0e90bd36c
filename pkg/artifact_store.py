"""
Artifact Store for the PL-duality lab.

Persists simulated trajectories as parquet files for reuse and audit.
Provides content-addressable storage with MD5 hashing.
"""

import hashlib
import json
import os
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence
from loguru import logger

from config import settings
from schemas import Trajectory
from trajectory_io import read_trajectory, render_trajectory, trajectory_frame, write_trajectory


class ArtifactStore:
    """
    Stores and retrieves trajectory artifacts.

    Features:
    - Content-addressable storage (same trajectory = same artifact)
    - Parquet format with the system stored in the file schema
    - Metadata sidecar per artifact
    """

    def __init__(self, base_dir: Optional[str] = None):
        self.base_dir = base_dir or str(settings.artifacts_dir)
        os.makedirs(self.base_dir, exist_ok=True)
        logger.info(f"ArtifactStore initialized at: {self.base_dir}")

    def _generate_id(self, traj: Trajectory, deviation: Optional[Sequence[float]]) -> str:
        """Generate unique ID based on trajectory content."""
        content = render_trajectory(traj, "json", deviation)
        return hashlib.md5(content.encode()).hexdigest()

    def _paths(self, artifact_id: str) -> tuple[str, str]:
        return (
            os.path.join(self.base_dir, f"{artifact_id}.parquet"),
            os.path.join(self.base_dir, f"{artifact_id}.meta.json"),
        )

    def save(self, traj: Trajectory, deviation: Optional[Sequence[float]] = None) -> str:
        """
        Save a trajectory as an artifact.

        Args:
            traj: Trajectory to save
            deviation: Optional exact-vs-RK4 deviation column

        Returns:
            Artifact ID (MD5 hash of the trajectory content)
        """
        artifact_id = self._generate_id(traj, deviation)
        path, metadata_path = self._paths(artifact_id)

        write_trajectory(traj, path, "parquet", deviation)

        columns = list(trajectory_frame(traj, deviation).columns)
        metadata = {
            "system": traj.system.model_dump(mode="json"),
            "method": traj.method,
            "step": traj.step,
            "row_count": len(traj.samples),
            "columns": columns,
            "created_at": datetime.now().isoformat(),
        }
        with open(metadata_path, "w") as f:
            json.dump(metadata, f, indent=2, default=str)

        logger.info(f"Saved artifact: {path} ({len(traj.samples)} rows)")
        return artifact_id

    def load(self, artifact_id: str) -> Optional[Trajectory]:
        """
        Load an artifact by ID.

        Args:
            artifact_id: The artifact ID (MD5 hash)

        Returns:
            Trajectory or None if not found
        """
        path, _ = self._paths(artifact_id)

        if not os.path.exists(path):
            logger.warning(f"Artifact not found: {artifact_id}")
            return None

        traj = read_trajectory(path)
        logger.info(f"Loaded artifact: {artifact_id} ({len(traj.samples)} rows)")
        return traj

    def metadata(self, artifact_id: str) -> Optional[dict]:
        _, metadata_path = self._paths(artifact_id)
        if not os.path.exists(metadata_path):
            return None
        with open(metadata_path) as f:
            return json.load(f)

    def list_artifacts(self, system_kind: Optional[str] = None) -> list[dict]:
        """
        Summaries of the stored trajectories, newest first.

        Args:
            system_kind: Keep only artifacts of this system kind (r2, tb, tsu2, orbit)
        """
        summaries = []
        for parquet_path in Path(self.base_dir).glob("*.parquet"):
            artifact_id = parquet_path.stem
            meta = self.metadata(artifact_id) or {}
            kind = meta.get("system", {}).get("kind")
            if system_kind is not None and kind != system_kind:
                continue
            summaries.append({
                "id": artifact_id,
                "kind": kind,
                "method": meta.get("method"),
                "row_count": meta.get("row_count"),
                "size_bytes": parquet_path.stat().st_size,
                "created_at": meta.get("created_at", ""),
            })
        return sorted(summaries, key=lambda s: (s["created_at"], s["id"]), reverse=True)

    def delete(self, artifact_id: str) -> bool:
        """Remove the trajectory and its sidecar; False if no trajectory was stored."""
        removed = [p for p in map(Path, self._paths(artifact_id)) if p.exists()]
        for p in removed:
            p.unlink()
        found = any(p.suffix == ".parquet" for p in removed)
        if found:
            logger.info(f"Deleted artifact {artifact_id}")
        return found


# Singleton instance
_store: Optional[ArtifactStore] = None


def get_artifact_store() -> ArtifactStore:
    """Get or create the artifact store singleton."""
    global _store
    if _store is None:
        _store = ArtifactStore()
    return _store


def save_artifact(traj: Trajectory, deviation: Optional[Sequence[float]] = None) -> str:
    """Convenience function to save an artifact."""
    store = get_artifact_store()
    return store.save(traj, deviation)
