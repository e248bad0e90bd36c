"""
Momentum Join for the PL-duality lab.

Joins trajectory files on t with DuckDB and measures how far their
momentum images (j1, j2, j3) drift apart. Dual systems started from a
common initial momentum image share the same curve, so the join is the
T-duality comparison.
"""

from pathlib import Path
from typing import Optional, Sequence
import duckdb
import pandas as pd
from loguru import logger

from errors import InputError
from schemas import ComparisonReport, ComparisonRow
from trajectory_io import MOMENTUM_COLUMNS, read_frame


class MomentumJoiner:
    """
    Compares trajectory files through their momentum-image columns.

    Files of any supported format are loaded with pandas and registered as
    DuckDB relations; the deviation is computed in SQL.
    """

    def __init__(self, tolerance: float = 1e-9):
        self.tolerance = tolerance
        logger.info(f"MomentumJoiner initialized with tolerance: {tolerance:g}")

    def _load(self, path: str | Path) -> pd.DataFrame:
        df, _ = read_frame(path)
        missing = [c for c in ["t", *MOMENTUM_COLUMNS] if c not in df.columns]
        if missing:
            raise InputError(f"{path} lacks momentum columns {missing}")
        return df[["t", *MOMENTUM_COLUMNS]]

    def _build_sql(self, per_sample: bool = False) -> str:
        deviation = "GREATEST(" + ", ".join(f"ABS(r.{j} - o.{j})" for j in MOMENTUM_COLUMNS) + ")"
        if per_sample:
            return (
                f"SELECT r.t AS t, {deviation} AS deviation\n"
                "FROM reference r JOIN other o ON r.t = o.t\n"
                "ORDER BY r.t"
            )
        return (
            f"SELECT COUNT(*) AS matched, MAX({deviation}) AS max_deviation\n"
            "FROM reference r JOIN other o ON r.t = o.t"
        )

    def _run(self, reference: pd.DataFrame, other: pd.DataFrame, sql: str) -> pd.DataFrame:
        con = duckdb.connect()
        try:
            con.register("reference", reference)
            con.register("other", other)
            return con.execute(sql).df()
        finally:
            con.close()

    def deviation_frame(self, reference_path: str | Path, other_path: str | Path) -> pd.DataFrame:
        """Per-sample deviation of other from reference on their common times."""
        sql = self._build_sql(per_sample=True)
        logger.debug(f"Executing SQL:\n{sql}")
        return self._run(self._load(reference_path), self._load(other_path), sql)

    def compare(self, paths: Sequence[str | Path]) -> ComparisonReport:
        """
        Compare every file against the first one.

        Args:
            paths: At least two trajectory files

        Returns:
            ComparisonReport; a file sharing no time stamp with the reference fails
        """
        if len(paths) < 2:
            raise InputError("compare needs at least two trajectory files")
        reference = self._load(paths[0])
        sql = self._build_sql()
        logger.debug(f"Executing SQL:\n{sql}")

        rows = []
        for path in paths[1:]:
            try:
                result = self._run(reference, self._load(path), sql)
            except duckdb.Error as e:
                logger.error(f"Join of {path} failed: {e}")
                raise RuntimeError(f"Momentum join failed: {str(e)}")
            matched = int(result["matched"].iloc[0])
            max_deviation = None if matched == 0 else float(result["max_deviation"].iloc[0])
            passed = max_deviation is not None and max_deviation <= self.tolerance
            if not passed:
                logger.warning(f"{path} deviates from {paths[0]}: {max_deviation} over {matched} samples")
            rows.append(ComparisonRow(
                path=str(path), matched_samples=matched, max_deviation=max_deviation, passed=passed,
            ))

        return ComparisonReport(reference=str(paths[0]), tolerance=self.tolerance, rows=rows)


# Singleton instance
_joiner: Optional[MomentumJoiner] = None


def get_joiner(tolerance: Optional[float] = None) -> MomentumJoiner:
    """Get or create the momentum joiner singleton."""
    global _joiner
    if _joiner is None:
        _joiner = MomentumJoiner()
    if tolerance is not None:
        _joiner.tolerance = tolerance
    return _joiner


def compare_files(paths: Sequence[str | Path], tolerance: Optional[float] = None) -> ComparisonReport:
    """Convenience function to compare trajectory files."""
    joiner = get_joiner(tolerance)
    return joiner.compare(paths)
