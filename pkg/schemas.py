"""
Pydantic schemas for trajectories, reports and run requests.
Provides validation and a stable serialized form for every artifact.
"""

from pathlib import Path
from typing import Literal, Optional, Sequence
import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from algebra import collective_f
from config import settings
from groups import BEl, SU2El
from phase import PhasePoint, SystemId, momentum_image, state_from_array, state_to_array


class TrajectorySample(BaseModel):
    """One time-stamped state with its momentum image and energy."""
    t: float = Field(..., description="Time")
    state: list[float] = Field(..., description="Flat state coordinates in column order")
    momentum: list[float] = Field(..., description="Momentum image (j1, j2, j3)")
    energy: float = Field(..., description="Collective energy f(J(state))")


class Trajectory(BaseModel):
    """
    Ordered samples of one system, produced either by the exact AKS
    solution or by numerical integration.
    """
    system: SystemId = Field(..., description="System the states belong to")
    method: Literal["exact", "rk4"] = Field(..., description="How the samples were produced")
    step: Optional[float] = Field(None, description="Integrator step (rk4 only)")
    samples: list[TrajectorySample] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_samples(self) -> "Trajectory":
        width = len(self.system.columns)
        for sample in self.samples:
            if len(sample.state) != width or len(sample.momentum) != 3:
                raise ValueError(f"Sample at t={sample.t} does not match the {self.system.kind} layout")
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("Trajectory times must be strictly increasing")
        return self

    @classmethod
    def from_states(
        cls,
        system: SystemId,
        method: Literal["exact", "rk4"],
        times: Sequence[float],
        states: Sequence[PhasePoint],
        step: Optional[float] = None,
    ) -> "Trajectory":
        samples = []
        for t, state in zip(times, states):
            J = momentum_image(system, state)
            samples.append(TrajectorySample(
                t=float(t),
                state=state_to_array(state).tolist(),
                momentum=J.as_array().tolist(),
                energy=collective_f(J),
            ))
        return cls(system=system, method=method, step=step, samples=samples)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def state_array(self) -> np.ndarray:
        return np.array([s.state for s in self.samples])

    def momentum_array(self) -> np.ndarray:
        return np.array([s.momentum for s in self.samples])

    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples])

    def state_at(self, index: int) -> PhasePoint:
        return state_from_array(self.system, np.array(self.samples[index].state))


class ResidualReport(BaseModel):
    """Finite-difference diagnostics of a trajectory on a uniform grid."""
    max_hamilton_residual: float = Field(..., ge=0.0)
    max_energy_drift: float = Field(..., ge=0.0)
    max_equivariance_defect: float = Field(..., ge=0.0)
    max_lax_residual: float = Field(..., ge=0.0)
    step: float = Field(..., gt=0.0, description="Grid spacing")
    t_start: float
    t_end: float
    n_samples: int = Field(..., ge=3)
    flagged_samples: list[int] = Field(
        default_factory=list,
        description="Indices whose residuals exceed the flag threshold"
    )


class PropertyResult(BaseModel):
    """Outcome of one verified property."""
    suite: str
    name: str
    passed: bool
    max_defect: float
    tolerance: float
    seed: int
    samples: int
    worst_sample: Optional[int] = Field(None, description="Index of the worst sample")


class VerifyReport(BaseModel):
    """Deterministic report of a verify run; holds no wall-clock data."""
    seed: int
    suites: list[str]
    results: list[PropertyResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[PropertyResult]:
        return [r for r in self.results if not r.passed]


class FactorizeResult(BaseModel):
    """Iwasawa factors of a matrix, optionally compared with the closed forms."""
    g: SU2El
    b: BEl
    reconstruction_error: float
    closed_form_g: Optional[SU2El] = None
    closed_form_b: Optional[BEl] = None
    closed_form_agreement: Optional[float] = None


SystemName = Literal["toda", "r2", "tb", "tsu2", "orbit"]


class RunConfig(BaseModel):
    """
    Validated request of the simulate command.
    Initial-state fields are read according to the selected system.
    """
    system: SystemName = Field(..., description="Which dual system to simulate")

    # Plane
    q0: Optional[float] = None
    p0: Optional[float] = None
    mu: Optional[float] = Field(None, gt=0.0)
    eps: Optional[float] = None
    theta: Optional[float] = Field(None, description="Leaf angle in radians")

    # Cotangent bundle of B
    a: Optional[float] = Field(None, gt=0.0)
    b: Optional[float] = None
    c: Optional[float] = None
    eta: Optional[tuple[float, float, float]] = None

    # Cotangent bundle of SU(2)
    alpha: Optional[tuple[float, float]] = None
    beta: Optional[tuple[float, float]] = None

    # Orbit
    x0: Optional[tuple[float, float, float]] = None

    # Run
    t_end: float = Field(1.0, description="Final time (nonzero)")
    samples: int = Field(101, ge=2, description="Number of output samples")
    method: Literal["exact", "rk4", "both"] = "exact"
    rk4_step: float = Field(settings.rk4_step, gt=0.0)
    tolerance: float = Field(
        settings.cli_normalization_tolerance, gt=0.0,
        description="Accepted |det J - 1| for the initial data"
    )

    # Output
    output: Optional[Path] = None
    format: Literal["csv", "json", "parquet"] = "csv"
    save_artifact: bool = False

    @field_validator("t_end")
    @classmethod
    def _nonzero_t_end(cls, value: float) -> float:
        if value == 0.0:
            raise ValueError("t_end must be nonzero")
        return value

    @model_validator(mode="after")
    def _check_binary_output(self) -> "RunConfig":
        if self.format == "parquet" and self.output is None:
            raise ValueError("parquet output needs --output PATH")
        return self


class ComparisonRow(BaseModel):
    """Momentum-image deviation of one trajectory file from the reference file."""
    path: str
    matched_samples: int = Field(..., ge=0, description="Samples sharing a time stamp with the reference")
    max_deviation: Optional[float] = Field(None, description="max |J - J_ref| over matched samples")
    passed: bool


class ComparisonReport(BaseModel):
    """Result of joining trajectory files on t."""
    reference: str
    tolerance: float
    rows: list[ComparisonRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)
