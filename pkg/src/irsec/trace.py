"""Per-iteration solver records shared by both solvers and the harness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple


class ArmijoRecord(NamedTuple):
    """One accepted line-search step, logged with the exact compared floats."""

    value_old: float
    value_new: float
    alpha: float
    grad_norm_sq: float


@dataclass
class SolverTrace:
    """Append-only iterate log: objective, violation, rate, wall time.

    Iteration indices must be strictly increasing and times non-decreasing;
    violations of either are programming errors and raise immediately.
    """

    solver: str = ""
    iterations: list[int] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    violations: list[float] = field(default_factory=list)
    secrecy_rates: list[float] = field(default_factory=list)
    wall_times: list[float] = field(default_factory=list)
    converged: bool = False
    stalled: bool = False
    inner_iterations: int = 0
    snap_violation: float = 0.0
    final_smoothing: float = float("nan")
    armijo_records: list[ArmijoRecord] = field(default_factory=list)

    def append(
        self,
        iteration: int,
        objective: float,
        violation: float,
        secrecy_rate: float,
        wall_time: float,
    ) -> None:
        if self.iterations and iteration <= self.iterations[-1]:
            raise ValueError("iteration indices must be strictly increasing")
        if self.wall_times and wall_time < self.wall_times[-1]:
            raise ValueError("wall times must be non-decreasing")
        self.iterations.append(iteration)
        self.objectives.append(objective)
        self.violations.append(violation)
        self.secrecy_rates.append(secrecy_rate)
        self.wall_times.append(wall_time)

    def __len__(self) -> int:
        return len(self.iterations)

    @property
    def final_violation(self) -> float:
        return self.violations[-1] if self.violations else float("inf")

    @property
    def final_rate(self) -> float:
        return self.secrecy_rates[-1] if self.secrecy_rates else 0.0

    @property
    def wall_time(self) -> float:
        return self.wall_times[-1] if self.wall_times else 0.0

    def rows(self) -> list[tuple]:
        return list(
            zip(
                self.iterations,
                self.objectives,
                self.violations,
                self.secrecy_rates,
                self.wall_times,
            )
        )


TRACE_COLUMNS = ("iteration", "objective", "violation", "secrecy_bps_hz", "wall_s")
