"""Cycle-level simulation of the maintained system and its counting processes.

A cycle starts at a repair ("as good as new"), accumulates planned
inspections until the first one at or after the damage time, and ends
either at that inspection (detection) or at the failure instant, whichever
comes first.  Cycles are i.i.d., so repairs form a renewal process;
failures and inspections are the associated reward processes.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import ModelConfig
from .laws import sample_damage, sample_inspection_gap, sample_sane


@dataclass(frozen=True)
class CycleRecord:
    """One renewal cycle, latent times included.

    ``inspections`` holds the planned schedule up to and including the
    first age at or after the damage time; on failure cycles the last
    entry never happens as a planned visit (the cycle ends earlier, at the
    unplanned inspection triggered by the failure) but the count charged
    to the cycle is the same either way: ``inspection_count``.
    """

    time_to_damage: float
    damage_to_failure: float
    inspections: tuple[float, ...]
    inspection_count: int
    detection_age: float
    failure_age: float
    length: float
    failed: bool


@dataclass(frozen=True)
class CountSnapshot:
    """Counts visible to an observer at time ``time``: repairs,
    inspections (planned plus unplanned), failures."""

    time: float
    repairs: int
    inspections: int
    failures: int


@dataclass(frozen=True)
class Trajectory:
    cycles: tuple[CycleRecord, ...]
    snapshots: tuple[CountSnapshot, ...]
    seed: Optional[int]
    config: ModelConfig

    @property
    def repair_epochs(self) -> tuple[float, ...]:
        total = 0.0
        out = []
        for cyc in self.cycles:
            total += cyc.length
            out.append(total)
        return tuple(out)

    @property
    def final_snapshot(self) -> CountSnapshot:
        return self.snapshots[-1]


def simulate_cycle(rng: np.random.Generator, config: ModelConfig) -> CycleRecord:
    """Draw one cycle: damage time, failure delay, and the inspection ages
    up to the first one at or after the damage."""
    y_s = sample_sane(rng, config.sane)
    y_d = sample_damage(rng, config.damage)
    ages = []
    age = 0.0
    while age < y_s:
        age += sample_inspection_gap(rng, config.inspection)
        ages.append(age)
    detection_age = age
    failure_age = y_s + y_d
    # Ties (detection exactly at the failure instant) count as failures.
    failed = detection_age >= failure_age
    return CycleRecord(
        time_to_damage=y_s,
        damage_to_failure=y_d,
        inspections=tuple(ages),
        inspection_count=len(ages),
        detection_age=detection_age,
        failure_age=failure_age,
        length=failure_age if failed else detection_age,
        failed=failed,
    )


def simulate_horizon(
    rng: np.random.Generator,
    config: ModelConfig,
    horizon: Optional[float] = None,
    grid: Optional[Iterable[float]] = None,
) -> Trajectory:
    """Simulate whole cycles until their cumulative length reaches the
    horizon.

    The final snapshot sits at the first cycle end at or beyond the
    horizon (so its time generally overshoots the requested horizon, and
    the overshooting cycle is included in the counts).  Additional
    snapshots are emitted at the requested grid times, which must not
    exceed the final snapshot time.
    """
    horizon = config.horizon if horizon is None else horizon
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    cycles = []
    end_snapshots = []
    total = 0.0
    repairs = inspections = failures = 0
    while total < horizon:
        cyc = simulate_cycle(rng, config)
        cycles.append(cyc)
        total += cyc.length
        repairs += 1
        inspections += cyc.inspection_count
        failures += 1 if cyc.failed else 0
        end_snapshots.append(CountSnapshot(total, repairs, inspections, failures))

    trajectory = Trajectory(
        cycles=tuple(cycles),
        snapshots=(),
        seed=config.seed,
        config=config,
    )
    grid_times = sorted(float(t) for t in grid) if grid is not None else []
    grid_snapshots = [counts_at(t, trajectory) for t in grid_times]
    # merge the two time-sorted runs, grid entries first among ties so the
    # final cycle end stays last
    snapshots = []
    gi = 0
    for snap in end_snapshots:
        while gi < len(grid_snapshots) and grid_snapshots[gi].time <= snap.time:
            snapshots.append(grid_snapshots[gi])
            gi += 1
        snapshots.append(snap)
    snapshots.extend(grid_snapshots[gi:])
    return Trajectory(
        cycles=trajectory.cycles,
        snapshots=tuple(snapshots),
        seed=config.seed,
        config=config,
    )


def _completed_before(t: float, epochs: Sequence[float]) -> int:
    # number of cycle ends at or before t
    return bisect.bisect_right(epochs, t)


def counts_at(t: float, trajectory: Trajectory) -> CountSnapshot:
    """Observer counts at an arbitrary time within the trajectory.

    Completed cycles contribute their full inspection charge; the open
    cycle contributes only the planned inspections already elapsed.  The
    unplanned inspection of a cycle that will end in failure is counted
    when the cycle completes, never before.
    """
    age, elapsed = age_and_index(t, trajectory)
    epochs = trajectory.repair_epochs
    done = _completed_before(t, epochs)
    inspections = sum(c.inspection_count for c in trajectory.cycles[:done]) + elapsed
    failures = sum(1 for c in trajectory.cycles[:done] if c.failed)
    return CountSnapshot(t, done, inspections, failures)


def age_and_index(t: float, trajectory: Trajectory) -> tuple[float, int]:
    """Age of the repair process at t and the number of planned
    inspections already elapsed in the open cycle."""
    epochs = trajectory.repair_epochs
    if t < 0.0 or t > epochs[-1]:
        raise ValueError(f"time {t} outside the simulated range [0, {epochs[-1]}]")
    done = _completed_before(t, epochs)
    last_epoch = epochs[done - 1] if done else 0.0
    age = t - last_epoch
    if done >= len(trajectory.cycles):
        return age, 0
    open_cycle = trajectory.cycles[done]
    elapsed = bisect.bisect_right(open_cycle.inspections, age)
    return age, elapsed


EVENT_LOG_HEADER = "cycle,y_s,y_d,k_r,v_s,z_d,x_r,end"
SNAPSHOT_HEADER = "t,n_r,n_i,n_f"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_event_log(path, cycles: Iterable[CycleRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EVENT_LOG_HEADER + "\n")
        for i, c in enumerate(cycles, start=1):
            end = "Failed" if c.failed else "Detected"
            fh.write(
                f"{i},{_fmt(c.time_to_damage)},{_fmt(c.damage_to_failure)},"
                f"{c.inspection_count},{_fmt(c.detection_age)},"
                f"{_fmt(c.failure_age)},{_fmt(c.length)},{end}\n"
            )


def write_snapshots(path, snapshots: Iterable[CountSnapshot]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        for s in snapshots:
            fh.write(f"{_fmt(s.time)},{s.repairs},{s.inspections},{s.failures}\n")


def read_event_log(path) -> list[CycleRecord]:
    """Parse an event-log CSV back into cycle records.

    The planned-inspection ages inside each cycle are not serialized; they
    are rebuilt only to the extent the observables need (the estimators
    work from the gap law plus the logged count and ages).
    """
    cycles = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != EVENT_LOG_HEADER:
            raise ValueError(f"unexpected event-log header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            (_, y_s, y_d, k_r, v_s, z_d, x_r, end) = line.split(",")
            cycles.append(
                CycleRecord(
                    time_to_damage=float(y_s),
                    damage_to_failure=float(y_d),
                    inspections=(),
                    inspection_count=int(k_r),
                    detection_age=float(v_s),
                    failure_age=float(z_d),
                    length=float(x_r),
                    failed=end == "Failed",
                )
            )
    return cycles
