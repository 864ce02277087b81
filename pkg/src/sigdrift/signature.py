"""Build performance signatures from trial cohorts; PAA downsampling.

Generation follows the measurement pipeline: average the cohort's
per-timestamp observations for each parameter, then scale the mean
series by its population standard deviation so rows are unit-std.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Signature, QoSSeries, TimeGrid, TrialExperience
from .errors import AlignmentError, ConstantSeriesError, ParseError


@dataclass(frozen=True)
class TrialCohort:
    """A group of trial users observed over one shared window."""

    experiences: tuple[TrialExperience, ...]
    window: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "experiences", tuple(self.experiences))
        object.__setattr__(self, "window", tuple(self.window))
        if not self.experiences:
            raise ValueError("cohort needs at least one experience")
        params = {e.parameter for e in self.experiences}
        if len(params) != 1:
            raise AlignmentError(f"cohort mixes parameters: {sorted(params)}")
        for e in self.experiences:
            if e.window != self.window:
                raise AlignmentError(
                    f"user {e.user_id!r} window {e.window} != cohort window {self.window}"
                )

    @property
    def parameter(self) -> str:
        return self.experiences[0].parameter


def generate_signature(cohorts, grid: TimeGrid, provider_id: str = "") -> Signature:
    """Mean each cohort across users, normalize, stack into a signature.

    Every cohort must cover the full grid (window == (0, grid.length)),
    and each QoS parameter may appear in exactly one cohort.
    """
    cohorts = list(cohorts)
    if not cohorts:
        raise ValueError("need at least one cohort")
    seen = set()
    rows = []
    for cohort in cohorts:
        if cohort.parameter in seen:
            raise ValueError(f"parameter {cohort.parameter!r} appears in two cohorts")
        seen.add(cohort.parameter)
        if cohort.window != (0, grid.length):
            raise AlignmentError(
                f"cohort for {cohort.parameter!r} covers {cohort.window}, "
                f"signature generation needs (0, {grid.length})"
            )
        stacked = np.stack([e.values for e in cohort.experiences])
        mean = stacked.mean(axis=0)
        std = float(mean.std())
        if std <= 1e-12:
            raise ConstantSeriesError(
                f"mean series for {cohort.parameter!r} is constant; cannot normalize"
            )
        rows.append(QoSSeries(cohort.parameter, mean / std))
    return Signature(tuple(rows), grid, provider_id)


def recompute_signature(cohorts, grid: TimeGrid, provider_id: str = "") -> Signature:
    """Same construction as :func:`generate_signature`, run on fresh trials."""
    return generate_signature(cohorts, grid, provider_id)


def paa_boundaries(length: int, target_length: int) -> np.ndarray:
    """Frame boundaries for PAA: round-half-up of j*length/target."""
    if target_length < 1:
        raise ValueError("target length must be at least 1")
    if target_length > length:
        raise ValueError("target length exceeds series length")
    j = np.arange(target_length + 1, dtype=np.int64)
    # floor(j*L/m + 1/2) done in exact integer arithmetic
    return (2 * j * length + target_length) // (2 * target_length)


def paa(values, target_length: int) -> np.ndarray:
    """Piecewise aggregate approximation: per-frame means."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    bounds = paa_boundaries(arr.size, target_length)
    sums = np.add.reduceat(arr, bounds[:-1])
    return sums / np.diff(bounds)


# ---------------------------------------------------------------------------
# Trial cohort CSV: header "user_id,parameter,start,v0,v1,...", one line
# per user.  All users of one parameter form one cohort and must share
# a window.

def write_cohorts(cohorts, path) -> None:
    cohorts = list(cohorts)
    if not cohorts:
        raise ValueError("nothing to write")
    width = cohorts[0].window[1]
    for c in cohorts:
        if c.window[1] != width:
            raise AlignmentError("cohort CSV requires equal-length windows")
    lines = ["user_id,parameter,start," + ",".join(f"v{i}" for i in range(width))]
    for c in cohorts:
        for e in c.experiences:
            for fieldval in (e.user_id, e.parameter):
                if "," in fieldval or "\n" in fieldval:
                    raise ValueError(f"field {fieldval!r} not representable in CSV")
            lines.append(
                f"{e.user_id},{e.parameter},{e.trial_start},"
                + ",".join(repr(float(v)) for v in e.values)
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_experiences(path) -> list[TrialExperience]:
    """Parse trial rows without the shared-window constraint.

    Calibration histories mix users whose trials started at different
    times, so they cannot be grouped into cohorts.
    """
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").split("\n") if ln]
    if not lines:
        raise ParseError(f"{path}: empty cohort file")
    header = lines[0].split(",")
    if header[:3] != ["user_id", "parameter", "start"] or len(header) < 4:
        raise ParseError(f"{path}: bad header {lines[0]!r}")
    width = len(header) - 3

    experiences = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != width + 3:
            raise ParseError(f"{path}: row for {parts[0]!r} has the wrong width")
        user, param, start_s = parts[0], parts[1], parts[2]
        try:
            start = int(start_s)
            values = np.array([float(p) for p in parts[3:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}: row for {user!r}: {exc}") from None
        experiences.append(TrialExperience(user, param, values, start))
    return experiences


def read_cohorts(path) -> list[TrialCohort]:
    by_param: dict[str, list[TrialExperience]] = {}
    for e in read_experiences(path):
        by_param.setdefault(e.parameter, []).append(e)

    cohorts = []
    for param, experiences in by_param.items():
        windows = {e.window for e in experiences}
        if len(windows) != 1:
            raise AlignmentError(f"{path}: users of {param!r} disagree on the window")
        cohorts.append(TrialCohort(tuple(experiences), windows.pop()))
    return cohorts
