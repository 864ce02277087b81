"""Core domain types: time grids, QoS series, signatures, trial experiences.

A signature is a small matrix: one row per QoS parameter, one column per
grid timestamp.  Rows produced by signature generation have unit
population standard deviation; copies that went through noise injection
or splicing are allowed to drift off unit scale and carry that fact
implicitly (detectors must not assume otherwise).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConstantSeriesError, ParseError

#: |population std - 1| above this means a row does not count as normalized.
STD_TOLERANCE = 1e-9

#: population std below this means the series is constant for our purposes.
_CONSTANT_EPS = 1e-12


def population_std(values: np.ndarray) -> float:
    """Population (ddof=0) standard deviation."""
    return float(np.asarray(values, dtype=np.float64).std())


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """Uniformly spaced observation grid starting at index 0."""

    length: int
    resolution: str = "day"

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("grid needs at least two points")
        if not self.resolution:
            raise ValueError("grid resolution label must be non-empty")


@dataclass(frozen=True, eq=False)
class QoSSeries:
    """One QoS parameter's values over a grid."""

    parameter: str
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        if not self.parameter:
            raise ValueError("parameter name must be non-empty")
        arr = _freeze(self.values)
        if arr.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series values must be finite (no NaN/inf)")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def std(self) -> float:
        return population_std(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QoSSeries):
            return NotImplemented
        return (
            self.parameter == other.parameter
            and self.unit == other.unit
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class Signature:
    """Per-parameter performance matrix for one provider.

    Structural invariants (checked here): at least one row, unique
    parameter names, every row as long as the grid, no constant rows.
    Unit-std normalization is established by the generation and file
    ingest paths, not re-checked on every instance, because noisy and
    spliced copies legitimately leave unit scale.

    ``provider_id`` and ``renormalized`` are provenance, not data: the
    on-disk format does not carry them, so equality ignores them.
    """

    rows: tuple[QoSSeries, ...]
    grid: TimeGrid
    provider_id: str = ""
    renormalized: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "renormalized", frozenset(self.renormalized))
        if not rows:
            raise ValueError("signature needs at least one row")
        names = [r.parameter for r in rows]
        if len(set(names)) != len(names):
            raise ValueError("duplicate QoS parameter in signature")
        for r in rows:
            if len(r) != self.grid.length:
                raise ValueError(
                    f"row {r.parameter!r} has {len(r)} points, grid has {self.grid.length}"
                )
            if r.std <= _CONSTANT_EPS:
                raise ConstantSeriesError(
                    f"row {r.parameter!r} is constant; signatures reject zero-variance rows"
                )

    @classmethod
    def from_raw_rows(cls, raw: dict[str, np.ndarray], grid: TimeGrid,
                      provider_id: str = "") -> "Signature":
        """Build a normalized signature by scaling each raw row to unit std."""
        rows = []
        for name, values in raw.items():
            arr = np.asarray(values, dtype=np.float64)
            std = population_std(arr)
            if std <= _CONSTANT_EPS:
                raise ConstantSeriesError(f"row {name!r} is constant")
            rows.append(QoSSeries(name, arr / std))
        return cls(tuple(rows), grid, provider_id)

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(r.parameter for r in self.rows)

    @property
    def matrix(self) -> np.ndarray:
        """Rows stacked into a (n_rows, grid.length) array."""
        return np.stack([r.values for r in self.rows])

    @property
    def is_normalized(self) -> bool:
        return all(abs(r.std - 1.0) <= STD_TOLERANCE for r in self.rows)

    def row(self, parameter: str) -> QoSSeries:
        for r in self.rows:
            if r.parameter == parameter:
                return r
        raise KeyError(f"no row for parameter {parameter!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return self.grid == other.grid and self.rows == other.rows


def slice_signature(sig: Signature, start: int, length: int) -> Signature:
    """Restrict a signature to grid indices [start, start+length)."""
    if length < 2:
        raise ValueError("slice needs at least two points")
    if start < 0 or start + length > sig.grid.length:
        raise ValueError("slice exceeds the grid")
    rows = tuple(
        QoSSeries(r.parameter, r.values[start:start + length], r.unit) for r in sig.rows
    )
    return Signature(rows, TimeGrid(length, sig.grid.resolution), sig.provider_id)


@dataclass(frozen=True, eq=False)
class TrialExperience:
    """One trial user's observed series for one parameter."""

    user_id: str
    parameter: str
    values: np.ndarray
    trial_start: int

    def __post_init__(self):
        if not self.user_id:
            raise ValueError("user_id must be non-empty")
        if not self.parameter:
            raise ValueError("parameter name must be non-empty")
        arr = _freeze(self.values)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("trial values must be a series of at least two points")
        if not np.all(np.isfinite(arr)):
            raise ValueError("trial values must be finite")
        if self.trial_start < 0:
            raise ValueError("trial_start must be non-negative")
        object.__setattr__(self, "values", arr)

    @property
    def trial_length(self) -> int:
        return int(self.values.size)

    @property
    def window(self) -> tuple[int, int]:
        return (self.trial_start, self.trial_length)


# ---------------------------------------------------------------------------
# Signature CSV: header "parameter,t0,...,t{L-1}", one row per parameter,
# floats printed in shortest round-trip form, UTF-8, LF line endings.

def write_signature(sig: Signature, path) -> None:
    lines = ["parameter," + ",".join(f"t{i}" for i in range(sig.grid.length))]
    for r in sig.rows:
        if "," in r.parameter or "\n" in r.parameter:
            raise ValueError(f"parameter name {r.parameter!r} not representable in CSV")
        lines.append(r.parameter + "," + ",".join(repr(float(v)) for v in r.values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_signature(path, provider_id: str | None = None) -> Signature:
    """Read a signature file; rows off unit std are re-normalized and flagged."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines:
        raise ParseError(f"{path}: empty signature file")
    header = lines[0].split(",")
    if header[0] != "parameter" or len(header) < 3:
        raise ParseError(f"{path}: bad header {lines[0]!r}")
    length = len(header) - 1
    expected = ["parameter"] + [f"t{i}" for i in range(length)]
    if header != expected:
        raise ParseError(f"{path}: header columns must be parameter,t0..t{length - 1}")
    if len(lines) == 1:
        raise ParseError(f"{path}: no data rows")

    rows = []
    renormalized = set()
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != length + 1:
            raise ParseError(f"{path}: row {parts[0]!r} has {len(parts) - 1} values, expected {length}")
        name = parts[0]
        try:
            values = np.array([float(p) for p in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{path}: row {name!r}: {exc}") from None
        if not np.all(np.isfinite(values)):
            raise ParseError(f"{path}: row {name!r} contains NaN or infinity")
        std = population_std(values)
        if std <= _CONSTANT_EPS:
            raise ConstantSeriesError(f"{path}: row {name!r} is constant")
        if abs(std - 1.0) > STD_TOLERANCE:
            values = values / std
            renormalized.add(name)
        rows.append(QoSSeries(name, values))

    return Signature(
        tuple(rows),
        TimeGrid(length),
        provider_id if provider_id is not None else path.stem,
        frozenset(renormalized),
    )
