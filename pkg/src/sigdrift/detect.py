"""The three change detectors: sliding-window, SNR-profile, CUSUM.

All three take the existing signature and a recomputed one on the same
grid and return a :class:`DetectionOutcome`.  The recomputed side may be
un-normalized (it usually is, after noise injection or splicing).

The sliding-window detector is the only one that names the noise it
thinks it saw.  Its per-row decision sequence:

1. p = pcc(existing, recomputed), r = rmse(existing, recomputed)
2. p >= s_p and r <= s_r          -> no change
3. p >= s_p and r <= t_d          -> noise (attenuation)
4. otherwise scan every deletion window of width W: drop [w, w+W) from
   both series and recompute PCC; if any deletion reaches s_p the row is
   noise (spike) at the best-scoring window, else it is a change.

A multi-row signature is a change if any row is a change; noise kinds
stay per-row.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ._kernels import cusum_scan, deletion_pcc_scan
from .core import Signature, population_std
from .errors import AlignmentError
from .noisegen import NoiseProfile, SnrValue, snr
from .similarity import pcc, rmse


class Verdict(Enum):
    CHANGE = "change"
    NOISE = "noise"
    NO_CHANGE = "no_change"


@dataclass(frozen=True)
class DetectorThresholds:
    similarity_floor: float = 0.60   # s_p: minimum PCC to call shapes alike
    distance_ceiling: float = 0.20   # s_r: maximum RMSE for "no change"
    attenuation_ceiling: float = 0.50  # t_d: maximum RMSE still explainable as damping
    window: int = 6                  # W: deletion window width for the spike scan

    def __post_init__(self):
        if not -1.0 <= self.similarity_floor <= 1.0:
            raise ValueError("similarity floor must be a correlation value")
        if self.distance_ceiling < 0 or self.attenuation_ceiling < 0:
            raise ValueError("distance thresholds must be non-negative")
        if self.distance_ceiling > self.attenuation_ceiling:
            raise ValueError("distance ceiling cannot exceed the attenuation ceiling")
        if self.window < 1:
            raise ValueError("scan window must be at least 1")


@dataclass(frozen=True)
class RowDecision:
    parameter: str
    verdict: Verdict
    noise_kind: str | None
    diagnostics: dict


@dataclass(frozen=True)
class DetectionOutcome:
    verdict: Verdict
    noise_kind: str | None
    diagnostics: dict
    rows: tuple[RowDecision, ...] = ()

    def to_dict(self) -> dict:
        payload = {
            "verdict": self.verdict.value,
            "noise_kind": self.noise_kind,
            "diagnostics": _jsonable(self.diagnostics),
        }
        if self.rows:
            payload["diagnostics"]["rows"] = [
                {
                    "parameter": r.parameter,
                    "verdict": r.verdict.value,
                    "noise_kind": r.noise_kind,
                    **_jsonable(r.diagnostics),
                }
                for r in self.rows
            ]
        return payload


def _jsonable(diag: dict) -> dict:
    out = {}
    for key, value in diag.items():
        if isinstance(value, float) and not math.isfinite(value):
            out[key] = None
        elif isinstance(value, (list, tuple)):
            out[key] = [
                None if isinstance(v, float) and not math.isfinite(v) else v
                for v in value
            ]
        else:
            out[key] = value
    return out


def write_outcome(outcome: DetectionOutcome, path) -> None:
    Path(path).write_text(json.dumps(outcome.to_dict(), sort_keys=True) + "\n",
                          encoding="utf-8")


def _check_pair(existing: Signature, recomputed: Signature) -> None:
    if existing.grid != recomputed.grid:
        raise AlignmentError("signatures must share the grid")
    if existing.parameters != recomputed.parameters:
        raise AlignmentError("signatures must cover the same parameters")


def _aggregate(rows: list[RowDecision]) -> DetectionOutcome:
    verdict = Verdict.NO_CHANGE
    noise_kind = None
    deciding = rows[0]
    for r in rows:
        if r.verdict is Verdict.CHANGE:
            verdict = Verdict.CHANGE
            deciding = r
            break
        if r.verdict is Verdict.NOISE and verdict is not Verdict.CHANGE:
            if noise_kind is None:
                noise_kind = r.noise_kind
                deciding = r
            verdict = Verdict.NOISE
    if verdict is not Verdict.NOISE:
        noise_kind = None
    return DetectionOutcome(verdict, noise_kind, dict(deciding.diagnostics), tuple(rows))


def sliding_window_detect(existing: Signature, recomputed: Signature,
                          thresholds: DetectorThresholds = DetectorThresholds()
                          ) -> DetectionOutcome:
    _check_pair(existing, recomputed)
    if thresholds.window >= existing.grid.length - 1:
        raise ValueError("scan window must be shorter than the grid")

    decisions = []
    for ex_row, rec_row in zip(existing.rows, recomputed.rows):
        x = ex_row.values
        y = rec_row.values
        p = pcc(x, y)
        r = rmse(x, y)
        diag = {"pcc": p, "rmse": r}
        if p >= thresholds.similarity_floor and r <= thresholds.distance_ceiling:
            decisions.append(RowDecision(ex_row.parameter, Verdict.NO_CHANGE, None, diag))
            continue
        if p >= thresholds.similarity_floor and r <= thresholds.attenuation_ceiling:
            decisions.append(RowDecision(ex_row.parameter, Verdict.NOISE, "attenuation", diag))
            continue
        scan = deletion_pcc_scan(x, y, thresholds.window)
        if np.all(np.isnan(scan)):
            best = float("nan")
            best_start = -1
        else:
            best_start = int(np.nanargmax(scan))
            best = float(scan[best_start])
        diag["best_window_pcc"] = best
        diag["removed_window_start"] = best_start
        if not math.isnan(best) and best >= thresholds.similarity_floor:
            decisions.append(RowDecision(ex_row.parameter, Verdict.NOISE, "spike", diag))
        else:
            decisions.append(RowDecision(ex_row.parameter, Verdict.CHANGE, None, diag))
    return _aggregate(decisions)


def snr_detect(existing: Signature, recomputed: Signature, profile: NoiseProfile,
               mode: str = "segments") -> DetectionOutcome:
    """Change when any segment's current SNR drops strictly below baseline.

    ``mode="aggregate"`` instead compares one whole-period SNR against
    the lowest baseline segment.
    """
    _check_pair(existing, recomputed)
    seg = profile.segment_length
    if profile.segments * seg > existing.grid.length:
        raise AlignmentError("profile covers more than the grid")

    ex = existing.matrix
    res = ex - recomputed.matrix

    if mode == "aggregate":
        current = snr(ex, res)
        baseline = profile.segment_snrs[0]
        for s in profile.segment_snrs[1:]:
            if s.is_less_than(baseline):
                baseline = s
        changed = current.is_less_than(baseline)
        diag = {
            "snr_current": [None if current.infinite else current.ratio],
            "snr_baseline": [None if baseline.infinite else baseline.ratio],
        }
        verdict = Verdict.CHANGE if changed else Verdict.NO_CHANGE
        return DetectionOutcome(verdict, None, diag)
    if mode != "segments":
        raise ValueError(f"unknown snr mode {mode!r}")

    currents: list[SnrValue] = []
    violated = -1
    for i in range(profile.segments):
        sl = slice(i * seg, (i + 1) * seg)
        current = snr(ex[:, sl], res[:, sl])
        currents.append(current)
        if violated < 0 and current.is_less_than(profile.segment_snrs[i]):
            violated = i
    diag = {
        "snr_current": [None if c.infinite else c.ratio for c in currents],
        "snr_baseline": [None if s.infinite else s.ratio for s in profile.segment_snrs],
        "violated_segment": violated,
    }
    verdict = Verdict.CHANGE if violated >= 0 else Verdict.NO_CHANGE
    return DetectionOutcome(verdict, None, diag)


def cusum_detect(existing: Signature, recomputed: Signature,
                 slack: float = 0.5, decision_interval: float = 5.0
                 ) -> DetectionOutcome:
    """Two-sided CUSUM on standardized deviations; change on a strict crossing."""
    _check_pair(existing, recomputed)
    if slack < 0 or decision_interval <= 0:
        raise ValueError("slack must be >= 0 and the decision interval positive")

    decisions = []
    for ex_row, rec_row in zip(existing.rows, recomputed.rows):
        z = (rec_row.values - ex_row.values) / population_std(ex_row.values)
        max_pos, max_neg, alarm = cusum_scan(z, slack, decision_interval)
        diag = {
            "cusum_max_pos": max_pos,
            "cusum_max_neg": max_neg,
            "alarm_index": alarm,
        }
        verdict = Verdict.CHANGE if alarm >= 0 else Verdict.NO_CHANGE
        decisions.append(RowDecision(ex_row.parameter, verdict, None, diag))
    return _aggregate(decisions)
