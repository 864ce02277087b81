"""Synthetic workload traces, provider QoS profiles, and benchmark corpora.

The pipeline mirrors how a broker would assemble ground truth:

* a workload trace gives per-node demand fractions over a raw grid;
* a baseline map turns demand into baseline performance (heavier load,
  lower throughput);
* a provider profile perturbs the baseline with a workload response map,
  a seasonal map over the observation grid, and bounded random jitter;
* every node acts as one trial user; PAA reduces the raw series to the
  observation grid and the cohort mean becomes the provider signature.

Labeled pairs are then (signature, modified copy): a splice from a donor
provider for the "changed" class, or one of the three noise kinds for
the "noisy" class.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .core import Signature, QoSSeries, TimeGrid, TrialExperience
from .errors import AlignmentError, ParseError
from .noisegen import (AttenuationNoise, DistortionNoise, NoiseSpec,
                       SpikeNoise, inject, spec_from_dict, spec_to_dict)
from .signature import TrialCohort, generate_signature, paa, paa_boundaries


# ---------------------------------------------------------------------------
# Workload traces

@dataclass(frozen=True)
class WorkloadTrace:
    """Per-node demand fractions over a raw (pre-PAA) grid."""

    node_ids: tuple[str, ...]
    demands: np.ndarray  # shape (nodes, timestamps), values in [0, 1]

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        demands = np.array(self.demands, dtype=np.float64)
        demands.setflags(write=False)
        object.__setattr__(self, "demands", demands)
        if demands.ndim != 2 or demands.shape[0] != len(self.node_ids):
            raise ValueError("demands must be (nodes, timestamps)")
        if not self.node_ids:
            raise ValueError("trace needs at least one node")
        if demands.shape[1] < 2:
            raise ValueError("trace needs at least two timestamps")
        if demands.min() < 0.0 or demands.max() > 1.0:
            raise ValueError("demand fractions must lie in [0, 1]")

    @property
    def length(self) -> int:
        return int(self.demands.shape[1])


def synthesize_trace(nodes: int, length: int, seed: int,
                     cores_total: int = 32) -> WorkloadTrace:
    """Bounded random-walk demand per node, quantized to whole cores."""
    if nodes < 1 or length < 2:
        raise ValueError("need at least one node and two timestamps")
    if cores_total < 1:
        raise ValueError("cores_total must be positive")
    rng = np.random.default_rng(seed)
    start = rng.uniform(0.25, 0.75, size=(nodes, 1))
    steps = rng.normal(0.0, 0.015, size=(nodes, length - 1))
    walk = np.concatenate([start, start + np.cumsum(steps, axis=1)], axis=1)
    # Reflect into [0, 1]: fold the walk back at both edges.
    folded = np.abs(np.mod(walk, 2.0))
    folded = np.where(folded > 1.0, 2.0 - folded, folded)
    requested = np.rint(folded * cores_total)
    return WorkloadTrace(
        tuple(f"node-{i:02d}" for i in range(nodes)),
        requested / cores_total,
    )


def write_trace(trace: WorkloadTrace, path, cores_total: int = 32) -> None:
    """Trace CSV: node_id,timestamp,cores_requested,cores_total."""
    lines = ["node_id,timestamp,cores_requested,cores_total"]
    requested = np.rint(trace.demands * cores_total).astype(int)
    for i, node in enumerate(trace.node_ids):
        for t in range(trace.length):
            lines.append(f"{node},{t},{requested[i, t]},{cores_total}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_trace(path) -> WorkloadTrace:
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").split("\n") if ln]
    if not lines or lines[0] != "node_id,timestamp,cores_requested,cores_total":
        raise ParseError(f"{path}: bad or missing header")
    per_node: dict[str, dict[int, float]] = {}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 4:
            raise ParseError(f"{path}: bad row {ln!r}")
        node = parts[0]
        try:
            t = int(parts[1])
            requested = float(parts[2])
            total = float(parts[3])
        except ValueError as exc:
            raise ParseError(f"{path}: bad row {ln!r}: {exc}") from None
        if total <= 0:
            raise ParseError(f"{path}: node {node!r} t={t}: cores_total must be positive")
        if requested < 0 or requested > total:
            raise ParseError(f"{path}: node {node!r} t={t}: requested cores out of range")
        slots = per_node.setdefault(node, {})
        if t in slots:
            raise ParseError(f"{path}: duplicate entry for node {node!r} t={t}")
        slots[t] = requested / total

    if not per_node:
        raise ParseError(f"{path}: no data rows")
    lengths = {len(v) for v in per_node.values()}
    if len(lengths) != 1:
        raise ParseError(f"{path}: nodes disagree on the number of timestamps")
    length = lengths.pop()
    rows = []
    for node in sorted(per_node):
        slots = per_node[node]
        if sorted(slots) != list(range(length)):
            raise ParseError(f"{path}: node {node!r} timestamps are not 0..{length - 1}")
        rows.append([slots[t] for t in range(length)])
    return WorkloadTrace(tuple(sorted(per_node)), np.array(rows))


# ---------------------------------------------------------------------------
# Baseline map and provider profiles

@dataclass(frozen=True)
class BaselineMap:
    """Piecewise-linear demand -> baseline performance, strictly decreasing."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bps = tuple((float(d), float(p)) for d, p in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if len(bps) < 2:
            raise ValueError("baseline map needs at least two breakpoints")
        demands = [d for d, _ in bps]
        perfs = [p for _, p in bps]
        if demands[0] != 0.0 or demands[-1] != 1.0:
            raise ValueError("baseline map must cover demand 0.0 to 1.0")
        if any(b <= a for a, b in zip(demands, demands[1:])):
            raise ValueError("baseline demands must be strictly increasing")
        if any(b >= a for a, b in zip(perfs, perfs[1:])):
            raise ValueError("baseline performance must strictly decrease with demand")
        if perfs[-1] <= 0:
            raise ValueError("baseline performance must stay positive")


def baseline_performance(bmap: BaselineMap, demand) -> float | np.ndarray:
    """Interpolate baseline performance at a demand fraction in [0, 1]."""
    arr = np.asarray(demand, dtype=np.float64)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("demand must lie in [0, 1]")
    xs = np.array([d for d, _ in bmap.breakpoints])
    ys = np.array([p for _, p in bmap.breakpoints])
    out = np.interp(arr, xs, ys)
    return float(out) if np.isscalar(demand) or arr.ndim == 0 else out


@dataclass(frozen=True)
class IntervalRule:
    """Half-open interval [lo, hi) mapped to a multiplier (last hi inclusive)."""

    lo: float
    hi: float
    multiplier: float

    def __post_init__(self):
        if self.hi <= self.lo:
            raise ValueError("interval must have positive width")
        if self.multiplier <= 0:
            raise ValueError("multiplier must be positive")


def _check_tiling(rules: tuple[IntervalRule, ...], lo: float, hi: float, what: str):
    if not rules:
        raise ValueError(f"{what} needs at least one rule")
    if rules[0].lo != lo or rules[-1].hi != hi:
        raise ValueError(f"{what} must tile [{lo}, {hi}]")
    for a, b in zip(rules, rules[1:]):
        if b.lo != a.hi:
            raise ValueError(f"{what} rules must tile without gaps or overlap")


class _RuleLookup:
    """Vectorized interval lookup over a tiling rule set."""

    def __init__(self, rules: tuple[IntervalRule, ...]):
        self.edges = np.array([r.lo for r in rules] + [rules[-1].hi])
        self.multipliers = np.array([r.multiplier for r in rules])

    def __call__(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.min() < self.edges[0] or arr.max() > self.edges[-1]:
            raise ValueError("value outside the rule domain")
        idx = np.searchsorted(self.edges, arr, side="right") - 1
        idx = np.clip(idx, 0, self.multipliers.size - 1)
        return self.multipliers[idx]


@dataclass(frozen=True)
class QoSProfile:
    """How one provider's performance deviates from the baseline."""

    provider_id: str
    workload_map: tuple[IntervalRule, ...]   # over demand fraction [0, 1]
    seasonal_map: tuple[IntervalRule, ...]   # over grid index [0, grid_length]
    jitter_amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "workload_map", tuple(self.workload_map))
        object.__setattr__(self, "seasonal_map", tuple(self.seasonal_map))
        if not self.provider_id:
            raise ValueError("provider_id must be non-empty")
        _check_tiling(self.workload_map, 0.0, 1.0, "workload map")
        _check_tiling(self.seasonal_map, 0.0, self.seasonal_map[-1].hi, "seasonal map")
        if self.jitter_amplitude < 0:
            raise ValueError("jitter amplitude must be non-negative")

    @property
    def grid_span(self) -> int:
        return int(self.seasonal_map[-1].hi)


def profile_to_dict(profile: QoSProfile) -> dict:
    return {
        "provider_id": profile.provider_id,
        "jitter_amplitude": profile.jitter_amplitude,
        "workload_map": [[r.lo, r.hi, r.multiplier] for r in profile.workload_map],
        "seasonal_map": [[r.lo, r.hi, r.multiplier] for r in profile.seasonal_map],
    }


def profile_from_dict(payload: dict) -> QoSProfile:
    try:
        return QoSProfile(
            payload["provider_id"],
            tuple(IntervalRule(*map(float, r)) for r in payload["workload_map"]),
            tuple(IntervalRule(*map(float, r)) for r in payload["seasonal_map"]),
            float(payload["jitter_amplitude"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad profile payload: {exc}") from None


def read_profile(path) -> QoSProfile:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return profile_from_dict(payload)


def write_profile(profile: QoSProfile, path) -> None:
    Path(path).write_text(
        json.dumps(profile_to_dict(profile), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def default_baseline() -> BaselineMap:
    payload = json.loads(
        resources.files("sigdrift.data").joinpath("baseline_map.json").read_text("utf-8")
    )
    return BaselineMap(tuple((float(d), float(p)) for d, p in payload["breakpoints"]))


def default_profiles() -> list[QoSProfile]:
    root = resources.files("sigdrift.data").joinpath("profiles")
    profiles = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            profiles.append(profile_from_dict(json.loads(entry.read_text("utf-8"))))
    if not profiles:
        raise RuntimeError("no packaged provider profiles found")
    return profiles


# ---------------------------------------------------------------------------
# Performance synthesis

def provider_performance(profile: QoSProfile, demand: float, t: int,
                         baseline: BaselineMap, seed: int) -> float:
    """One provider observation: baseline x workload x seasonal x jitter.

    Deterministic for fixed arguments; with jitter_amplitude == 0 the
    seed has no effect.
    """
    if not 0 <= t < profile.grid_span:
        raise ValueError("t outside the profile's seasonal span")
    base = baseline_performance(baseline, demand)
    wmul = float(_RuleLookup(profile.workload_map)(demand))
    smul = float(_RuleLookup(profile.seasonal_map)(t))
    u = float(np.random.default_rng(seed).random())
    return base * wmul * smul * (1.0 + profile.jitter_amplitude * u)


def _performance_matrix(profile: QoSProfile, demands: np.ndarray,
                        day_of: np.ndarray, baseline: BaselineMap,
                        rng: np.random.Generator) -> np.ndarray:
    base = baseline_performance(baseline, demands)
    wmul = _RuleLookup(profile.workload_map)(demands)
    smul = _RuleLookup(profile.seasonal_map)(day_of)
    jitter = 1.0 + profile.jitter_amplitude * rng.random(demands.shape)
    return base * wmul * smul[None, :] * jitter


def build_provider_signatures(profiles, trace: WorkloadTrace, grid: TimeGrid,
                              baseline: BaselineMap | None = None,
                              parameters: tuple[str, ...] = ("throughput",),
                              seed: int | np.random.SeedSequence = 0) -> list[Signature]:
    """One signature per profile: every trace node acts as a trial user.

    Each node's raw performance series is PAA-reduced to the grid and
    the node cohort is averaged and normalized into the signature.
    """
    profiles = list(profiles)
    if not profiles:
        raise ValueError("need at least one profile")
    if baseline is None:
        baseline = default_baseline()
    if grid.length > trace.length:
        raise AlignmentError("grid cannot be finer than the trace")
    for p in profiles:
        if p.grid_span != grid.length:
            raise AlignmentError(
                f"profile {p.provider_id!r} seasonal map spans {p.grid_span}, grid is {grid.length}"
            )

    bounds = paa_boundaries(trace.length, grid.length)
    # Grid index of each raw timestamp: the PAA frame it lands in.
    day_of = np.searchsorted(bounds, np.arange(trace.length), side="right") - 1

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = ss.spawn(len(profiles))
    signatures = []
    for profile, stream in zip(profiles, streams):
        rng = np.random.default_rng(stream)
        cohorts = []
        for parameter in parameters:
            perf = _performance_matrix(profile, trace.demands, day_of, baseline, rng)
            experiences = tuple(
                TrialExperience(node, parameter, paa(perf[i], grid.length), 0)
                for i, node in enumerate(trace.node_ids)
            )
            cohorts.append(TrialCohort(experiences, (0, grid.length)))
        signatures.append(generate_signature(cohorts, grid, profile.provider_id))
    return signatures


# ---------------------------------------------------------------------------
# Labeled pairs and corpora

class Label(Enum):
    CHANGED = "changed"
    NOISY = "noisy"


@dataclass(frozen=True)
class LabeledPair:
    existing: Signature
    recomputed: Signature
    label: Label
    noise: NoiseSpec | None
    provenance: dict


def make_changed(original: Signature, donor: Signature,
                 segment: tuple[int, int], seed: int) -> LabeledPair:
    """Splice the donor's values over `segment` into a copy of the original."""
    start, length = segment
    if donor.provider_id == original.provider_id:
        raise ValueError("donor must be a different provider")
    if donor.grid != original.grid or donor.parameters != original.parameters:
        raise AlignmentError("donor must share grid and parameters")
    if length < 1:
        raise ValueError("segment length must be at least 1")
    if start < 0 or start + length > original.grid.length:
        raise ValueError("segment exceeds the grid")
    rows = []
    for orig_row, donor_row in zip(original.rows, donor.rows):
        values = orig_row.values.copy()
        values[start:start + length] = donor_row.values[start:start + length]
        rows.append(QoSSeries(orig_row.parameter, values, orig_row.unit))
    spliced = Signature(tuple(rows), original.grid, original.provider_id)
    return LabeledPair(
        original, spliced, Label.CHANGED, None,
        {"provider": original.provider_id, "donor": donor.provider_id,
         "segment_start": start, "segment_length": length, "seed": seed},
    )


def make_noisy(original: Signature, spec: NoiseSpec, seed: int) -> LabeledPair:
    noisy = inject(original, spec, seed)
    return LabeledPair(
        original, noisy, Label.NOISY, spec,
        {"provider": original.provider_id, "noise": spec_to_dict(spec), "seed": seed},
    )


@dataclass(frozen=True)
class CorpusParams:
    """Everything about corpus construction that is not a pair count."""

    nodes: int = 31
    raw_length: int = 6486
    grid_length: int = 360
    resolution: str = "day"
    parameter: str = "throughput"
    spike_width: int = 3
    spike_magnitude: float = 7.0
    attenuation_low: float = 0.93
    attenuation_high: float = 0.98
    awgn_db: float = 20.0
    attenuation_share: float = 0.10
    changed_segment: int = 90
    paper_faithful: bool = False

    def __post_init__(self):
        if not 0.0 <= self.attenuation_share < 1.0:
            raise ValueError("attenuation share must be in [0, 1)")
        if not 0.0 < self.attenuation_low <= self.attenuation_high < 1.0:
            raise ValueError("attenuation factor range must sit inside (0, 1)")
        if self.changed_segment < 1 or self.changed_segment >= self.grid_length:
            raise ValueError("changed segment must fit inside the grid")


def build_base_signatures(seed: int, params: CorpusParams = CorpusParams(),
                          profiles=None) -> list[Signature]:
    """Synthesize a trace and derive one signature per packaged profile."""
    ss_trace, ss_perf = np.random.SeedSequence(seed).spawn(2)
    trace = synthesize_trace(params.nodes, params.raw_length,
                             ss_trace.generate_state(1)[0])
    return build_provider_signatures(
        profiles if profiles is not None else default_profiles(),
        trace,
        TimeGrid(params.grid_length, params.resolution),
        parameters=(params.parameter,),
        seed=ss_perf,
    )


def _noise_counts(n_noisy: int, distortion_fraction: float,
                  params: CorpusParams) -> tuple[int, int, int]:
    n_distortion = int(round(distortion_fraction * n_noisy))
    if params.paper_faithful:
        n_attenuation = 0
    else:
        n_attenuation = min(int(round(params.attenuation_share * n_noisy)),
                            n_noisy - n_distortion)
    n_spike = n_noisy - n_distortion - n_attenuation
    return n_spike, n_distortion, n_attenuation


def build_corpus(n_changed: int, n_noisy: int, distortion_fraction: float,
                 seed: int, signatures: list[Signature] | None = None,
                 params: CorpusParams = CorpusParams()) -> list[LabeledPair]:
    """Deterministic labeled corpus: changed pairs first, then noisy pairs.

    Changed and noisy pairs consume independent random streams, so
    changing only the noise composition leaves the changed pairs
    untouched for the same seed.
    """
    if n_changed < 0 or n_noisy < 0:
        raise ValueError("pair counts must be non-negative")
    if not 0.0 <= distortion_fraction <= 1.0:
        raise ValueError("distortion fraction must be in [0, 1]")

    ss = np.random.SeedSequence(seed)
    ss_sigs, ss_changed, ss_noisy, ss_pair_seeds = ss.spawn(4)
    if signatures is None:
        signatures = build_base_signatures(ss_sigs.generate_state(1)[0], params)
    k = len(signatures)
    if n_changed > 0 and k < 2:
        raise ValueError("changed pairs need at least two base signatures")
    if k < 1:
        raise ValueError("need at least one base signature")

    grid_length = signatures[0].grid.length
    pair_seeds = [int(s) for s in ss_pair_seeds.generate_state(n_changed + n_noisy,
                                                               dtype=np.uint64)]
    pairs: list[LabeledPair] = []

    rng_changed = np.random.default_rng(ss_changed)
    for i in range(n_changed):
        base = int(rng_changed.integers(0, k))
        donor = int(rng_changed.integers(0, k - 1))
        if donor >= base:
            donor += 1
        start = int(rng_changed.integers(0, grid_length - params.changed_segment + 1))
        pair = make_changed(signatures[base], signatures[donor],
                            (start, params.changed_segment), pair_seeds[i])
        pair.provenance["index"] = i
        pairs.append(pair)

    n_spike, n_distortion, n_attenuation = _noise_counts(
        n_noisy, distortion_fraction, params)
    kinds = (["spike"] * n_spike + ["distortion"] * n_distortion
             + ["attenuation"] * n_attenuation)
    rng_noisy = np.random.default_rng(ss_noisy)
    for j, kind in enumerate(kinds):
        idx = n_changed + j
        base = int(rng_noisy.integers(0, k))
        if kind == "spike":
            position = int(rng_noisy.integers(0, grid_length - params.spike_width + 1))
            spec: NoiseSpec = SpikeNoise(position, params.spike_width,
                                         params.spike_magnitude)
        elif kind == "distortion":
            spec = DistortionNoise(params.awgn_db)
        else:
            spec = AttenuationNoise(float(rng_noisy.uniform(
                params.attenuation_low, params.attenuation_high)))
        pair = make_noisy(signatures[base], spec, pair_seeds[idx])
        pair.provenance["index"] = idx
        pairs.append(pair)

    return pairs


# ---------------------------------------------------------------------------
# Corpus manifest

def manifest_entry(pair: LabeledPair, existing_path: str | None = None,
                   recomputed_path: str | None = None) -> dict:
    entry = {
        "index": pair.provenance.get("index"),
        "label": pair.label.value,
        "provider": pair.existing.provider_id,
        "seed": pair.provenance.get("seed"),
        "noise": spec_to_dict(pair.noise) if pair.noise is not None else None,
    }
    if pair.label is Label.CHANGED:
        entry["donor"] = pair.provenance.get("donor")
        entry["segment"] = [pair.provenance.get("segment_start"),
                            pair.provenance.get("segment_length")]
    if existing_path is not None:
        entry["existing_path"] = existing_path
        entry["recomputed_path"] = recomputed_path
    return entry


def write_manifest(entries: list[dict], config: dict, seed: int, path) -> None:
    payload = {"config": config, "seed": seed, "pairs": entries}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
