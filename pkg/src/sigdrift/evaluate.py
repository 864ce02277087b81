"""Scoring, the four benchmark metrics, and the experiment harness.

Binarization: a "change" verdict on a changed pair is a true positive;
any other verdict there is a false negative.  On a noisy pair, "change"
is a false positive and both "noise" and "no change" count as true
negatives (the detector correctly refused to call a change).

Rates with a zero denominator return None and serialize as JSON null.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import slice_signature
from .datagen import CorpusParams, Label, LabeledPair, build_base_signatures, build_corpus
from .detect import (DetectorThresholds, Verdict, cusum_detect,
                     sliding_window_detect, snr_detect)
from .noisegen import NoiseProfile, combine_min, learn_noise_profile


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def score(labeled_verdicts) -> ConfusionCounts:
    """Fold (Label, Verdict) pairs into confusion counts."""
    tp = fp = tn = fn = 0
    for label, verdict in labeled_verdicts:
        changed = label is Label.CHANGED
        called_change = verdict is Verdict.CHANGE
        if changed and called_change:
            tp += 1
        elif changed:
            fn += 1
        elif called_change:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def fp_rate(c: ConfusionCounts) -> float | None:
    denom = c.fp + c.tn
    return c.fp / denom if denom else None


def tp_rate(c: ConfusionCounts) -> float | None:
    denom = c.tp + c.fn
    return c.tp / denom if denom else None


def accuracy(c: ConfusionCounts) -> float | None:
    return (c.tp + c.tn) / c.total if c.total else None


def f1(c: ConfusionCounts) -> float | None:
    denom = c.tp + 0.5 * (c.fp + c.fn)
    return c.tp / denom if denom else None


METRICS = {"fp_rate": fp_rate, "tp_rate": tp_rate, "accuracy": accuracy, "f1": f1}

DETECTOR_NAMES = ("sw", "snr", "cusum")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark run depends on, minus the seed."""

    n_changed: int = 3000
    n_noisy: int = 3000
    distortion_fraction: float = 0.5
    sample_sizes: tuple[int, ...] = (1000, 2000, 3000, 4000, 5000)
    repeats: int = 30
    detectors: tuple[str, ...] = DETECTOR_NAMES
    thresholds: DetectorThresholds = field(default_factory=DetectorThresholds)
    cusum_slack: float = 0.5
    cusum_interval: float = 5.0
    snr_segments: int = 6
    snr_mode: str = "segments"
    monitor_fraction: float = 0.2
    corpus: CorpusParams = field(default_factory=CorpusParams)

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(self.sample_sizes))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if self.repeats < 1:
            raise ValueError("need at least one repeat")
        unknown = set(self.detectors) - set(DETECTOR_NAMES)
        if unknown:
            raise ValueError(f"unknown detectors: {sorted(unknown)}")
        total = self.n_changed + self.n_noisy
        if any(s < 1 or s > total for s in self.sample_sizes):
            raise ValueError("sample sizes must lie in [1, corpus size]")
        if not 0.0 < self.monitor_fraction <= 1.0:
            raise ValueError("monitor fraction must be in (0, 1]")
        if self.snr_segments < 1:
            raise ValueError("need at least one SNR segment")

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["sample_sizes"] = list(self.sample_sizes)
        payload["detectors"] = list(self.detectors)
        return payload


def learn_monitoring_profiles(pairs: list[LabeledPair], segments: int
                              ) -> dict[str, NoiseProfile]:
    """Per-provider baseline: segment-wise worst SNR over monitoring pairs.

    Each monitoring pair contributes one profile (its recomputed
    signature cut into segment slices); folding with min keeps the
    noisiest level ever observed per segment.  A pooled profile under
    the key "" covers providers that never appeared.
    """
    by_provider: dict[str, list[NoiseProfile]] = {}
    everything: list[NoiseProfile] = []
    for pair in pairs:
        seg_len = pair.existing.grid.length // segments
        slices = [
            slice_signature(pair.recomputed, i * seg_len, seg_len)
            for i in range(segments)
        ]
        profile = learn_noise_profile(pair.existing, slices, segments)
        by_provider.setdefault(pair.existing.provider_id, []).append(profile)
        everything.append(profile)
    if not everything:
        raise ValueError("no monitoring pairs to learn from")
    merged = {pid: combine_min(ps) for pid, ps in by_provider.items()}
    merged[""] = combine_min(everything)
    return merged


def detect_pair(pair: LabeledPair, detector: str, config: ExperimentConfig,
                profiles: dict[str, NoiseProfile]) -> Verdict:
    if detector == "sw":
        return sliding_window_detect(pair.existing, pair.recomputed,
                                     config.thresholds).verdict
    if detector == "cusum":
        return cusum_detect(pair.existing, pair.recomputed,
                            config.cusum_slack, config.cusum_interval).verdict
    if detector == "snr":
        profile = profiles.get(pair.existing.provider_id, profiles[""])
        return snr_detect(pair.existing, pair.recomputed, profile,
                          config.snr_mode).verdict
    raise ValueError(f"unknown detector {detector!r}")


def _run_repeat(config: ExperimentConfig, repeat_stream: np.random.SeedSequence
                ) -> dict:
    """One simulation repeat: fresh corpus, verdicts, per-size metrics."""
    sig_ss, corpus_ss, monitor_ss, sample_ss = repeat_stream.spawn(4)
    signatures = build_base_signatures(int(sig_ss.generate_state(1)[0]), config.corpus)
    corpus = build_corpus(config.n_changed, config.n_noisy,
                          config.distortion_fraction,
                          int(corpus_ss.generate_state(1)[0]),
                          signatures=signatures, params=config.corpus)

    profiles: dict[str, NoiseProfile] = {}
    if "snr" in config.detectors:
        n_monitor = max(1, int(round(config.monitor_fraction * len(corpus))))
        monitoring = build_corpus(0, n_monitor, config.distortion_fraction,
                                  int(monitor_ss.generate_state(1)[0]),
                                  signatures=signatures, params=config.corpus)
        profiles = learn_monitoring_profiles(monitoring, config.snr_segments)

    labels = [pair.label for pair in corpus]
    verdicts: dict[str, list[Verdict]] = {}
    sw_outcomes = None
    for det in config.detectors:
        if det == "sw":
            sw_outcomes = [
                sliding_window_detect(pair.existing, pair.recomputed, config.thresholds)
                for pair in corpus
            ]
            verdicts[det] = [o.verdict for o in sw_outcomes]
        else:
            verdicts[det] = [detect_pair(pair, det, config, profiles) for pair in corpus]

    rng = np.random.default_rng(sample_ss)
    cells: dict[str, dict[int, dict[str, float | None]]] = {
        det: {} for det in config.detectors
    }
    for size in config.sample_sizes:
        chosen = rng.choice(len(corpus), size=size, replace=False)
        for det in config.detectors:
            counts = score((labels[i], verdicts[det][i]) for i in chosen)
            cells[det][size] = {name: fn(counts) for name, fn in METRICS.items()}

    out = {"cells": cells}
    if sw_outcomes is not None:
        noisy = [(pair, o) for pair, o in zip(corpus, sw_outcomes)
                 if pair.label is Label.NOISY]
        if noisy:
            hits = sum(
                1 for pair, o in noisy
                if o.verdict is Verdict.NOISE and o.noise_kind == pair.noise.kind
            )
            out["sw_noise_kind_accuracy"] = hits / len(noisy)
    return out


def _run_repeat_star(args):
    return _run_repeat(*args)


def _summary(values: list) -> dict:
    clean = [v for v in values if v is not None]
    if len(clean) != len(values) or not clean:
        return {"mean": None, "std": None, "values": values}
    arr = np.asarray(clean, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std()), "values": values}


def run_experiment(config: ExperimentConfig, seed: int, jobs: int = 1) -> dict:
    """Run `repeats` fresh corpora and aggregate metrics per detector and size."""
    streams = np.random.SeedSequence(seed).spawn(config.repeats)
    work = [(config, s) for s in streams]
    if jobs > 1 and config.repeats > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, config.repeats)) as pool:
            results = list(pool.map(_run_repeat_star, work))
    else:
        results = [_run_repeat(*w) for w in work]

    detectors: dict[str, dict[str, dict[str, dict]]] = {}
    for det in config.detectors:
        detectors[det] = {}
        for size in config.sample_sizes:
            per_metric = {}
            for metric in METRICS:
                values = [r["cells"][det][size][metric] for r in results]
                per_metric[metric] = _summary(values)
            detectors[det][str(size)] = per_metric

    report = {
        "config": config.to_dict(),
        "seed": seed,
        "detectors": detectors,
    }
    if all("sw_noise_kind_accuracy" in r for r in results) and "sw" in config.detectors:
        report["diagnostics"] = {
            "sw_noise_kind_accuracy": _summary(
                [r["sw_noise_kind_accuracy"] for r in results]
            )
        }
    return report


def sensitivity_analysis(config: ExperimentConfig, seed: int,
                         levels: tuple[float, ...] = (0.5, 0.25, 0.0),
                         jobs: int = 1) -> dict:
    """Re-run the experiment at several distortion fractions, same seed."""
    runs = {}
    for level in levels:
        level_config = replace(config, distortion_fraction=level)
        runs[_level_key(level)] = run_experiment(level_config, seed, jobs)
    return {
        "seed": seed,
        "levels": [_level_key(level) for level in levels],
        "runs": runs,
    }


def _level_key(level: float) -> str:
    return repr(float(level))


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def report_to_csv(report: dict) -> str:
    """Flatten a report for plotting: detector,sample_size,metric,mean,std."""
    lines = ["detector,sample_size,metric,mean,std"]
    for det in sorted(report["detectors"]):
        for size in sorted(report["detectors"][det], key=int):
            for metric in sorted(report["detectors"][det][size]):
                cell = report["detectors"][det][size][metric]
                mean = "" if cell["mean"] is None else repr(cell["mean"])
                std = "" if cell["std"] is None else repr(cell["std"])
                lines.append(f"{det},{size},{metric},{mean},{std}")
    return "\n".join(lines) + "\n"
