"""Command-line interface.

stdout carries machine-readable results only; progress and diagnostics
go to stderr.  Exit codes: 0 success (for `detect`: no change or noise),
1 error, 2 change detected (only from `detect`).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .core import TimeGrid, read_signature, write_signature
from .cpd import (EventConfig, calibrate_frequency_threshold,
                  calibrate_similarity_threshold, detect_events, read_flags)
from .datagen import (build_corpus, build_provider_signatures,
                      default_profiles, manifest_entry, profile_to_dict,
                      synthesize_trace, write_manifest, write_trace)
from .detect import Verdict, cusum_detect, sliding_window_detect, snr_detect
from .errors import SigdriftError
from .evaluate import (learn_monitoring_profiles, report_to_csv, run_experiment,
                       sensitivity_analysis, write_report)
from .noisegen import (inject, read_profile, read_spec, spec_from_dict,
                       write_profile)
from .signature import generate_signature, read_cohorts, read_experiences
from .similarity import SimilarityMethod

log = logging.getLogger("sigdrift")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="random seed (overrides SIGDRIFT_SEED)")
    parser.add_argument("--jobs", type=int, help="parallel workers for evaluation")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")


_OVERRIDE_FLAGS: dict[str, tuple] = {
    "n_changed": (int, "changed pairs in the corpus"),
    "n_noisy": (int, "noisy pairs in the corpus"),
    "distortion_fraction": (float, "fraction of noisy pairs carrying AWGN"),
    "repeats": (int, "simulation repeats"),
    "monitor_fraction": (float, "monitoring corpus size relative to the corpus"),
    "snr_segments": (int, "segments in the learned noise profile"),
    "snr_mode": (str, "SNR comparison mode: segments or aggregate"),
    "spike_magnitude": (float, "corpus spike height in row-stds"),
    "spike_width": (int, "corpus spike width in grid steps"),
    "awgn_db": (float, "distortion target SNR in dB"),
    "changed_segment": (int, "spliced segment length for changed pairs"),
    "paper_faithful": (bool, "restrict noise to spikes and AWGN"),
    "nodes": (int, "trace nodes (trial users)"),
    "raw_length": (int, "raw trace timestamps"),
    "grid_length": (int, "observation grid length"),
}


def _add_overrides(parser: argparse.ArgumentParser, names) -> None:
    for name in names:
        kind, help_text = _OVERRIDE_FLAGS[name]
        flag = "--" + name.replace("_", "-")
        if kind is bool:
            parser.add_argument(flag, dest=name, action="store_true",
                                default=None, help=help_text)
        else:
            parser.add_argument(flag, dest=name, type=kind, default=None,
                                help=help_text)


def _add_list_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sample-sizes", dest="sample_sizes",
                        type=lambda s: tuple(int(p) for p in s.split(",")),
                        default=None, help="comma-separated evaluation sample sizes")
    parser.add_argument("--detectors", dest="detectors",
                        type=lambda s: tuple(p.strip() for p in s.split(",")),
                        default=None, help="comma-separated detector names (sw,snr,cusum)")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: getattr(args, key)
        for key in RunConfig.__dataclass_fields__
        if hasattr(args, key)
    }
    return load_config(args.config, overrides)


def _spec_from_arg(raw: str):
    if raw.lstrip().startswith("{"):
        return spec_from_dict(json.loads(raw))
    return read_spec(raw)


def _method_from_arg(raw: str) -> SimilarityMethod:
    try:
        return SimilarityMethod(raw)
    except ValueError:
        raise SigdriftError(
            f"unknown similarity method {raw!r}; pick from "
            + ",".join(m.value for m in SimilarityMethod)
        ) from None


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands

def cmd_gen_data(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "profiles").mkdir(exist_ok=True)
    (out / "signatures").mkdir(exist_ok=True)
    (out / "snr_profiles").mkdir(exist_ok=True)
    (out / "pairs").mkdir(exist_ok=True)

    params = config.corpus_params()
    ss = np.random.SeedSequence(config.seed)
    ss_sig, ss_corpus, ss_monitor = ss.spawn(3)

    log.info("synthesizing trace and provider signatures")
    trace = synthesize_trace(params.nodes, params.raw_length,
                             int(ss_sig.generate_state(2)[0]))
    write_trace(trace, out / "trace.csv")
    profiles = default_profiles()
    for profile in profiles:
        (out / "profiles" / f"{profile.provider_id}.json").write_text(
            json.dumps(profile_to_dict(profile), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    signatures = build_provider_signatures(
        profiles, trace, TimeGrid(params.grid_length, params.resolution),
        parameters=(params.parameter,),
        seed=int(ss_sig.generate_state(2)[1]),
    )
    for sig in signatures:
        write_signature(sig, out / "signatures" / f"{sig.provider_id}.csv")

    log.info("building corpus: %d changed, %d noisy", config.n_changed, config.n_noisy)
    corpus = build_corpus(config.n_changed, config.n_noisy,
                          config.distortion_fraction,
                          int(ss_corpus.generate_state(1)[0]),
                          signatures=signatures, params=params)

    n_monitor = max(1, int(round(config.monitor_fraction * max(1, len(corpus)))))
    monitoring = build_corpus(0, n_monitor, config.distortion_fraction,
                              int(ss_monitor.generate_state(1)[0]),
                              signatures=signatures, params=params)
    for provider, profile in sorted(
            learn_monitoring_profiles(monitoring, config.snr_segments).items()):
        name = provider if provider else "pooled"
        write_profile(profile, out / "snr_profiles" / f"{name}.json")

    entries = []
    for pair in corpus:
        index = pair.provenance["index"]
        rec_path = f"pairs/{index:06d}.recomputed.csv"
        write_signature(pair.recomputed, out / rec_path)
        entries.append(manifest_entry(
            pair,
            existing_path=f"signatures/{pair.existing.provider_id}.csv",
            recomputed_path=rec_path,
        ))
    write_manifest(entries, config.as_dict(), config.seed, out / "manifest.json")
    log.info("wrote %s", out / "manifest.json")
    return 0


def cmd_gen_signature(args: argparse.Namespace) -> int:
    cohorts = read_cohorts(args.cohorts)
    length = cohorts[0].window[1]
    sig = generate_signature(cohorts, TimeGrid(length), args.provider or "signature")
    write_signature(sig, args.out)
    return 0


def cmd_inject(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    sig = read_signature(args.signature)
    spec = _spec_from_arg(args.spec)
    write_signature(inject(sig, spec, config.seed), args.out)
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    existing = read_signature(args.existing)
    recomputed = read_signature(args.recomputed)
    if args.detector == "sw":
        outcome = sliding_window_detect(existing, recomputed, config.thresholds())
    elif args.detector == "cusum":
        outcome = cusum_detect(existing, recomputed, config.cusum_slack,
                               config.cusum_interval)
    elif args.detector == "snr":
        if not args.profile:
            raise SigdriftError("detector snr needs --profile")
        outcome = snr_detect(existing, recomputed, read_profile(args.profile),
                             config.snr_mode)
    else:
        raise SigdriftError(f"unknown detector {args.detector!r}")
    payload = outcome.to_dict()
    payload["config"] = config.as_dict()
    _emit(payload, args.out)
    return 2 if outcome.verdict is Verdict.CHANGE else 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    sig = read_signature(args.signature)
    past = read_experiences(args.cohorts)
    method = _method_from_arg(args.method)
    window = args.window_length or config.trial_length
    threshold = calibrate_similarity_threshold(past, sig, method)
    event_config = calibrate_frequency_threshold(past, sig, method, threshold, window)
    _emit(
        {
            "method": method.value,
            "similarity_threshold": threshold.value,
            "frequency_threshold": event_config.frequency_threshold,
            "window_length": event_config.window_length,
            "config": config.as_dict(),
        },
        args.out,
    )
    return 0


def cmd_events(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    flags = [(idx, flag) for idx, flag, _ in read_flags(args.flags)]
    window = args.window_length or config.trial_length
    event_config = EventConfig(window, args.f_thresh)
    events = detect_events(flags, event_config)
    _emit(
        {
            "window_length": window,
            "frequency_threshold": args.f_thresh,
            "events": [
                {"grid_index": e.grid_index, "anomaly_count": e.anomaly_count,
                 "window": list(e.window)}
                for e in events
            ],
        },
        args.out,
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    log.info("running experiment: %d repeats, sizes %s",
             config.repeats, list(config.sample_sizes))
    report = run_experiment(config.experiment_config(), config.seed,
                            config.effective_jobs())
    if args.out:
        write_report(report, args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.csv:
        Path(args.csv).write_text(report_to_csv(report), encoding="utf-8")
    return 0


def cmd_sensitivity(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    result = sensitivity_analysis(config.experiment_config(), config.seed,
                                  config.sensitivity_levels,
                                  config.effective_jobs())
    if args.out:
        Path(args.out).write_text(
            json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigdrift",
        description="Detect long-term change in service performance signatures",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize trace, signatures, and corpus")
    _add_common(p)
    _add_overrides(p, ["n_changed", "n_noisy", "distortion_fraction",
                       "monitor_fraction", "snr_segments", "spike_magnitude",
                       "spike_width", "awgn_db", "changed_segment",
                       "paper_faithful", "nodes", "raw_length", "grid_length"])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("gen-signature", help="build a signature from trial cohorts")
    _add_common(p)
    p.add_argument("--cohorts", required=True, help="trial cohort CSV")
    p.add_argument("--provider", help="provider id to stamp on the signature")
    p.add_argument("--out", required=True, help="signature CSV to write")
    p.set_defaults(func=cmd_gen_signature)

    p = sub.add_parser("inject", help="apply a noise spec to a signature")
    _add_common(p)
    p.add_argument("--signature", required=True, help="input signature CSV")
    p.add_argument("--spec", required=True,
                   help="noise spec JSON file, or an inline JSON object")
    p.add_argument("--out", required=True, help="noisy signature CSV to write")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("detect", help="compare two signatures")
    _add_common(p)
    _add_overrides(p, ["snr_mode"])
    p.add_argument("--existing", required=True, help="existing signature CSV")
    p.add_argument("--recomputed", required=True, help="recomputed signature CSV")
    p.add_argument("--detector", default="sw", choices=["sw", "snr", "cusum"])
    p.add_argument("--profile", help="noise profile JSON (snr detector)")
    p.add_argument("--out", help="write the outcome JSON here instead of stdout")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("calibrate", help="derive anomaly thresholds from history")
    _add_common(p)
    p.add_argument("--signature", required=True, help="current signature CSV")
    p.add_argument("--cohorts", required=True, help="past trial users CSV")
    p.add_argument("--method", default="pcc", help="pcc, ed, cs, or rmse")
    p.add_argument("--window-length", type=int, help="trial window (grid steps)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("events", help="change points from an anomaly-flag stream")
    _add_common(p)
    p.add_argument("--flags", required=True, help="anomaly-flag CSV")
    p.add_argument("--window-length", type=int, help="trial window (grid steps)")
    p.add_argument("--f-thresh", required=True, type=int,
                   help="frequency threshold (exclusive)")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("evaluate", help="run the benchmark experiment")
    _add_common(p)
    _add_overrides(p, sorted(_OVERRIDE_FLAGS))
    _add_list_overrides(p)
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--csv", help="also write a flattened CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sensitivity", help="evaluate across distortion levels")
    _add_common(p)
    _add_overrides(p, sorted(_OVERRIDE_FLAGS))
    _add_list_overrides(p)
    p.add_argument("--levels", dest="sensitivity_levels",
                   type=lambda s: tuple(float(p) for p in s.split(",")),
                   default=None, help="comma-separated distortion fractions")
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.set_defaults(func=cmd_sensitivity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; 2 is reserved for
        # "change detected", so remap.
        return 0 if exc.code in (0, None) else 1

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except SigdriftError as exc:
        log.error("%s", exc)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
