"""Command-line interface: estimate single files, synthesize corpora with
ground truth, and compute batch error statistics.

Exit codes: 0 success, 1 I/O or format problem, 2 estimation failure
(no usable sound decays in the input).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import evaluation, subband_average, subband_model
from .audio import ESTIMATION_RATE, AudioSignal, load_wav, resample_to, save_wav
from .baseline import BaselineParams, estimate_fullband
from .denoise import DenoiseConfig
from .errors import BlindRtError, InsufficientDecaysError
from .evaluation import (
    ALGORITHMS,
    EstimateRecord,
    ManifestRow,
    read_manifest,
    read_records_json,
    record_to_dict,
    records_to_csv_lines,
    write_manifest,
    write_records_json,
)
from .ml import RtGrid
from .synth import NoiseSpec, SyntheticRirSpec, generate_rir, mix_at_snr, reverberate, synth_excitation

EXIT_OK = 0
EXIT_IO = 1
EXIT_ESTIMATION = 2


def _load_params(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _baseline_params(overrides: dict, gain_floor: float) -> BaselineParams:
    grid = RtGrid.default()
    if "rt_values" in overrides:
        grid = RtGrid(tuple(overrides["rt_values"]))
    dn = DenoiseConfig(gain_floor=overrides.get("gain_floor", gain_floor))
    return BaselineParams(
        histogram_len=overrides.get("histogram_len", 800),
        smoothing=overrides.get("smoothing", 0.95),
        grid=grid,
        denoise=dn,
    )


def _prepare_signal(path: str) -> AudioSignal:
    signal = load_wav(path)
    if signal.sample_rate != ESTIMATION_RATE:
        signal = resample_to(signal, ESTIMATION_RATE)
    return signal


def run_estimate(path: str, algo: str, overrides: dict | None = None) -> EstimateRecord:
    """Estimate one file with the chosen algorithm."""
    overrides = overrides or {}
    signal = _prepare_signal(path)
    name = Path(path).name
    if algo == "base":
        params = _baseline_params(overrides, 0.2)
        res = estimate_fullband(signal, params)
        return EstimateRecord(file=name, algo=algo, t60=res.t60,
                              frames_used=res.frames_with_estimates)
    if algo == "dct":
        params = subband_average.SubbandAverageParams(
            first_band=3, last_band=12, baseline=_baseline_params(overrides, 0.35)
        )
        res = subband_average.estimate_fullband_dct(signal, params)
        return EstimateRecord(file=name, algo=algo, t60=res.t60,
                              frames_used=res.frames_with_estimates)
    if algo == "oct":
        params = subband_average.SubbandAverageParams(
            first_band=20, last_band=30, baseline=_baseline_params(overrides, 0.35)
        )
        res = subband_average.estimate_fullband_oct(signal, params)
        return EstimateRecord(file=name, algo=algo, t60=res.t60,
                              frames_used=res.frames_with_estimates)
    if algo == "subband":
        params = subband_model.SubbandModelParams(baseline=_baseline_params(overrides, 0.35))
        res = subband_model.estimate_subbands(signal, params)
        return EstimateRecord(
            file=name,
            algo=algo,
            t60_bands=tuple(float(v) for v in res.band_rts),
            frames_used=len(res.upper_estimates),
        )
    raise ValueError(f"unknown algorithm {algo!r}")


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def cmd_estimate(args) -> int:
    try:
        overrides = _load_params(args.params)
        record = run_estimate(args.infile, args.algo, overrides)
    except InsufficientDecaysError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (OSError, BlindRtError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.format == "json":
        text = json.dumps(record_to_dict(record), indent=2)
    else:
        buf = io.StringIO()
        csv.writer(buf).writerows(records_to_csv_lines([record]))
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        if (args.t60 is None) == (args.t60_bands is None):
            raise ValueError("specify exactly one of --t60 / --t60-bands")
        band_t60 = None
        if args.t60_bands is not None:
            band_t60 = tuple(float(v) for v in args.t60_bands.split(","))
            if len(band_t60) != evaluation.NUM_BANDS:
                raise ValueError(f"--t60-bands needs {evaluation.NUM_BANDS} values")
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for i in range(args.count):
            seed = args.seed + i
            name = f"synth_{i:04d}.wav"
            if band_t60 is None:
                spec = SyntheticRirSpec(t60=args.t60, sample_rate=ESTIMATION_RATE, seed=seed)
            else:
                spec = SyntheticRirSpec(band_t60=band_t60, sample_rate=ESTIMATION_RATE, seed=seed)
            rir = generate_rir(spec)
            excitation = synth_excitation(args.duration, seed=seed + 90001)
            wet = reverberate(excitation, rir)
            noisy = mix_at_snr(wet, NoiseSpec(kind=args.noise, snr_db=args.snr, seed=seed + 70001))
            peak = float(np.max(np.abs(noisy.samples)))
            if peak > 1.0:
                noisy = AudioSignal(noisy.samples * (0.99 / peak), noisy.sample_rate)
            save_wav(out_dir / name, noisy)
            if band_t60 is None:
                true_full = args.t60
                true_bands = tuple([args.t60] * evaluation.NUM_BANDS)
            else:
                from .synth import measure_t60

                true_full = measure_t60(rir, ESTIMATION_RATE)
                true_bands = band_t60
            rows.append(
                ManifestRow(file=name, t60=true_full, band_t60=true_bands,
                            snr_db=args.snr, noise=args.noise)
            )
        write_manifest(out_dir / "manifest.csv", rows)
    except (OSError, BlindRtError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _estimate_worker(task):
    path, algo, overrides = task
    try:
        return record_to_dict(run_estimate(path, algo, overrides))
    except InsufficientDecaysError as exc:
        return {"file": Path(path).name, "algo": algo, "error": str(exc)}


def cmd_eval(args) -> int:
    try:
        manifest_rows = read_manifest(args.manifest)
        manifest = {row.file: row for row in manifest_rows}
        base_dir = Path(args.manifest).parent
        if args.run:
            overrides = _load_params(args.params)
            tasks = [(str(base_dir / row.file), args.algo, overrides) for row in manifest_rows]
            if args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    outcomes = list(pool.map(_estimate_worker, tasks))
            else:
                outcomes = [_estimate_worker(t) for t in tasks]
            records = []
            for outcome in outcomes:
                if "error" in outcome:
                    print(f"warning: {outcome['file']}: {outcome['error']}", file=sys.stderr)
                else:
                    records.append(evaluation.record_from_dict(outcome))
            if args.save_estimates:
                write_records_json(args.save_estimates, records)
        elif args.estimates:
            records = read_records_json(args.estimates)
        else:
            raise ValueError("need --estimates FILE or --run --algo ALGO")
        stats = evaluation.group_error_stats(records, manifest)
        if not stats:
            print("warning: no groups with data", file=sys.stderr)
        if args.format == "json":
            text = json.dumps(evaluation.stats_to_dicts(stats), indent=2)
        else:
            buf = io.StringIO()
            writer = csv.writer(buf)
            writer.writerow(
                ["noise", "snr_db", "algo", "count", "min_pct", "q1_pct",
                 "median_pct", "q3_pct", "max_pct", "band_mse_mean"]
            )
            for s in stats:
                writer.writerow(
                    [s.noise, s.snr_db, s.algo, s.count, s.min, s.q1, s.median,
                     s.q3, s.max, "" if s.band_mse_mean is None else s.band_mse_mean]
                )
            text = buf.getvalue()
        _emit(text, args.out)
    except (OSError, BlindRtError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindrt", description="Blind reverberation-time estimation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate T60 for one WAV file")
    p_est.add_argument("--algo", choices=ALGORITHMS, required=True)
    p_est.add_argument("--in", dest="infile", required=True, metavar="WAV")
    p_est.add_argument("--out", default="-", help="output path or - for stdout")
    p_est.add_argument("--format", choices=("json", "csv"), default="json")
    p_est.add_argument("--params", help="JSON file with parameter overrides")
    p_est.set_defaults(func=cmd_estimate)

    p_syn = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p_syn.add_argument("--t60", type=float, help="fullband T60 in seconds")
    p_syn.add_argument("--t60-bands", help="30 comma-separated per-band T60 values")
    p_syn.add_argument("--snr", type=float, default=np.inf, help="SNR in dB (default: no noise)")
    p_syn.add_argument("--noise", choices=("white", "babble", "fan"), default="white")
    p_syn.add_argument("--count", type=int, default=1)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--duration", type=float, default=10.0, help="file length in seconds")
    p_syn.add_argument("--out-dir", required=True)
    p_syn.set_defaults(func=cmd_synth)

    p_ev = sub.add_parser("eval", help="group error statistics for a corpus")
    p_ev.add_argument("--manifest", required=True, help="manifest CSV with ground truth")
    p_ev.add_argument("--estimates", help="JSON file of estimate records")
    p_ev.add_argument("--run", action="store_true", help="estimate the corpus inline")
    p_ev.add_argument("--algo", choices=ALGORITHMS, default="base")
    p_ev.add_argument("--jobs", type=int, default=1, help="parallel workers for --run")
    p_ev.add_argument("--params", help="JSON file with parameter overrides")
    p_ev.add_argument("--save-estimates", help="write inline estimates to this JSON file")
    p_ev.add_argument("--format", choices=("json", "csv"), default="csv")
    p_ev.add_argument("--out", default="-")
    p_ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
