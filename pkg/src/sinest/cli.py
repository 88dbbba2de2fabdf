"""Command-line front end: estimation, resynthesis, benchmark drivers.

Exit codes: 0 success, 1 runtime failure while processing data,
2 usage or I/O errors (missing files, bad flags).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .baselines import PeakPickConfig, dft_peak_pick
from .benchmarks import (
    BenchConfig,
    complexity_report,
    residual_rms,
    run_chirp_experiment,
    run_convergence_experiment,
    run_iteration_sweep,
    run_region_experiment,
)
from .errors import TrackParseError, UnsupportedWavError, WavParseError
from .model import (
    SinusoidState,
    make_sine_window,
    make_time_grid,
    synthesize_exact,
)
from .signals import AudioBuffer, FramePlan, frame_stream, read_wav, write_wav
from .solvers import SolverConfig, linear_estimate, nonlinear_estimate

_BENCHES = ("chirp", "convergence", "region", "iterations", "complexity")


def _default_iters(mode: str, order: int) -> int:
    if mode == "linear":
        return 2
    return 3 if order == 1 else 5


def _track_columns(order: int) -> tuple[str, ...]:
    cols = ["frame_start", "amp", "theta", "phi", "amp_slope"]
    if order == 2:
        cols += ["amp_curve", "theta_slope"]
    cols.append("residual_rms")
    return tuple(cols)


def _estimate_one_frame(frame, window, grid, args):
    x_h = window.h * frame
    seeds = dft_peak_pick(x_h, PeakPickConfig(max_peaks=args.max_sines, min_separation=2))
    if seeds.size == 0:
        return []
    cfg = SolverConfig(order=args.order, iterations=args.iters, alpha=args.alpha)
    if args.mode == "linear":
        states = [
            (st, st.theta + dth)
            for st, dth in linear_estimate(frame, seeds, window, cfg)
        ]
        states = [
            SinusoidState(st.amp, th, st.phi, st.amp_slope) if st.amp > 0 else st
            for st, th in states
        ]
    else:
        states = nonlinear_estimate(frame, seeds, window, cfg)
    recon = synthesize_exact(states, grid, window, args.order)
    res = residual_rms(x_h, recon)
    rows = []
    for st in states:
        row = [st.amp, st.theta, st.phi, st.amp_slope]
        if args.order == 2:
            row += [st.amp_curve, st.theta_slope]
        row.append(res)
        rows.append(row)
    return rows


def cmd_estimate(args) -> int:
    if not os.path.exists(args.input):
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return 2
    try:
        buf = read_wav(args.input)
    except (WavParseError, UnsupportedWavError) as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 2

    window = make_sine_window(args.frame_length)
    grid = make_time_grid(args.frame_length)
    plan = FramePlan(args.frame_length, args.hop)
    frames = list(frame_stream(buf.samples, plan))

    workers = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    if workers == 1 or not frames:
        per_frame = [_estimate_one_frame(f, window, grid, args) for _, f in frames]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_frame = list(
                pool.map(lambda f: _estimate_one_frame(f, window, grid, args),
                         [f for _, f in frames])
            )

    meta = {
        "sample_rate": buf.sample_rate,
        "total_samples": buf.samples.size,
        "frame_length": args.frame_length,
        "hop": args.hop,
        "order": args.order,
        "mode": args.mode,
        "iters": args.iters,
        "alpha": args.alpha,
        "max_sines": args.max_sines,
        "seed": args.seed,
    }
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(_track_columns(args.order)))
    for (start, _), rows in zip(frames, per_frame):
        for row in rows:
            cells = [str(start)] + [repr(float(v)) for v in row]
            lines.append(",".join(cells))
    try:
        with open(args.output, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


def _parse_track_csv(path):
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise TrackParseError(lineno, f"expected {len(header)} cells, got {len(cells)}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise TrackParseError(lineno, str(exc)) from None
    return meta, header or [], rows


def cmd_synth(args) -> int:
    if not os.path.exists(args.input):
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return 2
    try:
        meta, header, rows = _parse_track_csv(args.input)
    except TrackParseError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 1

    L = int(meta.get("frame_length", args.frame_length))
    order = int(meta.get("order", args.order))
    sample_rate = int(meta.get("sample_rate", 16000))
    total = int(meta.get("total_samples", 0))
    window = make_sine_window(L)
    grid = make_time_grid(L)
    expected = len(_track_columns(order))

    frames: dict[int, list[SinusoidState]] = {}
    for row in rows:
        if len(row) != expected:
            print(
                f"error: {args.input}: row arity {len(row)} does not match order {order}",
                file=sys.stderr,
            )
            return 1
        start = int(row[0])
        amp, theta, phi, amp_slope = row[1:5]
        curve, slope = (row[5], row[6]) if order == 2 else (0.0, 0.0)
        st = SinusoidState(amp, theta, phi, amp_slope, curve, slope)
        frames.setdefault(start, []).append(st)

    if frames:
        total = max(total, max(frames) + L)
    out = np.zeros(total)
    wsum = np.zeros(total)
    h2 = window.h * window.h
    for start, states in sorted(frames.items()):
        model = synthesize_exact(states, grid, window, order)  # already windowed once
        out[start:start + L] += window.h * model
        wsum[start:start + L] += h2
    active = wsum > 1e-12
    out[active] /= wsum[active]

    try:
        write_wav(args.output, AudioBuffer(samples=out, sample_rate=sample_rate))
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


def cmd_bench(args) -> int:
    config = BenchConfig(
        frame_length=args.frame_length,
        hop=args.hop,
        max_sines=args.max_sines,
        seed=args.seed,
        trials=args.trials,
    )
    out = args.output or f"{args.bench}.csv"
    if args.bench == "convergence":
        table = run_convergence_experiment((0.25, 0.5, 0.75, 1.0), config)
    elif args.bench == "region":
        thetas = np.linspace(0.02, 0.9, 8) * math.pi
        table = run_region_experiment(thetas, config)
    elif args.bench == "chirp":
        snrs = [float(s) for s in args.snr_list.split(",") if s]
        table = run_chirp_experiment(
            snrs, ("mp", "linear", "nonlinear", "second_order"), config
        )
    elif args.bench == "iterations":
        table = run_iteration_sweep(config)
    elif args.bench == "complexity":
        table = complexity_report(config)
    else:  # pragma: no cover - argparse restricts choices
        print(f"error: unknown bench {args.bench!r}", file=sys.stderr)
        return 2
    try:
        table.write_csv(out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sinest",
        description="Sinusoidal parameter estimation, resynthesis and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_io: bool):
        if needs_io:
            p.add_argument("--input", required=True, help="input file path")
            p.add_argument("--output", required=True, help="output file path")
        else:
            p.add_argument("--output", default=None, help="output CSV path (default: <bench>.csv)")
        p.add_argument("--frame-length", type=int, default=256, help="analysis frame length")
        p.add_argument("--hop", type=int, default=192, help="frame hop in samples")
        p.add_argument("--order", type=int, default=1, choices=(1, 2), help="model order")
        p.add_argument("--mode", default="nonlinear", choices=("linear", "nonlinear"),
                       help="estimator mode")
        p.add_argument("--iters", type=int, default=None,
                       help="iteration count (default 2 linear / 3 nonlinear / 5 order 2)")
        p.add_argument("--alpha", type=float, default=1.0, help="frequency update rate")
        p.add_argument("--max-sines", type=int, default=20, help="max sinusoids per frame")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--snr-list", default="0,10,20,30,40,50,60",
                       help="comma-separated SNRs in dB (chirp bench)")
        p.add_argument("--threads", type=int, default=0,
                       help="frame worker threads (0 = number of cores)")
        p.add_argument("--trials", type=int, default=20,
                       help="noise seeds per SNR point (benches)")

    p_est = sub.add_parser("estimate", help="WAV -> sinusoid track CSV",
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    common(p_est, needs_io=True)
    p_syn = sub.add_parser("synth", help="sinusoid track CSV -> WAV (overlap-add)",
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    common(p_syn, needs_io=True)
    p_bench = sub.add_parser("bench", help="run a benchmark driver",
                             formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p_bench.add_argument("bench", choices=_BENCHES, help="benchmark to run")
    common(p_bench, needs_io=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "iters", None) is None:
        args.iters = _default_iters(args.mode, args.order)
    try:
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "bench":
            return cmd_bench(args)
    except KeyboardInterrupt:  # pragma: no cover
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error("no command given")
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
