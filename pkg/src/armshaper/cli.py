"""Command line front end.

Subcommands walk the tuning workflow end to end: record or synthesize
acceleration traces (simulate), pull mode frequencies out of them
(identify), assemble the joint-space map (map-build), inspect it
(map-query), shape trajectories for a target pose (shape), check the
achieved reduction against the simulated plant (verify), and dump shaper
frequency responses (bode).

Exit codes: 0 success, 1 bad input or I/O failure, 2 analysis ran but
produced no result (e.g. no spectral peaks).
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from dataclasses import replace

import numpy as np

from . import fmap as fmaplib
from . import io as iolib
from . import sim as simlib
from .errors import (
    ArmshaperError,
    EstimationError,
    GridError,
    InsufficientDataError,
    NoModesFoundError,
    ParameterError,
)
from .ident import estimate_k0, extract_peaks, residual_segment, spectrum
from .shaper import ImpulseSequence, ShaperParams, apply, cascade, frequency_response, zv_from_params


class UsageError(ParameterError):
    """Bad command line; replaces argparse's SystemExit(2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parse_pose(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ParameterError(f"cannot parse pose {text!r}; expected e.g. '45,60'")


def _parse_axis(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ParameterError(f"cannot parse axis {text!r}; expected e.g. '0,30,60,90'")
    if len(vals) < 2:
        raise ParameterError(f"axis {text!r} needs at least 2 angles")
    return vals


def _parse_modes(text: str, n_modes: int) -> list:
    """Mode selection flag: 'all', 'none', or comma list of 1-based numbers."""
    if text == "all":
        return list(range(n_modes))
    if text == "none":
        return []
    try:
        picked = sorted({int(v) for v in text.split(",")})
    except ValueError:
        raise ParameterError(f"cannot parse --modes {text!r}; use 'all', 'none' or '1,2'")
    for m in picked:
        if not 1 <= m <= n_modes:
            raise ParameterError(f"mode {m} out of range 1..{n_modes}")
    return [m - 1 for m in picked]


def _identify_trace(trace, args):
    min_dur = args.min_residual
    if min_dur is None:
        min_dur = 2.0 / args.low_cutoff if args.low_cutoff > 0 else 0.0
    seg = residual_segment(trace, min_duration=min_dur)
    spec = spectrum(seg, zero_pad_factor=args.pad)
    peaks = extract_peaks(
        spec,
        max_modes=args.max_modes,
        min_prominence_ratio=args.prominence,
        low_cutoff_hz=args.low_cutoff,
    )
    return seg, spec, peaks


def _cascade_for_pose(fm, pose, mode_indices, k0_policy, allow_extrapolation):
    """ZV per selected mode at the pose, cascaded in ascending frequency order."""
    seq = ImpulseSequence.identity()
    params = []
    for m in sorted(mode_indices):
        p = fmaplib.shaper_params_at(
            fm, pose, m, k0_policy=k0_policy, allow_extrapolation=allow_extrapolation
        )
        params.append(p)
        seq = cascade(seq, zv_from_params(p))
    return seq, params


# ---------------------------------------------------------------- identify


def cmd_identify(args) -> int:
    trace = iolib.read_trace(args.trace, motion_end=args.motion_end)
    seg, spec, peaks = _identify_trace(trace, args)

    k0s = None
    if args.estimate_k0:
        k0s = []
        for pk in peaks:
            try:
                k0s.append(estimate_k0(seg, pk.frequency))
            except (EstimationError, InsufficientDataError):
                k0s.append(None)

    if args.spectrum_out:
        iolib.write_spectrum(args.spectrum_out, spec)

    if args.csv or args.out:
        header = "mode,frequency_hz,magnitude" + (",k0" if k0s is not None else "")
        lines = [header]
        for i, pk in enumerate(peaks):
            row = f"{pk.mode_index},{pk.frequency!r},{pk.magnitude!r}"
            if k0s is not None:
                row += f",{'' if k0s[i] is None else repr(k0s[i])}"
            lines.append(row)
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        if args.csv or not args.out:
            sys.stdout.write(text)
    else:
        for i, pk in enumerate(peaks):
            line = f"mode {pk.mode_index}: {pk.frequency:.3f} Hz  (magnitude {pk.magnitude:.4g})"
            if k0s is not None:
                line += f"  k0 {k0s[i]:.4f}" if k0s[i] is not None else "  k0 n/a (assume 1)"
            print(line)
    return 0


# ---------------------------------------------------------------- map-build


def _campaign_measurements(args, poses):
    """(pose, trace) pairs from either the simulator or a directory of files."""
    if args.traces:
        out = []
        for pose in poses:
            name = "pose_" + "_".join(f"{q:g}" for q in pose) + ".csv"
            path = os.path.join(args.traces, name)
            if not os.path.exists(path):
                raise GridError(f"grid is missing pose {pose}: no trace file {path}")
            out.append((pose, iolib.read_trace(path)))
        return out
    config = simlib.default_sim_config(seed=args.seed)
    if args.sample_rate:
        config = replace(config, sample_rate=args.sample_rate)
    return simlib.synth_campaign(
        config, poses, args.step_from, hold_time=args.hold
    )


def cmd_map_build(args) -> int:
    axes = args.axis or [(0.0, 30.0, 60.0, 90.0), (0.0, 30.0, 60.0, 90.0)]
    poses = [tuple(p) for p in itertools.product(*axes)]
    measured = _campaign_measurements(args, poses)

    estimate = args.k0 == "estimate"
    fixed_k0 = 1.0 if estimate else float(args.k0)
    measurements = []
    k0_nodes = {}
    for pose, trace in measured:
        seg, _, peaks = _identify_trace(trace, args)
        measurements.append((pose, peaks))
        if estimate:
            vals = []
            for pk in peaks:
                try:
                    vals.append(estimate_k0(seg, pk.frequency))
                except (EstimationError, InsufficientDataError):
                    vals.append(1.0)
            k0_nodes[pose] = vals

    metadata = {
        "source": f"traces:{args.traces}" if args.traces else "synthetic-sim",
        "k0_policy": "estimated" if estimate else f"fixed {fixed_k0!r}",
        "step_from": ",".join(f"{q:g}" for q in args.step_from),
    }
    fm = fmaplib.build_map(measurements, metadata=metadata, k0=fixed_k0)
    if estimate:
        k0_grid = np.empty_like(np.asarray(fm.values))
        for pose, vals in k0_nodes.items():
            idx = tuple(ax.index(q) for ax, q in zip(fm.axes, pose))
            order = np.argsort([pk.frequency for pk in dict(measurements)[pose]])
            for m, val in enumerate(np.asarray(vals)[order]):
                k0_grid[(m,) + idx] = min(max(val, 1e-6), 1.0)
        fm = fmaplib.FrequencyMap(
            axes=fm.axes, values=fm.values, k0=k0_grid, metadata=fm.metadata
        )

    iolib.write_map(args.out, fm)
    for pose, peaks in measurements:
        freqs = ", ".join(
            f"mode {i + 1} = {f:.3f} Hz" for i, f in enumerate(sorted(p.frequency for p in peaks))
        )
        print(f"{pose}: {freqs}")
    print(f"map with {fm.modes} mode(s) on {'x'.join(str(len(a)) for a in fm.axes)} grid -> {args.out}")
    return 0


# ---------------------------------------------------------------- map-query


def cmd_map_query(args) -> int:
    fm = iolib.read_map(args.map)
    pose = args.pose
    modes = _parse_modes(args.modes, fm.modes)
    inside = fm.contains(pose)
    if not inside and not args.extrapolate:
        raise fmaplib.OutOfDomainError(
            f"pose {pose} is outside the map; rerun with --extrapolate to allow it"
        )
    rows = []
    for m in modes:
        if inside:
            f = fmaplib.interpolate(fm, pose, m)
            flagged = False
        else:
            f, flagged = fmaplib.extrapolate(fm, pose, m)
        k0 = fmaplib.interpolate_k0(fm, pose, m)
        rows.append((m + 1, f, 1.0 / (2.0 * f), k0, flagged))
    if args.csv:
        print("mode,frequency_hz,t0_s,k0,extrapolated")
        for m, f, t0, k0, flagged in rows:
            print(f"{m},{f!r},{t0!r},{k0!r},{int(flagged)}")
    else:
        where = "inside map" if inside else "outside map (extrapolated)"
        print(f"pose {pose}: {where}")
        for m, f, t0, k0, flagged in rows:
            star = " *" if flagged else ""
            print(f"mode {m}: f = {f:.4f} Hz, t0 = {t0:.5f} s, k0 = {k0:.4f}{star}")
    return 0


# ---------------------------------------------------------------- shape


def cmd_shape(args) -> int:
    fm = iolib.read_map(args.map)
    traj = iolib.read_trajectory(args.trajectory)
    modes = _parse_modes(args.modes, fm.modes)
    k0_policy = None if args.k0 is None else float(args.k0)
    seq, _ = _cascade_for_pose(fm, args.pose, modes, k0_policy, args.extrapolate)
    shaped = apply(seq, traj)
    iolib.write_trajectory(args.out, shaped)
    print(f"total added delay: {seq.total_delay:.5f} s")
    print(f"shaped trajectory ({shaped.n_samples} samples) -> {args.out}")
    return 0


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    fm = iolib.read_map(args.map)
    config = simlib.default_sim_config(seed=args.seed)
    if args.sample_rate:
        config = replace(config, sample_rate=args.sample_rate)
    positions = []
    for spec_text in args.position or []:
        if "=" not in spec_text:
            raise ParameterError(
                f"cannot parse --position {spec_text!r}; expected 'LABEL=q1,q2'"
            )
        label, pose_text = spec_text.split("=", 1)
        positions.append((label, _parse_pose(pose_text)))

    rows = []
    for label, pose in positions:
        seq, _ = _cascade_for_pose(fm, pose, list(range(fm.modes)), None, args.extrapolate)
        cmd = simlib.step_trajectory(args.step_from, pose, sample_rate=config.sample_rate)
        unshaped = simlib.simulate(config, cmd, hold_time=args.hold)
        shaped = simlib.simulate(config, apply(seq, cmd), hold_time=args.hold)
        rr = simlib.reduction_report(unshaped, shaped, settle_guard=args.settle_guard)
        rows.append(
            iolib.ReportRow(
                label=label,
                pose=pose,
                amp_without=rr.amp_without,
                amp_with=rr.amp_with,
                reduction_percent=rr.reduction_percent,
            )
        )

    if args.out:
        iolib.write_report(args.out, rows)
    if args.csv:
        sys.stdout.write(iolib.dumps_csv(iolib.write_report, rows))
    else:
        print(f"{'position':<10}{'pose':<18}{'without':>12}{'with':>12}{'reduction':>12}")
        for r in rows:
            pose_text = "(" + ", ".join(f"{q:g}" for q in r.pose) + ")"
            print(
                f"{r.label:<10}{pose_text:<18}{r.amp_without:>10.1f} mm"
                f"{r.amp_with:>10.1f} mm{r.reduction_percent:>11.1f}%"
            )
    return 0


# ---------------------------------------------------------------- bode


def cmd_bode(args) -> int:
    if args.map:
        if args.pose is None:
            raise UsageError("bode: --map needs --pose")
        fm = iolib.read_map(args.map)
        modes = _parse_modes(args.modes, fm.modes)
        seq, _ = _cascade_for_pose(fm, args.pose, modes, None, args.extrapolate)
    elif args.freq or args.t0:
        seq = ImpulseSequence.identity()
        for f in args.freq or []:
            seq = cascade(seq, zv_from_params(ShaperParams.for_frequency(f, k0=args.k0)))
        for t0 in args.t0 or []:
            seq = cascade(seq, zv_from_params(ShaperParams(t0=t0, k0=args.k0)))
    else:
        raise UsageError("bode: give --freq, --t0, or --map with --pose")

    if not 0 <= args.f_min < args.f_max:
        raise ParameterError("need 0 <= f-min < f-max")
    freqs = np.linspace(args.f_min, args.f_max, args.n_points)
    mag, phase = frequency_response(seq, freqs)
    mag_db = 20.0 * np.log10(np.maximum(mag, 1e-16))
    phase_deg = np.degrees(phase)

    if args.out:
        iolib.write_bode(args.out, freqs, mag_db, phase_deg)
    if args.csv or not args.out:
        sys.stdout.write(iolib.dumps_csv(iolib.write_bode, freqs, mag_db, phase_deg))
    i_min = int(np.argmin(mag_db))
    print(f"deepest response {mag_db[i_min]:.1f} dB at {freqs[i_min]:.4f} Hz", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    config = simlib.default_sim_config(seed=args.seed, noise_std=args.noise)
    if args.sample_rate:
        config = replace(config, sample_rate=args.sample_rate)
    if args.trajectory:
        cmd = iolib.read_trajectory(args.trajectory)
    elif args.pose:
        cmd = simlib.step_trajectory(args.step_from, args.pose, sample_rate=config.sample_rate)
    else:
        raise UsageError("simulate: give --pose or --traj")

    if args.map:
        fm = iolib.read_map(args.map)
        pose = tuple(cmd.channels[:, -1])
        seq, _ = _cascade_for_pose(fm, pose, list(range(fm.modes)), None, args.extrapolate)
        cmd = apply(seq, cmd)
        print(f"shaped with {len(seq)} impulses, added delay {seq.total_delay:.5f} s")

    result = simlib.simulate(config, cmd, hold_time=args.hold)
    if args.out_prefix:
        iolib.write_trace(args.out_prefix + "_accel.csv", result.tip_acceleration)
        iolib.write_trajectory(args.out_prefix + "_disp.csv", result.tip_displacement)
        print(f"wrote {args.out_prefix}_accel.csv and {args.out_prefix}_disp.csv")
    amp = simlib.residual_amplitude(result)
    freqs = ", ".join(f"{f:.3f}" for f in result.mode_freqs)
    print(f"mode frequencies at end pose: {freqs} Hz")
    print(f"residual peak-to-peak: {amp:.2f} mm")
    return 0


# ---------------------------------------------------------------- parser


def _add_ident_options(p):
    p.add_argument("--max-modes", type=int, default=2)
    p.add_argument("--prominence", type=float, default=0.2,
                   help="peak threshold as a fraction of the tallest magnitude")
    p.add_argument("--low-cutoff", type=float, default=0.5,
                   help="ignore spectrum below this frequency (Hz)")
    p.add_argument("--pad", type=int, default=4, help="FFT zero-padding factor")
    p.add_argument("--min-residual", type=float, default=None,
                   help="required residual window length in seconds")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="armshaper", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("identify", help="extract mode frequencies from a trace file")
    q.add_argument("trace", help="trace CSV (time_s,accel)")
    q.add_argument("--motion-end", type=float, default=None,
                   help="override the file's motion_end_s comment")
    _add_ident_options(q)
    q.add_argument("--estimate-k0", action="store_true")
    q.add_argument("--spectrum-out", default=None, help="also write the full spectrum CSV")
    q.add_argument("--out", default=None, help="write peaks CSV here")
    q.add_argument("--csv", action="store_true", help="print CSV instead of text")
    q.set_defaults(func=cmd_identify)

    q = sub.add_parser("map-build", help="run a campaign and build the frequency map")
    q.add_argument("--axis", action="append", type=_parse_axis, default=None,
                   help="grid angles for one joint, e.g. '0,30,60,90'; repeat per joint")
    q.add_argument("--step-from", type=_parse_pose, default=(10.0, 10.0),
                   help="pose the campaign steps start from")
    q.add_argument("--traces", default=None,
                   help="directory of recorded pose_<q1>_<q2>.csv traces instead of the simulator")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--sample-rate", type=float, default=None)
    q.add_argument("--hold", type=float, default=16.0,
                   help="ringdown seconds recorded after each motion")
    _add_ident_options(q)
    q.add_argument("--k0", default="1.0", help="fixed k0 value, or 'estimate'")
    q.add_argument("--out", required=True, help="map JSON output path")
    q.set_defaults(func=cmd_map_build)

    q = sub.add_parser("map-query", help="interpolate the map at a pose")
    q.add_argument("map")
    q.add_argument("--pose", type=_parse_pose, required=True)
    q.add_argument("--modes", default="all")
    q.add_argument("--extrapolate", action="store_true")
    q.add_argument("--csv", action="store_true")
    q.set_defaults(func=cmd_map_query)

    q = sub.add_parser("shape", help="shape a trajectory for a target pose")
    q.add_argument("map")
    q.add_argument("trajectory")
    q.add_argument("--pose", type=_parse_pose, required=True,
                   help="end pose used to look up shaper parameters")
    q.add_argument("--modes", default="all", help="'all', 'none', or e.g. '1,2'")
    q.add_argument("--k0", type=float, default=None, help="override the map k0")
    q.add_argument("--extrapolate", action="store_true")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_shape)

    q = sub.add_parser("verify", help="compare shaped vs unshaped motions on the plant")
    q.add_argument("map")
    q.add_argument("--position", action="append", default=[],
                   help="labeled pose, e.g. 'A=45,45'; repeatable")
    q.add_argument("--step-from", type=_parse_pose, default=(10.0, 10.0))
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--sample-rate", type=float, default=None)
    q.add_argument("--hold", type=float, default=10.0)
    q.add_argument("--settle-guard", type=float, default=0.0)
    q.add_argument("--extrapolate", action="store_true")
    q.add_argument("--out", default=None, help="write report CSV here")
    q.add_argument("--csv", action="store_true")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("bode", help="frequency response of a shaper or cascade")
    q.add_argument("--freq", action="append", type=float, default=None,
                   help="tuned frequency in Hz; repeat to cascade")
    q.add_argument("--t0", action="append", type=float, default=None,
                   help="impulse delay in seconds; repeat to cascade")
    q.add_argument("--k0", type=float, default=1.0)
    q.add_argument("--map", default=None)
    q.add_argument("--pose", type=_parse_pose, default=None)
    q.add_argument("--modes", default="all")
    q.add_argument("--extrapolate", action="store_true")
    q.add_argument("--f-min", type=float, default=0.1)
    q.add_argument("--f-max", type=float, default=10.0)
    q.add_argument("--n-points", type=int, default=400)
    q.add_argument("--out", default=None)
    q.add_argument("--csv", action="store_true")
    q.set_defaults(func=cmd_bode)

    q = sub.add_parser("simulate", help="run the synthetic plant over a command")
    q.add_argument("--pose", type=_parse_pose, default=None, help="step target pose")
    q.add_argument("--step-from", type=_parse_pose, default=(10.0, 10.0))
    q.add_argument("--traj", dest="trajectory", default=None,
                   help="trajectory CSV to run instead of a built-in step")
    q.add_argument("--map", default=None, help="shape the command with this map first")
    q.add_argument("--extrapolate", action="store_true")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--noise", type=float, default=None,
                   help="acceleration noise std; default 1%% of peak")
    q.add_argument("--sample-rate", type=float, default=None)
    q.add_argument("--hold", type=float, default=10.0)
    q.add_argument("--out-prefix", default=None)
    q.set_defaults(func=cmd_simulate)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args) or 0)
    except NoModesFoundError as e:
        print(f"armshaper: no result: {e}", file=sys.stderr)
        return 2
    except (ArmshaperError, OSError) as e:
        print(f"armshaper: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
