"""Command-line entry point: alsalign <plan|map|simulate|autoconnect|validate>.

All numeric output is formatted at 6 significant digits and files are
written with \\n line endings, so identical invocations produce
byte-identical outputs. Exit codes: 0 success/match, 1 clean negative
result (no match, validation failure), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import wave
from decimal import ROUND_CEILING, Decimal
from pathlib import Path

from . import acoustics, autoconnect, broadcast, perception, planner, signals

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2

SIMULATE_PROGRAM_MS = 1000.0


class CliError(Exception):
    """Usage or input error; message goes to stderr, exit code 2."""


def fmt(x: float) -> str:
    """Fixed 6-significant-digit rendering used for every emitted number."""
    return format(float(x), ".6g")


def _round6(x: float) -> float:
    return float(fmt(x))


def _ceil6(x: float) -> float:
    """Round up at the 6th significant digit (never below the true value)."""
    if x == 0:
        return 0.0
    d = Decimal(x)
    quantum = Decimal(1).scaleb(d.adjusted() - 5)
    return float(d.quantize(quantum, rounding=ROUND_CEILING))


def _json_ready(value):
    """Round all floats to the 6-significant-digit grid before dumping."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return _round6(value)
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    return value


def _write_json(path, payload: dict) -> None:
    text = json.dumps(_json_ready(payload), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _load_venue(path) -> acoustics.Venue:
    try:
        return acoustics.load_venue(path)
    except FileNotFoundError:
        raise CliError(f"venue file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"venue file {path} is not valid JSON: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"bad venue file {path}: {exc}") from None


def _load_plan(path) -> planner.DelayPlan:
    try:
        return planner.load_plan(path)
    except FileNotFoundError:
        raise CliError(f"plan file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"plan file {path} is not valid JSON: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"bad plan file {path}: {exc}") from None


def parse_signal_source(spec: str) -> signals.Signal:
    """Signal from a synthetic URI (noise:seed:ms:sr, sine:hz:ms:sr) or a WAV path."""
    head, _, rest = spec.partition(":")
    if head in ("noise", "sine"):
        parts = rest.split(":")
        if len(parts) != 3:
            raise CliError(f"bad synthetic signal spec {spec!r}: expected {head}:<a>:<ms>:<sr>")
        try:
            if head == "noise":
                seed, dur, sr = int(parts[0]), float(parts[1]), int(parts[2])
                return signals.gen_white_noise(seed, dur, sr)
            freq, dur, sr = float(parts[0]), float(parts[1]), int(parts[2])
            return signals.gen_sine(freq, dur, sr)
        except ValueError as exc:
            raise CliError(f"bad synthetic signal spec {spec!r}: {exc}") from None
    try:
        return signals.read_wav(spec)
    except FileNotFoundError:
        raise CliError(f"signal source not found: {spec}") from None
    except (wave.Error, ValueError, EOFError, OSError) as exc:
        raise CliError(f"cannot read WAV {spec!r}: {exc}") from None


def _parse_mode(name: str) -> broadcast.SpecMode:
    try:
        return broadcast.SpecMode(name.lower())
    except ValueError:
        raise CliError(f"unknown mode {name!r} (expected strict or amended)") from None


def run_plan(venue_path: str, tolerance_ms: float, out_path: str) -> int:
    venue = _load_venue(venue_path)
    if not venue.seats:
        max_distance = 0.0
    else:
        max_distance = max(
            venue.nearest_loudspeaker_distance_m(s.position) for s in venue.seats
        )
    try:
        plan = planner.plan_zones(max_distance, tolerance_ms, venue.speed_of_sound_m_per_s)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload = _json_ready(planner.plan_to_dict(plan))
    # publish the span rounded up, so rounding never drops the farthest seat
    payload["zones"][-1]["delay_hi_ms"] = _ceil6(plan.span_ms)
    payload["zones"][-1]["distance_hi_m"] = _ceil6(plan.zones[-1].distance_hi_m)
    _write_json(out_path, payload)
    bound = plan.span_ms / (2 * len(plan.zones)) if plan.span_ms > 0 else 0.0
    print(f"zones: {len(plan.zones)}")
    print(f"max residual bound: {fmt(bound)} ms")
    print(f"wrote {out_path}")
    return EXIT_OK


MAP_HEADER = "seat_id,distance_m,acoustic_delay_ms,zone,presentation_delay_ms,residual_ms,class"


def run_map(venue_path: str, plan_path: str, out_path: str) -> int:
    venue = _load_venue(venue_path)
    plan = _load_plan(plan_path)
    try:
        report = planner.verify_plan(venue, plan)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    lines = [MAP_HEADER]
    for row in report.seats:
        if row.covered:
            lines.append(
                ",".join(
                    (
                        row.seat_id,
                        fmt(row.distance_m),
                        fmt(row.acoustic_delay_ms),
                        str(row.zone_index),
                        fmt(row.presentation_delay_ms),
                        fmt(row.residual_ms),
                        row.distortion.value,
                    )
                )
            )
        else:
            lines.append(
                ",".join(
                    (row.seat_id, fmt(row.distance_m), fmt(row.acoustic_delay_ms), "", "", "", "uncovered")
                )
            )
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    print(f"seats: {len(report.seats)}")
    print(f"max |residual|: {fmt(report.max_abs_residual_ms)} ms")
    if report.uncovered_seat_ids:
        print(f"uncovered seats: {len(report.uncovered_seat_ids)}")
    print(f"wrote {out_path}")
    return EXIT_OK


def run_simulate(
    venue_path: str,
    plan_path: str | None,
    seat_id: str,
    sample_rate_hz: int,
    seed: int,
    out_path: str,
) -> int:
    venue = _load_venue(venue_path)
    try:
        delay = acoustics.seat_acoustic_delay_ms(venue, seat_id)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from None
    presentation = 0.0  # uncompensated unless a plan zone covers the seat
    uncovered = False
    if plan_path is not None:
        plan = _load_plan(plan_path)
        try:
            presentation = planner.zone_for_delay(plan, delay).presentation_delay_ms
        except planner.UncoveredDelayError:
            uncovered = True
    residual = planner.residual_delay_ms(delay, presentation)
    try:
        program = signals.gen_white_noise(seed, SIMULATE_PROGRAM_MS, sample_rate_hz)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    ear = perception.ear_signal(program, program, residual, perception.MixSpec(1.0, 1.0))
    report = perception.DistortionReport(
        seat_id=seat_id,
        residual_ms=residual,
        distortion=perception.classify_residual(residual),
        notch_frequencies_hz=tuple(perception.notch_frequencies(abs(residual), sample_rate_hz / 2.0)),
    )
    _write_json(
        out_path,
        {
            "seat_id": report.seat_id,
            "residual_ms": report.residual_ms,
            "class": report.distortion.value,
            "notch_frequencies_hz": list(report.notch_frequencies_hz),
        },
    )
    if uncovered:
        print(f"seat {seat_id} is beyond the plan span; simulating uncompensated playback")
    print(f"seat {seat_id}: residual {fmt(residual)} ms -> {report.distortion.value}")
    print(f"ear signal rms: {fmt(ear.rms())}")
    print(f"wrote {out_path}")
    return EXIT_OK


def run_autoconnect(
    mic_source: str,
    stream_sources: list[str],
    max_lag_ms: float,
    threshold: float,
    mode: broadcast.SpecMode,
    forced_stream: str | None,
    out_path: str,
    snr_db: float | None = None,
    seed: int = 0,
    sink_buffer_ms: float | None = None,
) -> int:
    mic = parse_signal_source(mic_source)
    if snr_db is not None:
        try:
            mic = signals.add_noise_snr(mic, snr_db, seed)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    candidates = []
    for item in stream_sources:
        stream_id, sep, src = item.partition("=")
        if not sep or not stream_id or not src:
            raise CliError(f"bad --stream {item!r}: expected <id>=<source>")
        candidates.append(autoconnect.CandidateStream(stream_id, parse_signal_source(src)))
    try:
        sink = (
            broadcast.BroadcastSink(sink_buffer_ms)
            if sink_buffer_ms is not None
            else broadcast.default_sink(mode)
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    payload: dict = {"mode": mode.value}
    try:
        result, updated = autoconnect.autoconnect_pipeline(
            mic, candidates, sink, mode, max_lag_ms, threshold, forced_stream
        )
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    except broadcast.SinkDelayError as exc:
        payload.update(
            {
                "outcome": "error",
                "error": type(exc).__name__,
                "detail": str(exc),
            }
        )
        _write_json(out_path, payload)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if result.matched:
        payload.update(
            {
                "outcome": "match",
                "stream_id": result.stream_id,
                "peak_ncc": result.peak_ncc,
                "lag_ms": result.lag_ms,
                "applied_sink_delay_ms": updated.local_alignment_delay_ms,
                "forced": forced_stream is not None,
            }
        )
        _write_json(out_path, payload)
        print(f"match: {result.stream_id} (peak {fmt(result.peak_ncc)}, lag {fmt(result.lag_ms)} ms)")
        print(f"wrote {out_path}")
        return EXIT_OK
    payload.update(
        {
            "outcome": "no-match",
            "stream_id": None,
            "peak_ncc": result.peak_ncc,
            "lag_ms": None,
            "forced": False,
        }
    )
    _write_json(out_path, payload)
    print(f"no match (best peak {fmt(result.peak_ncc)} below threshold {fmt(threshold)})")
    print(f"wrote {out_path}")
    return EXIT_NEGATIVE


def run_validate(config_path: str, mode_name: str | None) -> int:
    try:
        source, file_mode = broadcast.load_broadcast_config(config_path)
    except FileNotFoundError:
        raise CliError(f"broadcast config not found: {config_path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"broadcast config {config_path} is not valid JSON: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"bad broadcast config {config_path}: {exc}") from None
    if mode_name is not None:
        mode = _parse_mode(mode_name)
    elif file_mode is not None:
        mode = file_mode
    else:
        mode = broadcast.SpecMode.STRICT
    violations = broadcast.validate_config(source, mode)
    occupancy = broadcast.airtime_occupancy(source)
    if violations:
        for v in violations:
            print(f"violation [{v.rule}]: {v.message}")
    else:
        print("ok")
    print(f"airtime occupancy: {fmt(occupancy)}")
    return EXIT_OK if not violations else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alsalign",
        description="Plan, validate and simulate alignment-delay compensation for assistive listening.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute a delay-zone plan for a venue")
    p.add_argument("--venue", required=True, help="venue JSON file")
    p.add_argument("--tolerance-ms", type=float, default=30.0, help="max |residual| per seat (default 30)")
    p.add_argument("--out", required=True, help="output plan JSON")

    p = sub.add_parser("map", help="per-seat delay/residual/class CSV for a plan")
    p.add_argument("--venue", required=True)
    p.add_argument("--plan", required=True, help="plan JSON file")
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("simulate", help="distortion report for one seat")
    p.add_argument("--venue", required=True)
    p.add_argument("--plan", default=None, help="plan JSON; omit for uncompensated playback")
    p.add_argument("--seat", required=True, help="seat id")
    p.add_argument("--sample-rate-hz", type=int, default=16000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output report JSON")

    p = sub.add_parser("autoconnect", help="select the broadcast stream matching a mic signal")
    p.add_argument("--mic", required=True, help="mic source: WAV path or noise:<seed>:<ms>:<sr> / sine:<hz>:<ms>:<sr>")
    p.add_argument(
        "--stream",
        action="append",
        default=[],
        metavar="ID=SOURCE",
        help="candidate stream (repeatable)",
    )
    p.add_argument("--max-lag-ms", type=float, default=500.0)
    p.add_argument("--threshold", type=float, default=autoconnect.DEFAULT_THRESHOLD)
    p.add_argument("--mode", choices=["strict", "amended"], default="amended")
    p.add_argument("--snr-db", type=float, default=None, help="degrade the mic with noise at this SNR")
    p.add_argument("--seed", type=int, default=0, help="seed for --snr-db noise")
    p.add_argument("--force-stream", default=None, help="connect to this stream id regardless of scores")
    p.add_argument("--sink-buffer-ms", type=float, default=None, help="override the sink buffer")
    p.add_argument("--out", required=True, help="output selection JSON")

    p = sub.add_parser("validate", help="check a broadcast config against a rule set")
    p.add_argument("--config", required=True, help="broadcast config JSON")
    p.add_argument("--mode", choices=["strict", "amended"], default=None, help="override the file's mode")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plan":
            return run_plan(args.venue, args.tolerance_ms, args.out)
        if args.command == "map":
            return run_map(args.venue, args.plan, args.out)
        if args.command == "simulate":
            return run_simulate(args.venue, args.plan, args.seat, args.sample_rate_hz, args.seed, args.out)
        if args.command == "autoconnect":
            if not args.stream:
                raise CliError("autoconnect needs at least one --stream ID=SOURCE")
            return run_autoconnect(
                args.mic,
                args.stream,
                args.max_lag_ms,
                args.threshold,
                _parse_mode(args.mode),
                args.force_stream,
                args.out,
                snr_db=args.snr_db,
                seed=args.seed,
                sink_buffer_ms=args.sink_buffer_ms,
            )
        if args.command == "validate":
            return run_validate(args.config, args.mode)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
