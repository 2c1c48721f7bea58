"""Stream selection by resemblance to the listener's acoustic environment.

Scan candidate broadcast streams, score each against the microphone
signal with windowed normalized cross-correlation over non-negative
integer lags, connect to the best-scoring stream, and reuse the peak lag
as the listener's local alignment delay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .broadcast import BroadcastSink, SpecMode, sink_apply_delays
from .signals import Signal

__all__ = [
    "CandidateStream",
    "SelectionResult",
    "normalized_cross_correlation",
    "estimate_alignment_delay",
    "select_stream",
    "autoconnect_pipeline",
    "DEFAULT_THRESHOLD",
]

DEFAULT_THRESHOLD = 0.3


@dataclass(frozen=True)
class CandidateStream:
    id: str
    signal: Signal

    def __post_init__(self):
        if len(self.signal) == 0:
            raise ValueError(f"candidate {self.id!r} has an empty signal")


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of stream selection; stream_id/lag_ms are None on no match."""

    stream_id: str | None
    peak_ncc: float
    lag_ms: float | None

    @property
    def matched(self) -> bool:
        return self.stream_id is not None


def _check_pair(mic: Signal, stream: Signal) -> int:
    if mic.sample_rate_hz != stream.sample_rate_hz:
        raise ValueError(
            f"mismatched sample rates: mic {mic.sample_rate_hz} vs stream {stream.sample_rate_hz}"
        )
    return min(len(mic), len(stream))


def normalized_cross_correlation(mic: Signal, stream: Signal, lag_samples: int) -> float:
    """Cosine similarity of stream[0:n-lag] and mic[lag:n], n = min length.

    Result lies in [-1, 1] up to rounding; windows of zero norm score 0.
    """
    n = _check_pair(mic, stream)
    if lag_samples < 0:
        raise ValueError(f"lag_samples must be >= 0, got {lag_samples}")
    if n - lag_samples < 2:
        raise ValueError(f"overlap {n - lag_samples} too small (need >= 2) at lag {lag_samples}")
    s = stream.samples[: n - lag_samples]
    m = mic.samples[lag_samples:n]
    denom = np.sqrt(np.dot(s, s)) * np.sqrt(np.dot(m, m))
    if denom == 0.0:
        return 0.0
    return float(np.dot(s, m) / denom)


def _ncc_curve(mic: Signal, stream: Signal, max_lag_samples: int) -> np.ndarray:
    """NCC at every lag 0..max_lag_samples, computed without FFT.

    Numerators are one dot product per lag; window norms come from prefix
    and suffix sums of squares.
    """
    n = _check_pair(mic, stream)
    if max_lag_samples < 0 or n - max_lag_samples < 2:
        raise ValueError(
            f"lag range 0..{max_lag_samples} leaves less than 2 samples of overlap "
            f"(min signal length {n})"
        )
    m = mic.samples[:n]
    s = stream.samples[:n]
    nlags = max_lag_samples + 1

    # stream window norms: cumulative |s[0:k]|^2 for k = n-max_lag .. n
    s_sq = np.square(s)
    s_head = np.concatenate(([0.0], np.cumsum(s_sq)))
    # mic window norms: tail sums |m[lag:n]|^2 for lag = 0 .. max_lag
    m_sq = np.square(m)
    m_tail = np.concatenate((np.cumsum(m_sq[::-1])[::-1], [0.0]))

    nums = np.empty(nlags)
    for lag in range(nlags):
        nums[lag] = np.dot(s[: n - lag], m[lag:])
    s_norms = np.sqrt(s_head[n - np.arange(nlags)])
    m_norms = np.sqrt(m_tail[:nlags])
    denoms = s_norms * m_norms
    out = np.zeros(nlags)
    nonzero = denoms > 0.0
    out[nonzero] = nums[nonzero] / denoms[nonzero]
    return out


def estimate_alignment_delay(mic: Signal, stream: Signal, max_lag_ms: float) -> tuple[float, float]:
    """Exhaustive integer-lag search; returns (lag_ms, peak_ncc).

    Ties in the peak value break to the smallest lag. The search is
    one-sided (lag >= 0): the broadcast always precedes the acoustic
    signal here.
    """
    if max_lag_ms < 0:
        raise ValueError(f"max_lag_ms must be >= 0, got {max_lag_ms}")
    max_lag = round(max_lag_ms * mic.sample_rate_hz / 1000.0)
    curve = _ncc_curve(mic, stream, max_lag)
    best = int(np.argmax(curve))  # argmax returns the first (smallest) lag on ties
    return best * 1000.0 / mic.sample_rate_hz, float(curve[best])


def select_stream(
    mic: Signal,
    candidates: list[CandidateStream],
    max_lag_ms: float,
    threshold: float = DEFAULT_THRESHOLD,
) -> SelectionResult:
    """Pick the candidate with the highest correlation peak.

    Candidates are scored in id order so ties break to the smallest id;
    a best peak below the threshold yields a no-match result.
    """
    if not candidates:
        raise ValueError("select_stream requires at least one candidate")
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    ids = [c.id for c in candidates]
    if len(ids) != len(set(ids)):
        raise ValueError("duplicate candidate stream ids")
    best_id = None
    best_peak = -np.inf
    best_lag = None
    for cand in sorted(candidates, key=lambda c: c.id):
        lag_ms, peak = estimate_alignment_delay(mic, cand.signal, max_lag_ms)
        if peak > best_peak:
            best_id, best_peak, best_lag = cand.id, peak, lag_ms
    if best_peak < threshold:
        return SelectionResult(None, float(best_peak), None)
    return SelectionResult(best_id, float(best_peak), best_lag)


def autoconnect_pipeline(
    mic: Signal,
    candidates: list[CandidateStream],
    sink: BroadcastSink,
    mode: SpecMode,
    max_lag_ms: float,
    threshold: float = DEFAULT_THRESHOLD,
    forced_stream: str | None = None,
) -> tuple[SelectionResult, BroadcastSink]:
    """Scan, compare, connect: returns the selection and the updated sink.

    A forced stream id overrides scoring entirely (manual override). On a
    match the estimated lag becomes the sink's local alignment delay and
    the sink must accept it under the given rule set; sink errors
    propagate. On no match the sink is returned unchanged.
    """
    if forced_stream is not None:
        by_id = {c.id: c for c in candidates}
        if forced_stream not in by_id:
            raise KeyError(f"forced stream {forced_stream!r} is not among the candidates")
        lag_ms, peak = estimate_alignment_delay(mic, by_id[forced_stream].signal, max_lag_ms)
        result = SelectionResult(forced_stream, peak, lag_ms)
    else:
        result = select_stream(mic, candidates, max_lag_ms, threshold)
    if not result.matched:
        return result, sink
    updated = sink.with_local_delay(result.lag_ms)
    sink_apply_delays(updated, 0.0, mode)
    return result, updated
