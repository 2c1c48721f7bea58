"""Perceptual classification of residual alignment delay and comb-filter math.

A listener hearing both the broadcast and the acoustic signal perceives
their time offset as coloration, reverberation or echo depending on its
magnitude; the summed ear signal shows comb-filter notches at odd
multiples of 1/(2*delay).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .signals import Signal, delay_signal, mix

__all__ = [
    "DistortionClass",
    "MixSpec",
    "DistortionReport",
    "classify_residual",
    "comb_filter_magnitude",
    "notch_frequencies",
    "ear_signal",
]

ALIGNED_MAX_MS = 0.1
COLORATION_MAX_MS = 5.0
REVERBERATION_MAX_MS = 30.0


class DistortionClass(Enum):
    ALIGNED = "aligned"
    COLORATION = "coloration"
    REVERBERATION = "reverberation"
    ECHO = "echo"


@dataclass(frozen=True)
class MixSpec:
    """Linear gains applied to the broadcast and acoustic branches."""

    broadcast_gain: float = 1.0
    acoustic_gain: float = 1.0

    def __post_init__(self):
        if self.broadcast_gain < 0 or self.acoustic_gain < 0:
            raise ValueError("gains must be >= 0")


@dataclass(frozen=True)
class DistortionReport:
    seat_id: str
    residual_ms: float
    distortion: DistortionClass
    notch_frequencies_hz: tuple[float, ...]

    def __post_init__(self):
        expected = classify_residual(self.residual_ms)
        if self.distortion is not expected:
            raise ValueError(
                f"class {self.distortion.value} does not match residual {self.residual_ms} ms "
                f"(expected {expected.value})"
            )


def classify_residual(residual_ms: float) -> DistortionClass:
    """Map a signed residual delay to its perceptual category.

    Classification is by magnitude (which signal leads does not matter),
    with bands closed on their upper edge: aligned <= 0.1 ms,
    coloration <= 5 ms, reverberation <= 30 ms, echo above.
    """
    if not math.isfinite(residual_ms):
        raise ValueError(f"residual must be finite, got {residual_ms}")
    a = abs(residual_ms)
    if a <= ALIGNED_MAX_MS:
        return DistortionClass.ALIGNED
    if a <= COLORATION_MAX_MS:
        return DistortionClass.COLORATION
    if a <= REVERBERATION_MAX_MS:
        return DistortionClass.REVERBERATION
    return DistortionClass.ECHO


def comb_filter_magnitude(delay_ms: float, gain: float, freq_hz: float) -> float:
    """|H(f)| of a unit signal summed with a gain-weighted copy delayed by delay_ms."""
    if delay_ms < 0:
        raise ValueError(f"delay_ms must be >= 0, got {delay_ms}")
    if gain < 0:
        raise ValueError(f"gain must be >= 0, got {gain}")
    c = math.cos(2.0 * math.pi * freq_hz * delay_ms / 1000.0)
    # rounding can push the radicand a hair below 0 at exact notches
    return math.sqrt(max(0.0, 1.0 + gain * gain + 2.0 * gain * c))


def notch_frequencies(delay_ms: float, max_freq_hz: float) -> list[float]:
    """All comb notches (2k+1)*1000/(2*delay_ms) up to max_freq_hz, ascending."""
    if delay_ms < 0:
        raise ValueError(f"delay_ms must be >= 0, got {delay_ms}")
    if delay_ms == 0:
        return []
    notches = []
    k = 0
    while True:
        f = (2 * k + 1) * 1000.0 / (2.0 * delay_ms)
        if f > max_freq_hz:
            return notches
        notches.append(f)
        k += 1


def ear_signal(broadcast: Signal, acoustic: Signal, residual_ms: float, spec: MixSpec) -> Signal:
    """Mixed ear signal with the lagging branch delayed by |residual_ms|.

    Positive residual means the acoustic signal arrives after the
    broadcast; negative means the broadcast branch lags instead.
    """
    if not math.isfinite(residual_ms):
        raise ValueError(f"residual must be finite, got {residual_ms}")
    if broadcast.sample_rate_hz != acoustic.sample_rate_hz:
        raise ValueError(
            f"mismatched sample rates: {broadcast.sample_rate_hz} vs {acoustic.sample_rate_hz}"
        )
    if residual_ms >= 0:
        acoustic = delay_signal(acoustic, residual_ms)
    else:
        broadcast = delay_signal(broadcast, -residual_ms)
    return mix([(broadcast, spec.broadcast_gain), (acoustic, spec.acoustic_gain)])
