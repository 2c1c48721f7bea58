"""Deterministic generation and elementary manipulation of sampled audio.

Signals are immutable mono float64 arrays with a sample rate. Every
generator is a pure function of its arguments (including the seed), so
repeated calls are bit-identical.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass, field

import numpy as np

from .prng import SplitMix64

__all__ = [
    "Signal",
    "gen_white_noise",
    "gen_sine",
    "delay_signal",
    "mix",
    "add_noise_snr",
    "read_wav",
    "write_wav",
]


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled mono audio, nominal amplitude range [-1, 1]."""

    samples: np.ndarray = field(repr=False)
    sample_rate_hz: int

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_ms(self) -> float:
        return 1000.0 * len(self.samples) / self.sample_rate_hz

    def power(self) -> float:
        """Mean squared amplitude; 0.0 for an empty signal."""
        if len(self.samples) == 0:
            return 0.0
        return float(np.mean(np.square(self.samples)))

    def rms(self) -> float:
        return float(np.sqrt(self.power()))


def _num_samples(duration_ms: float, sample_rate_hz: int) -> int:
    # round half to even, matching the sample-shift convention
    return round(duration_ms * sample_rate_hz / 1000.0)


def gen_white_noise(seed: int, duration_ms: float, sample_rate_hz: int) -> Signal:
    """White noise, i.i.d. uniform on [-1, 1), bit-identical per (seed, params)."""
    if duration_ms < 0:
        raise ValueError(f"duration_ms must be >= 0, got {duration_ms}")
    if sample_rate_hz <= 0:
        raise ValueError(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    n = _num_samples(duration_ms, sample_rate_hz)
    return Signal(SplitMix64(seed).symmetric_block(n), sample_rate_hz)


def gen_sine(freq_hz: float, duration_ms: float, sample_rate_hz: int, amplitude: float = 1.0) -> Signal:
    """Pure tone: samples[k] = amplitude * sin(2*pi*freq_hz*k/sample_rate_hz)."""
    if duration_ms < 0:
        raise ValueError(f"duration_ms must be >= 0, got {duration_ms}")
    if sample_rate_hz <= 0:
        raise ValueError(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    if not 0 <= freq_hz < sample_rate_hz / 2:
        raise ValueError(
            f"freq_hz must satisfy 0 <= f < Nyquist ({sample_rate_hz / 2} Hz), got {freq_hz}"
        )
    n = _num_samples(duration_ms, sample_rate_hz)
    k = np.arange(n, dtype=np.float64)
    return Signal(amplitude * np.sin(2.0 * np.pi * freq_hz * k / sample_rate_hz), sample_rate_hz)


def delay_signal(sig: Signal, delay_ms: float) -> Signal:
    """Shift right by the nearest whole sample; head zero-padded, length kept.

    Negative delays are rejected: represent them by delaying the other
    signal of the pair instead.
    """
    if delay_ms < 0:
        raise ValueError(f"delay_ms must be >= 0, got {delay_ms}")
    shift = round(delay_ms * sig.sample_rate_hz / 1000.0)
    if shift == 0:
        return sig
    n = len(sig)
    out = np.zeros(n)
    if shift < n:
        out[shift:] = sig.samples[: n - shift]
    return Signal(out, sig.sample_rate_hz)


def mix(parts: list[tuple[Signal, float]]) -> Signal:
    """Sample-wise weighted sum; shorter parts are zero-extended."""
    if not parts:
        raise ValueError("mix requires at least one (signal, gain) part")
    rates = {sig.sample_rate_hz for sig, _ in parts}
    if len(rates) != 1:
        raise ValueError(f"mismatched sample rates: {sorted(rates)}")
    n = max(len(sig) for sig, _ in parts)
    out = np.zeros(n)
    for sig, gain in parts:
        out[: len(sig)] += gain * sig.samples
    return Signal(out, rates.pop())


def add_noise_snr(sig: Signal, snr_db: float, seed: int) -> Signal:
    """Add white noise scaled so power(sig)/power(noise) == 10**(snr_db/10)."""
    p_sig = sig.power()
    if p_sig == 0.0:
        raise ValueError("add_noise_snr requires a signal with nonzero power")
    noise = SplitMix64(seed).symmetric_block(len(sig))
    p_noise = float(np.mean(np.square(noise)))
    target = p_sig / 10.0 ** (snr_db / 10.0)
    scale = np.sqrt(target / p_noise)
    return Signal(sig.samples + scale * noise, sig.sample_rate_hz)


def write_wav(sig: Signal, path) -> None:
    """16-bit PCM mono RIFF; amplitudes map linearly to [-1, 1)."""
    pcm = np.clip(np.round(sig.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sig.sample_rate_hz)
        w.writeframes(pcm.tobytes())


def read_wav(path) -> Signal:
    """Read a 16-bit PCM mono WAV written by write_wav (or equivalent)."""
    with wave.open(str(path), "rb") as w:
        if w.getnchannels() != 1:
            raise ValueError(f"expected mono WAV, got {w.getnchannels()} channels")
        if w.getsampwidth() != 2:
            raise ValueError(f"expected 16-bit PCM, got {8 * w.getsampwidth()}-bit")
        pcm = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2")
        return Signal(pcm.astype(np.float64) / 32768.0, w.getframerate())
