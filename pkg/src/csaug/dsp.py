"""Pure signal primitives: crossfaded joins and energy leveling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, RateMismatchError, SilentSegmentError

SILENCE_RMS = 1e-8
CROSSFADE_MODES = ("normalized-hamming", "raw-hamming")
PEAK_CEILING = 0.999


def sec_to_samples(seconds: float, rate: int) -> int:
    """The single time-to-sample rule used everywhere (round half to even)."""
    return int(round(float(seconds) * rate))


@dataclass
class Waveform:
    """Mono float sample buffer with its sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"waveform must be 1-D, got shape {samples.shape}")
        if samples.size and not np.isfinite(samples).all():
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        self.samples = samples

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def rms(samples) -> float:
    """Root mean square with float64 accumulation; 0.0 for an empty buffer."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(arr * arr)))


@dataclass(frozen=True)
class CrossfadeSpec:
    overlap: float = 0.05
    mode: str = "normalized-hamming"

    def __post_init__(self):
        if self.overlap < 0:
            raise ConfigError(f"overlap must be >= 0, got {self.overlap}")
        if self.mode not in CROSSFADE_MODES:
            raise ConfigError(f"unknown crossfade mode {self.mode!r}; expected one of {CROSSFADE_MODES}")


def hamming_rising(length: int) -> np.ndarray:
    """Rising half (first `length` points) of a 2*length Hamming window."""
    if length < 0:
        raise ValueError("length must be >= 0")
    return np.hamming(2 * length)[:length]


def crossfade_weights(length: int, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Fade-in and fade-out weight arrays for an overlap of `length` samples.

    normalized-hamming divides the rising half by the sum of itself and its
    mirror so the weights are complementary; raw-hamming uses the halves
    directly and does not sum to one.
    """
    h = hamming_rising(length)
    if mode == "normalized-hamming":
        fade_in = h / (h + h[::-1])
        return fade_in, 1.0 - fade_in
    if mode == "raw-hamming":
        return h, h[::-1]
    raise ConfigError(f"unknown crossfade mode {mode!r}")


def overlap_add(a: Waveform, b: Waveform, spec: CrossfadeSpec,
                overlap_samples: int | None = None) -> Waveform:
    """Join two waveforms, crossfading the last/first L samples.

    L comes from overlap_samples when given, otherwise from spec.overlap at
    the common sample rate. Output length is len(a) + len(b) - L.
    """
    if a.sample_rate != b.sample_rate:
        raise RateMismatchError(f"cannot join {a.sample_rate} Hz with {b.sample_rate} Hz")
    rate = a.sample_rate
    if overlap_samples is None:
        length = sec_to_samples(spec.overlap, rate)
    else:
        length = int(overlap_samples)
    if length < 0:
        raise ValueError(f"overlap must be >= 0 samples, got {length}")
    if length > min(len(a), len(b)):
        raise ValueError(
            f"overlap of {length} samples exceeds an operand (len(a)={len(a)}, len(b)={len(b)})"
        )
    if length == 0:
        return Waveform(np.concatenate([a.samples, b.samples]), rate)
    fade_in, fade_out = crossfade_weights(length, spec.mode)
    out = np.empty(len(a) + len(b) - length, dtype=np.float64)
    head = len(a) - length
    out[:head] = a.samples[:head]
    out[head:len(a)] = fade_out * a.samples[head:] + fade_in * b.samples[:length]
    out[len(a):] = b.samples[length:]
    return Waveform(out, rate)


def normalize_energy(x: Waveform) -> Waveform:
    """Divide by the RMS so the output has unit energy per sample."""
    r = rms(x.samples)
    if r < SILENCE_RMS:
        raise SilentSegmentError(f"rms {r:.3e} is below the silence floor {SILENCE_RMS:.0e}")
    return Waveform(x.samples / r, x.sample_rate)


def rescale(x: Waveform, target_rms: float) -> Waveform:
    """Scale so the output RMS equals target_rms; shape is preserved."""
    if target_rms <= 0:
        raise ValueError(f"target rms must be positive, got {target_rms}")
    r = rms(x.samples)
    if r < SILENCE_RMS:
        raise SilentSegmentError(f"rms {r:.3e} is below the silence floor {SILENCE_RMS:.0e}")
    return Waveform(x.samples * (target_rms / r), x.sample_rate)


def limit_peak(samples: np.ndarray, ceiling: float = PEAK_CEILING) -> tuple[np.ndarray, bool]:
    """Scale down if any |sample| exceeds ceiling; returns (samples, limited)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        return arr, False
    peak = float(np.max(np.abs(arr)))
    if peak > ceiling:
        return arr * (ceiling / peak), True
    return arr, False
