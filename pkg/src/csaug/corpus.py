"""Alignment parsing, corpus manifests, and sample-window audio reads."""

from __future__ import annotations

import contextlib
import json
import math
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .dsp import Waveform, sec_to_samples
from .errors import (
    AudioReadError,
    CtmParseError,
    ManifestError,
    RateMismatchError,
    UnknownRecordingError,
    ValidationError,
)
from .metrics import classify_token


@dataclass(frozen=True)
class Recording:
    """One monolingual audio file; channel selects which track to read."""

    id: str
    audio_path: str
    sample_rate: int
    num_samples: int
    channel: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"recording {self.id!r}: sample rate must be positive")
        if self.num_samples <= 0:
            raise ValueError(f"recording {self.id!r}: num_samples must be positive")
        if self.channel < 0:
            raise ValueError(f"recording {self.id!r}: channel must be >= 0")

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate


@dataclass(frozen=True)
class AlignedToken:
    """One time-stamped unit inside a recording."""

    recording_id: str
    channel: int
    start: float
    duration: float
    token: str
    language: str = ""

    def __post_init__(self):
        if not self.token or any(ch.isspace() for ch in self.token):
            raise ValueError(f"token must be non-empty without whitespace, got {self.token!r}")
        if not self.language:
            object.__setattr__(self, "language", classify_token(self.token))

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass
class SupervisionSet:
    """Recordings plus their aligned tokens grouped by (recording_id, channel)."""

    recordings: dict[str, Recording]
    tokens: dict[tuple[str, int], list[AlignedToken]] = field(default_factory=dict)

    def all_tokens(self):
        for group in self.tokens.values():
            yield from group

    def __len__(self) -> int:
        return sum(len(g) for g in self.tokens.values())


def recordings_by_id(corpus: Mapping[str, Recording] | Iterable[Recording]) -> dict[str, Recording]:
    if isinstance(corpus, Mapping):
        return dict(corpus)
    out: dict[str, Recording] = {}
    for rec in corpus:
        if rec.id in out:
            raise ManifestError(f"duplicate recording id {rec.id!r}")
        out[rec.id] = rec
    return out


def parse_ctm(lines: Iterable[str],
              corpus: Mapping[str, Recording] | Iterable[Recording]) -> SupervisionSet:
    """Parse CTM lines (`rec channel begin duration token [conf]`) into supervisions.

    Tokens are grouped by (recording_id, channel) and sorted by start time.
    Blank lines are skipped; the optional sixth confidence field is ignored.
    """
    recordings = recordings_by_id(corpus)
    groups: dict[tuple[str, int], list[AlignedToken]] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (5, 6):
            raise CtmParseError(lineno, line, f"expected 5 or 6 fields, got {len(parts)}")
        rec_id, channel_s, begin_s, dur_s, token = parts[:5]
        try:
            channel = int(channel_s)
        except ValueError:
            raise CtmParseError(lineno, line, f"non-integer channel {channel_s!r}") from None
        try:
            begin = float(begin_s)
            dur = float(dur_s)
        except ValueError:
            raise CtmParseError(lineno, line, "non-numeric time field") from None
        if not (math.isfinite(begin) and math.isfinite(dur)):
            raise CtmParseError(lineno, line, "non-finite time field")
        if rec_id not in recordings:
            raise UnknownRecordingError(f"line {lineno}: unknown recording {rec_id!r}")
        if dur <= 0:
            raise ValidationError(f"line {lineno}: non-positive duration {dur!r}")
        if begin < 0:
            raise ValidationError(f"line {lineno}: negative start {begin!r}")
        groups.setdefault((rec_id, channel), []).append(
            AlignedToken(rec_id, channel, begin, dur, token)
        )
    for group in groups.values():
        group.sort(key=lambda t: t.start)
    return SupervisionSet(recordings, groups)


def write_ctm(sset: SupervisionSet, stream) -> None:
    """Serialize supervisions as CTM; floats keep full round-trip precision."""
    for group in sset.tokens.values():
        for t in group:
            stream.write(f"{t.recording_id} {t.channel} {t.start!r} {t.duration!r} {t.token}\n")


@dataclass(frozen=True)
class Finding:
    category: str
    recording_id: str
    channel: int
    message: str
    start: float | None = None  # start time of the offending token, when one exists


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings


def validate(sset: SupervisionSet) -> ValidationReport:
    """Report out-of-bounds tokens, overlapping neighbors, and unknown recordings.

    Comparisons allow one sample of slack so exact-boundary alignments written
    with finite decimal precision do not trip the checks.
    """
    findings: list[Finding] = []
    for (rec_id, channel), toks in sset.tokens.items():
        rec = sset.recordings.get(rec_id)
        if rec is None:
            findings.append(Finding(
                "unknown_recording", rec_id, channel,
                f"{rec_id!r}/ch{channel}: tokens reference an unknown recording",
            ))
            continue
        slack = 1.0 / rec.sample_rate
        for t in toks:
            if t.end > rec.duration + slack:
                findings.append(Finding(
                    "out_of_bounds", rec_id, channel,
                    f"{rec_id!r}/ch{channel}: token {t.token!r} ends at {t.end:.6f}s "
                    f"past recording end {rec.duration:.6f}s",
                    start=t.start,
                ))
        # track the running max end so a long token is checked against every
        # later one, not only its immediate successor
        max_end = None
        for t in toks:
            if max_end is not None and t.start < max_end - slack:
                findings.append(Finding(
                    "overlap", rec_id, channel,
                    f"{rec_id!r}/ch{channel}: token {t.token!r} at {t.start:.6f}s "
                    f"overlaps an earlier token ending at {max_end:.6f}s",
                    start=t.start,
                ))
            max_end = t.end if max_end is None else max(max_end, t.end)
    return ValidationReport(findings)


def load_corpus_manifest(path) -> dict[str, Recording]:
    """Load a line-delimited JSON corpus manifest into id -> Recording.

    Each record needs id, audio_path, sample_rate, duration (channel optional).
    Relative audio paths resolve against the manifest's directory; all records
    must share one sample rate.
    """
    base = Path(path).resolve().parent
    recordings: dict[str, Recording] = {}
    common_rate: int | None = None
    with open(path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise ManifestError(f"{path}:{lineno}: invalid record: {err}") from None
            if not isinstance(obj, dict):
                raise ManifestError(f"{path}:{lineno}: record must be an object")
            missing = [k for k in ("id", "audio_path", "sample_rate", "duration") if k not in obj]
            if missing:
                raise ManifestError(f"{path}:{lineno}: missing fields {missing}")
            rec_id = str(obj["id"])
            if rec_id in recordings:
                raise ManifestError(f"{path}:{lineno}: duplicate recording id {rec_id!r}")
            rate = obj["sample_rate"]
            if not isinstance(rate, int) or rate <= 0:
                raise ManifestError(f"{path}:{lineno}: sample_rate must be a positive integer")
            if common_rate is None:
                common_rate = rate
            elif rate != common_rate:
                raise RateMismatchError(
                    f"{path}:{lineno}: sample rate {rate} differs from corpus rate {common_rate}"
                )
            duration = float(obj["duration"])
            num_samples = sec_to_samples(duration, rate)
            if num_samples <= 0:
                raise ManifestError(f"{path}:{lineno}: non-positive duration {duration!r}")
            audio = Path(str(obj["audio_path"]))
            if not audio.is_absolute():
                audio = base / audio
            recordings[rec_id] = Recording(
                rec_id, str(audio), rate, num_samples, int(obj.get("channel", 0))
            )
    return recordings


def _read_frames(rec: Recording, start_idx: int, n: int) -> np.ndarray:
    """Read n frames at start_idx from rec's file as float64 in [-1, 1)."""
    if n < 0 or start_idx < 0 or start_idx + n > rec.num_samples:
        raise ValueError(
            f"frame window [{start_idx}, {start_idx + n}) outside recording "
            f"{rec.id!r} of {rec.num_samples} samples"
        )
    try:
        handle = wave.open(rec.audio_path, "rb")
    except FileNotFoundError:
        raise AudioReadError(f"missing audio file: {rec.audio_path}") from None
    except (OSError, wave.Error, EOFError) as err:
        raise AudioReadError(f"cannot read {rec.audio_path}: {err}") from None
    with contextlib.closing(handle):
        try:
            if handle.getcomptype() != "NONE" or handle.getsampwidth() != 2:
                raise AudioReadError(f"{rec.audio_path}: only 16-bit PCM WAV is supported")
            if handle.getframerate() != rec.sample_rate:
                raise RateMismatchError(
                    f"{rec.audio_path}: file rate {handle.getframerate()} "
                    f"differs from manifest rate {rec.sample_rate}"
                )
            channels = handle.getnchannels()
            if rec.channel >= channels:
                raise AudioReadError(
                    f"{rec.audio_path}: channel {rec.channel} requested but file has {channels}"
                )
            if handle.getnframes() != rec.num_samples:
                raise AudioReadError(
                    f"{rec.audio_path}: {handle.getnframes()} frames on disk but "
                    f"manifest declares {rec.num_samples}"
                )
            handle.setpos(start_idx)
            raw = handle.readframes(n)
        except wave.Error as err:
            raise AudioReadError(f"cannot read {rec.audio_path}: {err}") from None
    data = np.frombuffer(raw, dtype="<i2")
    if data.size != n * channels:
        raise AudioReadError(f"{rec.audio_path}: short read at frame {start_idx}")
    if channels > 1:
        data = data.reshape(-1, channels)[:, rec.channel]
    return data.astype(np.float64) / 32768.0


def probe_recording(rec: Recording) -> None:
    """Check that rec's audio exists and matches its manifest entry."""
    _read_frames(rec, 0, 0)


def read_window(rec: Recording, start: float, end: float) -> Waveform:
    """Read the sample window for [start, end) seconds, clipped to the recording."""
    if not end > start:
        raise ValueError(f"window end {end!r} must exceed start {start!r}")
    clipped_start = max(0.0, float(start))
    clipped_end = min(rec.duration, float(end))
    rate = rec.sample_rate
    if clipped_end <= clipped_start:
        return Waveform(np.zeros(0), rate)
    start_idx = sec_to_samples(clipped_start, rate)
    n = sec_to_samples(clipped_end - clipped_start, rate)
    if start_idx + n > rec.num_samples:
        # independent rounding of start and length can overshoot by one; keep
        # the length (it defines the contract) and slide the window back
        start_idx = rec.num_samples - n
    return Waveform(_read_frames(rec, start_idx, n), rate)


def extract_with_context(rec: Recording, cut, context: float = 0.05) -> tuple[Waveform, float, float]:
    """Read a cut extended by up to `context` seconds on each side.

    Returns the waveform plus the actually-obtained head and tail extensions
    in seconds (shorter than `context` only at recording edges).
    """
    if context < 0:
        raise ValueError(f"context must be >= 0, got {context}")
    if not cut.end > cut.start:
        raise ValidationError(f"degenerate cut [{cut.start}, {cut.end}] in {cut.recording_id!r}")
    rate = rec.sample_rate
    core_start = sec_to_samples(cut.start, rate)
    n_core = sec_to_samples(cut.end - cut.start, rate)
    if n_core <= 0:
        raise ValidationError(f"cut [{cut.start}, {cut.end}] in {cut.recording_id!r} rounds to no samples")
    if n_core > rec.num_samples:
        raise ValidationError(f"cut [{cut.start}, {cut.end}] is longer than recording {rec.id!r}")
    if core_start + n_core > rec.num_samples:
        # same overshoot-by-one guard as read_window
        core_start = rec.num_samples - n_core
    n_ctx = sec_to_samples(context, rate)
    head = min(n_ctx, core_start)
    tail = min(n_ctx, rec.num_samples - core_start - n_core)
    samples = _read_frames(rec, core_start - head, head + n_core + tail)
    return Waveform(samples, rate), head / rate, tail / rate


def encode_pcm16(samples: np.ndarray) -> np.ndarray:
    """Map float samples to little-endian int16 with clipping."""
    scaled = np.rint(np.asarray(samples, dtype=np.float64) * 32768.0)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def write_wav(path, waveform: Waveform) -> None:
    """Write a mono 16-bit PCM WAV file."""
    pcm = encode_pcm16(waveform.samples)
    with contextlib.closing(wave.open(str(path), "wb")) as handle:
        handle.setnchannels(1)
        handle.setsampwidth(2)
        handle.setframerate(waveform.sample_rate)
        handle.writeframes(pcm.tobytes())


def read_wav(path, channel: int = 0) -> Waveform:
    """Read a 16-bit PCM WAV file fully, selecting one channel."""
    try:
        handle = wave.open(str(path), "rb")
    except FileNotFoundError:
        raise AudioReadError(f"missing audio file: {path}") from None
    except (OSError, wave.Error, EOFError) as err:
        raise AudioReadError(f"cannot read {path}: {err}") from None
    with contextlib.closing(handle):
        if handle.getcomptype() != "NONE" or handle.getsampwidth() != 2:
            raise AudioReadError(f"{path}: only 16-bit PCM WAV is supported")
        channels = handle.getnchannels()
        if channel >= channels:
            raise AudioReadError(f"{path}: channel {channel} requested but file has {channels}")
        rate = handle.getframerate()
        raw = handle.readframes(handle.getnframes())
    data = np.frombuffer(raw, dtype="<i2")
    if channels > 1:
        data = data.reshape(-1, channels)[:, channel]
    return Waveform(data.astype(np.float64) / 32768.0, rate)
