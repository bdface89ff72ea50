"""Batch rendering of code-switched utterances by splicing inventory cuts."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Recording, extract_with_context, write_wav
from .dsp import (
    SILENCE_RMS,
    CrossfadeSpec,
    Waveform,
    limit_peak,
    overlap_add,
    rescale,
    rms,
    sec_to_samples,
)
from .errors import ConfigError, OovError, SilentSegmentError, UnknownRecordingError, ValidationError
from .inventory import CSText, CSUtterance, CutRef, Inventory, get_consec_units, sample_unit

log = logging.getLogger(__name__)

LEVEL_MODES = ("unit_rms", "source_mean_rms")
MANIFEST_NAME = "manifest.jsonl"
REPORT_NAME = "report.json"


@dataclass(frozen=True)
class ProvenanceEntry:
    """Where one spliced segment came from and how it was joined."""

    tokens: tuple[str, ...]
    recording_id: str
    channel: int
    start: float
    end: float
    head_ext: float
    tail_ext: float
    num_samples: int
    joint_overlap: int  # samples crossfaded with the previous segment; 0 for the first


@dataclass(frozen=True)
class SkipRecord:
    utterance_id: str
    reason: str  # "oov" | "silent_segment"
    missing_tokens: tuple[str, ...] = ()
    detail: str = ""


@dataclass
class GeneratedUtterance:
    utterance_id: str
    tokens: tuple[str, ...]
    waveform: Waveform
    provenance: tuple[ProvenanceEntry, ...]
    peak_limited: bool

    @property
    def duration(self) -> float:
        return self.waveform.duration


@dataclass
class CollageRequest:
    """Everything one batch run needs; seed fixes all randomness."""

    cs_text: CSText
    inventory: Inventory
    recordings: Mapping[str, Recording]
    output_dir: str | Path
    seed: int = 0
    crossfade: CrossfadeSpec = field(default_factory=CrossfadeSpec)
    context: float = 0.05
    output_level: str = "source_mean_rms"

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.context < 0:
            raise ConfigError(f"context must be >= 0, got {self.context}")
        if self.context < self.crossfade.overlap:
            raise ConfigError(
                f"context ({self.context}s) must cover the crossfade overlap "
                f"({self.crossfade.overlap}s)"
            )
        if self.output_level not in LEVEL_MODES:
            raise ConfigError(
                f"unknown output level {self.output_level!r}; expected one of {LEVEL_MODES}"
            )


@dataclass
class GenerationReport:
    total_utterances: int
    generated_count: int
    skipped: list[SkipRecord]
    total_audio_hours: float
    unit_usage: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "total_utterances": self.total_utterances,
            "generated_count": self.generated_count,
            "skipped": [
                {
                    "utterance_id": s.utterance_id,
                    "reason": s.reason,
                    "missing_tokens": list(s.missing_tokens),
                    "detail": s.detail,
                }
                for s in self.skipped
            ],
            "total_audio_hours": self.total_audio_hours,
            "unit_usage": {str(k): v for k, v in sorted(self.unit_usage.items())},
        }


def generate_utterance(utt: CSUtterance, req: CollageRequest,
                       rng) -> GeneratedUtterance | SkipRecord:
    """Render one utterance: match units, sample cuts, equalize, splice, level.

    OOV tokens and silent segments return a SkipRecord instead of raising.
    """
    try:
        keys = get_consec_units(utt.tokens, req.inventory, utt.utterance_id)
    except OovError as err:
        return SkipRecord(utt.utterance_id, "oov", tuple(err.missing))
    segments: list[tuple[CutRef, float, float, Waveform, float]] = []
    for key in keys:
        cut = sample_unit(req.inventory, key, rng)
        rec = req.recordings.get(cut.recording_id)
        if rec is None:
            raise UnknownRecordingError(
                f"inventory cut references unknown recording {cut.recording_id!r}"
            )
        wave, head_s, tail_s = extract_with_context(rec, cut, req.context)
        seg_rms = rms(wave.samples)
        if seg_rms < SILENCE_RMS:
            return SkipRecord(
                utt.utterance_id, "silent_segment",
                detail=f"unit {' '.join(cut.tokens)!r} from {cut.recording_id} "
                       f"[{cut.start:.3f}, {cut.end:.3f}]",
            )
        segments.append((cut, head_s, tail_s, wave, seg_rms))
    rate = segments[0][3].sample_rate
    nominal = sec_to_samples(req.crossfade.overlap, rate)
    provenance: list[ProvenanceEntry] = []
    mixed: Waveform | None = None
    for index, (cut, head_s, tail_s, wave, seg_rms) in enumerate(segments):
        equalized = Waveform(wave.samples / seg_rms, rate)
        if mixed is None:
            joint = 0
            mixed = equalized
        else:
            prev_tail = sec_to_samples(segments[index - 1][2], rate)
            joint = min(nominal, prev_tail, sec_to_samples(head_s, rate))
            mixed = overlap_add(mixed, equalized, req.crossfade, overlap_samples=joint)
        provenance.append(ProvenanceEntry(
            cut.tokens, cut.recording_id, cut.channel, cut.start, cut.end,
            head_s, tail_s, len(wave), joint,
        ))
    target = 1.0 if req.output_level == "unit_rms" else float(np.mean([s[4] for s in segments]))
    try:
        leveled = rescale(mixed, target)
    except SilentSegmentError:
        return SkipRecord(utt.utterance_id, "silent_segment", detail="mixed waveform is silent")
    samples, limited = limit_peak(leveled.samples)
    return GeneratedUtterance(
        utt.utterance_id, utt.tokens, Waveform(samples, rate), tuple(provenance), limited
    )


def manifest_record(gen: GeneratedUtterance, req: CollageRequest) -> dict:
    return {
        "utterance_id": gen.utterance_id,
        "text": " ".join(gen.tokens),
        "duration_seconds": gen.duration,
        "num_samples": len(gen.waveform),
        "sample_rate": gen.waveform.sample_rate,
        "audio": f"{gen.utterance_id}.wav",
        "level": req.output_level,
        "crossfade_mode": req.crossfade.mode,
        "overlap": req.crossfade.overlap,
        "context": req.context,
        "peak_limited": gen.peak_limited,
        "provenance": [
            {
                "tokens": list(e.tokens),
                "recording_id": e.recording_id,
                "channel": e.channel,
                "start": e.start,
                "end": e.end,
                "head_ext": e.head_ext,
                "tail_ext": e.tail_ext,
                "num_samples": e.num_samples,
                "joint_overlap": e.joint_overlap,
            }
            for e in gen.provenance
        ],
    }


def generate_collage(req: CollageRequest, workers: int = 1) -> GenerationReport:
    """Render every utterance into req.output_dir with full provenance.

    Writes one WAV per generated utterance, a line-delimited manifest, a JSON
    report, and summary figures. Per-utterance rngs are keyed by (seed, index)
    so outputs are identical for any worker count.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    out_dir = Path(req.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_NAME
    # claim the manifest up front so an unwritable directory aborts the run
    # before any audio is rendered
    with open(manifest_path, "w", encoding="utf-8"):
        pass

    utterances = list(req.cs_text)

    def job(item: tuple[int, CSUtterance]):
        index, utt = item
        rng = np.random.default_rng([req.seed, index])
        result = generate_utterance(utt, req, rng)
        if isinstance(result, GeneratedUtterance):
            write_wav(out_dir / f"{result.utterance_id}.wav", result.waveform)
        return index, result

    if workers == 1:
        results = [job(item) for item in enumerate(utterances)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, list(enumerate(utterances))))
    results.sort(key=lambda pair: pair[0])

    records: list[dict] = []
    skipped: list[SkipRecord] = []
    unit_usage: dict[int, int] = {}
    for _, result in results:
        if isinstance(result, SkipRecord):
            skipped.append(result)
            log.info("skipped %s: %s %s", result.utterance_id, result.reason,
                     " ".join(result.missing_tokens) or result.detail)
            continue
        for entry in result.provenance:
            unit_usage[len(entry.tokens)] = unit_usage.get(len(entry.tokens), 0) + 1
        records.append(manifest_record(result, req))

    with open(manifest_path, "w", encoding="utf-8") as stream:
        for record in records:
            stream.write(json.dumps(record, ensure_ascii=False) + "\n")
    report = GenerationReport(
        total_utterances=len(utterances),
        generated_count=len(records),
        skipped=skipped,
        total_audio_hours=sum(r["duration_seconds"] for r in records) / 3600.0,
        unit_usage=unit_usage,
    )
    report_dict = report.to_dict()
    with open(out_dir / REPORT_NAME, "w", encoding="utf-8") as stream:
        json.dump(report_dict, stream, ensure_ascii=False, indent=2)
        stream.write("\n")
    from . import figures  # deferred so library users do not pay for matplotlib

    figure_paths = figures.generation_figures(records, report_dict, out_dir)
    log.info("generated %d/%d utterances (%.4f h), %d skipped, %d figures",
             report.generated_count, report.total_utterances,
             report.total_audio_hours, len(skipped), len(figure_paths))
    return report


def subset_cs_text(cs_text: CSText, percent: float) -> CSText:
    """Deterministic first-k% selection by utterance index (k floored)."""
    if not 0 < percent <= 100:
        raise ConfigError(f"subset percent must be in (0, 100], got {percent}")
    keep = int(len(cs_text) * percent / 100.0)
    return CSText(cs_text.utterances[:keep])


def render_from_provenance(record: dict, recordings: Mapping[str, Recording]) -> Waveform:
    """Rebuild a manifest record's waveform from its provenance, bit for bit.

    Re-runs extraction, equalization, splicing, leveling, and peak limiting
    with the parameters stored in the record; no randomness is involved.
    """
    rate = int(record["sample_rate"])
    context = float(record["context"])
    spec = CrossfadeSpec(float(record["overlap"]), record["crossfade_mode"])
    extracted: list[Waveform] = []
    for entry in record["provenance"]:
        rec = recordings.get(entry["recording_id"])
        if rec is None:
            raise UnknownRecordingError(
                f"provenance references unknown recording {entry['recording_id']!r}"
            )
        cut = CutRef(entry["recording_id"], int(entry["channel"]),
                     float(entry["start"]), float(entry["end"]), tuple(entry["tokens"]))
        wave, head_s, tail_s = extract_with_context(rec, cut, context)
        if (len(wave) != entry["num_samples"]
                or sec_to_samples(head_s, rate) != sec_to_samples(entry["head_ext"], rate)
                or sec_to_samples(tail_s, rate) != sec_to_samples(entry["tail_ext"], rate)):
            raise ValidationError(
                f"provenance mismatch for {record['utterance_id']!r}: "
                f"unit {' '.join(entry['tokens'])!r} re-extracts differently"
            )
        extracted.append(wave)
    mixed: Waveform | None = None
    raw_rms: list[float] = []
    for entry, wave in zip(record["provenance"], extracted):
        seg_rms = rms(wave.samples)
        raw_rms.append(seg_rms)
        equalized = Waveform(wave.samples / seg_rms, rate)
        if mixed is None:
            mixed = equalized
        else:
            mixed = overlap_add(mixed, equalized, spec,
                                overlap_samples=int(entry["joint_overlap"]))
    target = 1.0 if record["level"] == "unit_rms" else float(np.mean(raw_rms))
    leveled = rescale(mixed, target)
    samples, limited = limit_peak(leveled.samples)
    if limited != bool(record["peak_limited"]):
        raise ValidationError(
            f"provenance mismatch for {record['utterance_id']!r}: peak_limited flag differs"
        )
    return Waveform(samples, rate)
