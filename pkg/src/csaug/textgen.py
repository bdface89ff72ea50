"""Zero-shot code-switched text: random aligned-word replacement in parallel sentences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ManifestError
from .inventory import CSText, CSUtterance

SCOPES = ("aligned_words_only",)


@dataclass(frozen=True)
class ParallelSentence:
    """A source/target sentence pair with word-level alignment pairs."""

    id: str
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    alignment: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        object.__setattr__(self, "target_tokens", tuple(self.target_tokens))
        object.__setattr__(self, "alignment", tuple(tuple(p) for p in self.alignment))
        if not self.source_tokens:
            raise ValueError(f"sentence {self.id!r} has no source tokens")
        for i, j in self.alignment:
            if not (0 <= i < len(self.source_tokens)):
                raise ValueError(f"sentence {self.id!r}: source index {i} out of range")
            if not (0 <= j < len(self.target_tokens)):
                raise ValueError(f"sentence {self.id!r}: target index {j} out of range")


@dataclass(frozen=True)
class ReplacementPolicy:
    rate: float = 0.2
    seed: int = 0
    scope: str = "aligned_words_only"

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"rate must be in [0, 1], got {self.rate}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.scope not in SCOPES:
            raise ConfigError(f"unknown scope {self.scope!r}; expected one of {SCOPES}")


def random_replace(sent: ParallelSentence, policy: ReplacementPolicy, rng,
                   source_lang: str = "source", target_lang: str = "target") -> CSUtterance:
    """Replace aligned source words with their target phrases at policy.rate.

    Each source token with at least one alignment gets one Bernoulli draw (in
    source order). A replaced token emits all its aligned target tokens in
    target order; target indices already emitted earlier in the sentence are
    skipped so overlapping phrases appear once. Unaligned tokens pass through.
    """
    targets_by_source: dict[int, list[int]] = {}
    for i, j in sent.alignment:
        targets_by_source.setdefault(i, []).append(j)
    for targets in targets_by_source.values():
        targets.sort()
    tokens: list[str] = []
    tags: list[str] = []
    emitted: set[int] = set()
    for i, token in enumerate(sent.source_tokens):
        targets = targets_by_source.get(i)
        if targets is not None and rng.random() < policy.rate:
            for j in targets:
                if j in emitted:
                    continue
                emitted.add(j)
                tokens.append(sent.target_tokens[j])
                tags.append(target_lang)
        else:
            tokens.append(token)
            tags.append(source_lang)
    return CSUtterance(sent.id, tuple(tokens), tuple(tags))


def synthesize_corpus(pairs: Sequence[ParallelSentence], policy: ReplacementPolicy,
                      source_lang: str = "source", target_lang: str = "target") -> CSText:
    """Apply random_replace per sentence with an rng keyed by (seed, index)."""
    utterances = []
    for index, sent in enumerate(pairs):
        rng = np.random.default_rng([policy.seed, index])
        utterances.append(random_replace(sent, policy, rng, source_lang, target_lang))
    return CSText(tuple(utterances))


def load_parallel_corpus(text_path, align_path) -> list[ParallelSentence]:
    """Read id<TAB>source<TAB>target records plus Pharaoh `i-j` alignment lines.

    The alignment file must hold exactly one line per text record, in record
    order; an empty line means the sentence has no alignment.
    """
    rows: list[tuple[str, tuple[str, ...], tuple[str, ...]]] = []
    seen: set[str] = set()
    with open(text_path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ManifestError(f"{text_path}:{lineno}: expected id<TAB>source<TAB>target")
            sid = parts[0].strip()
            if not sid:
                raise ManifestError(f"{text_path}:{lineno}: empty sentence id")
            if sid in seen:
                raise ManifestError(f"{text_path}:{lineno}: duplicate sentence id {sid!r}")
            seen.add(sid)
            source = tuple(parts[1].split())
            target = tuple(parts[2].split())
            if not source:
                raise ManifestError(f"{text_path}:{lineno}: sentence {sid!r} has no source tokens")
            rows.append((sid, source, target))
    with open(align_path, encoding="utf-8") as stream:
        align_lines = stream.read().splitlines()
    if len(align_lines) != len(rows):
        raise ManifestError(
            f"{align_path}: {len(align_lines)} alignment lines for {len(rows)} sentences"
        )
    sentences: list[ParallelSentence] = []
    for record, (row, line) in enumerate(zip(rows, align_lines), 1):
        sid, source, target = row
        pairs: set[tuple[int, int]] = set()
        for item in line.split():
            left, sep, right = item.partition("-")
            if not sep:
                raise ManifestError(f"{align_path}:{record}: bad pair {item!r}")
            try:
                i, j = int(left), int(right)
            except ValueError:
                raise ManifestError(f"{align_path}:{record}: bad pair {item!r}") from None
            if not (0 <= i < len(source)) or not (0 <= j < len(target)):
                raise ManifestError(
                    f"{align_path}:{record}: pair {item} out of range for sentence {sid!r}"
                )
            pairs.add((i, j))
        sentences.append(ParallelSentence(sid, source, target, tuple(sorted(pairs))))
    return sentences


def replacement_stats(pairs: Sequence[ParallelSentence], cs_text: CSText,
                      source_lang: str = "source") -> dict:
    """Corpus totals for the replacement run: eligible, replaced, fraction.

    A source token is replaced exactly when it no longer contributes a
    source-tagged output token, so replaced = len(source) - count(source tags).
    """
    if len(pairs) != len(cs_text):
        raise ValueError("pairs and synthesized text differ in length")
    eligible = 0
    replaced = 0
    source_total = 0
    output_total = 0
    for sent, utt in zip(pairs, cs_text):
        eligible += len({i for i, _ in sent.alignment})
        source_total += len(sent.source_tokens)
        output_total += len(utt.tokens)
        replaced += len(sent.source_tokens) - sum(1 for t in utt.tags if t == source_lang)
    return {
        "sentences": len(pairs),
        "source_tokens": source_total,
        "output_tokens": output_total,
        "eligible": eligible,
        "replaced": replaced,
        "replaced_fraction": (replaced / eligible) if eligible else None,
    }
