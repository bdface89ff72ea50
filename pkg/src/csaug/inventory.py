"""N-gram unit index over aligned tokens and longest-match text segmentation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import SupervisionSet
from .errors import ManifestError, OovError
from .metrics import classify_token, tokenize_mixed

UnitKey = tuple


@dataclass(frozen=True)
class CutRef:
    """A candidate audio span realizing one unit key."""

    recording_id: str
    channel: int
    start: float
    end: float
    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("a cut must cover at least one token")
        if not self.end > self.start:
            raise ValueError(f"cut [{self.start}, {self.end}] has no extent")


@dataclass
class Inventory:
    """Map from token n-grams (up to n_max) to the cuts that realize them."""

    n_max: int
    gap_tolerance: float
    entries: dict[tuple[str, ...], list[CutRef]] = field(default_factory=dict)

    def __contains__(self, key) -> bool:
        return tuple(key) in self.entries

    def cuts(self, key) -> list[CutRef]:
        return self.entries[tuple(key)]

    @property
    def total_cuts(self) -> int:
        return sum(len(c) for c in self.entries.values())


def build_inventory(sset: SupervisionSet, n: int, gap_tolerance: float = 0.2) -> Inventory:
    """Index every contiguous k-gram (1 <= k <= n) whose internal gaps fit.

    A k-gram qualifies when each gap between consecutive tokens is at most
    gap_tolerance seconds; its cut spans first-token start to last-token end.
    All sub-grams are indexed so the matcher can always back off to unigrams.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if gap_tolerance < 0:
        raise ValueError(f"gap_tolerance must be >= 0, got {gap_tolerance}")
    inv = Inventory(n, gap_tolerance, {})
    for (rec_id, channel), toks in sset.tokens.items():
        count = len(toks)
        for i in range(count):
            key_tokens = [toks[i].token]
            for k in range(1, n + 1):
                j = i + k - 1
                if j >= count:
                    break
                if k > 1:
                    gap = toks[j].start - toks[j - 1].end
                    if gap > gap_tolerance:
                        break
                    key_tokens.append(toks[j].token)
                key = tuple(key_tokens)
                inv.entries.setdefault(key, []).append(
                    CutRef(rec_id, channel, toks[i].start, toks[j].end, key)
                )
    return inv


def get_consec_units(tokens: Sequence[str], inv: Inventory,
                     utterance_id: str | None = None) -> list[tuple[str, ...]]:
    """Greedy left-to-right longest-match segmentation into inventory keys.

    Raises OovError listing every token with no unigram entry; otherwise the
    emitted keys concatenate exactly to the input tokens.
    """
    toks = list(tokens)
    missing = {t for t in toks if (t,) not in inv.entries}
    if missing:
        raise OovError(missing, utterance_id)
    out: list[tuple[str, ...]] = []
    i = 0
    total = len(toks)
    while i < total:
        for k in range(min(inv.n_max, total - i), 0, -1):
            key = tuple(toks[i:i + k])
            if key in inv.entries:
                out.append(key)
                i += k
                break
    return out


def sample_unit(inv: Inventory, key, rng) -> CutRef:
    """Uniform draw over a key's cuts, consuming exactly one rng draw."""
    cuts = inv.entries.get(tuple(key))
    if cuts is None:
        raise KeyError(f"unit {tuple(key)!r} is not in the inventory")
    return cuts[int(rng.integers(len(cuts)))]


_HEADER_RE = re.compile(r"^# n_max=(\S+) gap_tolerance=(\S+)$")


def dump_inventory(inv: Inventory, path) -> None:
    """Write the inventory as TSV: tokens, recording_id, channel, start, end.

    Key tokens are space-joined in the first column; floats keep full
    round-trip precision. Line order is the construction order, which the
    loader preserves so sampling stays deterministic across dump/load.
    """
    with open(path, "w", encoding="utf-8") as stream:
        stream.write("# csaug inventory v1\n")
        stream.write(f"# n_max={inv.n_max} gap_tolerance={inv.gap_tolerance!r}\n")
        stream.write("# fields: tokens\trecording_id\tchannel\tstart\tend\n")
        for key, cuts in inv.entries.items():
            for cut in cuts:
                stream.write(
                    f"{' '.join(key)}\t{cut.recording_id}\t{cut.channel}"
                    f"\t{cut.start!r}\t{cut.end!r}\n"
                )


def load_inventory(path) -> Inventory:
    """Read an inventory dump written by dump_inventory."""
    n_max: int | None = None
    gap_tolerance: float | None = None
    entries: dict[tuple[str, ...], list[CutRef]] = {}
    with open(path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                match = _HEADER_RE.match(line.strip())
                if match:
                    try:
                        n_max = int(match.group(1))
                        gap_tolerance = float(match.group(2))
                    except ValueError:
                        raise ManifestError(f"{path}:{lineno}: bad header values") from None
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ManifestError(f"{path}:{lineno}: expected 5 tab-separated fields")
            tokens = tuple(parts[0].split(" "))
            try:
                channel = int(parts[2])
                start = float(parts[3])
                end = float(parts[4])
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: bad numeric field") from None
            entries.setdefault(tokens, []).append(
                CutRef(parts[1], channel, start, end, tokens)
            )
    if n_max is None or gap_tolerance is None:
        raise ManifestError(f"{path}: missing '# n_max=... gap_tolerance=...' header")
    return Inventory(n_max, gap_tolerance, entries)


@dataclass(frozen=True)
class CSUtterance:
    """One code-switched sentence: id, tokens, and per-token language tags."""

    utterance_id: str
    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        if not self.tokens:
            raise ValueError(f"utterance {self.utterance_id!r} has no tokens")
        if len(self.tokens) != len(self.tags):
            raise ValueError(f"utterance {self.utterance_id!r}: token/tag length mismatch")


@dataclass(frozen=True)
class CSText:
    """An ordered collection of code-switched utterances."""

    utterances: tuple[CSUtterance, ...]

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)


def load_cs_text(path) -> CSText:
    """Read utterance_id<TAB>text lines; tokens are mixed-tokenized and tagged by script."""
    utterances: list[CSUtterance] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as stream:
        for lineno, raw in enumerate(stream, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ManifestError(f"{path}:{lineno}: expected utterance_id<TAB>text")
            uid, text = line.split("\t", 1)
            uid = uid.strip()
            if not uid:
                raise ManifestError(f"{path}:{lineno}: empty utterance id")
            if uid in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate utterance id {uid!r}")
            seen.add(uid)
            tokens = tuple(tokenize_mixed(text))
            if not tokens:
                raise ManifestError(f"{path}:{lineno}: utterance {uid!r} has no tokens")
            tags = tuple(classify_token(t) for t in tokens)
            utterances.append(CSUtterance(uid, tokens, tags))
    return CSText(tuple(utterances))


def write_cs_text(cs_text: CSText, path) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        for utt in cs_text:
            stream.write(f"{utt.utterance_id}\t{' '.join(utt.tokens)}\n")
