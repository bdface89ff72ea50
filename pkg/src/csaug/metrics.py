"""Language tagging, code-mixing index, and edit-distance error rates."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ManifestError

ENGLISH = "en"
MANDARIN = "zh"
ARABIC = "ar"
OTHER = "other"

_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2FA1F),
)
_ARABIC_RANGES = (
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0x08A0, 0x08FF),
    (0xFB50, 0xFDFF),
    (0xFE70, 0xFEFF),
)


def _in_ranges(ch: str, ranges) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in ranges)


def _is_cjk(ch: str) -> bool:
    return _in_ranges(ch, _CJK_RANGES)


def _is_arabic(ch: str) -> bool:
    return _in_ranges(ch, _ARABIC_RANGES)


def _is_latin(ch: str) -> bool:
    # Basic Latin through Latin Extended-B, plus Latin Extended Additional.
    code = ord(ch)
    return ch.isalpha() and (code < 0x0370 or 0x1E00 <= code <= 0x1EFF)


def classify_token(token: str) -> str:
    """Tag a token by script: the first decisive letter wins.

    CJK ideographs map to Mandarin, Arabic-block letters to Arabic, Latin
    letters to English. Digits, punctuation, and letters of other scripts
    are not decisive; a token with no decisive letter is OTHER.
    """
    if not token:
        raise ValueError("cannot classify an empty token")
    for ch in token:
        if _is_cjk(ch):
            return MANDARIN
        if _is_arabic(ch):
            return ARABIC
        if _is_latin(ch):
            return ENGLISH
    return OTHER


def tokenize_mixed(text: str) -> list[str]:
    """Split text into CJK single-character tokens and whitespace-bounded words.

    Inside each whitespace chunk, every CJK codepoint becomes its own token
    and each maximal non-CJK run stays together, preserving order.
    """
    tokens: list[str] = []
    for chunk in text.split():
        run: list[str] = []
        for ch in chunk:
            if _is_cjk(ch):
                if run:
                    tokens.append("".join(run))
                    run = []
                tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    return tokens


@dataclass(frozen=True)
class TaggedUtterance:
    """Parallel token and language-tag sequences."""

    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"{len(self.tokens)} tokens vs {len(self.tags)} tags"
            )


def tag_tokens(tokens: Iterable[str]) -> TaggedUtterance:
    toks = tuple(tokens)
    return TaggedUtterance(toks, tuple(classify_token(t) for t in toks))


def cmi(utt: TaggedUtterance | Sequence[str], other_tag: str = OTHER) -> float | None:
    """Code-mixing index on a 0..100 scale; None when no language tokens remain.

    With N counted tokens, max_i the dominant-language count, and P the number
    of adjacent tag changes after dropping OTHER tokens:
    100 * (0.5 * (N - max_i) + 0.5 * P) / N. Monolingual input gives 0.
    """
    tags = utt.tags if isinstance(utt, TaggedUtterance) else tuple(utt)
    counted = [t for t in tags if t != other_tag]
    n = len(counted)
    if n == 0:
        return None
    max_i = max(Counter(counted).values())
    p = sum(1 for a, b in zip(counted, counted[1:]) if a != b)
    return 100.0 * (0.5 * (n - max_i) + 0.5 * p) / n


def corpus_cmi(utterances: Iterable[TaggedUtterance | Sequence[str]],
               other_tag: str = OTHER) -> float | None:
    """Mean CMI over utterances that have a defined CMI; None if none do."""
    values = [v for u in utterances if (v := cmi(u, other_tag)) is not None]
    if not values:
        return None
    return sum(values) / len(values)


@dataclass(frozen=True)
class ErrorRateResult:
    substitutions: int
    deletions: int
    insertions: int
    reference_length: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        return self.errors / self.reference_length


def error_rate(ref: Sequence, hyp: Sequence) -> ErrorRateResult:
    """Levenshtein error counts from a minimal-cost alignment.

    Tie-break among minimal paths: prefer substitution over insertion over
    deletion. Since deletions minus insertions is fixed by the lengths, that
    preference is equivalent to maximizing substitutions, which the DP below
    tracks alongside the distance.
    """
    ref = list(ref)
    hyp = list(hyp)
    if not ref:
        raise ValueError("error rate is undefined for an empty reference")
    m = len(hyp)
    prev_d = list(range(m + 1))
    prev_s = [0] * (m + 1)
    for rtok in ref:
        cur_d = [prev_d[0] + 1] + [0] * m
        cur_s = [0] * (m + 1)
        for j in range(1, m + 1):
            sub_cost = 0 if rtok == hyp[j - 1] else 1
            diag = prev_d[j - 1] + sub_cost
            up = prev_d[j] + 1
            left = cur_d[j - 1] + 1
            d = diag
            if up < d:
                d = up
            if left < d:
                d = left
            best_s = -1
            if diag == d:
                best_s = prev_s[j - 1] + sub_cost
            if up == d and prev_s[j] > best_s:
                best_s = prev_s[j]
            if left == d and cur_s[j - 1] > best_s:
                best_s = cur_s[j - 1]
            cur_d[j] = d
            cur_s[j] = best_s
        prev_d, prev_s = cur_d, cur_s
    dist = prev_d[m]
    subs = prev_s[m]
    delta = len(ref) - m
    dels = (dist - subs + delta) // 2
    ins = (dist - subs - delta) // 2
    return ErrorRateResult(subs, dels, ins, len(ref))


def load_transcripts(path) -> dict[str, str]:
    """Read utterance_id<TAB>text lines into an ordered id -> text mapping."""
    out: dict[str, str] = {}
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
            if uid in out:
                raise ManifestError(f"{path}:{lineno}: duplicate utterance id {uid!r}")
            out[uid] = text.strip()
    return out


@dataclass(frozen=True)
class FilteredCmi:
    cmi: float | None
    retained: int
    total: int


def filtered_corpus_cmi(refs: Mapping[str, str], hyps: Mapping[str, str],
                        threshold: float = 0.20) -> FilteredCmi:
    """Mean hypothesis CMI over pairs whose mixed error rate is <= threshold.

    refs and hyps are id -> text mappings covering the same ids. An empty
    retained set yields cmi=None with retained=0.
    """
    missing = sorted(set(refs) - set(hyps))
    if missing:
        raise ManifestError(f"hypotheses missing for ids: {missing[:5]}")
    retained_cmis: list[float] = []
    retained = 0
    for uid, ref_text in refs.items():
        ref_toks = tokenize_mixed(ref_text)
        if not ref_toks:
            raise ManifestError(f"utterance {uid!r}: empty reference text")
        hyp_toks = tokenize_mixed(hyps[uid])
        if error_rate(ref_toks, hyp_toks).rate > threshold:
            continue
        retained += 1
        value = cmi(tag_tokens(hyp_toks))
        if value is not None:
            retained_cmis.append(value)
    mean = sum(retained_cmis) / len(retained_cmis) if retained_cmis else None
    return FilteredCmi(mean, retained, len(refs))
