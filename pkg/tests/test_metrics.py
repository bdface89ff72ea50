"""Tests for language tagging, code-mixing index, and error rates."""

import numpy as np
import pytest

from csaug.errors import ManifestError
from csaug.metrics import (
    ARABIC,
    ENGLISH,
    MANDARIN,
    OTHER,
    FilteredCmi,
    TaggedUtterance,
    classify_token,
    cmi,
    corpus_cmi,
    error_rate,
    filtered_corpus_cmi,
    load_transcripts,
    tag_tokens,
    tokenize_mixed,
)
from oracles import edit_distance_s_mask


class TestClassifyToken:
    def test_basic_scripts(self):
        assert classify_token("hello") == ENGLISH
        assert classify_token("你") == MANDARIN
        assert classify_token("好") == MANDARIN
        assert classify_token("مرحبا") == ARABIC
        assert classify_token("123") == OTHER
        assert classify_token("?!") == OTHER

    def test_first_decisive_letter_wins(self):
        assert classify_token("abc你") == ENGLISH
        assert classify_token("你abc") == MANDARIN
        assert classify_token("ب-abc") == ARABIC

    def test_indecisive_characters_are_skipped(self):
        assert classify_token("123你") == MANDARIN
        assert classify_token("--ok") == ENGLISH
        assert classify_token("'好'") == MANDARIN

    def test_empty_token_rejected(self):
        with pytest.raises(ValueError):
            classify_token("")

    def test_accented_latin_is_english(self):
        assert classify_token("café") == ENGLISH
        assert classify_token("naïve") == ENGLISH


class TestTokenizeMixed:
    def test_spec_examples(self):
        assert tokenize_mixed("我 like 你") == ["我", "like", "你"]
        assert tokenize_mixed("你好world") == ["你", "好", "world"]
        assert tokenize_mixed("") == []

    def test_whitespace_only(self):
        assert tokenize_mixed("   \t\n ") == []

    def test_latin_run_between_ideographs(self):
        assert tokenize_mixed("a你b") == ["a", "你", "b"]
        assert tokenize_mixed("你ab好cd") == ["你", "ab", "好", "cd"]

    def test_numbers_and_punctuation_stay_with_their_run(self):
        assert tokenize_mixed("it's 42 你") == ["it's", "42", "你"]

    def test_idempotent_on_own_output(self):
        rng = np.random.default_rng(2024)
        pieces = ["hello", "world", "你", "好", "ok,", "42", "مرحبا"]
        for _ in range(200):
            k = int(rng.integers(0, 8))
            text = "".join(
                str(pieces[int(rng.integers(len(pieces)))])
                + (" " if rng.random() < 0.5 else "")
                for _ in range(k)
            )
            first = tokenize_mixed(text)
            again = tokenize_mixed(" ".join(first))
            assert again == first


class TestTaggedUtterance:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            TaggedUtterance(("a", "b"), ("en",))

    def test_tag_tokens_classifies(self):
        utt = tag_tokens(["hello", "你", "42"])
        assert utt.tokens == ("hello", "你", "42")
        assert utt.tags == (ENGLISH, MANDARIN, OTHER)


class TestCmi:
    def test_monolingual_is_zero(self):
        assert cmi(["en"] * 5) == 0.0
        assert cmi(["zh"]) == 0.0

    def test_worked_examples(self):
        np.testing.assert_allclose(cmi(["en", "zh", "en"]), 50.0)
        np.testing.assert_allclose(cmi(["en", "zh"]), 50.0)

    def test_all_other_is_undefined(self):
        assert cmi([OTHER, OTHER]) is None

    def test_other_tokens_are_transparent(self):
        with_other = cmi(["en", OTHER, "zh"])
        without = cmi(["en", "zh"])
        np.testing.assert_allclose(with_other, without)

    def test_accepts_tagged_utterance(self):
        utt = TaggedUtterance(("hi", "你"), ("en", "zh"))
        np.testing.assert_allclose(cmi(utt), cmi(["en", "zh"]))

    def test_bounded_strictly_below_100(self):
        rng = np.random.default_rng(7)
        langs = np.array(["en", "zh"])
        for _ in range(500):
            n = int(rng.integers(1, 30))
            tags = list(langs[rng.integers(0, 2, size=n)])
            value = cmi(tags)
            bound = 100.0 * (0.5 + 0.5 * (n - 1) / n)
            assert 0.0 <= value <= bound + 1e-12
            assert value < 100.0

    def test_swap_symmetry(self):
        rng = np.random.default_rng(11)
        langs = np.array(["en", "zh"])
        swap = {"en": "zh", "zh": "en"}
        for _ in range(500):
            n = int(rng.integers(1, 25))
            tags = list(langs[rng.integers(0, 2, size=n)])
            swapped = [swap[t] for t in tags]
            np.testing.assert_allclose(cmi(swapped), cmi(tags))

    def test_direct_formula_agreement(self):
        rng = np.random.default_rng(13)
        langs = np.array(["en", "zh", "ar"])
        for _ in range(300):
            n = int(rng.integers(1, 20))
            tags = [str(t) for t in langs[rng.integers(0, 3, size=n)]]
            counts = {t: tags.count(t) for t in set(tags)}
            max_i = max(counts.values())
            p = sum(1 for a, b in zip(tags, tags[1:]) if a != b)
            expected = 100.0 * (0.5 * (n - max_i) + 0.5 * p) / n
            np.testing.assert_allclose(cmi(tags), expected)


class TestCorpusCmi:
    def test_mean_over_defined_values(self):
        utts = [["en", "zh"], ["en", "en"], [OTHER]]
        np.testing.assert_allclose(corpus_cmi(utts), (50.0 + 0.0) / 2)

    def test_all_undefined_gives_none(self):
        assert corpus_cmi([[OTHER], [OTHER, OTHER]]) is None
        assert corpus_cmi([]) is None


class TestErrorRate:
    def test_identical_sequences(self):
        res = error_rate(["a", "b", "c"], ["a", "b", "c"])
        assert (res.substitutions, res.deletions, res.insertions) == (0, 0, 0)
        assert res.rate == 0.0

    def test_single_substitution(self):
        res = error_rate(["a", "b", "c"], ["a", "x", "c"])
        assert (res.substitutions, res.deletions, res.insertions) == (1, 0, 0)
        np.testing.assert_allclose(res.rate, 1 / 3)

    def test_pure_deletion_and_insertion(self):
        res = error_rate(["a", "b", "c"], ["a", "c"])
        assert (res.substitutions, res.deletions, res.insertions) == (0, 1, 0)
        res = error_rate(["a", "c"], ["a", "b", "c"])
        assert (res.substitutions, res.deletions, res.insertions) == (0, 0, 1)

    def test_empty_hypothesis(self):
        res = error_rate(["a", "b"], [])
        assert (res.substitutions, res.deletions, res.insertions) == (0, 2, 0)
        assert res.rate == 1.0

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            error_rate([], ["a"])

    def test_tiebreak_prefers_substitutions(self):
        # swap: two substitutions beat one deletion plus one insertion
        res = error_rate(["a", "b"], ["b", "a"])
        assert (res.substitutions, res.deletions, res.insertions) == (2, 0, 0)

    def test_rotation_has_no_substitution_option(self):
        # rotating [a,b,c] to [c,a,b]: the only 2-edit paths delete and insert
        res = error_rate(["a", "b", "c"], ["c", "a", "b"])
        assert (res.substitutions, res.deletions, res.insertions) == (0, 1, 1)

    def test_counts_identity(self):
        rng = np.random.default_rng(99)
        vocab = np.array(["a", "b", "c"])
        for _ in range(200):
            ref = [str(t) for t in vocab[rng.integers(0, 3, size=int(rng.integers(1, 9)))]]
            hyp = [str(t) for t in vocab[rng.integers(0, 3, size=int(rng.integers(0, 9)))]]
            res = error_rate(ref, hyp)
            assert res.deletions - res.insertions == len(ref) - len(hyp)
            assert res.errors == res.substitutions + res.deletions + res.insertions

    def test_matches_set_dp_oracle(self):
        rng = np.random.default_rng(4321)
        vocab = np.array(["a", "b", "c"])
        for _ in range(1000):
            ref = [str(t) for t in vocab[rng.integers(0, 3, size=int(rng.integers(1, 9)))]]
            hyp = [str(t) for t in vocab[rng.integers(0, 3, size=int(rng.integers(0, 9)))]]
            res = error_rate(ref, hyp)
            dist, mask = edit_distance_s_mask(ref, hyp)
            assert res.errors == dist
            assert res.substitutions == mask.bit_length() - 1

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(17)
        vocab = ["a", "b", "c", "d"]
        relabel = {"a": "w", "b": "x", "c": "y", "d": "z"}
        for _ in range(200):
            ref = [vocab[int(i)] for i in rng.integers(0, 4, size=int(rng.integers(1, 8)))]
            hyp = [vocab[int(i)] for i in rng.integers(0, 4, size=int(rng.integers(0, 8)))]
            direct = error_rate(ref, hyp)
            mapped = error_rate([relabel[t] for t in ref], [relabel[t] for t in hyp])
            assert direct == mapped

    def test_self_rate_is_zero(self):
        rng = np.random.default_rng(23)
        vocab = np.array(["a", "b", "c"])
        for _ in range(100):
            ref = [str(t) for t in vocab[rng.integers(0, 3, size=int(rng.integers(1, 10)))]]
            assert error_rate(ref, ref).errors == 0


class TestLoadTranscripts:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "refs.tsv"
        path.write_text("utt-1\thello 你\n\nutt-2\tworld\n", encoding="utf-8")
        table = load_transcripts(path)
        assert table == {"utt-1": "hello 你", "utt-2": "world"}
        assert list(table) == ["utt-1", "utt-2"]

    def test_missing_tab_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("utt-1 hello\n", encoding="utf-8")
        with pytest.raises(ManifestError):
            load_transcripts(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "dup.tsv"
        path.write_text("utt-1\ta\nutt-1\tb\n", encoding="utf-8")
        with pytest.raises(ManifestError):
            load_transcripts(path)

    def test_empty_id_rejected(self, tmp_path):
        path = tmp_path / "noid.tsv"
        path.write_text("\thello\n", encoding="utf-8")
        with pytest.raises(ManifestError):
            load_transcripts(path)

    def test_text_may_contain_tabs(self, tmp_path):
        path = tmp_path / "tabs.tsv"
        path.write_text("utt-1\ta\tb\n", encoding="utf-8")
        assert load_transcripts(path) == {"utt-1": "a\tb"}


class TestFilteredCorpusCmi:
    def test_identical_hyps_keep_everything(self):
        refs = {"u1": "hello 你", "u2": "你 好 world", "u3": "all english here"}
        result = filtered_corpus_cmi(refs, dict(refs))
        expected = corpus_cmi(
            tag_tokens(tokenize_mixed(t)) for t in refs.values()
        )
        assert result.retained == 3
        assert result.total == 3
        np.testing.assert_allclose(result.cmi, expected)

    def test_threshold_zero_keeps_exact_matches_only(self):
        refs = {"u1": "hello 你", "u2": "good day"}
        hyps = {"u1": "hello 你", "u2": "good night"}
        result = filtered_corpus_cmi(refs, hyps, threshold=0.0)
        assert result.retained == 1
        assert result.total == 2

    def test_nothing_retained(self):
        refs = {"u1": "a b c d e"}
        hyps = {"u1": "v w x y z"}
        result = filtered_corpus_cmi(refs, hyps, threshold=0.2)
        assert result == FilteredCmi(None, 0, 1)

    def test_missing_hypothesis_rejected(self):
        with pytest.raises(ManifestError):
            filtered_corpus_cmi({"u1": "a", "u2": "b"}, {"u1": "a"})

    def test_extra_hypotheses_ignored(self):
        refs = {"u1": "hello there"}
        hyps = {"u1": "hello there", "u9": "spare"}
        assert filtered_corpus_cmi(refs, hyps).retained == 1

    def test_empty_reference_rejected(self):
        with pytest.raises(ManifestError):
            filtered_corpus_cmi({"u1": "   "}, {"u1": "x"})

    def test_filter_uses_mixed_tokenization(self):
        # one wrong character out of five Mandarin characters is a 20% MER,
        # inside the default threshold; two wrong is 40%, outside it
        refs = {"u1": "你好天晴很"}
        hyps_close = {"u1": "你好天晴天"}
        hyps_far = {"u1": "你好天天天"}
        assert filtered_corpus_cmi(refs, hyps_close).retained == 1
        assert filtered_corpus_cmi(refs, hyps_far).retained == 0
