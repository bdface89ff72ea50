"""Command-line surface binding ingest, inventory, splicing, text, and scoring."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus, generator, metrics, textgen
from . import inventory as inventory_mod
from .dsp import CROSSFADE_MODES, CrossfadeSpec
from .errors import (
    AudioReadError,
    ConfigError,
    CsaugError,
    CtmParseError,
    ManifestError,
    RateMismatchError,
    UnknownRecordingError,
    ValidationError,
)
from .generator import LEVEL_MODES

log = logging.getLogger("csaug")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # usage mistakes exit 1; 2 is reserved for data validation failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(
        prog="csaug",
        description="Synthesize code-switched speech by splicing aligned "
                    "monolingual audio units; synthesize code-switched text; "
                    "score transcripts.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs: dict[str, _Parser] = {}

    def add(name: str, help_text: str) -> _Parser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="key=value config file; explicit flags win")
        subs[name] = sub
        return sub

    sub = add("build-inventory", "index n-gram units from a corpus manifest and CTM alignments")
    sub.add_argument("--corpus", required=True, help="corpus manifest (JSON lines)")
    sub.add_argument("--ctm", required=True, help="CTM alignment file")
    sub.add_argument("-n", "--ngram", type=int, default=2, help="max unit length (default 2)")
    sub.add_argument("--gap-tolerance", type=float, default=0.2,
                     help="max gap inside a multi-token unit, seconds (default 0.2)")
    sub.add_argument("--out", required=True, help="inventory dump path (TSV)")
    sub.set_defaults(func=cmd_build_inventory)

    sub = add("generate", "render code-switched audio for a CS text file")
    sub.add_argument("--corpus", required=True, help="corpus manifest (JSON lines)")
    sub.add_argument("--ctm", help="CTM alignments (build the inventory in-process)")
    sub.add_argument("--inventory", help="inventory dump to reuse instead of --ctm")
    sub.add_argument("--cs-text", required=True, help="utterance_id<TAB>text file to render")
    sub.add_argument("--out-dir", required=True, help="output directory")
    sub.add_argument("--seed", type=int, default=0, help="base seed for all sampling")
    sub.add_argument("-n", "--ngram", type=int, default=2, help="max unit length (default 2)")
    sub.add_argument("--gap-tolerance", type=float, default=0.2,
                     help="max gap inside a multi-token unit, seconds (default 0.2)")
    sub.add_argument("--overlap", type=float, default=0.05,
                     help="crossfade overlap, seconds (default 0.05)")
    sub.add_argument("--context", type=float, default=0.05,
                     help="context extension per side, seconds (default 0.05)")
    sub.add_argument("--crossfade-mode", choices=CROSSFADE_MODES, default="normalized-hamming")
    sub.add_argument("--level", choices=LEVEL_MODES, default="source_mean_rms",
                     help="output leveling target (default source_mean_rms)")
    sub.add_argument("--workers", type=int, default=1, help="rendering threads (default 1)")
    sub.add_argument("--subset-percent", type=float, default=100.0,
                     help="render only the first k%% of utterances (default 100)")
    sub.set_defaults(func=cmd_generate)

    sub = add("synth-text", "synthesize code-switched text from parallel sentences")
    sub.add_argument("--parallel", required=True, help="id<TAB>source<TAB>target sentence file")
    sub.add_argument("--alignments", required=True, help="Pharaoh i-j alignment file")
    sub.add_argument("--rate", type=float, default=0.2, help="replacement probability (default 0.2)")
    sub.add_argument("--seed", type=int, default=0, help="base seed")
    sub.add_argument("--source-lang", default="source", help="tag for source-side tokens")
    sub.add_argument("--target-lang", default="target", help="tag for replacement tokens")
    sub.add_argument("--out", required=True, help="output utterance_id<TAB>text file")
    sub.set_defaults(func=cmd_synth_text)

    sub = add("score", "error rates and code-mixing metrics for transcript pairs")
    sub.add_argument("--ref", required=True, help="reference utterance_id<TAB>text file")
    sub.add_argument("--hyp", required=True, help="hypothesis utterance_id<TAB>text file")
    sub.add_argument("--mode", choices=("wer", "cer", "mer"), default="wer",
                     help="tokenization: words, characters, or mixed (default wer)")
    sub.add_argument("--cmi", action="store_true", help="also report hypothesis corpus CMI")
    sub.add_argument("--filter-threshold", type=float, default=None,
                     help="report CMI over hypotheses with MER <= this threshold")
    sub.add_argument("--out-dir", default=None,
                     help="write per-utterance TSV, summary JSON, and figures here")
    sub.set_defaults(func=cmd_score)

    sub = add("inspect", "print one manifest record and re-render it for verification")
    sub.add_argument("--manifest", required=True, help="manifest.jsonl from a generate run")
    sub.add_argument("--corpus", required=True, help="corpus manifest the run used")
    sub.add_argument("--utterance", required=True, help="utterance id to inspect")
    sub.set_defaults(func=cmd_inspect)

    return parser, subs


def _apply_config_file(sub: _Parser, path: str) -> None:
    """Install key=value file entries as subcommand defaults (flags still win)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from None
    actions = {
        action.dest: action
        for action in sub._actions
        if action.dest not in ("help", "config", "command")
    }
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        action = actions.get(key)
        if action is None:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            lowered = value.lower()
            if lowered in ("1", "true", "yes", "on"):
                parsed = True
            elif lowered in ("0", "false", "no", "off"):
                parsed = False
            else:
                raise ConfigError(f"{path}:{lineno}: boolean expected for {key}, got {value!r}")
        elif action.type is not None:
            try:
                parsed = action.type(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
        else:
            parsed = value
        if action.choices is not None and parsed not in action.choices:
            raise ConfigError(
                f"{path}:{lineno}: {key} must be one of {tuple(action.choices)}, got {parsed!r}"
            )
        overrides[key] = parsed
    sub.set_defaults(**overrides)


def _echo_config(args: argparse.Namespace) -> None:
    effective = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "config")
    }
    log.info("effective config: %s", json.dumps(effective, ensure_ascii=False, default=str))


def _load_and_check_corpus(path) -> dict[str, corpus.Recording]:
    recordings = corpus.load_corpus_manifest(path)
    for rec in recordings.values():
        corpus.probe_recording(rec)
    return recordings


def _parse_and_validate(ctm_path, recordings) -> corpus.SupervisionSet | None:
    """Returns the parsed set, or None (after printing findings) if invalid."""
    with open(ctm_path, encoding="utf-8") as stream:
        sset = corpus.parse_ctm(stream, recordings)
    report = corpus.validate(sset)
    if not report.ok:
        for finding in report.findings:
            print(f"validation [{finding.category}] {finding.message}")
        print(f"validation failed: {len(report.findings)} finding(s)")
        return None
    return sset


def cmd_build_inventory(args) -> int:
    recordings = _load_and_check_corpus(args.corpus)
    sset = _parse_and_validate(args.ctm, recordings)
    if sset is None:
        return EXIT_DATA
    inv = inventory_mod.build_inventory(sset, args.ngram, args.gap_tolerance)
    inventory_mod.dump_inventory(inv, args.out)
    by_length: dict[int, list[int]] = {}
    for key, cuts in inv.entries.items():
        stats = by_length.setdefault(len(key), [0, 0])
        stats[0] += 1
        stats[1] += len(cuts)
    print(f"inventory: {len(inv.entries)} keys, {inv.total_cuts} cuts "
          f"(n_max={inv.n_max}, gap_tolerance={inv.gap_tolerance})")
    for length in range(1, args.ngram + 1):
        keys, cuts = by_length.get(length, (0, 0))
        print(f"  length {length}: {keys} keys, {cuts} cuts")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    recordings = _load_and_check_corpus(args.corpus)
    if args.inventory:
        inv = inventory_mod.load_inventory(args.inventory)
    else:
        if not args.ctm:
            raise ConfigError("generate needs --ctm or --inventory")
        sset = _parse_and_validate(args.ctm, recordings)
        if sset is None:
            return EXIT_DATA
        inv = inventory_mod.build_inventory(sset, args.ngram, args.gap_tolerance)
    cs_text = inventory_mod.load_cs_text(args.cs_text)
    cs_text = generator.subset_cs_text(cs_text, args.subset_percent)
    request = generator.CollageRequest(
        cs_text=cs_text,
        inventory=inv,
        recordings=recordings,
        output_dir=args.out_dir,
        seed=args.seed,
        crossfade=CrossfadeSpec(args.overlap, args.crossfade_mode),
        context=args.context,
        output_level=args.level,
    )
    report = generator.generate_collage(request, workers=args.workers)
    print(f"generated {report.generated_count}/{report.total_utterances} utterances, "
          f"skipped {len(report.skipped)}")
    for skip in report.skipped:
        extra = " ".join(skip.missing_tokens) or skip.detail
        print(f"  skipped {skip.utterance_id}: {skip.reason} ({extra})")
    usage = ", ".join(f"{k}-token: {v}" for k, v in sorted(report.unit_usage.items()))
    print(f"unit usage: {usage if usage else 'none'}")
    print(f"total audio hours: {report.total_audio_hours:.6f}")
    print(f"outputs in {args.out_dir}")
    return EXIT_OK


def cmd_synth_text(args) -> int:
    pairs = textgen.load_parallel_corpus(args.parallel, args.alignments)
    policy = textgen.ReplacementPolicy(rate=args.rate, seed=args.seed)
    cs_text = textgen.synthesize_corpus(pairs, policy, args.source_lang, args.target_lang)
    inventory_mod.write_cs_text(cs_text, args.out)
    stats = textgen.replacement_stats(pairs, cs_text, args.source_lang)
    fraction = stats["replaced_fraction"]
    shown = f"{fraction:.4f}" if fraction is not None else "n/a"
    print(f"sentences: {stats['sentences']}, source tokens: {stats['source_tokens']}, "
          f"output tokens: {stats['output_tokens']}")
    print(f"eligible: {stats['eligible']}, replaced: {stats['replaced']} (fraction {shown})")
    print(f"wrote {args.out}")
    return EXIT_OK


def _tokenizer_for(mode: str):
    if mode == "wer":
        return lambda text: text.split()
    if mode == "cer":
        return lambda text: [ch for ch in text if not ch.isspace()]
    return metrics.tokenize_mixed


def cmd_score(args) -> int:
    refs = metrics.load_transcripts(args.ref)
    hyps = metrics.load_transcripts(args.hyp)
    missing = sorted(set(refs) - set(hyps))
    if missing:
        raise ManifestError(f"hypotheses missing for ids: {missing[:5]}")
    extra = sorted(set(hyps) - set(refs))
    if extra:
        raise ManifestError(f"hypotheses for unknown ids: {extra[:5]}")
    tokenize = _tokenizer_for(args.mode)
    rows: list[tuple[str, metrics.ErrorRateResult]] = []
    for uid, ref_text in refs.items():
        ref_tokens = tokenize(ref_text)
        if not ref_tokens:
            raise ManifestError(f"utterance {uid!r}: empty reference under mode {args.mode}")
        rows.append((uid, metrics.error_rate(ref_tokens, tokenize(hyps[uid]))))
    subs = sum(r.substitutions for _, r in rows)
    dels = sum(r.deletions for _, r in rows)
    ins = sum(r.insertions for _, r in rows)
    total = sum(r.reference_length for _, r in rows)
    rate = (subs + dels + ins) / total
    print(f"{args.mode}: {rate:.4f} (S={subs} D={dels} I={ins} N={total}) "
          f"over {len(rows)} utterances")
    summary: dict = {
        "mode": args.mode, "rate": rate, "substitutions": subs, "deletions": dels,
        "insertions": ins, "reference_tokens": total, "utterances": len(rows),
    }
    cmi_values: list[float] = []
    if args.cmi:
        for uid in refs:
            value = metrics.cmi(metrics.tag_tokens(metrics.tokenize_mixed(hyps[uid])))
            if value is not None:
                cmi_values.append(value)
        corpus_value = sum(cmi_values) / len(cmi_values) if cmi_values else None
        shown = f"{corpus_value:.2f}" if corpus_value is not None else "n/a"
        print(f"corpus CMI (hyp): {shown} over {len(cmi_values)} scored utterances")
        summary["corpus_cmi"] = corpus_value
    if args.filter_threshold is not None:
        filtered = metrics.filtered_corpus_cmi(refs, hyps, args.filter_threshold)
        shown = f"{filtered.cmi:.2f}" if filtered.cmi is not None else "n/a"
        print(f"filtered CMI (MER <= {args.filter_threshold:g}): {shown} "
              f"({filtered.retained}/{filtered.total} retained)")
        summary["filtered_cmi"] = filtered.cmi
        summary["filtered_retained"] = filtered.retained
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "per_utterance.tsv", "w", encoding="utf-8") as stream:
            stream.write("# utterance_id\tsubstitutions\tdeletions\tinsertions\tref_len\trate\n")
            for uid, result in rows:
                stream.write(f"{uid}\t{result.substitutions}\t{result.deletions}"
                             f"\t{result.insertions}\t{result.reference_length}"
                             f"\t{result.rate:.6f}\n")
        with open(out_dir / "summary.json", "w", encoding="utf-8") as stream:
            json.dump(summary, stream, ensure_ascii=False, indent=2)
            stream.write("\n")
        from . import figures  # deferred import keeps plain scoring matplotlib-free

        figures.score_figures([r.rate for _, r in rows], out_dir,
                              cmi_values if args.cmi else None)
        print(f"report in {args.out_dir}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    recordings = _load_and_check_corpus(args.corpus)
    record = None
    with open(args.manifest, encoding="utf-8") as stream:
        for line in stream:
            if not line.strip():
                continue
            candidate = json.loads(line)
            if candidate.get("utterance_id") == args.utterance:
                record = candidate
                break
    if record is None:
        raise ManifestError(f"utterance {args.utterance!r} not found in {args.manifest}")
    print(json.dumps(record, ensure_ascii=False, indent=2))
    rendered = generator.render_from_provenance(record, recordings)
    on_disk = corpus.read_wav(Path(args.manifest).resolve().parent / record["audio"])
    match = (rendered.sample_rate == on_disk.sample_rate
             and np.array_equal(corpus.encode_pcm16(rendered.samples),
                                corpus.encode_pcm16(on_disk.samples)))
    print(f"re-render matches audio: {'yes' if match else 'NO'}")
    return EXIT_OK if match else EXIT_DATA


def main(argv=None) -> int:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    level_name = os.environ.get("CSAUG_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, level_name, None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if getattr(args, "config", None):
            _apply_config_file(subs[args.command], args.config)
            args = parser.parse_args(argv)
        _echo_config(args)
        return args.func(args)
    except ConfigError as err:
        log.error("%s", err)
        return EXIT_USAGE
    except (CtmParseError, ValidationError, ManifestError, RateMismatchError,
            UnknownRecordingError) as err:
        log.error("%s", err)
        return EXIT_DATA
    except AudioReadError as err:
        log.error("%s", err)
        return EXIT_IO
    except OSError as err:
        log.error("%s", err)
        return EXIT_IO
    except CsaugError as err:
        log.error("%s", err)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
