#!/usr/bin/env python3
"""Build a small self-contained demo corpus for trying out the csaug CLI.

Writes synthetic tone-word recordings, their CTM alignments, a mixed-language
sentence list, and a parallel corpus with word alignments into the target
directory (default: ./demo_corpus), then prints the commands to run next.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from toydata import build_toy_corpus  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", nargs="?", default="demo_corpus",
                        help="directory to create (default: ./demo_corpus)")
    parser.add_argument("--seed", type=int, default=12345)
    args = parser.parse_args()

    root = Path(args.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    toy = build_toy_corpus(root, seed=args.seed)

    print(f"demo corpus in {root}")
    print(f"  recordings : {len(toy.words)} wav files, {toy.sample_rate} Hz")
    print(f"  alignments : {toy.ctm}")
    print(f"  sentences  : {toy.cs_text} ({len(toy.sentences)} lines)")
    print(f"  parallel   : {toy.parallel_text} + {toy.alignments}")
    print()
    print("try:")
    print(f"  csaug build-inventory --corpus {toy.corpus_manifest} "
          f"--ctm {toy.ctm} --out {root}/inventory.tsv")
    print(f"  csaug generate --corpus {toy.corpus_manifest} --ctm {toy.ctm} "
          f"--cs-text {toy.cs_text} --out-dir {root}/synth")
    print(f"  csaug synth-text --parallel {toy.parallel_text} "
          f"--alignments {toy.alignments} --out {root}/cs_generated.tsv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
