#!/usr/bin/env python3
"""Rebuild the bundled wordlist and text corpus under data/.

Inputs are the unpacked npm tarballs of `wordlist-english` (SCOWL) and
`@stdlib/datasets-sotu` (US State of the Union addresses, public domain).

    npm pack wordlist-english @stdlib/datasets-sotu
    python3 tools/prepare_data.py --scowl DIR --sotu DIR --out data
"""
import argparse
import glob
import json
import os
import re

SCOWL_LEVELS = (10, 20, 35, 40, 50)
FIRST_YEAR = 1934
HELDOUT_EVERY = 20
DEMO_SIZE = 50


def build_wordlist(scowl_dir):
    words = set()
    for dialect in ("english", "american"):
        for level in SCOWL_LEVELS:
            path = os.path.join(scowl_dir, f"{dialect}-words-{level}.json")
            with open(path, encoding="utf-8") as f:
                words.update(w for w in json.load(f) if re.fullmatch(r"[a-z]+", w))
    return sorted(words)


def build_sentences(sotu_dir):
    sentences = []
    for path in sorted(glob.glob(os.path.join(sotu_dir, "*.txt"))):
        if int(os.path.basename(path)[:4]) < FIRST_YEAR:
            continue
        with open(path, encoding="utf-8", errors="ignore") as f:
            text = f.read()
        for chunk in re.split(r"(?<=[.!?;:])\s+", text):
            tokens = re.findall(r"[a-z]+", chunk.lower().replace("'", ""))
            if len(tokens) >= 2:
                sentences.append(" ".join(tokens))
    return sentences


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scowl", required=True)
    ap.add_argument("--sotu", required=True)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()

    words = build_wordlist(args.scowl)
    with open(os.path.join(args.out, "lexicon", "scowl_en_50.txt"), "w") as f:
        f.write("\n".join(words) + "\n")

    sentences = build_sentences(args.sotu)
    train = [s for i, s in enumerate(sentences) if i % HELDOUT_EVERY != HELDOUT_EVERY - 1]
    heldout = [s for i, s in enumerate(sentences) if i % HELDOUT_EVERY == HELDOUT_EVERY - 1]
    with open(os.path.join(args.out, "corpus", "sotu_train.txt"), "w") as f:
        f.write("\n".join(train) + "\n")
    with open(os.path.join(args.out, "corpus", "sotu_heldout.txt"), "w") as f:
        f.write("\n".join(heldout) + "\n")
    vocab = set(words)
    demo = [s for s in heldout if 4 <= len(s.split()) <= 10 and all(w in vocab for w in s.split())][:DEMO_SIZE]
    with open(os.path.join(args.out, "demo", "sentences.txt"), "w") as f:
        f.write("\n".join(demo) + "\n")
    print(f"{len(words)} words, {len(train)} train / {len(heldout)} heldout sentences")


if __name__ == "__main__":
    main()
