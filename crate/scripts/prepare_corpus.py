#!/usr/bin/env python3
"""Build the bundled desk-scale corpus from public-domain source texts.

usage: prepare_corpus.py BOTCHAN_TXT ALICE_TXT CONSTITUTION_TXT OUT_DIR

Narrative sentences from the two novels are shuffled with a fixed seed and
split into train / in-domain; the Constitution becomes the out-of-domain set.
"""
import random
import re
import sys
from pathlib import Path

START = re.compile(r"\*\*\* ?START OF (THIS|THE) PROJECT GUTENBERG.*?\*\*\*")
END = re.compile(r"(\*\*\* ?END OF (THIS|THE) PROJECT GUTENBERG|End of (the )?Project Gutenberg)")
SENT = re.compile(r"(?<=[.!?])[\"')\]]*\s+(?=[\"'(\[]?[A-Z])")


def body(text):
    m = START.search(text)
    if m:
        text = text[m.end():]
    m = END.search(text)
    if m:
        text = text[: m.start()]
    return text


def paragraphs(text, one_per_line=False):
    if one_per_line:
        # no paragraph breaks survive in this source; treat it as one stream
        return [" ".join(l.strip() for l in text.splitlines() if l.strip())]
    out = []
    for block in re.split(r"\n\s*\n", text):
        p = " ".join(l.strip() for l in block.splitlines() if l.strip())
        if p:
            out.append(p)
    return out


def sentences(paras):
    out = []
    for p in paras:
        p = re.sub(r"\s+", " ", p).strip()
        if "gutenberg" in p.lower():
            continue
        for s in SENT.split(p):
            s = s.strip()
            if len(s.split()) >= 2:
                out.append(s)
    return out


def main():
    botchan, alice, constitution, out_dir = sys.argv[1:5]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    read = lambda p: Path(p).read_text(encoding="utf-8-sig")
    # botchan.txt has lost its blank lines; alice.txt keeps them
    novel = sentences(paragraphs(body(read(botchan)), one_per_line=True))
    novel += sentences(paragraphs(body(read(alice))))
    ood = sentences(paragraphs(read(constitution)))
    rng = random.Random(20201016)
    rng.shuffle(novel)
    n_in = len(novel) // 9
    splits = {
        "train.txt": novel[n_in:],
        "in_domain.txt": novel[:n_in],
        "out_of_domain.txt": ood,
    }
    for name, lines in splits.items():
        (out / name).write_text("".join(l + "\n" for l in lines), encoding="utf-8")
        print(name, len(lines), sum(len(l.split()) for l in lines))


if __name__ == "__main__":
    main()
