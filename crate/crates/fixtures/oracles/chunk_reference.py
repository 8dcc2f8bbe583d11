#!/usr/bin/env python3
"""Reference chunker for the chunking fixture.

Writes assets/chunking/document.md, a 10,000-character ASCII document with
paragraphs, sentences and a long run without any break point, and
assets/chunking/expected.json with the chunk boundaries for max_chars=1000
and overlap_chars=100.

Cut rule: a window covers [start, start + max). If it reaches the end of the
text, the chunk ends there. Otherwise the chunk ends after the last blank
line in the window. If there is none, it ends after the last sentence
terminator that is followed by whitespace. If there is none of those either,
it ends at the window end. The cut must leave more than the overlap behind.
The next window starts overlap characters before the cut.

    python3 crates/fixtures/oracles/chunk_reference.py
"""
import json
import random
import re
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "assets/chunking"
MAX, OVERLAP, LENGTH = 1000, 100, 10_000
rng = random.Random(1000)

WORDS = ("kernel device global scope property module pass lowering buffer queue "
         "accessor range offset value compile target backend image").split()


def sentence():
    words = [rng.choice(WORDS) for _ in range(rng.randrange(6, 18))]
    return " ".join(words).capitalize() + rng.choice([".", ".", ".", "!", "?"])


def paragraph():
    return " ".join(sentence() for _ in range(rng.randrange(2, 7)))


parts = []
total = 0
while total < LENGTH:
    if len(parts) == 6:
        # A long stretch with no blank line and no terminator.
        block = "_".join(rng.choice(WORDS) for _ in range(400))
    else:
        block = paragraph()
    parts.append(block)
    total += len(block) + 2
text = "\n\n".join(parts)[:LENGTH]
assert len(text) == LENGTH and text.isascii()


def chunks(text):
    out = []
    start = 0
    while True:
        end = min(start + MAX, len(text))
        if end == len(text):
            cut = end
        else:
            lowest = start + OVERLAP + 1
            idx = text.rfind("\n\n", max(0, lowest - 2), end)
            if idx != -1:
                cut = idx + 2
            else:
                hits = [m.start() + 1 for m in re.finditer(r"[.!?](?=\s)", text[lowest - 1:end + 1])]
                cut = lowest - 1 + hits[-1] if hits else end
        out.append([start, cut])
        if cut == len(text):
            return out
        start = cut - OVERLAP


bounds = chunks(text)
OUT.mkdir(parents=True, exist_ok=True)
(OUT / "document.md").write_text(text)
(OUT / "expected.json").write_text(json.dumps(
    {"max_chars": MAX, "overlap_chars": OVERLAP, "length": LENGTH, "chunks": bounds}, indent=1) + "\n")
print(len(bounds), "chunks", bounds)
