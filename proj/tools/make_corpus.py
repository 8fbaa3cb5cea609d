#!/usr/bin/env python3
# Copyright 2026 The FedShield Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates data/corpus.txt, the bundled chat-style corpus.

The text is produced by a small seeded template grammar so the repository
stays self-contained. Word choice inside each slot is Zipf-weighted, which
gives the vocabulary a long tail and a realistic out-of-vocabulary rate once
the model vocabulary is truncated.
"""

import argparse
import random

SLOTS = {
    "name": "anna ben carlos dana eli fatima george hana ivan julia kofi lena "
            "mateo nora omar priya quinn rosa sam tara".split(),
    "noun": "game movie party dinner meeting book song class trip car phone "
            "coffee pizza report project photo ticket gift show lunch".split(),
    "place": "park office store beach gym school library station mall cafe "
             "airport market museum hospital stadium".split(),
    "time": "today tonight tomorrow later soon now again early "
            "this_weekend next_week".split(),
    "adj": "great good fun late busy tired happy awesome nice funny cold "
           "long short new perfect".split(),
    "verb": "see call meet watch get bring send finish read play find "
            "check try make".split(),
    "verb_past": "saw called met watched got brought sent finished read "
                 "played found checked tried made".split(),
    "feel": "love like hate miss need".split(),
}

TEMPLATES = [
    ("see you {time}", 6),
    ("thank you so much", 5),
    ("how are you {time}", 4),
    ("i am on my way", 4),
    ("i will be there {time}", 4),
    ("can you {verb} me {time}", 4),
    ("do you want to {verb} the {noun} {time}", 5),
    ("let's go to the {place} {time}", 5),
    ("i {verb_past} the {noun} at the {place}", 4),
    ("the {noun} was so {adj}", 5),
    ("the {noun} is {adj}", 3),
    ("{name} is at the {place}", 3),
    ("{name} {verb_past} the {noun} {time}", 3),
    ("i {feel} the {noun}", 3),
    ("i {feel} you", 3),
    ("what time is the {noun}", 3),
    ("are you coming to the {noun} {time}", 3),
    ("sorry i am {adj}", 2),
    ("did you {verb} the {noun}", 3),
    ("i need to {verb} the {noun} {time}", 3),
    ("we should {verb} {name} at the {place}", 2),
    ("happy birthday {name}", 2),
    ("good morning {name}", 2),
    ("good night", 2),
    ("call me when you get to the {place}", 2),
    ("that sounds {adj}", 3),
    ("ok see you at the {place}", 3),
    ("no problem", 2),
]


def zipf_choice(rng, words, s=1.1):
    weights = [1.0 / (rank + 1) ** s for rank in range(len(words))]
    return rng.choices(words, weights=weights, k=1)[0]


def sentence(rng):
    template = rng.choices([t for t, _ in TEMPLATES],
                           weights=[w for _, w in TEMPLATES], k=1)[0]
    out = []
    for piece in template.split():
        if piece.startswith("{") and piece.endswith("}"):
            out.append(zipf_choice(rng, SLOTS[piece[1:-1]]))
        else:
            out.append(piece)
    return " ".join(out)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=20230601)
    parser.add_argument("--tokens", type=int, default=100000)
    parser.add_argument("--out", default="data/corpus.txt")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    lines, total = [], 0
    while total < args.tokens:
        line = sentence(rng)
        lines.append(line)
        total += len(line.split())
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} lines, {total} tokens to {args.out}")


if __name__ == "__main__":
    main()
