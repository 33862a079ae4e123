# Copyright 2026 The annolex Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Renders the nine benchmark prompt settings into tests/golden/prompts.

The target sentence is fixed and an n-shot prompt uses the first n rows of the
synthetic pool in file order.
"""

import csv
import pathlib

ROOT = pathlib.Path(__file__).resolve().parents[2]
POOL = ROOT / "data" / "pools" / "synthetic_pool.csv"
OUT = ROOT / "tests" / "golden" / "prompts"
TARGET = "The EU has secured up to 400 million doses of AstraZeneca 's experimental vaccine."

PREAMBLE = "You are an expert in media bias."
CLASSIFY = "Classify the sentence above as BIASED or NOT BIASED."
LEAD = "Output: Let's think step by step."
EXPLAIN = "Briefly explain your reasoning before giving the answer."

SETTINGS = [
    ("0-shot", 0, False, False),
    ("0-shot-sys", 0, False, True),
    ("0-shot-exp", 0, True, False),
    ("2-shot", 2, False, False),
    ("4-shot", 4, False, False),
    ("8-shot", 8, False, False),
    ("2-shot-exp", 2, True, False),
    ("4-shot-exp", 4, True, False),
    ("8-shot-exp", 8, True, False),
]


def render(examples, explanations, preamble):
    lines = [PREAMBLE] if preamble else []
    for ex in examples:
        lines.append(f"Instruction: '{ex['text']}'")
        lines.append(CLASSIFY)
        reason = f"{ex['explanation']} " if explanations and ex["explanation"] else ""
        lines.append(f"{LEAD} {reason}The answer is {ex['label']}.")
    lines.append(f"Instruction: '{TARGET}'")
    lines.append(CLASSIFY)
    if explanations and not examples:
        lines.append(EXPLAIN)
    lines.append(LEAD)
    return "\n".join(lines)


def main():
    with open(POOL, newline="") as f:
        pool = list(csv.DictReader(f))
    OUT.mkdir(parents=True, exist_ok=True)
    for name, shots, explanations, preamble in SETTINGS:
        text = render(pool[:shots], explanations, preamble)
        assert text.count(CLASSIFY) == shots + 1
        (OUT / f"{name}.txt").write_bytes(text.encode())


if __name__ == "__main__":
    main()
