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


"""Writes the 200-sentence mock pipeline fixture into tests/fixtures/pipeline.

Five leanings x 5 articles x 8 sentences. Each leaning holds 20 sentences with
gold label BIASED and 20 with NOT BIASED; weak scores agree with gold except for
three swapped pairs per leaning, so every (leaning, weak label) cell has exactly
20 members. Three scripted mock annotators agree with gold such that the
majority vote is wrong on 6 sentences per leaning (85% agreement).
"""

import hashlib
import json
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent / "pipeline"
LEANINGS = [
    ("Left", -25.0),
    ("Lean Left", -10.0),
    ("Center", 0.0),
    ("Lean Right", 10.0),
    ("Right", 25.0),
]
MODELS = ["mock-alpha", "mock-beta", "mock-gamma"]

SUBJECTS = [
    "The mayor", "The senator", "The governor", "The council", "The committee",
    "The agency", "The minister", "The union", "The board", "The court",
    "The coalition", "The department", "The commission", "The campaign",
    "The administration", "The party", "The director", "The panel",
    "The delegation", "The cabinet",
]
NEUTRAL_VERBS = [
    "announced", "reviewed", "published", "discussed", "approved",
    "scheduled", "released", "examined", "presented", "outlined",
]
NEUTRAL_OBJECTS = [
    "the annual budget report", "a proposal for the new library",
    "the schedule for the public hearing", "the results of the traffic survey",
    "a plan for the water system", "the minutes of the last meeting",
]
NEUTRAL_TAILS = [
    "on Monday", "on Tuesday", "on Wednesday", "on Thursday", "on Friday",
    "in the morning", "after a short debate", "at the city hall",
]
LOADED_ADVERBS = ["shamelessly", "recklessly", "brazenly", "cynically", "disgracefully"]
LOADED_VERBS = ["rammed through", "botched", "sabotaged", "hijacked", "squandered"]
LOADED_OBJECTS = [
    "the disastrous budget", "a ridiculous scheme for the library",
    "the corrupt hearing process", "the pathetic traffic plan",
    "an outrageous plan for the water system", "the radical agenda of the elites",
]
LOADED_TAILS = [
    "to the fury of residents", "in a shocking betrayal of voters",
    "with breathtaking arrogance", "in a disgraceful power grab",
]

REASONS_BIASED = [
    "The sentence uses loaded wording that casts the subject negatively.",
    "Emotive words such as these express the writer's opinion.",
    "The framing is one-sided and sensational.",
]
REASONS_NEUTRAL = [
    "The sentence reports an event without evaluative language.",
    "It states facts in plain wording.",
    "No loaded terms or one-sided framing appear.",
]


def content_id(*parts, hex_chars=16):
    return hashlib.sha256("\x1f".join(parts).encode()).hexdigest()[:hex_chars]


def regex_escape(s):
    return "".join("\\" + c if c in ".^$|?*+()[]{}\\/" else c for c in s)


def make_sentence(rng, biased, used):
    while True:
        subj = rng.choice(SUBJECTS)
        if biased:
            s = f"{subj} {rng.choice(LOADED_ADVERBS)} {rng.choice(LOADED_VERBS)} " \
                f"{rng.choice(LOADED_OBJECTS)} {rng.choice(LOADED_TAILS)}."
        else:
            s = f"{subj} {rng.choice(NEUTRAL_VERBS)} {rng.choice(NEUTRAL_OBJECTS)} " \
                f"{rng.choice(NEUTRAL_TAILS)}."
        if s not in used:
            used.add(s)
            return s


def answer(rng, label):
    reasons = REASONS_BIASED if label == "BIASED" else REASONS_NEUTRAL
    return f"{rng.choice(reasons)} The answer is {label}."


def main():
    rng = random.Random(20240611)
    used = set()
    articles, weak, gold = [], [], []
    rules = {m: [] for m in MODELS}
    fail_budget = 10
    for leaning, adfontes in LEANINGS:
        slug = leaning.lower().replace(" ", "-")
        labels = ["BIASED"] * 20 + ["NOT BIASED"] * 20
        rng.shuffle(labels)
        biased_idx = [i for i, l in enumerate(labels) if l == "BIASED"]
        neutral_idx = [i for i, l in enumerate(labels) if l == "NOT BIASED"]
        weak_flip = set(rng.sample(biased_idx, 3) + rng.sample(neutral_idx, 3))
        order = list(range(40))
        rng.shuffle(order)
        majority_wrong = set(order[:6])
        single_wrong = set(order[6:16])
        inconclusive = set(order[16:18])
        for a in range(5):
            article_id = f"{slug}-{a:02d}"
            texts = []
            for o in range(8):
                i = a * 8 + o
                label = labels[i]
                text = make_sentence(rng, label == "BIASED", used)
                texts.append(text)
                sid = content_id(article_id, str(o))
                gold.append((sid, label))
                is_biased = label == "BIASED"
                if i in weak_flip:
                    score = round(rng.uniform(0.05, 0.45) if is_biased else rng.uniform(0.55, 0.95), 3)
                else:
                    score = round(rng.uniform(0.55, 0.95) if is_biased else rng.uniform(0.05, 0.45), 3)
                weak.append({"sentence_id": sid, "weak_score": score})
                wrong_label = "NOT BIASED" if is_biased else "BIASED"
                if i in majority_wrong:
                    wrong_models = set(rng.sample(MODELS, 2))
                elif i in single_wrong:
                    wrong_models = {rng.choice(MODELS)}
                else:
                    wrong_models = set()
                odd_model = rng.choice(MODELS) if i in inconclusive else None
                for m in MODELS:
                    rule = {"pattern": "^" + regex_escape(text) + "$"}
                    if m == odd_model:
                        rule["response"] = "It could be read as BIASED or as NOT BIASED; hard to say."
                    else:
                        rule["response"] = answer(rng, wrong_label if m in wrong_models else label)
                    if fail_budget > 0 and rng.random() < 0.02:
                        rule["fail_first"] = 1
                        fail_budget -= 1
                    rules[m].append(rule)
            articles.append({
                "article_id": article_id,
                "outlet": f"{slug} daily",
                "url": f"https://news.example/{article_id}",
                "body": " ".join(texts),
                "allsides_rating": leaning,
                "adfontes_bias": adfontes,
            })

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "articles.jsonl", "w") as f:
        for a in articles:
            f.write(json.dumps(a) + "\n")
    with open(OUT / "weak_labels.jsonl", "w") as f:
        for w in weak:
            f.write(json.dumps(w) + "\n")
    with open(OUT / "gold.csv", "w") as f:
        f.write("sentence_id,label\n")
        for sid, label in gold:
            f.write(f"{sid},{label}\n")
    script = {
        "embedding_dim": 256,
        "models": {m: {"rules": rules[m], "default": "I cannot tell."} for m in MODELS},
    }
    with open(OUT / "mock_script.json", "w") as f:
        json.dump(script, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
