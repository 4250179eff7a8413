#!/usr/bin/env python3
"""Generate the bundled deduction suite.

Each story draws a hidden world over monadic A, B, C and dyadic R, then
emits 25-40 sentences true in that world: a few universal rules, ground
facts that pin down every entity's A/B/C pattern, and distractors.
Hypotheses are the eight sign patterns of A(x) & B(x) & C(x).

usage: gen_suite.py [--seed N] [--out DIR]
"""

import argparse
import itertools
import json
import pathlib
import random

MONADIC = ["A", "B", "C"]
NAMES = ["ann", "bob", "cat", "dan", "eve", "fay", "gus"]


def lit(pred, ent, value):
    atom = f"{pred}({ent})"
    return atom if value else f"~{atom}"


def templ(pred, value, var="x"):
    atom = f"{pred}({var})"
    return atom if value else f"~{atom}"


def hypotheses():
    out = []
    for signs in itertools.product([True, False], repeat=3):
        out.append(" & ".join(templ(p, s) for p, s in zip(MONADIC, signs)))
    return out


def entailed(facts, rules):
    """Per-entity closure: facts maps pred -> value, rules are (p, sp, q, sq)
    implications. Returns the predicates whose value is forced."""
    forced = {}
    for p in MONADIC:
        vals = set()
        for signs in itertools.product([True, False], repeat=3):
            w = dict(zip(MONADIC, signs))
            if any(w[q] != v for q, v in facts.items()):
                continue
            if any(w[rp] == sp and w[rq] != sq for rp, sp, rq, sq in rules):
                continue
            vals.add(w[p])
        if len(vals) == 1:
            forced[p] = vals.pop()
    return forced


def story(rng, idx):
    n = rng.choice([5, 6])
    ents = NAMES[:n]
    majority = tuple(rng.random() < 0.5 for _ in MONADIC)
    world = {}
    for e in ents:
        cls = majority if rng.random() < 0.7 else tuple(rng.random() < 0.5 for _ in MONADIC)
        for p, v in zip(MONADIC, cls):
            world[(p, e)] = v
    rel = {(a, b): rng.random() < 0.35 for a in ents for b in ents}

    true_rules = []
    for p, q in itertools.permutations(MONADIC, 2):
        for sp, sq in itertools.product([True, False], repeat=2):
            if all((world[(p, e)] == sp) <= (world[(q, e)] == sq) for e in ents):
                true_rules.append((p, sp, q, sq))
    rules = rng.sample(true_rules, min(len(true_rules), rng.randint(2, 4)))
    sentences = [f"forall x. ({templ(p, sp)} -> {templ(q, sq)})" for p, sp, q, sq in rules]

    # Ground facts until every entity's class follows from facts and rules.
    for e in ents:
        facts = {}
        while len(entailed(facts, rules)) < len(MONADIC):
            forced = entailed(facts, rules)
            open_preds = [p for p in MONADIC if p not in forced]
            p = rng.choice(open_preds)
            others = [q for q in open_preds if q != p]
            if others and rng.random() < 0.4:
                q = rng.choice(others)
                facts[p], facts[q] = world[(p, e)], world[(q, e)]
                sentences.append(f"{lit(p, e, world[(p, e)])} & {lit(q, e, world[(q, e)])}")
            else:
                facts[p] = world[(p, e)]
                sentences.append(lit(p, e, world[(p, e)]))

    distractors = []
    for _ in range(2 * n):
        e = rng.choice(ents)
        p, q = rng.sample(MONADIC, 2)
        vp, vq = world[(p, e)], world[(q, e)]
        if rng.random() < 0.5:
            vp = not vp
        distractors.append(f"{lit(p, e, vp)} | {lit(q, e, vq)}")
    for p, q in itertools.combinations(MONADIC, 2):
        for sp, sq in itertools.product([True, False], repeat=2):
            if any(world[(p, e)] == sp and world[(q, e)] == sq for e in ents):
                distractors.append(f"exists x. ({templ(p, sp)} & {templ(q, sq)})")
    for (a, b), v in rel.items():
        if a != b and rng.random() < 0.3:
            distractors.append(f"R({a}, {b})" if v else f"~R({a}, {b})")
    for p in MONADIC:
        for sp in [True, False]:
            if all(any(rel[(a, b)] for b in ents) for a in ents if world[(p, a)] == sp):
                distractors.append(f"forall x. ({templ(p, sp)} -> exists y. R(x, y))")
    for a in ents:
        for p in MONADIC:
            if any(rel[(a, b)] and world[(p, b)] for b in ents):
                distractors.append(f"exists y. (R({a}, y) & {p}(y))")

    sentences = list(dict.fromkeys(sentences))
    distractors = [d for d in sorted(set(distractors)) if d not in sentences]
    rng.shuffle(distractors)
    target = max(len(sentences), rng.randint(25, 40))
    sentences += distractors[: target - len(sentences)]
    rng.shuffle(sentences)
    return {
        "id": f"suite{idx:02d}",
        "source": "generated deduction story",
        "predicates": [{"name": p, "arity": 1} for p in MONADIC] + [{"name": "R", "arity": 2}],
        "entities": ents,
        "sentences": sentences,
        "hypotheses": hypotheses(),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data/stories/suite"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(10):
        s = story(rng, i + 1)
        (out / f"{s['id']}.json").write_text(json.dumps(s, indent=2) + "\n")


if __name__ == "__main__":
    main()
