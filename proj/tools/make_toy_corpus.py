#!/usr/bin/env python3
"""Writes the bundled toy corpus: templated English sentences with gold AMRs
and word-to-AMR alignments, split into train / dev / test.

Output is fully determined by --seed, so regenerating never changes the
checked-in files.
"""

import argparse
import random
from pathlib import Path

NOUNS = ["boy", "girl", "soldier", "teacher", "dog", "cat", "doctor", "student"]
ADJS = ["big", "small", "old", "young"]
# surface 3sg, surface base, concept
TRANSITIVE = [
    ("sees", "see", "see-01"),
    ("likes", "like", "like-01"),
    ("helps", "help", "help-01"),
    ("finds", "find", "find-01"),
    ("visits", "visit", "visit-01"),
]
INTRANSITIVE = [
    ("sleeps", "sleep", "sleep-01"),
    ("runs", "run", "run-02"),
    ("laughs", "laugh", "laugh-01"),
    ("sings", "sing", "sing-01"),
]


def var(word, taken):
    v = word[0]
    k = 2
    while v in taken:
        v = f"{word[0]}{k}"
        k += 1
    taken.add(v)
    return v


def transitive(rng):
    n1, n2 = rng.sample(NOUNS, 2)
    s3, _, c = rng.choice(TRANSITIVE)
    taken = set()
    v, a, b = var(c, taken), var(n1, taken), var(n2, taken)
    words = ["the", n1, s3, "the", n2, "."]
    amr = f"({v} / {c} :ARG0 ({a} / {n1}) :ARG1 ({b} / {n2}))"
    return words, amr, [f"1-{a}", f"2-{v}", f"4-{b}"]


def transitive_adj(rng):
    n1, n2 = rng.sample(NOUNS, 2)
    adj = rng.choice(ADJS)
    s3, _, c = rng.choice(TRANSITIVE)
    taken = set()
    v, a, b, m = var(c, taken), var(n1, taken), var(n2, taken), var(adj, taken)
    words = ["the", n1, s3, "the", adj, n2, "."]
    amr = f"({v} / {c} :ARG0 ({a} / {n1}) :ARG1 ({b} / {n2} :mod ({m} / {adj})))"
    return words, amr, [f"1-{a}", f"2-{v}", f"4-{m}", f"5-{b}"]


def intransitive(rng):
    n = rng.choice(NOUNS)
    s3, _, c = rng.choice(INTRANSITIVE)
    taken = set()
    v, a = var(c, taken), var(n, taken)
    return ["the", n, s3, "."], f"({v} / {c} :ARG0 ({a} / {n}))", [f"1-{a}", f"2-{v}"]


def adjective(rng):
    n = rng.choice(NOUNS)
    adj = rng.choice(ADJS)
    s3, _, c = rng.choice(INTRANSITIVE)
    taken = set()
    v, a, m = var(c, taken), var(n, taken), var(adj, taken)
    words = ["the", adj, n, s3, "."]
    amr = f"({v} / {c} :ARG0 ({a} / {n} :mod ({m} / {adj})))"
    return words, amr, [f"1-{m}", f"2-{a}", f"3-{v}"]


def negated(rng):
    n = rng.choice(NOUNS)
    _, base, c = rng.choice(INTRANSITIVE)
    taken = set()
    v, a = var(c, taken), var(n, taken)
    words = ["the", n, "does", "not", base, "."]
    amr = f"({v} / {c} :polarity - :ARG0 ({a} / {n}))"
    return words, amr, [f"1-{a}", f"3-{v}.polarity.1", f"4-{v}"]


def want(rng):
    n = rng.choice(NOUNS)
    _, base, c = rng.choice(INTRANSITIVE)
    taken = set()
    w, a, v = var("want-01", taken), var(n, taken), var(c, taken)
    words = ["the", n, "wants", "to", base, "."]
    amr = f"({w} / want-01 :ARG0 ({a} / {n}) :ARG1 ({v} / {c} :ARG0 {a}))"
    return words, amr, [f"1-{a}", f"2-{w}", f"4-{v}"]


def afraid(rng):
    n = rng.choice(NOUNS)
    taken = set()
    f, a, d = var("fear-01", taken), var(n, taken), var("die-01", taken)
    words = ["the", n, "was", "not", "afraid", "of", "dying", "."]
    amr = f"({f} / fear-01 :polarity - :ARG0 ({a} / {n}) :ARG1 ({d} / die-01 :ARG1 {a}))"
    return words, amr, [f"1-{a}", f"3-{f}.polarity.1", f"4-{f}", f"6-{d}"]


def negated_transitive(rng):
    n1, n2 = rng.sample(NOUNS, 2)
    _, base, c = rng.choice(TRANSITIVE)
    taken = set()
    v, a, b = var(c, taken), var(n1, taken), var(n2, taken)
    words = ["the", n1, "does", "not", base, "the", n2, "."]
    amr = f"({v} / {c} :polarity - :ARG0 ({a} / {n1}) :ARG1 ({b} / {n2}))"
    return words, amr, [f"1-{a}", f"3-{v}.polarity.1", f"4-{v}", f"6-{b}"]


def today(rng):
    words, amr, align = rng.choice([intransitive, transitive])(rng)
    words = words[:-1] + ["today", "."]
    amr = amr[:-1] + " :time (td / today))"
    return words, amr, align + [f"{len(words) - 2}-td"]


TEMPLATES = [
    (transitive, 5),
    (transitive_adj, 2),
    (intransitive, 3),
    (adjective, 2),
    (negated, 2),
    (want, 2),
    (afraid, 1),
    (negated_transitive, 1),
    (today, 2),
]


def generate(rng, count, seen):
    funcs = [f for f, w in TEMPLATES for _ in range(w)]
    out = []
    while len(out) < count:
        words, amr, align = rng.choice(funcs)(rng)
        key = " ".join(words)
        if key in seen:
            continue
        seen.add(key)
        out.append((words, amr, align))
    return out


def write_split(directory, name, items):
    with open(directory / f"{name}.txt", "w") as src, open(directory / f"{name}.amr", "w") as amr, open(
        directory / f"{name}.align", "w"
    ) as al:
        for i, (words, graph, align) in enumerate(items, 1):
            src.write(" ".join(words) + "\n")
            amr.write(f"# ::id toy.{name}.{i}\n# ::snt {' '.join(words)}\n{graph}\n\n")
            al.write(" ".join(align) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "toy"))
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--train", type=int, default=50)
    ap.add_argument("--dev", type=int, default=20)
    ap.add_argument("--test", type=int, default=20)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seen = set()
    # The soldier sentence always opens the training split.
    first = (
        "the soldier was not afraid of dying .".split(),
        "(f / fear-01 :polarity - :ARG0 (s / soldier) :ARG1 (d / die-01 :ARG1 s))",
        ["1-s", "3-f.polarity.1", "4-f", "6-d"],
    )
    seen.add(" ".join(first[0]))
    train = [first] + generate(rng, args.train - 1, seen)
    write_split(out, "train", train)
    write_split(out, "dev", generate(rng, args.dev, seen))
    write_split(out, "test", generate(rng, args.test, seen))


if __name__ == "__main__":
    main()
