#!/usr/bin/env python3
"""Writes a random prompt corpus: perturbed copies of a template response,
some correct, some wrong, some without a boxed answer."""
import argparse
import json
import random


def response(rng, base, alphabet, gold, use_ints):
    toks = list(base) if rng.random() < 0.7 else [rng.randrange(alphabet) for _ in range(rng.randint(1, 14))]
    for _ in range(rng.randrange(4)):
        if toks:
            toks[rng.randrange(len(toks))] = rng.randrange(alphabet)
    tokens = [t if use_ints else "t%d" % t for t in toks]
    roll = rng.random()
    if roll < 0.5:
        ans = gold
    elif roll < 0.9:
        ans = str(rng.randint(20, 24))
    else:
        ans = None
    text = " ".join(str(t) for t in tokens)
    if ans is None:
        tokens.append("hmm")
        text += " hmm"
    else:
        tokens.append("\\boxed{%s}" % ans)
        text += " \\boxed{%s}" % ans
    logprobs = []
    for _ in tokens:
        lp = -rng.uniform(5, 30) if rng.random() < 0.1 else -rng.uniform(0, 2)
        logprobs.append(lp)
    if rng.random() < 0.2:
        # exact duplicate of the template's log-probs where possible
        logprobs = [-0.25] * len(tokens)
    return {"text": text, "tokens": tokens, "logprobs": logprobs}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--prompts", type=int, default=50)
    ap.add_argument("--output", required=True)
    a = ap.parse_args()
    rng = random.Random(a.seed)
    with open(a.output, "w") as f:
        for i in range(a.prompts):
            gold = str(rng.randint(0, 19))
            alphabet = rng.randint(3, 10)
            use_ints = rng.random() < 0.3
            base = [rng.randrange(alphabet) for _ in range(rng.randint(1, 14))]
            rs = [response(rng, base, alphabet, gold, use_ints) for _ in range(rng.randint(1, 12))]
            rec = {"id": "r%03d" % i, "question": "q%d" % i, "gold_answer": gold, "responses": rs}
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main()
