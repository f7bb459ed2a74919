"""Order-2 character language model with add-one smoothing.

A deliberately small autoregressive model: the chain-rule product of
per-character conditionals, sampled token by token.  It stands in for a
real text generator so that pipelines stay deterministic and testable.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field

# 64-symbol vocabulary: letters, digits, space, then punctuation.
VOCAB = (
    "abcdefghijklmnopqrstuvwxyz"
    "0123456789"
    " "
    ".,!?-:;'\"()"
    "/&%$#@*+=<>"
    "[]_~`"
)
assert len(VOCAB) == 64, len(VOCAB)
VOCAB_INDEX = {c: i for i, c in enumerate(VOCAB)}

ORDER = 2
MIN_CORPUS = 100


class CorpusTooSmall(ValueError):
    pass


def normalize(text: str) -> str:
    """Lowercase, map out-of-vocabulary chars to space, collapse whitespace runs."""
    mapped = "".join(c if c in VOCAB_INDEX else " " for c in text.lower())
    out = []
    prev_space = False
    for c in mapped:
        if c == " ":
            if not prev_space:
                out.append(c)
            prev_space = True
        else:
            out.append(c)
            prev_space = False
    return "".join(out)


@dataclass
class CharLm:
    """Conditional count tables p(next | previous two chars), add-one smoothed."""

    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    totals: dict[str, int] = field(default_factory=dict)
    trained_on: str = ""
    order: int = ORDER

    def prob(self, context: str, char: str) -> float:
        """Smoothed conditional probability of one character."""
        ctx = context[-self.order :].rjust(self.order, " ")
        c = self.counts.get(ctx, {})
        total = self.totals.get(ctx, 0)
        return (c.get(char, 0) + 1) / (total + len(VOCAB))

    def logprob_step(self, context: str, char: str) -> float:
        return math.log(self.prob(context, char))

    def distribution(self, context: str) -> list[float]:
        """Smoothed distribution over VOCAB, in vocabulary order."""
        ctx = context[-self.order :].rjust(self.order, " ")
        c = self.counts.get(ctx, {})
        total = self.totals.get(ctx, 0) + len(VOCAB)
        return [(c.get(ch, 0) + 1) / total for ch in VOCAB]


def lm_train(corpus: str) -> CharLm:
    """Count order-2 character continuations over the normalized corpus."""
    text = normalize(corpus)
    if len(text) < MIN_CORPUS:
        raise CorpusTooSmall(f"{len(text)} symbols after normalization, need {MIN_CORPUS}")
    model = CharLm(trained_on=hashlib.sha256(text.encode("utf-8")).hexdigest())
    padded = " " * ORDER + text
    for i in range(len(text)):
        ctx = padded[i : i + ORDER]
        nxt = text[i]
        bucket = model.counts.setdefault(ctx, {})
        bucket[nxt] = bucket.get(nxt, 0) + 1
        model.totals[ctx] = model.totals.get(ctx, 0) + 1
    return model


def lm_generate(model: CharLm, prompt: str, n: int, seed: int = 0, greedy: bool = False) -> str:
    """Prompt plus n sampled characters.

    Sampling walks the smoothed CDF with a seeded PRNG; greedy mode takes the
    argmax with lexicographic tie-break over the vocabulary.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    context = normalize(prompt)
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        dist = model.distribution(context)
        if greedy:
            best = max(sorted(VOCAB), key=lambda ch: dist[VOCAB_INDEX[ch]])
            char = best
        else:
            r = rng.random()
            acc = 0.0
            char = VOCAB[-1]
            for i, p in enumerate(dist):
                acc += p
                if r < acc:
                    char = VOCAB[i]
                    break
        out.append(char)
        context = (context + char)[-ORDER:]
    return prompt + "".join(out)


def lm_logprob(model: CharLm, text: str) -> float:
    """Chain-rule log-probability of the normalized text under the model."""
    s = normalize(text)
    if not s:
        raise ValueError("text empty after normalization")
    padded = " " * ORDER + s
    total = 0.0
    for i in range(len(s)):
        total += math.log(model.prob(padded[i : i + ORDER], s[i]))
    return total
