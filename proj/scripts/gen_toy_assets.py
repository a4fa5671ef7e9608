#!/usr/bin/env python3
"""Generate the desk-scale assets shipped under data/.

Produces a synthetic word-embedding file whose nearest neighbours behave like
counter-fitted synonyms (words are grouped into clusters around a shared
direction), a two-class sentiment corpus drawn from the same vocabulary, and
the stopword list used to pick target words.

The outputs are committed; rerun only when the assets need to change:

    python3 scripts/gen_toy_assets.py --out data
"""

import argparse
import itertools
import json
import os

import numpy as np

DIM = 50
VOCAB_TARGET = 10000

POSITIVE = [
    "good great fine nice decent solid excellent superb terrific wonderful splendid fantastic fabulous marvelous",
    "funny hilarious amusing witty humorous comical entertaining droll zany",
    "beautiful gorgeous lovely stunning elegant graceful exquisite picturesque",
    "smart clever intelligent brilliant insightful sharp astute shrewd",
    "moving touching poignant heartfelt stirring emotional affecting tender",
    "exciting thrilling gripping riveting engaging compelling captivating absorbing",
    "fresh original novel inventive creative innovative imaginative inspired",
    "enjoyable pleasant delightful charming pleasing appealing likable agreeable",
    "strong powerful forceful potent robust mighty vigorous intense",
    "love adore cherish treasure relish savor enjoy admire",
    "masterpiece gem triumph marvel winner success hit jewel",
    "best finest greatest top supreme optimal ultimate premier",
]

NEGATIVE = [
    "bad awful terrible horrible dreadful lousy poor atrocious abysmal rotten crummy horrid",
    "boring dull tedious monotonous bland tiresome dreary uninspired stale",
    "stupid dumb idiotic silly foolish inane moronic asinine mindless",
    "ugly hideous unsightly grotesque repulsive gross unattractive homely",
    "weak feeble flimsy lame thin shallow frail anemic",
    "mess disaster fiasco failure flop debacle catastrophe shambles",
    "hate despise loathe detest abhor dislike resent scorn",
    "annoying irritating grating obnoxious infuriating maddening aggravating vexing",
    "slow sluggish plodding lethargic leaden ponderous meandering draggy",
    "confusing muddled incoherent baffling convoluted murky garbled chaotic",
    "worst lowest poorest weakest worse inferior substandard mediocre",
    "waste squander misuse junk garbage trash rubbish drivel",
]

NEUTRAL = [
    "movie film picture flick feature cinema",
    "actor actress performer star cast player",
    "story plot narrative storyline tale saga",
    "scene sequence moment shot segment",
    "director filmmaker auteur helmer",
    "music score soundtrack song tune melody",
    "ending finale conclusion climax resolution",
    "character role protagonist hero figure persona",
    "camera lens cinematography photography visuals",
    "script screenplay dialogue writing lines",
    "audience viewer crowd spectator public",
    "year decade season summer winter",
    "city town village place setting location",
    "time hour minute day night evening",
    "family father mother brother sister child",
    "book novel source adaptation version",
    "house home room apartment building",
    "war battle fight conflict combat",
    "life world people man woman",
    "thing way part kind sort",
]

STOPWORDS = (
    "a about above after again against all am an and any are as at be because been before being "
    "below between both but by can could did do does doing down during each few for from further "
    "had has have having he her here hers herself him himself his how i if in into is it its itself "
    "just me more most my myself no nor not now of off on once only or other our ours ourselves out "
    "over own same she should so some such than that the their theirs them themselves then there "
    "these they this those through to too under until up very was we were what when where which "
    "while who whom why will with would you your yours yourself yourselves also just even still "
    "much many really quite rather"
).split()

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"


def pseudowords(rng, taken, count):
    sylls = [c + v for c in CONSONANTS for v in VOWELS]
    out = []
    while len(out) < count:
        k = rng.integers(2, 4)
        w = "".join(sylls[i] for i in rng.integers(0, len(sylls), size=k))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def unique_words(groups, taken):
    clusters = []
    for g in groups:
        words = []
        for w in g.split():
            if w not in taken:
                taken.add(w)
                words.append(w)
        clusters.append(words)
    return clusters


def cluster_vectors(rng, words, tightness):
    """Vectors around one random direction; per-word noise scale sets how close
    each member sits to the centre (and therefore to the other members)."""
    centre = rng.normal(size=DIM)
    centre /= np.linalg.norm(centre)
    vecs = []
    for i, _ in enumerate(words):
        lo, hi = tightness
        scale = rng.uniform(lo, hi) if i else lo
        noise = rng.normal(size=DIM) / np.sqrt(DIM)
        vecs.append(centre + scale * noise)
    return vecs


def build_vocab(rng):
    taken = set()
    pos = unique_words(POSITIVE, taken)
    neg = unique_words(NEGATIVE, taken)
    neu_real = unique_words(NEUTRAL, taken)
    stops = [w for w in STOPWORDS if not (w in taken or taken.add(w))]

    records = []  # (word, vector)
    for cl in pos + neg + neu_real:
        records += zip(cl, cluster_vectors(rng, cl, (0.25, 1.0)))
    for w in stops:
        v = rng.normal(size=DIM)
        records.append((w, v / np.linalg.norm(v)))

    remaining = VOCAB_TARGET - len(records)
    pseudo = pseudowords(rng, taken, remaining)
    pseudo_clusters = []
    i = 0
    while i < len(pseudo):
        # Mostly small groups, a few large enough that the top-N cap applies.
        size = int(rng.choice([1, 2, 3, 5, 8, 12, 20, 30, 60], p=[.1, .1, .15, .2, .2, .12, .07, .04, .02]))
        cl = pseudo[i:i + size]
        i += size
        pseudo_clusters.append(cl)
        records += zip(cl, cluster_vectors(rng, cl, (0.25, 1.1)))
    return pos, neg, neu_real, stops, pseudo_clusters, records


def zipf_weights(n, s=1.1):
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


class CorpusSampler:
    def __init__(self, rng, pos, neg, neu_real, stops, pseudo_clusters):
        self.rng = rng
        self.stops = stops
        self.polar = {1: pos, 0: neg}
        # Inside a sentiment cluster the first few members carry most of the
        # usage; the tail members are rare and often unseen in training.
        self.member_w = {
            id(cl): self._member_weights(len(cl)) for cl in pos + neg
        }
        filler = [w for cl in neu_real for w in cl]
        filler += [w for cl in pseudo_clusters[:400] for w in cl[:3]]
        rng.shuffle(filler)
        self.filler = filler
        self.filler_w = zipf_weights(len(filler), 1.05)

    def _member_weights(self, n):
        head = max(2, n // 3)
        w = np.array([1.0 / (i + 1) ** 0.7 if i < head else 0.01 for i in range(n)])
        return w / w.sum()

    def sentiment_word(self, label):
        clusters = self.polar[label]
        cl = clusters[self.rng.integers(len(clusters))]
        return cl[self.rng.choice(len(cl), p=self.member_w[id(cl)])]

    def document(self, label):
        rng = self.rng
        n = int(rng.integers(8, 22))
        n_sent = int(rng.integers(1, 4))
        tokens = []
        for _ in range(n - n_sent):
            if rng.random() < 0.35:
                tokens.append(self.stops[rng.integers(len(self.stops))])
            else:
                tokens.append(self.filler[rng.choice(len(self.filler), p=self.filler_w)])
        for _ in range(n_sent):
            pol = label if rng.random() > 0.12 else 1 - label
            tokens.insert(int(rng.integers(len(tokens) + 1)), self.sentiment_word(pol))
        return " ".join(tokens)


def write_corpus(path, sampler, rng, count, prefix):
    with open(path, "w", encoding="utf-8") as f:
        for i in range(count):
            label = int(rng.integers(2))
            rec = {"id": f"{prefix}-{i:04d}", "label": label, "text": sampler.document(label)}
            f.write(json.dumps(rec) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=20231014)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    pos, neg, neu_real, stops, pseudo_clusters, records = build_vocab(rng)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "embeddings.txt"), "w", encoding="utf-8") as f:
        for w, v in records:
            f.write(w + " " + " ".join(f"{x:.5f}" for x in v) + "\n")
    with open(os.path.join(args.out, "stopwords.txt"), "w", encoding="utf-8") as f:
        f.write("# stopword list v1: excluded from attack targets\n")
        for w in sorted(set(STOPWORDS)):
            f.write(w + "\n")

    sampler = CorpusSampler(rng, pos, neg, neu_real, stops, pseudo_clusters)
    write_corpus(os.path.join(args.out, "sentiment_train.jsonl"), sampler, rng, 2000, "train")
    write_corpus(os.path.join(args.out, "sentiment_attack.jsonl"), sampler, rng, 200, "attack")


if __name__ == "__main__":
    main()
