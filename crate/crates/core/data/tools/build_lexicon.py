#!/usr/bin/env python3
"""Rebuild data/lexicon.tsv from the VADER word list plus the hotel supplement.

usage: build_lexicon.py path/to/vader_lexicon.txt > ../lexicon.tsv

Selection: single-word alphabetic entries with |mean| >= 0.8 (on VADER's
-4..4 scale), the 2000 with the lowest spread relative to their magnitude, rescaled by 1/4 into [-1, 1].
Negators are excluded so they only act through negation flipping.
A short list of common review words is always kept, and hotel-domain
supplement entries are added (and override VADER values).
"""
import re
import sys

NEGATORS = {
    "no", "not", "never", "none", "nobody", "nothing", "neither", "nor",
    "nowhere", "cannot", "without", "hardly", "barely",
}

# Common review vocabulary kept from VADER regardless of the spread ranking.
FORCE = {
    "good", "nice", "clean", "helpful", "terrible", "dirty", "poor", "dreadful",
    "nasty", "pathetic", "disgusting", "awful", "okay", "ok", "fine", "happy",
    "sad", "love", "hate", "best", "better", "worse", "enjoyed", "recommend",
    "disappointed", "annoying", "comfortable", "excellent", "great", "lovely",
}

SUPPLEMENT = {
    "filthy": -0.7, "smelly": -0.55, "cramped": -0.4, "outdated": -0.35,
    "stale": -0.35, "bland": -0.3, "mediocre": -0.3, "overpriced": -0.45,
    "shabby": -0.5, "moldy": -0.65, "stained": -0.4, "squeaky": -0.25,
    "unhelpful": -0.5, "unfriendly": -0.5, "unprofessional": -0.55,
    "uncomfortable": -0.5, "noisy": -0.35, "cold": -0.15, "slow": -0.25,
    "tiny": -0.2, "dated": -0.25, "worn": -0.25, "sticky": -0.3,
    "spacious": 0.5, "cozy": 0.45, "quiet": 0.3, "tasty": 0.5, "decent": 0.3,
    "exceptional": 0.75, "convenient": 0.4, "immaculate": 0.7, "spotless": 0.7,
    "courteous": 0.5, "attentive": 0.5, "modern": 0.25, "stylish": 0.45,
    "roomy": 0.35, "tidy": 0.35, "charming": 0.55, "welcoming": 0.5,
    "delightful": 0.7, "impeccable": 0.75, "affordable": 0.3, "central": 0.2,
}


def main(path):
    rows = []
    forced = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            token, mean, sd = parts[0], float(parts[1]), float(parts[2])
            if not re.fullmatch(r"[a-z]+", token) or token in NEGATORS:
                continue
            if token in FORCE:
                forced[token] = mean
                continue
            if abs(mean) < 0.8:
                continue
            rows.append((sd / abs(mean), token, mean))
    rows.sort()
    lexicon = {token: max(-1.0, min(1.0, mean / 4.0)) for _, token, mean in rows[:2000]}
    lexicon.update({t: max(-1.0, min(1.0, m / 4.0)) for t, m in forced.items()})
    lexicon.update(SUPPLEMENT)
    for token in sorted(lexicon):
        print(f"{token}\t{lexicon[token]:.4f}")


if __name__ == "__main__":
    main(sys.argv[1])
