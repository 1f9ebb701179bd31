#!/usr/bin/env python3
"""Expands the sparse sound-symbolism weights below into rules.json.

Scale names are poles from scales.tsv; naming the negative pole flips the
sign ("slow": 0.3 means fast-slow -0.3). "light" is always light-dark.
Unlisted weights are 0.
Run from this directory: python3 make_rules.py > rules.json
"""
import json

VERSION = "onoma-rules-1"

scales = []
with open("scales.tsv", encoding="utf-8") as f:
    for line in f:
        if line.startswith("#") or not line.strip():
            continue
        idx, pos, neg = line.rstrip("\n").split("\t")
        scales.append((pos, neg))
assert len(scales) == 43, len(scales)
# Positive poles win ("light" is index 0, not the negative pole of heavy).
positive = {p: i for i, (p, _) in enumerate(scales)}
negative = {n: i for i, (_, n) in enumerate(scales) if n not in positive}

CONSONANTS = {
    "none": {"relaxed": 0.2, "rounded": 0.2, "gentle": 0.2, "fluid": 0.1},
    "k": {"hard": 0.5, "sharp": 0.4, "dry": 0.3, "crisp": 0.4, "fast": 0.2, "angular": 0.3},
    "g": {"heavy": 0.5, "hard": 0.4, "rough": 0.5, "large": 0.3, "bumpy": 0.4, "rotating": 0.2, "dirty": 0.3},
    "s": {"smooth": 0.4, "fast": 0.4, "clean": 0.3, "heavy": -0.3, "cold": 0.2, "fine": 0.2, "transparent": 0.3},
    "z": {"rough": 0.5, "heavy": 0.3, "grainy": 0.5, "dirty": 0.4, "unpleasant": 0.3},
    "t": {"hard": 0.3, "tense": 0.3, "fast": 0.2, "crisp": 0.2, "bouncy": 0.2},
    "d": {"heavy": 0.5, "strong": 0.4, "loud": 0.4, "large": 0.3, "dense": 0.3, "unpleasant": 0.2},
    "n": {"sticky": 0.5, "soft": 0.4, "warm": 0.2, "viscous": 0.5, "slow": 0.3, "comfortable": 0.2},
    "h": {"fluffy": 0.5, "heavy": -0.3, "soft": 0.3, "relaxed": 0.2, "gentle": 0.2},
    "b": {"heavy": 0.4, "loud": 0.3, "bouncy": 0.4, "elastic": 0.3, "large": 0.3, "wet": 0.2},
    "p": {"heavy": -0.4, "bouncy": 0.5, "elastic": 0.3, "small": 0.3, "cheerful": 0.4, "sparkling": 0.2},
    "m": {"soft": 0.4, "warm": 0.3, "fluffy": 0.3, "wet": 0.2, "comfortable": 0.3, "fast": -0.2},
    "y": {"soft": 0.3, "relaxed": 0.3, "gentle": 0.2, "slow": 0.2, "fluid": 0.2},
    "r": {"rotating": 0.6, "smooth": 0.3, "fluid": 0.3, "fast": 0.2, "rounded": 0.3, "glossy": 0.2},
    "w": {"large": 0.3, "wide": 0.4, "loud": 0.2, "fluffy": 0.2, "bouncy": 0.1},
    "Q": {"tense": 0.5, "fast": 0.5, "sharp": 0.3, "intense": 0.3, "crisp": 0.3},
    "N": {"springy": 0.3, "elastic": 0.2, "loud": 0.1, "deep": 0.3, "stable": 0.2},
}

VOWELS = {
    "a": {"large": 0.4, "light": 0.3, "wide": 0.3, "cheerful": 0.3},
    "i": {"small": 0.4, "sharp": 0.4, "light": 0.3, "fast": 0.3, "sparkling": 0.3, "thin": 0.3},
    "u": {"dark": 0.2, "subdued": 0.2, "deep": 0.2, "thick": 0.1},
    "e": {"unpleasant": 0.3, "dirty": 0.2, "ugly": 0.2, "subdued": 0.1},
    "o": {"large": 0.3, "heavy": 0.3, "dark": 0.3, "rounded": 0.4, "slow": 0.2, "deep": 0.3},
    "none": {},
}

VOICED = {"heavy": 0.3, "dark": 0.2, "dirty": 0.2, "strong": 0.3, "loud": 0.2, "ugly": 0.2, "large": 0.2}
PALATALIZED = {"small": 0.2, "soft": 0.2, "cheerful": 0.2, "complex": 0.2, "relaxed": 0.1, "novel": 0.2}

POSITION = {"initial": 1.2, "medial": 1.0, "final": 0.9}

WORD_FORM = {
    "reduplicated": {"lively": 0.4, "bouncy": 0.3, "stable": 0.2, "simple": 0.2, "rotating": 0.2},
    "final_gemination": {"fast": 0.5, "tense": 0.4, "intense": 0.3, "unstable": 0.3},
    "final_nasal": {"springy": 0.4, "elastic": 0.3, "deep": 0.2, "loud": 0.2},
    "final_ri": {"slow": 0.3, "glossy": 0.2, "smooth": 0.2, "sharp": 0.1},
    "long_vowel": {"slow": 0.5, "relaxed": 0.3, "gentle": 0.2, "complex": 0.1},
}


def dense(sparse):
    v = [0.0] * 43
    for name, w in sparse.items():
        if name in positive:
            v[positive[name]] += float(w)
        else:
            v[negative[name]] -= float(w)
    return v


table = {
    "version": VERSION,
    "dims": 43,
    "clamp": [-2.0, 2.0],
    "base": [0.0] * 43,
    "consonant": {k: dense(v) for k, v in CONSONANTS.items()},
    "vowel": {k: dense(v) for k, v in VOWELS.items()},
    "voiced": dense(VOICED),
    "palatalized": dense(PALATALIZED),
    "position": {k: [w] * 43 for k, w in POSITION.items()},
    "word_form": {k: dense(v) for k, v in WORD_FORM.items()},
}


def emit(value, indent=0):
    pad = "  " * indent
    if isinstance(value, dict):
        items = [f'{pad}  {json.dumps(k)}: {emit(v, indent + 1).lstrip()}' for k, v in value.items()]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    return pad + json.dumps(value)


print(emit(table))
