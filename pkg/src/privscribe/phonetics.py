"""Original (1990) Metaphone encoding and an encoding-based similarity."""

from __future__ import annotations

from functools import lru_cache

from . import kernels

_VOWELS = frozenset("AEIOU")
_FRONT = frozenset("EIY")


@lru_cache(maxsize=65536)
def metaphone(word: str) -> str:
    w = "".join(ch for ch in word.upper() if "A" <= ch <= "Z")
    if not w:
        return ""

    # collapse doubled letters except C
    dedup = [w[0]]
    for ch in w[1:]:
        if ch != dedup[-1] or ch == "C":
            dedup.append(ch)
    w = "".join(dedup)

    if w[:2] in ("KN", "GN", "PN", "AE", "WR"):
        w = w[1:]
    if w[0] == "X":
        w = "S" + w[1:]
    elif w[:2] == "WH":
        w = "W" + w[2:]

    n = len(w)
    out = []

    def at(i):
        return w[i] if 0 <= i < n else ""

    i = 0
    while i < n:
        c = w[i]
        prev, nxt, nxt2 = at(i - 1), at(i + 1), at(i + 2)
        if c in _VOWELS:
            if i == 0:
                out.append(c)
        elif c == "B":
            if not (prev == "M" and i == n - 1):
                out.append("B")
        elif c == "C":
            if nxt == "I" and nxt2 == "A":
                out.append("X")
            elif nxt == "H":
                out.append("K" if prev == "S" else "X")
                i += 1
            elif nxt in _FRONT:
                if prev != "S":
                    out.append("S")
            else:
                out.append("K")
        elif c == "D":
            if nxt == "G" and nxt2 in _FRONT:
                out.append("J")
                i += 1
            else:
                out.append("T")
        elif c == "G":
            if nxt == "H" and i + 2 < n and nxt2 not in _VOWELS:
                pass  # GH not at end or before a vowel is silent
            elif nxt == "N" and (i + 2 == n or w[i + 1 :] == "NED"):
                pass
            elif nxt in _FRONT and prev != "G":
                out.append("J")
            else:
                out.append("K")
        elif c == "H":
            if prev in ("C", "S", "P", "T", "G"):
                pass
            elif prev in _VOWELS and nxt not in _VOWELS:
                pass
            else:
                out.append("H")
        elif c == "K":
            if prev != "C":
                out.append("K")
        elif c == "P":
            out.append("F" if nxt == "H" else "P")
        elif c == "Q":
            out.append("K")
        elif c == "S":
            if nxt == "H":
                out.append("X")
                i += 1
            elif nxt == "I" and nxt2 in ("O", "A"):
                out.append("X")
            else:
                out.append("S")
        elif c == "T":
            if nxt == "I" and nxt2 in ("O", "A"):
                out.append("X")
            elif nxt == "H":
                out.append("0")
                i += 1
            elif not (nxt == "C" and nxt2 == "H"):
                out.append("T")
        elif c == "V":
            out.append("F")
        elif c == "W" or c == "Y":
            if nxt in _VOWELS:
                out.append(c)
        elif c == "X":
            out.append("KS")
        elif c == "Z":
            out.append("S")
        else:
            out.append(c)  # F J L M N R
        i += 1
    return "".join(out)


def phonetic_key(word: str) -> str:
    """Metaphone code, or the raw lowercased token when it has no encodable letters."""
    code = metaphone(word)
    return code if code else word.lower()


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    sub, dele, ins = kernels.edit_ops([ord(ch) for ch in a], [ord(ch) for ch in b])
    return sub + dele + ins


@lru_cache(maxsize=262144)
def phonetic_similarity(a: str, b: str) -> float:
    if not a or not b:
        raise ValueError("words must be non-empty")
    ka, kb = phonetic_key(a), phonetic_key(b)
    if ka == kb:
        return 1.0
    return 1.0 - levenshtein(ka, kb) / max(len(ka), len(kb))
