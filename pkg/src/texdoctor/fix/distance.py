"""Optimal string alignment distance for did-you-mean suggestions."""

from __future__ import annotations

from collections.abc import Iterable


def osa_distance(a: str, b: str, limit: int | None = None) -> int:
    """Edit distance counting insertions, deletions, substitutions and adjacent swaps.

    With ``limit`` set, returns ``limit + 1`` as soon as the distance is known to exceed it.
    """
    if a == b:
        return 0
    if limit is not None and abs(len(a) - len(b)) > limit:
        return limit + 1
    prev2: list[int] | None = None
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        cur = [i] + [0] * len(b)
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if prev2 is not None and i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        if limit is not None and min(cur) > limit:
            return limit + 1
        prev2, prev = prev, cur
    return prev[-1]


def nearest(word: str, pool: Iterable[str], max_distance: int = 2) -> list[tuple[int, str]]:
    """Pool entries within ``max_distance`` of ``word``, nearest first, ties alphabetical."""
    out = []
    for cand in set(pool):
        if cand == word:
            continue
        d = osa_distance(word, cand, max_distance)
        if d <= max_distance:
            out.append((d, cand))
    out.sort()
    return out


def typo_threshold(word: str) -> int:
    """Distance allowed for a suggestion: 2, but never the whole word."""
    return max(0, min(2, len(word) - 1))
