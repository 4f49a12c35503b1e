"""Koszul signs and shuffle combinatorics.

A permutation sigma is a tuple of 0-based images: sigma[s] is the position
that receives the s-th input. The Koszul exponent sums |x_s||x_t| over the
inversions s < t, sigma[s] > sigma[t].
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence


def inverse(sigma: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for s, t in enumerate(sigma):
        inv[t] = s
    return tuple(inv)


def compose(sigma: Sequence[int], tau: Sequence[int]) -> tuple[int, ...]:
    """(sigma o tau)(s) = sigma(tau(s))."""
    return tuple(sigma[t] for t in tau)


def koszul_exponent(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    if len(sigma) != len(degrees):
        raise ValueError("permutation and degree list differ in length")
    e = 0
    n = len(sigma)
    for s in range(n):
        ds = degrees[s]
        if ds & 1:
            for t in range(s + 1, n):
                if sigma[s] > sigma[t] and degrees[t] & 1:
                    e += 1
    return e


def koszul_sign(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    return -1 if koszul_exponent(sigma, degrees) & 1 else 1


def permutation_sign(sigma: Sequence[int]) -> int:
    n = len(sigma)
    inv = sum(1 for s in range(n) for t in range(s + 1, n) if sigma[s] > sigma[t])
    return -1 if inv & 1 else 1


def apply_permutation(sigma: Sequence[int], items: Sequence):
    """Place items[s] at position sigma[s]."""
    out = [None] * len(items)
    for s, t in enumerate(sigma):
        out[t] = items[s]
    return out


def shuffles(p: int, q: int) -> list[tuple[int, ...]]:
    """All (p,q)-shuffles: increasing on the first p and on the last q inputs."""
    n = p + q
    out = []
    for us in combinations(range(n), p):
        uset = set(us)
        vs = [v for v in range(n) if v not in uset]
        out.append(tuple(us) + tuple(vs))
    return out


def multi_shuffles(*blocks: int) -> list[tuple[int, ...]]:
    """(t_1,...,t_s)-shuffles where equal adjacent blocks have increasing first entries."""
    n = sum(blocks)
    out: list[tuple[int, ...]] = []

    def rec(k, remaining, acc, prev_first):
        if k == len(blocks):
            out.append(tuple(acc))
            return
        t = blocks[k]
        for chosen in combinations(sorted(remaining), t):
            if k > 0 and blocks[k - 1] == t and chosen[0] < prev_first:
                continue
            rest = remaining - set(chosen)
            rec(k + 1, rest, acc + list(chosen), chosen[0])

    rec(0, set(range(n)), [], -1)
    return out

