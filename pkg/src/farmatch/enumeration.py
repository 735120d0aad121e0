"""Enumerate and index the matching space of a market.

Matchings are exactly the injective partial assignments of students to
hospitals (a couple's pair never repeats a hospital because of injectivity,
so every such assignment satisfies the matching conditions).  The canonical
order is mixed-radix over students in index order, each digit running
through unemployment first and then hospitals in index order, skipping
assignments that would reuse a hospital.  A matching's code is its dense
rank in that order, which makes bitset and matrix algorithms over the whole
space straightforward.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

import numpy as np

from .model import UNEMPLOYED, Market, Matching


def count_matchings(market: Market) -> int:
    """Number of matchings: sum over k of C(m,k) * P(num_students,k)."""
    m = market.num_hospitals
    n = market.num_students
    return sum(math.comb(m, k) * math.perm(n, k) for k in range(min(m, n) + 1))


@lru_cache(maxsize=None)
def _completion_counts(num_students: int, num_hospitals: int) -> tuple[tuple[int, ...], ...]:
    """table[j][used] = completions for j remaining students, `used` hospitals taken."""
    m = num_hospitals
    table = [[0] * (m + 2) for _ in range(num_students + 1)]
    for used in range(m + 1):
        table[0][used] = 1
    for j in range(1, num_students + 1):
        for used in range(m, -1, -1):
            table[j][used] = table[j - 1][used] + (m - used) * table[j - 1][used + 1]
    return tuple(tuple(row) for row in table)


def encode_matching(market: Market, matching: Matching) -> int:
    """Canonical dense code of a matching; inverse of decode_matching."""
    market.check_matching(matching)
    m = market.num_hospitals
    n = market.num_students
    table = _completion_counts(n, m)
    used: set[int] = set()
    code = 0
    for s, slot in enumerate(matching.slots):
        left = n - s - 1
        if slot == UNEMPLOYED:
            continue
        code += table[left][len(used)]  # the unemployment block
        for h in range(slot):
            if h not in used:
                code += table[left][len(used) + 1]
        used.add(slot)
    return code


def decode_matching(market: Market, code: int) -> Matching:
    m = market.num_hospitals
    n = market.num_students
    total = count_matchings(market)
    if not 0 <= code < total:
        raise ValueError(f"matching code {code} out of range [0, {total})")
    table = _completion_counts(n, m)
    used: set[int] = set()
    slots = []
    rem = code
    for s in range(n):
        left = n - s - 1
        block = table[left][len(used)]
        if rem < block:
            slots.append(UNEMPLOYED)
            continue
        rem -= block
        placed = False
        for h in range(m):
            if h in used:
                continue
            block = table[left][len(used) + 1]
            if rem < block:
                slots.append(h)
                used.add(h)
                placed = True
                break
            rem -= block
        assert placed
    return Matching(tuple(slots))


def enumerate_matchings(market: Market) -> Iterator[Matching]:
    """Yield every matching exactly once, in canonical-code order (lazy)."""
    n = market.num_students
    m = market.num_hospitals
    slots = [UNEMPLOYED] * n

    def rec(s: int, used: int) -> Iterator[Matching]:
        if s == n:
            yield Matching(tuple(slots))
            return
        slots[s] = UNEMPLOYED
        yield from rec(s + 1, used)
        for h in range(m):
            if used >> h & 1:
                continue
            slots[s] = h
            yield from rec(s + 1, used | (1 << h))
        slots[s] = UNEMPLOYED

    return rec(0, 0)


def enumerate_ir_matchings(market: Market) -> Iterator[Matching]:
    """Matchings with no one-sided blocking coalition, in canonical order."""
    from .blocking import is_individually_rational

    for matching in enumerate_matchings(market):
        if is_individually_rational(market, matching):
            yield matching


def slot_table(market: Market, limit: int = 2_000_000) -> np.ndarray:
    """Materialize all matchings as an int8 array of shape (count, num_students).

    Row ``i`` is the matching with code ``i``.  Vectorized unranking: per
    student the remaining-completion counts depend only on how many
    hospitals are already used, so every code's digit can be peeled off in
    one pass over the code array.
    """
    n = market.num_students
    m = market.num_hospitals
    total = count_matchings(market)
    if total > limit:
        raise ValueError(f"matching space too large to materialize ({total} > {limit})")
    if m > 62:
        raise ValueError("slot_table supports at most 62 hospitals")
    table = np.array(_completion_counts(n, m), dtype=np.int64)  # (n+1, m+2)
    rem = np.arange(total, dtype=np.int64)
    used_count = np.zeros(total, dtype=np.int64)
    used_mask = np.zeros(total, dtype=np.int64)
    out = np.full((total, max(n, 1)), UNEMPLOYED, dtype=np.int8)
    for s in range(n):
        left = n - s - 1
        block_u = table[left, used_count]
        is_u = rem < block_u
        assigned = is_u.copy()
        rem = np.where(is_u, rem, rem - block_u)
        for h in range(m):
            free = (used_mask >> h & 1) == 0
            cand = ~assigned & free
            block_h = table[left, np.minimum(used_count + 1, m + 1)]
            take = cand & (rem < block_h)
            out[take, s] = h
            used_mask = np.where(take, used_mask | (1 << h), used_mask)
            used_count = np.where(take, used_count + 1, used_count)
            rem = np.where(cand & ~take, rem - block_h, rem)
            assigned |= take
    return out[:, :n]


def assignee_table(market: Market, slots: np.ndarray) -> np.ndarray:
    """Inverse view of a slot table: (count, num_hospitals), UNFILLED for empty."""
    total = slots.shape[0]
    inv = np.full((total, max(market.num_hospitals, 1)), -1, dtype=np.int16)
    for s in range(market.num_students):
        col = slots[:, s].astype(np.int16)
        matched = col >= 0
        inv[np.nonzero(matched)[0], col[matched]] = s
    return inv[:, : market.num_hospitals]


def pair_code_table(market: Market, slots: np.ndarray, couple: int) -> np.ndarray:
    """Per-matching dense pair codes for one couple (indexes the couple rank row)."""
    s1, s2 = market.members(couple)
    m = market.num_hospitals
    a = slots[:, s1].astype(np.int32)
    b = slots[:, s2].astype(np.int32)
    return (a + 1) * (m + 1) + (b + 1)
