"""Seeded random market generation.

Hospitals draw a uniform random subset of students of the requested list
length and order it uniformly; couples do the same over the slot-pair
domain (all hospital/unemployment pairs except same-hospital pairs and the
both-unemployed pair).  Everything is driven by a single seeded generator,
so identical parameters and seed reproduce identical markets byte for
byte.
"""

from __future__ import annotations

import random
from typing import Optional

from .model import Market, market_from_lists

PRNG_NAME = "random.Random (Mersenne Twister)"


def pair_domain(num_hospitals: int) -> list[tuple[str, str]]:
    """All listable slot pairs, as names, in canonical order."""
    names = ["u"] + [f"h{i + 1}" for i in range(num_hospitals)]
    out = []
    for a in names:
        for b in names:
            if a == b == "u":
                continue
            if a != "u" and a == b:
                continue
            out.append((a, b))
    return out


def generate_market(
    rng: random.Random,
    hospitals: int,
    couples: int,
    hospital_list_len: Optional[int] = None,
    couple_list_len: Optional[int] = None,
) -> Market:
    """One random market; list lengths default to full-length lists."""
    num_students = 2 * couples
    hospital_names = [f"h{i + 1}" for i in range(hospitals)]
    student_names = [f"s{i + 1}" for i in range(num_students)]
    couple_names = [f"c{i + 1}" for i in range(couples)]
    domain = pair_domain(hospitals)

    h_len = num_students if hospital_list_len is None else hospital_list_len
    c_len = len(domain) if couple_list_len is None else couple_list_len
    if not 0 <= h_len <= num_students:
        raise ValueError(
            f"hospital list length {h_len} infeasible with {num_students} students"
        )
    if not 0 <= c_len <= len(domain):
        raise ValueError(
            f"couple list length {c_len} infeasible with {len(domain)} listable pairs"
        )

    hospital_prefs = {
        name: rng.sample(student_names, h_len) for name in hospital_names
    }
    couple_prefs = {
        name: rng.sample(domain, c_len) for name in couple_names
    }
    return market_from_lists(
        hospital_names,
        [(couple_names[k], (student_names[2 * k], student_names[2 * k + 1]))
         for k in range(couples)],
        hospital_prefs,
        couple_prefs,
    )


def random_corpus_market(rng: random.Random, max_hospitals: int = 3,
                         max_couples: int = 2) -> Market:
    """A small random market with heterogeneous truncated lists.

    Used by the property suites: sizes and per-agent list lengths vary so
    boundary behavior (empty lists, unacceptable partners) gets exercised.
    """
    hospitals = rng.randint(1, max_hospitals)
    couples = rng.randint(1, max_couples)
    num_students = 2 * couples
    hospital_names = [f"h{i + 1}" for i in range(hospitals)]
    student_names = [f"s{i + 1}" for i in range(num_students)]
    couple_names = [f"c{i + 1}" for i in range(couples)]
    domain = pair_domain(hospitals)
    hospital_prefs = {
        name: rng.sample(student_names, rng.randint(0, num_students))
        for name in hospital_names
    }
    couple_prefs = {
        name: rng.sample(domain, rng.randint(0, min(len(domain), 6)))
        for name in couple_names
    }
    return market_from_lists(
        hospital_names,
        [(couple_names[k], (student_names[2 * k], student_names[2 * k + 1]))
         for k in range(couples)],
        hospital_prefs,
        couple_prefs,
    )
