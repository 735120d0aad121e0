"""Domain model for matching markets with couples.

A market has m single-position hospitals and n couples of students
(students come in ordered pairs; a "single" student is encoded as a couple
whose second member appears in no acceptable pair).  Each hospital ranks an
acceptable subset of students; each couple ranks an acceptable subset of
slot pairs, where a slot is either a hospital or unemployment.

Preference lists are truncated: only acceptable entries are written down.
Comparisons are completed into a strict total order by placing the boundary
(the unfilled position for hospitals, the both-unemployed pair for couples)
directly after the listed entries and all unlisted entries after the
boundary in canonical index order.  Entries below the boundary only ever
get compared to each other, so any deterministic completion works; this one
keeps every operation reproducible.

All objects are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

#: Slot value meaning "unemployed" (for students) and assignee value
#: meaning "position unfilled" (for hospitals).  Using -1 for both lets
#: rank arrays be indexed directly with raw slot/assignee values.
UNEMPLOYED = -1
UNFILLED = -1

Pair = tuple[int, int]


class MarketError(ValueError):
    """Raised when a market description violates a model invariant."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(d.message for d in self.diagnostics) or "invalid market"
        super().__init__(msg)


class MatchingError(ValueError):
    """Raised when an assignment violates the matching conditions."""


@dataclass(frozen=True)
class HospitalId:
    index: int
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class StudentId:
    index: int
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class CoupleId:
    index: int
    name: str
    members: tuple[int, int]

    def __str__(self) -> str:
        return self.name


def pair_code(pair: Pair, num_hospitals: int) -> int:
    """Dense integer code of a slot pair; (u,u) is 0."""
    a, b = pair
    return (a + 1) * (num_hospitals + 1) + (b + 1)


def code_pair(code: int, num_hospitals: int) -> Pair:
    a, b = divmod(code, num_hospitals + 1)
    return a - 1, b - 1


_INVALID_RANK = np.iinfo(np.int32).max


class Market:
    """A couples market: hospitals, couples, and both sides' preferences.

    Construct via :func:`validate_market`, :func:`market_from_lists`, or the
    text parser.  ``hospital_lists[h]`` is the ordered tuple of acceptable
    student indices (best first); ``couple_lists[c]`` the ordered tuple of
    acceptable slot pairs.  Students are indexed so that couple ``k`` has
    members ``2k`` and ``2k + 1``.
    """

    def __init__(
        self,
        hospital_names: Sequence[str],
        couple_names: Sequence[str],
        student_names: Sequence[str],
        hospital_lists: Sequence[Sequence[int]],
        couple_lists: Sequence[Sequence[Pair]],
    ):
        self.hospital_names = tuple(hospital_names)
        self.couple_names = tuple(couple_names)
        self.student_names = tuple(student_names)
        self.hospital_lists = tuple(tuple(lst) for lst in hospital_lists)
        self.couple_lists = tuple(tuple((a, b) for a, b in lst) for lst in couple_lists)
        self.num_hospitals = len(self.hospital_names)
        self.num_couples = len(self.couple_names)
        self.num_students = len(self.student_names)
        self._hospital_rank = self._build_hospital_ranks()
        self._couple_rank = self._build_couple_ranks()

    # -- identity helpers -------------------------------------------------

    def hospitals(self) -> list[HospitalId]:
        return [HospitalId(i, n) for i, n in enumerate(self.hospital_names)]

    def couples(self) -> list[CoupleId]:
        return [
            CoupleId(i, n, (2 * i, 2 * i + 1)) for i, n in enumerate(self.couple_names)
        ]

    def students(self) -> list[StudentId]:
        return [StudentId(i, n) for i, n in enumerate(self.student_names)]

    def couple_of_student(self, student: int) -> int:
        return student // 2

    def members(self, couple: int) -> tuple[int, int]:
        return 2 * couple, 2 * couple + 1

    def slot_name(self, slot: int) -> str:
        return "u" if slot == UNEMPLOYED else self.hospital_names[slot]

    def assignee_name(self, assignee: int) -> str:
        return "-" if assignee == UNFILLED else self.student_names[assignee]

    def pair_name(self, pair: Pair) -> str:
        return f"({self.slot_name(pair[0])},{self.slot_name(pair[1])})"

    # -- rank tables -------------------------------------------------------

    def _build_hospital_ranks(self) -> np.ndarray:
        # rank[h, s] for students, rank[h, -1] for the unfilled position.
        n = self.num_students
        rank = np.zeros((max(self.num_hospitals, 1), n + 1), dtype=np.int32)
        for h, listed in enumerate(self.hospital_lists):
            pos = {s: i for i, s in enumerate(listed)}
            boundary = len(listed)
            nxt = boundary + 1
            for s in range(n):
                if s in pos:
                    rank[h, s] = pos[s]
                else:
                    rank[h, s] = nxt
                    nxt += 1
            rank[h, n] = boundary
        return rank

    def _build_couple_ranks(self) -> np.ndarray:
        # rank[c, pair_code]; the diagonal (h,h) codes are poisoned.
        m = self.num_hospitals
        ncodes = (m + 1) * (m + 1)
        rank = np.zeros((max(self.num_couples, 1), ncodes), dtype=np.int32)
        for c, listed in enumerate(self.couple_lists):
            pos = {pair_code(p, m): i for i, p in enumerate(listed)}
            boundary = len(listed)
            rank[c, 0] = pos.get(0, boundary)  # (u,u); never listed
            nxt = boundary + 1
            for code in range(ncodes):
                a, b = code_pair(code, m)
                if a >= 0 and a == b:
                    rank[c, code] = _INVALID_RANK
                    continue
                if code == 0:
                    continue
                if code in pos:
                    rank[c, code] = pos[code]
                else:
                    rank[c, code] = nxt
                    nxt += 1
        return rank

    def hospital_rank(self, h: int, assignee: int) -> int:
        """Rank of a student (or UNFILLED) in h's completed order; lower is better."""
        return int(self._hospital_rank[h, assignee])

    def couple_rank(self, c: int, pair: Pair) -> int:
        code = pair_code(pair, self.num_hospitals)
        r = int(self._couple_rank[c, code])
        if r == _INVALID_RANK:
            raise ValueError(f"pair {self.pair_name(pair)} is outside the pair domain")
        return r

    def valid_pair(self, pair: Pair) -> bool:
        a, b = pair
        m = self.num_hospitals
        if not (UNEMPLOYED <= a < m and UNEMPLOYED <= b < m):
            return False
        return a == UNEMPLOYED or a != b

    # -- matching helpers ---------------------------------------------------

    def check_matching(self, matching: "Matching") -> None:
        """Raise MatchingError unless the assignment satisfies the matching conditions."""
        slots = matching.slots
        if len(slots) != self.num_students:
            raise MatchingError(
                f"expected {self.num_students} student slots, got {len(slots)}"
            )
        seen: dict[int, int] = {}
        for s, t in enumerate(slots):
            if t == UNEMPLOYED:
                continue
            if not 0 <= t < self.num_hospitals:
                raise MatchingError(f"student {self.student_names[s]} has unknown slot {t}")
            if t in seen:
                raise MatchingError(
                    f"hospital {self.hospital_names[t]} assigned twice "
                    f"({self.student_names[seen[t]]} and {self.student_names[s]})"
                )
            seen[t] = s

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Market)
            and self.hospital_names == other.hospital_names
            and self.couple_names == other.couple_names
            and self.student_names == other.student_names
            and self.hospital_lists == other.hospital_lists
            and self.couple_lists == other.couple_lists
        )

    def __hash__(self) -> int:
        return hash(
            (self.hospital_names, self.couple_names, self.student_names,
             self.hospital_lists, self.couple_lists)
        )

    def __repr__(self) -> str:
        return (
            f"Market({self.num_hospitals} hospitals, {self.num_couples} couples)"
        )


@dataclass(frozen=True)
class Matching:
    """Total map student -> slot, injective on hospitals.

    The inverse map hospital -> assignee is derived.  Per couple the
    assignment reads as a slot pair; injectivity rules out both members at
    the same hospital.
    """

    slots: tuple[int, ...]

    @staticmethod
    def everyone_unemployed(market: Market) -> "Matching":
        return Matching((UNEMPLOYED,) * market.num_students)

    @staticmethod
    def from_assignments(market: Market, assignments: dict[int, int]) -> "Matching":
        slots = [UNEMPLOYED] * market.num_students
        for s, h in assignments.items():
            slots[s] = h
        matching = Matching(tuple(slots))
        market.check_matching(matching)
        return matching

    def slot_of(self, student: int) -> int:
        return self.slots[student]

    def pair_of(self, couple: int) -> Pair:
        return self.slots[2 * couple], self.slots[2 * couple + 1]

    def assignee_of(self, hospital: int) -> int:
        for s, t in enumerate(self.slots):
            if t == hospital:
                return s
        return UNFILLED

    def assignees(self, market: Market) -> tuple[int, ...]:
        inv = [UNFILLED] * market.num_hospitals
        for s, t in enumerate(self.slots):
            if t != UNEMPLOYED:
                inv[t] = s
        return tuple(inv)

    def matches(self) -> list[tuple[int, int]]:
        """All (student, hospital) matches."""
        return [(s, t) for s, t in enumerate(self.slots) if t != UNEMPLOYED]

    def replace(self, updates: dict[int, int]) -> "Matching":
        slots = list(self.slots)
        for s, t in updates.items():
            slots[s] = t
        return Matching(tuple(slots))


@dataclass(frozen=True)
class Coalition:
    """A set of hospitals and couples, stored as bitmasks."""

    hospital_mask: int = 0
    couple_mask: int = 0

    @staticmethod
    def of(hospitals: Iterable[int] = (), couples: Iterable[int] = ()) -> "Coalition":
        hm = 0
        for h in hospitals:
            hm |= 1 << h
        cm = 0
        for c in couples:
            cm |= 1 << c
        return Coalition(hm, cm)

    def hospitals(self) -> list[int]:
        return _bits(self.hospital_mask)

    def couples(self) -> list[int]:
        return _bits(self.couple_mask)

    def has_hospital(self, h: int) -> bool:
        return bool(self.hospital_mask >> h & 1)

    def has_couple(self, c: int) -> bool:
        return bool(self.couple_mask >> c & 1)

    def union(self, other: "Coalition") -> "Coalition":
        return Coalition(self.hospital_mask | other.hospital_mask,
                         self.couple_mask | other.couple_mask)

    def issubset(self, other: "Coalition") -> bool:
        return (self.hospital_mask & ~other.hospital_mask) == 0 and (
            self.couple_mask & ~other.couple_mask) == 0

    def is_empty(self) -> bool:
        return self.hospital_mask == 0 and self.couple_mask == 0

    def size(self) -> int:
        return bin(self.hospital_mask).count("1") + bin(self.couple_mask).count("1")

    def describe(self, market: Market) -> str:
        parts = [market.hospital_names[h] for h in self.hospitals()]
        parts += [market.couple_names[c] for c in self.couples()]
        return "{" + ", ".join(parts) + "}"


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# -- preference comparison primitives ---------------------------------------


def hospital_prefers(market: Market, h: int, a: int, b: int) -> bool:
    """Strict comparison a over b in hospital h's completed order.

    ``a`` and ``b`` are student indices or UNFILLED.  Listed students come
    first in list order, then the unfilled position, then unlisted students
    by index.
    """
    if a == b:
        raise ValueError("hospital_prefers compares distinct alternatives only")
    return market.hospital_rank(h, a) < market.hospital_rank(h, b)


def couple_prefers(market: Market, c: int, p: Pair, q: Pair) -> bool:
    """Strict comparison p over q in couple c's completed order over slot pairs."""
    if not market.valid_pair(p):
        raise ValueError(f"pair {p} is outside the pair domain")
    if not market.valid_pair(q):
        raise ValueError(f"pair {q} is outside the pair domain")
    if p == q:
        raise ValueError("couple_prefers compares distinct alternatives only")
    return market.couple_rank(c, p) < market.couple_rank(c, q)


def hospital_prefers_weakly(market: Market, h: int, a: int, b: int) -> bool:
    return a == b or market.hospital_rank(h, a) < market.hospital_rank(h, b)


def couple_prefers_weakly(market: Market, c: int, p: Pair, q: Pair) -> bool:
    return p == q or market.couple_rank(c, p) < market.couple_rank(c, q)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class RawMarket:
    """Unvalidated market description (names, not indices).

    ``positions`` optionally maps description items to (line, column) pairs
    for located diagnostics; the text parser fills it in, programmatic
    construction may leave it empty.
    """

    hospitals: tuple[str, ...]
    couples: tuple[tuple[str, tuple[str, str]], ...]
    hospital_prefs: tuple[tuple[str, tuple[str, ...]], ...]
    couple_prefs: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]
    positions: dict = field(default_factory=dict, compare=False)


def validate_market(raw: RawMarket) -> Market:
    """Build a Market from a raw description, or raise MarketError.

    All violations are collected (with locations when the description
    carries them) rather than stopping at the first.
    """
    from .textio import Diagnostic  # local import to avoid a cycle

    diags: list[Diagnostic] = []

    def err(key, message):
        line, col = raw.positions.get(key, (0, 0))
        diags.append(Diagnostic("error", message, line, col))

    hospital_index: dict[str, int] = {}
    for i, name in enumerate(raw.hospitals):
        if name == "u":
            err(("hospital", name), "'u' is reserved for the unemployed slot")
        elif name in hospital_index:
            err(("hospital", name), f"duplicate hospital id '{name}'")
        else:
            hospital_index[name] = len(hospital_index)

    couple_index: dict[str, int] = {}
    student_index: dict[str, int] = {}
    student_names: list[str] = []
    for cname, (a, b) in raw.couples:
        if cname == "u" or cname in hospital_index:
            err(("couple", cname), f"duplicate or reserved id '{cname}'")
            continue
        if cname in couple_index:
            err(("couple", cname), f"duplicate couple id '{cname}'")
            continue
        couple_index[cname] = len(couple_index)
        for member in (a, b):
            if member == "u" or member in hospital_index or member in couple_index:
                err(("couple", cname), f"duplicate or reserved id '{member}'")
            elif member in student_index:
                err(("couple", cname), f"student '{member}' appears in two couples")
            else:
                student_index[member] = len(student_names)
                student_names.append(member)
        if a == b:
            err(("couple", cname), f"couple '{cname}' lists the same student twice")

    if diags:
        raise MarketError(diags)

    hospital_lists: list[tuple[int, ...]] = [() for _ in hospital_index]
    seen_hospital_prefs: set[str] = set()
    for hname, listed in raw.hospital_prefs:
        key = ("prefs hospital", hname)
        if hname not in hospital_index:
            err(key, f"unknown hospital '{hname}' in prefs")
            continue
        if hname in seen_hospital_prefs:
            err(key, f"duplicate prefs for hospital '{hname}'")
            continue
        seen_hospital_prefs.add(hname)
        out: list[int] = []
        for sname in listed:
            if sname not in student_index:
                err(key, f"unknown student '{sname}' in prefs of '{hname}'")
            elif student_index[sname] in out:
                err(key, f"student '{sname}' listed twice by '{hname}'")
            else:
                out.append(student_index[sname])
        hospital_lists[hospital_index[hname]] = tuple(out)

    couple_lists: list[tuple[Pair, ...]] = [() for _ in couple_index]
    seen_couple_prefs: set[str] = set()
    for cname, listed in raw.couple_prefs:
        key = ("prefs couple", cname)
        if cname not in couple_index:
            err(key, f"unknown couple '{cname}' in prefs")
            continue
        if cname in seen_couple_prefs:
            err(key, f"duplicate prefs for couple '{cname}'")
            continue
        seen_couple_prefs.add(cname)
        out_pairs: list[Pair] = []
        for a, b in listed:
            slots = []
            ok = True
            for nm in (a, b):
                if nm == "u":
                    slots.append(UNEMPLOYED)
                elif nm in hospital_index:
                    slots.append(hospital_index[nm])
                else:
                    err(key, f"unknown hospital '{nm}' in prefs of '{cname}'")
                    ok = False
            if not ok:
                continue
            pair = (slots[0], slots[1])
            if pair == (UNEMPLOYED, UNEMPLOYED):
                err(key, f"couple '{cname}' lists (u,u); the boundary is implied")
            elif pair[0] != UNEMPLOYED and pair[0] == pair[1]:
                err(key, f"couple '{cname}' lists a same-hospital pair {a},{b}")
            elif pair in out_pairs:
                err(key, f"couple '{cname}' lists {a},{b} twice")
            else:
                out_pairs.append(pair)
        couple_lists[couple_index[cname]] = tuple(out_pairs)

    if diags:
        raise MarketError(diags)

    return Market(
        hospital_names=tuple(hospital_index),
        couple_names=tuple(couple_index),
        student_names=tuple(student_names),
        hospital_lists=hospital_lists,
        couple_lists=couple_lists,
    )


def market_from_lists(
    hospitals: Sequence[str],
    couples: Sequence[tuple[str, tuple[str, str]]],
    hospital_prefs: dict[str, Sequence[str]],
    couple_prefs: dict[str, Sequence[tuple[str, str]]],
) -> Market:
    """Convenience constructor from name-based preference lists."""
    raw = RawMarket(
        hospitals=tuple(hospitals),
        couples=tuple((c, (a, b)) for c, (a, b) in couples),
        hospital_prefs=tuple((h, tuple(lst)) for h, lst in hospital_prefs.items()),
        couple_prefs=tuple(
            (c, tuple((a, b) for a, b in lst)) for c, lst in couple_prefs.items()
        ),
    )
    return validate_market(raw)
