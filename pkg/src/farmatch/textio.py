"""Parse and serialize markets and matchings.

Market files (`.cm`) are line oriented, `#` starts a comment:

    hospitals: h1 h2 h3
    couple c1 = (s1, s2)
    prefs hospital h1: s2 > s1
    prefs couple c1: (h3,h1) > (h2,h3) > (h1,h2)

Identifiers match ``[A-Za-z][A-Za-z0-9_]*``; ``u`` is reserved for the
unemployed slot.  A matching literal is ``{s1:h2, s2:h3, s3:u}``; omitted
students default to unemployed.  Serialization is deterministic (agents in
index order) and round-trips with parsing up to whitespace and comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .model import (
    UNEMPLOYED,
    Market,
    MarketError,
    Matching,
    RawMarket,
    validate_market,
)

_IDENT = r"[A-Za-z][A-Za-z0-9_]*"
_RE_HOSPITALS = re.compile(rf"^hospitals:\s*(?P<names>({_IDENT}(\s+{_IDENT})*)?)\s*$")
_RE_COUPLE = re.compile(
    rf"^couple\s+(?P<name>{_IDENT})\s*=\s*\(\s*(?P<a>{_IDENT})\s*,\s*(?P<b>{_IDENT})\s*\)\s*$"
)
_RE_PREFS_H = re.compile(rf"^prefs\s+hospital\s+(?P<name>{_IDENT})\s*:(?P<body>.*)$")
_RE_PREFS_C = re.compile(rf"^prefs\s+couple\s+(?P<name>{_IDENT})\s*:(?P<body>.*)$")
_RE_PAIR = re.compile(rf"^\(\s*(?P<a>{_IDENT})\s*,\s*(?P<b>{_IDENT})\s*\)$")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class FormatError(ValueError):
    """Raised on malformed market or matching text."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(str(d) for d in self.diagnostics) or "parse error"
        super().__init__(msg)


def parse_market_with_diagnostics(
    text: str,
) -> tuple[Optional[Market], list[Diagnostic]]:
    """Parse market text; return (market or None, all diagnostics)."""
    diags: list[Diagnostic] = []
    hospitals: list[str] = []
    couples: list[tuple[str, tuple[str, str]]] = []
    hospital_prefs: list[tuple[str, tuple[str, ...]]] = []
    couple_prefs: list[tuple[str, tuple[tuple[str, str], ...]]] = []
    positions: dict = {}
    saw_hospitals = False

    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        col = indent + 1

        if line.startswith("hospitals:"):
            m = _RE_HOSPITALS.match(line)
            if not m:
                diags.append(Diagnostic("error", "malformed hospitals line", lineno, col))
                continue
            if saw_hospitals:
                diags.append(
                    Diagnostic("error", "duplicate hospitals line", lineno, col)
                )
                continue
            saw_hospitals = True
            names = m.group("names").split()
            hospitals.extend(names)
            for name in names:
                positions.setdefault(("hospital", name), (lineno, col))
        elif line.startswith("couple "):
            m = _RE_COUPLE.match(line)
            if not m:
                diags.append(
                    Diagnostic("error", "malformed couple line (expected "
                               "'couple NAME = (A, B)')", lineno, col)
                )
                continue
            couples.append((m.group("name"), (m.group("a"), m.group("b"))))
            positions.setdefault(("couple", m.group("name")), (lineno, col))
        elif line.startswith("prefs "):
            mh = _RE_PREFS_H.match(line)
            mc = _RE_PREFS_C.match(line)
            if mh:
                name, body = mh.group("name"), mh.group("body")
                entries, ok = _split_entries(body, lineno, col, diags)
                if not ok:
                    continue
                for e in entries:
                    if not re.fullmatch(_IDENT, e):
                        diags.append(
                            Diagnostic("error", f"bad student id {e!r}", lineno,
                                       col + line.find(e))
                        )
                        ok = False
                if ok:
                    hospital_prefs.append((name, tuple(entries)))
                    positions.setdefault(("prefs hospital", name), (lineno, col))
            elif mc:
                name, body = mc.group("name"), mc.group("body")
                entries, ok = _split_entries(body, lineno, col, diags)
                if not ok:
                    continue
                pairs = []
                for e in entries:
                    pm = _RE_PAIR.match(e)
                    if not pm:
                        diags.append(
                            Diagnostic("error", f"bad slot pair {e!r} (expected "
                                       "'(X,Y)')", lineno, col + line.find(e))
                        )
                        ok = False
                        continue
                    pairs.append((pm.group("a"), pm.group("b")))
                if ok:
                    couple_prefs.append((name, tuple(pairs)))
                    positions.setdefault(("prefs couple", name), (lineno, col))
            else:
                diags.append(
                    Diagnostic("error", "malformed prefs line (expected "
                               "'prefs hospital H: ...' or 'prefs couple C: ...')",
                               lineno, col)
                )
        else:
            diags.append(
                Diagnostic("error", f"unrecognized line {line.split()[0]!r}",
                           lineno, col)
            )

    if not saw_hospitals:
        diags.append(Diagnostic("error", "missing hospitals line", 1, 1))
    if any(d.severity == "error" for d in diags):
        return None, diags

    raw = RawMarket(
        hospitals=tuple(hospitals),
        couples=tuple(couples),
        hospital_prefs=tuple(hospital_prefs),
        couple_prefs=tuple(couple_prefs),
        positions=positions,
    )
    try:
        market = validate_market(raw)
    except MarketError as exc:
        return None, diags + list(exc.diagnostics)
    return market, diags


def _split_entries(body: str, lineno: int, col: int, diags) -> tuple[list[str], bool]:
    body = body.strip()
    if not body:
        return [], True
    entries = [e.strip() for e in body.split(">")]
    if any(not e for e in entries):
        diags.append(Diagnostic("error", "empty entry in preference list", lineno, col))
        return [], False
    return entries, True


def parse_market(text: str) -> Market:
    market, diags = parse_market_with_diagnostics(text)
    if market is None:
        raise FormatError(diags)
    return market


def parse_matching(text: str, market: Market) -> Matching:
    """Parse a matching literal like ``{s1:h2, s2:u}`` against a market."""
    diags: list[Diagnostic] = []
    stripped = text.strip()
    if not (stripped.startswith("{") and stripped.endswith("}")):
        raise FormatError([Diagnostic("error", "matching literal must be braced", 1, 1)])
    body = stripped[1:-1].strip()
    students = {name: i for i, name in enumerate(market.student_names)}
    hospitals = {name: i for i, name in enumerate(market.hospital_names)}
    slots = [UNEMPLOYED] * market.num_students
    assigned_students: set[int] = set()
    used_hospitals: dict[int, str] = {}
    if body:
        for item in body.split(","):
            item = item.strip()
            m = re.fullmatch(rf"(?P<s>{_IDENT})\s*:\s*(?P<t>{_IDENT})", item)
            if not m:
                diags.append(Diagnostic("error", f"bad assignment {item!r}", 1, 1))
                continue
            sname, tname = m.group("s"), m.group("t")
            if sname not in students:
                diags.append(Diagnostic("error", f"unknown student '{sname}'", 1, 1))
                continue
            s = students[sname]
            if s in assigned_students:
                diags.append(Diagnostic("error", f"student '{sname}' assigned twice", 1, 1))
                continue
            assigned_students.add(s)
            if tname == "u":
                continue
            if tname not in hospitals:
                diags.append(Diagnostic("error", f"unknown hospital '{tname}'", 1, 1))
                continue
            h = hospitals[tname]
            if h in used_hospitals:
                diags.append(
                    Diagnostic("error", f"hospital '{tname}' assigned twice", 1, 1)
                )
                continue
            used_hospitals[h] = sname
            slots[s] = h
    if diags:
        raise FormatError(diags)
    matching = Matching(tuple(slots))
    market.check_matching(matching)
    return matching


def serialize_market(market: Market) -> str:
    lines = ["hospitals: " + " ".join(market.hospital_names)]
    for c in range(market.num_couples):
        s1, s2 = market.members(c)
        lines.append(
            f"couple {market.couple_names[c]} = "
            f"({market.student_names[s1]}, {market.student_names[s2]})"
        )
    for h in range(market.num_hospitals):
        listed = " > ".join(market.student_names[s] for s in market.hospital_lists[h])
        lines.append(f"prefs hospital {market.hospital_names[h]}:" + (f" {listed}" if listed else ""))
    for c in range(market.num_couples):
        listed = " > ".join(market.pair_name(p) for p in market.couple_lists[c])
        lines.append(f"prefs couple {market.couple_names[c]}:" + (f" {listed}" if listed else ""))
    return "\n".join(lines) + "\n"


def serialize_matching(market: Market, matching: Matching) -> str:
    items = [
        f"{market.student_names[s]}:{market.slot_name(t)}"
        for s, t in enumerate(matching.slots)
    ]
    return "{" + ", ".join(items) + "}"


def parse_matching_set(text: str, market: Market) -> list[Matching]:
    """Parse a set literal: matching literals separated by ';' inside braces.

    Example: ``{ {s1:h1, s2:h2} ; {s3:h2} }``.
    """
    stripped = text.strip()
    if not (stripped.startswith("{") and stripped.endswith("}")):
        raise FormatError([Diagnostic("error", "set literal must be braced", 1, 1)])
    body = stripped[1:-1].strip()
    if "{" not in body:
        # a bare matching literal denotes the singleton set containing it
        return [parse_matching(stripped, market)]
    if not body:
        raise FormatError([Diagnostic("error", "empty matching set", 1, 1)])
    return [parse_matching(part, market) for part in body.split(";")]
