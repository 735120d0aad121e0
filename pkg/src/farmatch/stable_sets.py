"""Farsighted stable sets and DEM farsighted stable sets.

A set of matchings is farsighted stable when no member indirectly
dominates another member (internal stability) and every matching outside
the set is indirectly dominated by some member (external stability).

A DEM farsighted stable set replaces internal stability by deterrence of
external deviations plus minimality: every coalition move from a member to
an outside matching is deterred by some member dominating the deviation
target while not every mover strictly gains relative to where it started;
and no proper nonempty subset satisfies both deterrence and external
stability.  "Not every mover strictly gains" is the reading of the
deterrence comparison that matches the worked deterrence narratives; it
makes the member a credible threat as soon as one mover fails to profit.

Checking deterrence only over inclusion-minimal enforcing coalitions is
equivalent to checking all enforcing coalitions: supersets only add
members, and a deterring threat that fails to profit one member of a
coalition fails a member of every superset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .blocking import is_stable, minimal_enforcing_coalitions
from .dominance import (
    DEFAULT_POLICY,
    DominancePath,
    DominancePolicy,
    MarketAnalysis,
)
from .enumeration import enumerate_matchings
from .model import Coalition, Market, Matching


@dataclass(frozen=True)
class DeterrenceFailure:
    member: Matching
    deviation: Matching
    coalition: Coalition
    reason: str


@dataclass(frozen=True)
class StableSetReport:
    """Per-condition verdicts for a candidate set, with counterexamples.

    ``verdict`` is None when some required dominance query was undecided;
    otherwise it is False exactly when a violation list is nonempty.
    """

    kind: str
    members: tuple[Matching, ...]
    verdict: Optional[bool]
    internal_violations: tuple[tuple[Matching, Matching, Optional[DominancePath]], ...] = ()
    external_uncovered: tuple[Matching, ...] = ()
    deterrence_failures: tuple[DeterrenceFailure, ...] = ()
    minimality_witness: Optional[tuple[Matching, ...]] = None
    unknown_pairs: tuple[tuple[Matching, Matching], ...] = ()
    detail: str = ""


def stable_matchings(market: Market, mode: str = "extended") -> list[Matching]:
    """All stable matchings in canonical order (extended block mode by default)."""
    from .blocking import stable_matchings as _scan

    return _scan(market, mode)


def singleton_fss(market: Market, debug_verify: bool = False,
                  policy: DominancePolicy = DEFAULT_POLICY) -> list[Matching]:
    """Matchings whose singleton is a farsighted stable set.

    These are exactly the stable matchings; with ``debug_verify`` each one
    is re-checked through the full set verifier.
    """
    out = stable_matchings(market)
    if debug_verify:
        analysis = MarketAnalysis(market, policy)
        for mu in out:
            report = verify_fss(market, [mu], policy, analysis=analysis)
            if report.verdict is not True:
                raise AssertionError(
                    "stable matching failed singleton verification"
                )
    return out


def _dominance_rows(
    analysis: MarketAnalysis, members: Sequence[Matching]
) -> tuple[Optional[np.ndarray], str]:
    """Stacked dominance rows for the members, or None with a reason."""
    rows = []
    for mu in members:
        try:
            rows.append(analysis.dominance_row(mu))
        except ValueError as exc:
            return None, str(exc)
    return np.vstack(rows) if rows else None, ""


def verify_fss(
    market: Market,
    members: Sequence[Matching],
    policy: DominancePolicy = DEFAULT_POLICY,
    analysis: Optional[MarketAnalysis] = None,
) -> StableSetReport:
    """Check internal and external stability of a candidate set."""
    members = _normalize(market, members)
    analysis = analysis or MarketAnalysis(market, policy)

    internal: list[tuple[Matching, Matching, Optional[DominancePath]]] = []
    unknown: list[tuple[Matching, Matching]] = []
    for a in members:
        for b in members:
            if a == b:
                continue
            verdict = analysis.verdict(a, b)
            if verdict.result is True:
                internal.append((a, b, verdict.path))
            elif verdict.result is None:
                unknown.append((a, b))

    uncovered: list[Matching] = []
    detail = ""
    rows, reason = _dominance_rows(analysis, members)
    if rows is None:
        detail = f"external stability undecided: {reason}"
        verdict = False if internal else None
        return StableSetReport(
            "fss", tuple(members), verdict,
            internal_violations=tuple(internal),
            unknown_pairs=tuple(unknown), detail=detail,
        )
    covered = rows.any(axis=0)
    member_codes = np.array([analysis.code_of(mu) for mu in members], dtype=np.int64)
    covered[member_codes] = True
    for code in np.nonzero(~covered)[0]:
        uncovered.append(analysis.matching_of(int(code)))

    if unknown and not internal and not uncovered:
        verdict: Optional[bool] = None
    else:
        verdict = not internal and not uncovered
    return StableSetReport(
        "fss",
        tuple(members),
        verdict,
        internal_violations=tuple(internal),
        external_uncovered=tuple(uncovered),
        unknown_pairs=tuple(unknown),
    )


def _normalize(market: Market, members: Sequence[Matching]) -> list[Matching]:
    if not members:
        raise ValueError("a candidate stable set must be nonempty")
    seen = set()
    out = []
    for mu in members:
        market.check_matching(mu)
        if mu.slots not in seen:
            seen.add(mu.slots)
            out.append(mu)
    return out


# -- DEM sets -------------------------------------------------------------------


def _satisfies_deterrence(
    market: Market,
    analysis: MarketAnalysis,
    member_list: list[Matching],
    rows: np.ndarray,
    collect: bool = False,
) -> tuple[bool, list[DeterrenceFailure]]:
    """Condition: every enforceable deviation from a member to an outside
    matching is deterred by some member dominating the deviation while not
    every deviator strictly gains over the origin."""
    failures: list[DeterrenceFailure] = []
    member_codes = {analysis.code_of(mu) for mu in member_list}
    count = analysis.count
    for mu in member_list:
        for code in range(count):
            if code in member_codes:
                continue
            target = analysis.matching_of(code)
            dominators = [
                member_list[i]
                for i in range(len(member_list))
                if rows[i][code]
            ]
            for coalition in minimal_enforcing_coalitions(market, mu, target):
                if not _deterred(market, mu, coalition, dominators):
                    failures.append(
                        DeterrenceFailure(
                            mu, target, coalition,
                            "no member dominates the deviation while leaving "
                            "a deviator no better off",
                        )
                    )
                    if not collect:
                        return False, failures
    return not failures, failures


def _deterred(
    market: Market, origin: Matching, coalition: Coalition, dominators: list[Matching]
) -> bool:
    for threat in dominators:
        if not _all_strictly_prefer(market, coalition, threat, origin):
            return True
    return False


def _all_strictly_prefer(
    market: Market, coalition: Coalition, new: Matching, old: Matching
) -> bool:
    for h in coalition.hospitals():
        a, b = new.assignee_of(h), old.assignee_of(h)
        if a == b or market.hospital_rank(h, a) >= market.hospital_rank(h, b):
            return False
    for c in coalition.couples():
        p, q = new.pair_of(c), old.pair_of(c)
        if p == q or market.couple_rank(c, p) >= market.couple_rank(c, q):
            return False
    return True


def _external_ok(analysis: MarketAnalysis, rows: np.ndarray, member_codes) -> bool:
    covered = rows.any(axis=0)
    covered[np.asarray(member_codes, dtype=np.int64)] = True
    return bool(covered.all())


def verify_dem(
    market: Market,
    members: Sequence[Matching],
    policy: DominancePolicy = DEFAULT_POLICY,
    analysis: Optional[MarketAnalysis] = None,
) -> StableSetReport:
    """Check deterrence of external deviations, external stability, and
    minimality of a candidate set."""
    members = _normalize(market, members)
    analysis = analysis or MarketAnalysis(market, policy)
    if len(members) > policy.minimality_cap:
        raise ValueError(
            f"candidate set of {len(members)} exceeds the minimality cap "
            f"({policy.minimality_cap})"
        )
    if analysis.count > policy.exhaustive_cap:
        return StableSetReport(
            "dem", tuple(members), None,
            detail="deterrence scan over the full matching space exceeds "
            f"the exhaustive cap ({policy.exhaustive_cap})",
        )

    rows, reason = _dominance_rows(analysis, members)
    if rows is None:
        return StableSetReport("dem", tuple(members), None,
                               detail=f"undecided: {reason}")

    member_codes = [analysis.code_of(mu) for mu in members]
    covered = rows.any(axis=0)
    covered[np.asarray(member_codes, dtype=np.int64)] = True
    uncovered = [analysis.matching_of(int(i)) for i in np.nonzero(~covered)[0]]

    det_ok, failures = _satisfies_deterrence(market, analysis, members, rows, collect=True)

    minimality_witness = None
    if det_ok and not uncovered and len(members) > 1:
        for size in range(1, len(members)):
            for subset in itertools.combinations(range(len(members)), size):
                sub_members = [members[i] for i in subset]
                sub_rows = rows[list(subset)]
                if not _external_ok(analysis, sub_rows,
                                    [member_codes[i] for i in subset]):
                    continue
                ok, _ = _satisfies_deterrence(market, analysis, sub_members, sub_rows)
                if ok:
                    minimality_witness = tuple(sub_members)
                    break
            if minimality_witness:
                break

    verdict = not failures and not uncovered and minimality_witness is None
    return StableSetReport(
        "dem",
        tuple(members),
        verdict,
        external_uncovered=tuple(uncovered),
        deterrence_failures=tuple(failures),
        minimality_witness=minimality_witness,
    )


# -- enumeration ----------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    """Stable-set search output; ``complete`` is False when the node budget
    ran out (partial results only)."""

    sets: tuple[tuple[Matching, ...], ...]
    complete: bool
    nodes: int


def _pool_codes(analysis: MarketAnalysis, pool) -> list[int]:
    if isinstance(pool, str):
        if pool == "ir":
            return [int(i) for i in np.nonzero(analysis.ir_mask)[0]]
        if pool == "all":
            return list(range(analysis.count))
        raise ValueError(f"unknown pool {pool!r}")
    return sorted({analysis.code_of(mu) for mu in pool})


def enumerate_fss(
    market: Market,
    pool="ir",
    max_size: Optional[int] = None,
    policy: DominancePolicy = DEFAULT_POLICY,
    analysis: Optional[MarketAnalysis] = None,
    skip_pairs: bool = True,
) -> SearchResult:
    """All farsighted stable sets with members drawn from the pool.

    External stability is always required over the whole matching space;
    the pool only restricts membership.  The search covers uncovered
    matchings most-constrained first with forward checking, then extends
    each covering set with redundant independent members, so it enumerates
    every qualifying subset without sweeping the power set.  Size-2 results
    are suppressed by default (no stable set of cardinality two exists);
    disable ``skip_pairs`` for audits.  Output is ordered by cardinality,
    then lexicographically by matching code.
    """
    analysis = analysis or MarketAnalysis(market, policy)
    pool_codes = _pool_codes(analysis, pool)
    count = analysis.count
    limit = count if max_size is None else max_size
    if limit == 0 or not pool_codes:
        return SearchResult((), True, 0)

    psize = len(pool_codes)
    if psize * count > 200_000_000:
        raise ValueError(
            f"pool of {psize} candidates over {count} matchings exceeds "
            "the search budget; restrict the pool"
        )
    rows_mat = np.zeros((psize, count), dtype=bool)
    for i, code in enumerate(pool_codes):
        try:
            rows_mat[i] = analysis.dominance_row(analysis.matching_of(code))
        except ValueError:
            raise ValueError(
                "pool contains a dominator outside the exhaustive cap; "
                "shrink the pool or raise the cap"
            )

    # candidate i can discharge target t by dominating it or by being it
    cand = rows_mat.copy()
    code_arr = np.asarray(pool_codes, dtype=np.int64)
    cand[np.arange(psize), code_arr] = True
    # adding i bans every pool member adjacent to it in either direction
    sub = rows_mat[:, code_arr]
    adj = sub | sub.T
    np.fill_diagonal(adj, True)

    budget = policy.search_budget
    nodes = 0
    complete = True
    results: set[tuple[int, ...]] = set()

    def run(v: tuple[int, ...], banned: np.ndarray, covered: np.ndarray, min_ext: int):
        nonlocal nodes, complete
        if not complete:
            return
        nodes += 1
        if nodes > budget:
            complete = False
            return
        uncovered = ~covered
        if not uncovered.any():
            if v:
                results.add(tuple(sorted(code_arr[list(v)])))
            if len(v) >= limit:
                return
            local = banned.copy()
            for i in range(min_ext, psize):
                if local[i]:
                    continue
                run(v + (i,), local | adj[i], covered, i + 1)
                local[i] = True
            return
        if len(v) >= limit:
            return
        avail = ~banned
        if not avail.any():
            return
        counts = cand[avail][:, uncovered].sum(axis=0)
        if (counts == 0).any():
            return
        targets = np.nonzero(uncovered)[0]
        target = int(targets[int(np.argmin(counts))])
        local = banned.copy()
        for i in range(psize):
            if local[i] or not cand[i, target]:
                continue
            new_cov = covered | rows_mat[i]
            new_cov[code_arr[i]] = True
            run(v + (i,), local | adj[i], new_cov, 0)
            local[i] = True

    run((), np.zeros(psize, dtype=bool), np.zeros(count, dtype=bool), 0)

    out = []
    for combo in sorted(results, key=lambda t: (len(t), t)):
        if skip_pairs and len(combo) == 2:
            continue
        out.append(tuple(analysis.matching_of(int(c)) for c in combo))
    return SearchResult(tuple(out), complete, nodes)


def enumerate_dem(
    market: Market,
    max_size: int,
    pool="ir",
    policy: DominancePolicy = DEFAULT_POLICY,
    analysis: Optional[MarketAnalysis] = None,
) -> SearchResult:
    """All DEM farsighted stable sets up to ``max_size`` with members from
    the pool, ordered by cardinality then lexicographic code order."""
    analysis = analysis or MarketAnalysis(market, policy)
    pool_codes = _pool_codes(analysis, pool)
    budget = policy.search_budget
    nodes = 0
    complete = True
    results = []
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(pool_codes, size):
            nodes += 1
            if nodes > budget:
                complete = False
                break
            members = [analysis.matching_of(c) for c in combo]
            report = verify_dem(market, members, policy, analysis=analysis)
            if report.verdict is True:
                results.append(tuple(members))
        if not complete:
            break
    return SearchResult(tuple(results), complete, nodes)
