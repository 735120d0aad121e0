"""Indirect dominance: layered decision procedures and certificate paths.

``mu`` indirectly dominates ``nu`` when a sequence of enforceable coalition
moves leads from ``nu`` to ``mu`` and every mover strictly prefers the end
matching ``mu`` to the matching at the time of its move.

Decision tiers, cheapest first:

1.  If ``mu`` is individually rational and no hospital-couple pair matched
    at ``nu`` strictly prefers ``nu`` to ``mu``, dominance holds and a
    two-step certificate exists (everyone preferring ``mu`` unmatches, then
    ``mu`` is assembled).
2.  If ``mu`` is individually rational, dominance holds if and only if no
    blocking coalition of ``mu`` is matched at ``nu``.  "Matched" is the
    obstruction test derived from the move dynamics: the rematched member
    holds its target hospital at ``nu`` and the couple cannot be walked to
    a position it wants to leave.  A matched coalition can never be broken
    up (its hospital will not release a member it prefers to its ``mu``
    assignee, and the couple prefers every reachable position to ``mu``),
    so it certifies non-dominance; conversely, with no matched coalition an
    explicit path can always be constructed.
3.  For dominators that are not individually rational no characterization
    is available.  A sound elementary-move search tries to find a path; if
    the matching space is small enough an exhaustive coalition-move
    reachability search decides exactly, otherwise the verdict is Unknown.

Every True verdict carries a replayable path and every characterization
False carries the matched blocking coalition.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .blocking import (
    BlockKind,
    BlockWitness,
    can_enforce,
    is_individually_rational,
    one_sided_blocks,
    two_sided_blocks,
)
from .enumeration import (
    assignee_table,
    count_matchings,
    decode_matching,
    encode_matching,
    enumerate_matchings,
    pair_code_table,
    slot_table,
)
from .model import (
    UNEMPLOYED,
    UNFILLED,
    Coalition,
    Market,
    Matching,
    Pair,
    pair_code,
)


@dataclass(frozen=True)
class DominancePolicy:
    """Budgets for the dominance procedures (results never depend on them,
    only whether a verdict is reached)."""

    exhaustive_cap: int = 5000
    elementary_budget: int = 20000
    table_limit: int = 2_000_000
    scope_cap: int = 4000
    search_budget: int = 500_000
    minimality_cap: int = 20


DEFAULT_POLICY = DominancePolicy()


@dataclass(frozen=True)
class PreferencePartition:
    """Agents split by strict preference between a start and a target matching."""

    better: Coalition
    indifferent: Coalition
    worse: Coalition


def preference_partition(market: Market, start: Matching, target: Matching) -> PreferencePartition:
    """Partition agents by target-vs-start preference.

    Hospitals are indifferent iff they keep the same assignee, couples iff
    they keep the same slot pair; everyone else strictly prefers one side.
    """
    b_h, i_h, w_h = [], [], []
    start_inv = start.assignees(market)
    target_inv = target.assignees(market)
    for h in range(market.num_hospitals):
        if start_inv[h] == target_inv[h]:
            i_h.append(h)
        elif market.hospital_rank(h, target_inv[h]) < market.hospital_rank(h, start_inv[h]):
            b_h.append(h)
        else:
            w_h.append(h)
    b_c, i_c, w_c = [], [], []
    for c in range(market.num_couples):
        p, q = start.pair_of(c), target.pair_of(c)
        if p == q:
            i_c.append(c)
        elif market.couple_rank(c, q) < market.couple_rank(c, p):
            b_c.append(c)
        else:
            w_c.append(c)
    return PreferencePartition(
        better=Coalition.of(b_h, b_c),
        indifferent=Coalition.of(i_h, i_c),
        worse=Coalition.of(w_h, w_c),
    )


def lemma2_sufficient(market: Market, mu: Matching, nu: Matching) -> bool:
    """Sufficient condition for ``mu`` to indirectly dominate ``nu``.

    Requires ``mu`` individually rational.  True iff no hospital matched at
    ``nu`` exists such that both the hospital and the couple of its
    assignee strictly prefer ``nu`` to ``mu``.  (True implies dominance;
    False decides nothing.)
    """
    if not is_individually_rational(market, mu):
        raise ValueError("lemma2_sufficient requires an individually rational dominator")
    if mu == nu:
        return False
    for s, h in nu.matches():
        c = market.couple_of_student(s)
        hospital_wants_nu = market.hospital_rank(h, s) < market.hospital_rank(
            h, mu.assignee_of(h)
        ) and mu.assignee_of(h) != s
        if not hospital_wants_nu:
            continue
        p_nu, p_mu = nu.pair_of(c), mu.pair_of(c)
        if p_nu != p_mu and market.couple_rank(c, p_nu) < market.couple_rank(c, p_mu):
            return False
    return True


# -- matched blocking coalitions ---------------------------------------------


def matched_blocks_of(market: Market, mu: Matching, nu: Matching) -> list[BlockWitness]:
    """Blocking coalitions of ``mu`` realized at ``nu``.

    For an individually rational ``mu`` this is exactly the set of
    obstructions to ``mu`` indirectly dominating ``nu``.  One-sided blocks
    (present only when ``mu`` is not individually rational) are matched
    when the blocking agent holds at ``nu`` an assignment it weakly prefers
    to its assignment at ``mu``; that reading follows the unmatch-refusal
    argument but is validated against the exhaustive oracle rather than
    trusted.
    """
    out = []
    for w in one_sided_blocks(market, mu):
        if _one_sided_matched(market, mu, w, nu):
            out.append(w)
    for w in two_sided_blocks(market, mu, mode="extended"):
        if _two_sided_matched(market, mu, w, nu):
            out.append(w)
    return out


def _one_sided_matched(market: Market, mu: Matching, w: BlockWitness, nu: Matching) -> bool:
    if w.kind is BlockKind.ONE_SIDED_HOSPITAL:
        (h,) = w.hospitals
        return market.hospital_rank(h, nu.assignee_of(h)) <= market.hospital_rank(
            h, mu.assignee_of(h)
        )
    c = w.couple
    return market.couple_rank(c, nu.pair_of(c)) <= market.couple_rank(c, mu.pair_of(c))


def _two_sided_matched(market: Market, mu: Matching, w: BlockWitness, nu: Matching) -> bool:
    """Obstruction test for a two-sided block of ``mu`` at ``nu``.

    Full-pair targets must be held exactly.  For a partial target (one
    member to hospital ``h``, partner unemployed) the member must hold
    ``h`` at ``nu`` and the partner must either be unemployed already or be
    held by a hospital that strictly prefers its ``mu`` assignee (so the
    partner can be evicted without the couple's consent) while the couple
    strictly prefers its full ``nu`` pair to its ``mu`` pair.  Without the
    eviction the couple could simply walk away from a full pair it ranks
    below ``mu``, which is no obstruction.
    """
    c = w.couple
    s1, s2 = market.members(c)
    t1, t2 = w.target
    if t1 != UNEMPLOYED and t2 != UNEMPLOYED:
        return nu.pair_of(c) == w.target
    if t1 != UNEMPLOYED:
        member, partner, h = s1, s2, t1
    else:
        member, partner, h = s2, s1, t2
    if nu.slot_of(member) != h:
        return False
    partner_slot = nu.slot_of(partner)
    if partner_slot == UNEMPLOYED:
        return True
    evictable = market.hospital_rank(
        partner_slot, mu.assignee_of(partner_slot)
    ) < market.hospital_rank(partner_slot, partner)
    if not evictable:
        return False
    nu_pair, mu_pair = nu.pair_of(c), mu.pair_of(c)
    return nu_pair != mu_pair and market.couple_rank(c, nu_pair) < market.couple_rank(
        c, mu_pair
    )


# -- certificates --------------------------------------------------------------


@dataclass(frozen=True)
class DominancePath:
    """Certificate: matchings and moving coalitions from start to final."""

    steps: tuple[tuple[Matching, Coalition], ...]
    final: Matching

    def matchings(self) -> list[Matching]:
        return [m for m, _ in self.steps] + [self.final]

    def coalitions(self) -> list[Coalition]:
        return [t for _, t in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def replay_dominance_path(market: Market, path: DominancePath) -> bool:
    """Check a path against the defining conditions (enforceability and the
    movers' strict preference for the final matching)."""
    if not path.steps:
        return False
    seq = path.matchings()
    final = path.final
    for k, (current, coalition) in enumerate(path.steps):
        nxt = seq[k + 1]
        if not can_enforce(market, current, nxt, coalition):
            return False
        fin_inv = final.assignees(market)
        cur_inv = current.assignees(market)
        for h in coalition.hospitals():
            if fin_inv[h] == cur_inv[h] or market.hospital_rank(
                h, fin_inv[h]
            ) >= market.hospital_rank(h, cur_inv[h]):
                return False
        for c in coalition.couples():
            p, q = final.pair_of(c), current.pair_of(c)
            if p == q or market.couple_rank(c, p) >= market.couple_rank(c, q):
                return False
    return True


def construct_dominance_path(market: Market, mu: Matching, nu: Matching) -> DominancePath:
    """Build an explicit dominance path from ``nu`` to ``mu``.

    Preconditions: ``mu`` individually rational, distinct from ``nu``, with
    no blocking coalition matched at ``nu``.  Step one: every agent
    strictly preferring ``mu`` destroys its matches.  Step two: couples
    left holding a foreign match whose partner was evicted walk away (this
    folds into step three whenever the couple also builds a new match).
    Step three: the missing matches of ``mu`` are formed by their members.
    """
    if mu == nu:
        raise ValueError("a matching does not dominate itself")
    if not is_individually_rational(market, mu):
        raise ValueError("construct_dominance_path requires an IR dominator")
    obstructions = matched_blocks_of(market, mu, nu)
    if obstructions:
        raise ValueError(
            "dominance does not hold: blocking coalition "
            f"{obstructions[0].describe(market)} is matched at the start"
        )

    part = preference_partition(market, nu, mu)
    better = part.better

    steps: list[tuple[Matching, Coalition]] = []
    current = nu

    # step 1: agents preferring mu unmatch everything they are involved in
    destroyed = [
        (s, h)
        for s, h in current.matches()
        if better.has_hospital(h) or better.has_couple(market.couple_of_student(s))
    ]
    if destroyed:
        movers_h = [h for _, h in destroyed if better.has_hospital(h)]
        movers_c = [
            market.couple_of_student(s)
            for s, _ in destroyed
            if better.has_couple(market.couple_of_student(s))
        ]
        coalition = Coalition.of(movers_h, movers_c)
        nxt = current.replace({s: UNEMPLOYED for s, _ in destroyed})
        steps.append((current, coalition))
        current = nxt

    # survivors: foreign matches whose sides both weakly prefer nu
    survivors = [(s, h) for s, h in current.matches() if mu.slot_of(s) != h]
    builder_couples = {
        market.couple_of_student(s)
        for s, h in mu.matches()
        if current.slot_of(s) != h
    }
    separate = [
        (s, h)
        for s, h in survivors
        if market.couple_of_student(s) not in builder_couples
    ]
    if separate:
        coalition = Coalition.of([], [market.couple_of_student(s) for s, _ in separate])
        nxt = current.replace({s: UNEMPLOYED for s, _ in separate})
        steps.append((current, coalition))
        current = nxt

    # final step: assemble mu (folded survivor matches break here, covered
    # by their couples being forced members)
    if current != mu:
        forming = [(s, h) for s, h in mu.matches() if current.slot_of(s) != h]
        coalition = Coalition.of(
            [h for _, h in forming],
            [market.couple_of_student(s) for s, _ in forming],
        )
        steps.append((current, coalition))
        current = mu

    path = DominancePath(tuple(steps), mu)
    if not replay_dominance_path(market, path):
        raise AssertionError("constructed dominance path failed replay")
    return path


# -- verdicts -------------------------------------------------------------------


@dataclass(frozen=True)
class DominanceVerdict:
    """Outcome of an indirect-dominance query.

    ``result`` is True/False/None (None = undecided within budget).  True
    verdicts carry a replayable path; characterization-based False verdicts
    carry the matched blocking coalition.
    """

    result: Optional[bool]
    path: Optional[DominancePath] = None
    witness: Optional[BlockWitness] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.result is True


def indirectly_dominates(
    market: Market,
    mu: Matching,
    nu: Matching,
    policy: DominancePolicy = DEFAULT_POLICY,
    analysis: "MarketAnalysis | None" = None,
) -> DominanceVerdict:
    """Decide whether ``mu`` indirectly dominates ``nu`` (with certificate)."""
    if analysis is not None:
        return analysis.verdict(mu, nu)
    return _decide(market, mu, nu, policy, analysis=None)


def _decide(
    market: Market,
    mu: Matching,
    nu: Matching,
    policy: DominancePolicy,
    analysis: "MarketAnalysis | None",
) -> DominanceVerdict:
    if mu == nu:
        return DominanceVerdict(False, detail="a matching never dominates itself")
    if is_individually_rational(market, mu):
        if lemma2_sufficient(market, mu, nu):
            return DominanceVerdict(
                True,
                path=construct_dominance_path(market, mu, nu),
                detail="no matched pair prefers the start",
            )
        matched = matched_blocks_of(market, mu, nu)
        if matched:
            return DominanceVerdict(
                False,
                witness=matched[0],
                detail="blocking coalition of the dominator is matched at the start",
            )
        return DominanceVerdict(True, path=construct_dominance_path(market, mu, nu))
    found = _elementary_search(market, mu, nu, policy)
    if found is not None:
        return DominanceVerdict(True, path=found, detail="elementary-move search")
    total = count_matchings(market)
    if total <= policy.exhaustive_cap:
        path = _oracle_path(market, mu, nu, policy, analysis)
        if path is not None:
            return DominanceVerdict(True, path=path, detail="exhaustive search")
        matched = matched_blocks_of(market, mu, nu)
        return DominanceVerdict(
            False,
            witness=matched[0] if matched else None,
            detail="exhaustive coalition-move search exhausted the matching space",
        )
    return DominanceVerdict(
        None,
        detail=f"dominator not individually rational and matching space "
        f"({total}) exceeds the exhaustive cap ({policy.exhaustive_cap})",
    )


def _strictly_prefers(market: Market, final: Matching, current: Matching,
                      hospital: Optional[int] = None, couple: Optional[int] = None) -> bool:
    if hospital is not None:
        a, b = final.assignee_of(hospital), current.assignee_of(hospital)
        return a != b and market.hospital_rank(hospital, a) < market.hospital_rank(hospital, b)
    p, q = final.pair_of(couple), current.pair_of(couple)
    return p != q and market.couple_rank(couple, p) < market.couple_rank(couple, q)


def _elementary_search(
    market: Market, mu: Matching, nu: Matching, policy: DominancePolicy
) -> Optional[DominancePath]:
    """Sound breadth-first path search over elementary coalition moves.

    Moves: one hospital releases its assignee; one couple retargets both
    members to any slot pair (hospitals it newly occupies join the
    coalition, displaced outsiders need no consent).  Every mover must
    strictly prefer ``mu`` to the matching at its move.  Finding ``mu``
    proves dominance; not finding it proves nothing.
    """
    start = nu.slots
    goal = mu.slots
    if start == goal:
        return None
    parents: dict[tuple, tuple[tuple, Coalition]] = {start: (None, None)}
    queue = deque([start])
    budget = policy.elementary_budget
    m = market.num_hospitals
    while queue and budget > 0:
        cur_slots = queue.popleft()
        budget -= 1
        current = Matching(cur_slots)
        for nxt_slots, coalition in _elementary_moves(market, current, mu):
            if nxt_slots in parents:
                continue
            parents[nxt_slots] = (cur_slots, coalition)
            if nxt_slots == goal:
                return _path_from_parents(market, parents, start, goal, mu)
            queue.append(nxt_slots)
    return None


def _elementary_moves(market: Market, current: Matching, final: Matching):
    m = market.num_hospitals
    # a hospital releases its assignee
    for h in range(m):
        a = current.assignee_of(h)
        if a != UNFILLED and _strictly_prefers(market, final, current, hospital=h):
            yield current.replace({a: UNEMPLOYED}).slots, Coalition.of([h], [])
    # a couple retargets to any slot pair
    for c in range(market.num_couples):
        if not _strictly_prefers(market, final, current, couple=c):
            continue
        s1, s2 = market.members(c)
        cur_pair = current.pair_of(c)
        for t1 in range(-1, m):
            for t2 in range(-1, m):
                if t1 >= 0 and t1 == t2:
                    continue
                target = (t1, t2)
                if target == cur_pair:
                    continue
                updates = {}
                gaining = []
                ok = True
                for member, t in ((s1, t1), (s2, t2)):
                    if current.slot_of(member) == t:
                        continue
                    updates[member] = t
                    if t == UNEMPLOYED:
                        continue
                    holder = current.assignee_of(t)
                    if holder not in (UNFILLED, s1, s2):
                        updates[holder] = UNEMPLOYED
                    if not _strictly_prefers(market, final, current, hospital=t):
                        ok = False
                        break
                    gaining.append(t)
                if not ok:
                    continue
                yield current.replace(updates).slots, Coalition.of(gaining, [c])


def _path_from_parents(market, parents, start, goal, final) -> DominancePath:
    chain = []
    node = goal
    while node != start:
        prev, coalition = parents[node]
        chain.append((prev, coalition))
        node = prev
    chain.reverse()
    steps = tuple((Matching(slots), coalition) for slots, coalition in chain)
    return DominancePath(steps, final)


def _canonical_step_coalition(
    market: Market, current: Matching, nxt: Matching, final: Matching
) -> Coalition:
    """Forced members of the move plus a final-preferring side per emptied match."""
    from .blocking import _move_requirements

    forced, emptied = _move_requirements(market, current, nxt)
    coalition = forced
    for c, h in emptied:
        if coalition.has_couple(c) or coalition.has_hospital(h):
            continue
        if _strictly_prefers(market, final, current, couple=c):
            coalition = coalition.union(Coalition.of([], [c]))
        elif _strictly_prefers(market, final, current, hospital=h):
            coalition = coalition.union(Coalition.of([h], []))
        else:
            raise AssertionError("transition generated without a willing destroyer")
    return coalition


def _oracle_path(
    market: Market,
    mu: Matching,
    nu: Matching,
    policy: DominancePolicy,
    analysis: "MarketAnalysis | None",
) -> Optional[DominancePath]:
    """Exhaustive coalition-move reachability from ``nu`` to ``mu`` with path."""
    analysis = analysis or MarketAnalysis(market, policy)
    allowed = analysis.transition_matrix(mu)
    start = analysis.code_of(nu)
    goal = analysis.code_of(mu)
    n = allowed.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    parent[start] = start
    frontier = np.array([start], dtype=np.int64)
    while frontier.size and parent[goal] == -1:
        mask = allowed[frontier].any(axis=0) & (parent == -1)
        nxt = np.nonzero(mask)[0]
        if nxt.size == 0:
            break
        for j in nxt:
            srcs = frontier[allowed[frontier, j]]
            parent[j] = srcs[0]
        frontier = nxt
    if parent[goal] == -1:
        return None
    codes = []
    node = goal
    while node != start:
        codes.append(node)
        node = int(parent[node])
    codes.append(start)
    codes.reverse()
    steps = []
    for a, b in zip(codes, codes[1:]):
        cur = analysis.matching_of(a)
        nxt = analysis.matching_of(b)
        steps.append((cur, _canonical_step_coalition(market, cur, nxt, mu)))
    return DominancePath(tuple(steps), mu)


# -- whole-market analysis ------------------------------------------------------


class MarketAnalysis:
    """Shared caches for dominance queries over one market.

    Materializes the matching space lazily (slot and assignee tables) and
    memoizes block lists, dominance rows, transition matrices, and verdicts.
    Results never depend on query order.
    """

    def __init__(self, market: Market, policy: DominancePolicy = DEFAULT_POLICY):
        self.market = market
        self.policy = policy
        self._count: Optional[int] = None
        self._table: Optional[np.ndarray] = None
        self._assignees: Optional[np.ndarray] = None
        self._pair_codes: dict[int, np.ndarray] = {}
        self._ir_mask: Optional[np.ndarray] = None
        self._stable_mask: Optional[np.ndarray] = None
        self._blocks: dict[tuple, list[BlockWitness]] = {}
        self._rows: dict[tuple, np.ndarray] = {}
        self._verdicts: dict[tuple, DominanceVerdict] = {}
        self._codes: dict[tuple, int] = {}
        self._transitions: dict[tuple, np.ndarray] = {}

    # -- basics --

    @property
    def count(self) -> int:
        if self._count is None:
            self._count = count_matchings(self.market)
        return self._count

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            self._table = slot_table(self.market, self.policy.table_limit)
        return self._table

    @property
    def assignees(self) -> np.ndarray:
        if self._assignees is None:
            self._assignees = assignee_table(self.market, self.table)
        return self._assignees

    def pair_codes(self, couple: int) -> np.ndarray:
        if couple not in self._pair_codes:
            self._pair_codes[couple] = pair_code_table(self.market, self.table, couple)
        return self._pair_codes[couple]

    def code_of(self, matching: Matching) -> int:
        key = matching.slots
        if key not in self._codes:
            self._codes[key] = encode_matching(self.market, matching)
        return self._codes[key]

    def matching_of(self, code: int) -> Matching:
        return Matching(tuple(int(t) for t in self.table[code]))

    def blocks(self, matching: Matching) -> list[BlockWitness]:
        key = matching.slots
        if key not in self._blocks:
            self._blocks[key] = one_sided_blocks(self.market, matching) + two_sided_blocks(
                self.market, matching, mode="extended"
            )
        return self._blocks[key]

    # -- vectorized masks --

    @property
    def ir_mask(self) -> np.ndarray:
        if self._ir_mask is None:
            self._ir_mask = self._compute_ir_mask()
        return self._ir_mask

    def _compute_ir_mask(self) -> np.ndarray:
        market = self.market
        n = self.count
        ok = np.ones(n, dtype=bool)
        ranks = market._hospital_rank
        for h in range(market.num_hospitals):
            a = self.assignees[:, h]
            ok &= ranks[h][a] <= ranks[h][-1]
        cranks = market._couple_rank
        m = market.num_hospitals
        for c in range(market.num_couples):
            s1, s2 = market.members(c)
            cur = cranks[c][self.pair_codes(c)]
            a = self.table[:, s1].astype(np.int32)
            b = self.table[:, s2].astype(np.int32)
            r_uu = cranks[c][0]
            r_first = cranks[c][(a + 1) * (m + 1)]
            r_second = cranks[c][b + 1]
            ok &= ~((r_uu < cur) | (r_first < cur) | (r_second < cur))
        return ok

    @property
    def stable_mask(self) -> np.ndarray:
        if self._stable_mask is None:
            self._stable_mask = self._compute_stable_mask()
        return self._stable_mask

    def _compute_stable_mask(self) -> np.ndarray:
        market = self.market
        ok = self.ir_mask.copy()
        ranks = market._hospital_rank
        cranks = market._couple_rank
        for c in range(market.num_couples):
            s1, s2 = market.members(c)
            cur = cranks[c][self.pair_codes(c)]
            for pos, (t1, t2) in enumerate(market.couple_lists[c]):
                better = pos < cur
                if not better.any():
                    continue
                cond = better
                for member, t in ((s1, t1), (s2, t2)):
                    if t == UNEMPLOYED:
                        continue
                    stays = self.table[:, member] == t
                    prefers = ranks[t][self.assignees[:, t]] > ranks[t][member]
                    cond = cond & (stays | prefers)
                ok &= ~cond
        return ok

    # -- dominance rows and matrices --

    def dominance_row(self, mu: Matching) -> np.ndarray:
        """Boolean row over all matching codes: does ``mu`` dominate each one.

        Exact for individually rational ``mu`` via the characterization;
        exact via reachability otherwise (requires the space within the
        exhaustive cap).
        """
        key = mu.slots
        if key not in self._rows:
            if is_individually_rational(self.market, mu):
                self._rows[key] = self._characterization_row(mu)
            else:
                if self.count > self.policy.exhaustive_cap:
                    raise ValueError(
                        "exact dominance row for a non-IR dominator needs "
                        f"count <= {self.policy.exhaustive_cap}"
                    )
                self._rows[key] = self._reachability_row(mu)
        return self._rows[key]

    def _characterization_row(self, mu: Matching) -> np.ndarray:
        row = np.ones(self.count, dtype=bool)
        row[self.code_of(mu)] = False
        for w in self.blocks(mu):
            if w.kind in (BlockKind.ONE_SIDED_HOSPITAL, BlockKind.ONE_SIDED_COUPLE):
                continue  # absent: mu is individually rational
            row &= ~self._matched_mask(mu, w)
        return row

    def _matched_mask(self, mu: Matching, w: BlockWitness) -> np.ndarray:
        market = self.market
        c = w.couple
        s1, s2 = market.members(c)
        t1, t2 = w.target
        tbl = self.table
        if t1 != UNEMPLOYED and t2 != UNEMPLOYED:
            return (tbl[:, s1] == t1) & (tbl[:, s2] == t2)
        if t1 != UNEMPLOYED:
            member, partner, h = s1, s2, t1
        else:
            member, partner, h = s2, s1, t2
        held = tbl[:, member] == h
        pcol = tbl[:, partner].astype(np.int32)
        partner_free = pcol == UNEMPLOYED
        ranks = market._hospital_rank
        m = market.num_hospitals
        evict = np.zeros(m + 1, dtype=bool)  # index -1 wraps to slot m: stays False
        for t in range(m):
            evict[t] = ranks[t][mu.assignee_of(t)] < ranks[t][partner]
        evictable = evict[pcol]
        cranks = market._couple_rank[c]
        mu_rank = cranks[pair_code(mu.pair_of(c), m)]
        prefers_nu = cranks[self.pair_codes(c)] < mu_rank
        return held & (partner_free | (evictable & prefers_nu))

    def _reachability_row(self, mu: Matching) -> np.ndarray:
        allowed = self.transition_matrix(mu)
        goal = self.code_of(mu)
        reach = np.zeros(self.count, dtype=bool)
        reach[goal] = True
        frontier = np.array([goal], dtype=np.int64)
        while frontier.size:
            preds = allowed[:, frontier].any(axis=1) & ~reach
            frontier = np.nonzero(preds)[0]
            reach[frontier] = True
        row = reach
        row[goal] = False
        return row

    def transition_matrix(self, mu: Matching) -> np.ndarray:
        """allowed[i, j]: some coalition moves matching i to matching j with
        every member strictly preferring ``mu`` to matching i."""
        if mu.slots in self._transitions:
            return self._transitions[mu.slots]
        market = self.market
        n = self.count
        if n > self.policy.exhaustive_cap:
            raise ValueError("matching space exceeds the exhaustive cap")
        mu_inv = mu.assignees(market)
        ranks = market._hospital_rank
        cranks = market._couple_rank
        m = market.num_hospitals
        pref_h = np.zeros((max(m, 1), n), dtype=bool)
        for h in range(m):
            pref_h[h] = ranks[h][mu_inv[h]] < ranks[h][self.assignees[:, h]]
        ncpl = market.num_couples
        pref_c = np.zeros((max(ncpl, 1), n), dtype=bool)
        for c in range(ncpl):
            mu_rank = cranks[c][pair_code(mu.pair_of(c), m)]
            pref_c[c] = mu_rank < cranks[c][self.pair_codes(c)]
        allowed = np.ones((n, n), dtype=bool)
        couple_of = np.arange(market.num_students, dtype=np.int64) // 2
        for h in range(m):
            col = self.assignees[:, h].astype(np.int64)
            src = col[:, None]
            dst = col[None, :]
            same = src == dst
            valid = col >= 0
            cidx = np.where(valid, couple_of[np.clip(col, 0, None)], 0)
            ph_src = pref_h[h][:, None]
            pc_dst = pref_c[cidx].T  # [source row, destination column]
            new_ok = ph_src & pc_dst
            new_mask = ~same & (dst >= 0)
            pc_src = pref_c[cidx, np.arange(n)]
            empt_ok = ph_src | pc_src[:, None]
            empt_mask = ~same & (dst == UNFILLED)
            allowed &= np.where(new_mask, new_ok, True)
            allowed &= np.where(empt_mask, empt_ok, True)
        self._transitions[mu.slots] = allowed
        return allowed

    def matrix(self, codes: Sequence[int]) -> np.ndarray:
        """Indirect-dominance submatrix over the given codes (exact)."""
        out = np.zeros((len(codes), len(codes)), dtype=bool)
        for i, a in enumerate(codes):
            row = self.dominance_row(self.matching_of(a))
            out[i] = row[np.asarray(codes, dtype=np.int64)]
        return out

    # -- verdicts --

    def verdict(self, mu: Matching, nu: Matching) -> DominanceVerdict:
        key = (mu.slots, nu.slots)
        if key not in self._verdicts:
            self._verdicts[key] = _decide(self.market, mu, nu, self.policy, analysis=self)
        return self._verdicts[key]


# -- dominance graphs ------------------------------------------------------------


@dataclass(frozen=True)
class DominanceGraph:
    """Adjacency over matching codes; edge (a, b) means a dominates b."""

    relation: str
    codes: tuple[int, ...]
    matchings: tuple[Matching, ...]
    matrix: np.ndarray

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(len(self.codes)):
            for j in range(len(self.codes)):
                if self.matrix[i, j]:
                    out.append((self.codes[i], self.codes[j]))
        return out


def dominance_graph(
    market: Market,
    scope: Union[str, Sequence[Matching]] = "ir",
    relation: str = "indirect",
    policy: DominancePolicy = DEFAULT_POLICY,
    analysis: Optional[MarketAnalysis] = None,
) -> DominanceGraph:
    """Dominance relation restricted to a scope of matchings.

    ``scope`` is "ir", "all", or an explicit list.  Dominance is always
    evaluated against the full market (paths may leave the scope).
    """
    if relation not in ("direct", "indirect"):
        raise ValueError(f"unknown relation {relation!r}")
    analysis = analysis or MarketAnalysis(market, policy)
    if isinstance(scope, str):
        if scope == "ir":
            codes = [int(i) for i in np.nonzero(analysis.ir_mask)[0]]
        elif scope == "all":
            codes = list(range(analysis.count))
        else:
            raise ValueError(f"unknown scope {scope!r}")
        matchings = [analysis.matching_of(i) for i in codes]
    else:
        matchings = list(scope)
        codes = [analysis.code_of(mu) for mu in matchings]
    if len(codes) > policy.scope_cap:
        raise ValueError(
            f"scope of {len(codes)} matchings exceeds the cap ({policy.scope_cap})"
        )
    size = len(codes)
    matrix = np.zeros((size, size), dtype=bool)
    if relation == "direct":
        from .blocking import directly_dominates

        for i, a in enumerate(matchings):
            for j, b in enumerate(matchings):
                if i != j:
                    matrix[i, j] = directly_dominates(market, a, b)[0]
    else:
        for i, a in enumerate(matchings):
            row = analysis.dominance_row(a)
            matrix[i] = row[np.asarray(codes, dtype=np.int64)]
    return DominanceGraph(relation, tuple(codes), tuple(matchings), matrix)
