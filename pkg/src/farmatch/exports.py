"""JSON and DOT renderings of verdicts, reports, and dominance graphs.

Field names are stable (``verdict``, ``certificate``, ``witness``, ``set``,
``condition``) so downstream tools can diff runs.  All output is
deterministic: agents and matchings appear in index/code order.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .blocking import BlockWitness
from .dominance import DominanceGraph, DominancePath, DominanceVerdict
from .model import Coalition, Market, Matching
from .stable_sets import StableSetReport
from .textio import serialize_matching


def coalition_dict(market: Market, coalition: Coalition) -> dict:
    return {
        "hospitals": [market.hospital_names[h] for h in coalition.hospitals()],
        "couples": [market.couple_names[c] for c in coalition.couples()],
    }


def witness_dict(market: Market, w: BlockWitness) -> dict:
    return {
        "kind": w.kind.value,
        "hospitals": [market.hospital_names[h] for h in w.hospitals],
        "couple": None if w.couple is None else market.couple_names[w.couple],
        "target": None if w.target is None else market.pair_name(w.target),
    }


def path_dict(market: Market, path: DominancePath) -> dict:
    return {
        "steps": [
            {
                "from": serialize_matching(market, matching),
                "coalition": coalition_dict(market, coalition),
            }
            for matching, coalition in path.steps
        ],
        "final": serialize_matching(market, path.final),
    }


def verdict_dict(
    market: Market,
    verdict: DominanceVerdict,
    relation: str,
    dominator: Matching,
    dominated: Matching,
    witness_coalition: Optional[Coalition] = None,
) -> dict:
    out: dict[str, Any] = {
        "relation": relation,
        "dominator": serialize_matching(market, dominator),
        "dominated": serialize_matching(market, dominated),
        "verdict": verdict.result,
        "certificate": None,
        "witness": None,
    }
    if verdict.path is not None:
        out["certificate"] = path_dict(market, verdict.path)
    if verdict.witness is not None:
        out["witness"] = witness_dict(market, verdict.witness)
    elif witness_coalition is not None:
        out["witness"] = coalition_dict(market, witness_coalition)
    if verdict.detail:
        out["detail"] = verdict.detail
    return out


def report_dict(market: Market, report: StableSetReport) -> dict:
    conditions: list[dict] = []
    if report.kind == "fss":
        conditions.append(
            {
                "condition": "internal_stability",
                "verdict": not report.internal_violations,
                "violations": [
                    {
                        "dominator": serialize_matching(market, a),
                        "dominated": serialize_matching(market, b),
                        "certificate": None if path is None else path_dict(market, path),
                    }
                    for a, b, path in report.internal_violations
                ],
            }
        )
    else:
        conditions.append(
            {
                "condition": "deterrence",
                "verdict": not report.deterrence_failures,
                "violations": [
                    {
                        "member": serialize_matching(market, f.member),
                        "deviation": serialize_matching(market, f.deviation),
                        "coalition": coalition_dict(market, f.coalition),
                        "reason": f.reason,
                    }
                    for f in report.deterrence_failures
                ],
            }
        )
    conditions.append(
        {
            "condition": "external_stability",
            "verdict": not report.external_uncovered,
            "violations": [
                serialize_matching(market, mu) for mu in report.external_uncovered
            ],
        }
    )
    if report.kind == "dem":
        conditions.append(
            {
                "condition": "minimality",
                "verdict": report.minimality_witness is None,
                "violations": []
                if report.minimality_witness is None
                else [[serialize_matching(market, mu) for mu in report.minimality_witness]],
            }
        )
    out = {
        "kind": report.kind,
        "set": [serialize_matching(market, mu) for mu in report.members],
        "verdict": report.verdict,
        "conditions": conditions,
    }
    if report.unknown_pairs:
        out["unknown_pairs"] = [
            [serialize_matching(market, a), serialize_matching(market, b)]
            for a, b in report.unknown_pairs
        ]
    if report.detail:
        out["detail"] = report.detail
    return out


def export_json(payload: dict) -> str:
    """Render a report dictionary as deterministic, diffable JSON."""
    return json.dumps(payload, indent=2) + "\n"


def export_dot(market: Market, graph: DominanceGraph) -> str:
    """DOT digraph: one node per matching (labeled with its literal), one
    edge per dominance pair, edge attribute naming the relation."""
    style = "solid" if graph.relation == "direct" else "dashed"
    lines = ["digraph dominance {", "  rankdir=LR;"]
    for code, matching in zip(graph.codes, graph.matchings):
        label = serialize_matching(market, matching)
        lines.append(f'  m{code} [label="{label}"];')
    for i, a in enumerate(graph.codes):
        for j, b in enumerate(graph.codes):
            if graph.matrix[i, j]:
                lines.append(
                    f'  m{a} -> m{b} [rel={graph.relation}, style={style}];'
                )
    lines.append("}")
    return "\n".join(lines) + "\n"
