"""farmatch: stability and farsighted stable sets in couples markets.

Decides stability, direct and indirect dominance, farsighted stable sets,
and DEM farsighted stable sets in matching markets with couples, producing
machine-checkable certificates (coalition-move paths and blocking
witnesses) for every verdict.
"""

from .model import (
    UNEMPLOYED,
    UNFILLED,
    Coalition,
    CoupleId,
    HospitalId,
    Market,
    MarketError,
    Matching,
    MatchingError,
    StudentId,
    couple_prefers,
    hospital_prefers,
    market_from_lists,
    validate_market,
)
from .enumeration import (
    count_matchings,
    decode_matching,
    encode_matching,
    enumerate_ir_matchings,
    enumerate_matchings,
)
from .blocking import (
    BlockKind,
    BlockWitness,
    can_enforce,
    directly_dominates,
    is_individually_rational,
    is_stable,
    minimal_enforcing_coalitions,
    one_sided_blocks,
    replay_block_witness,
    two_sided_blocks,
)
from .dominance import (
    DEFAULT_POLICY,
    DominanceGraph,
    DominancePath,
    DominancePolicy,
    DominanceVerdict,
    MarketAnalysis,
    PreferencePartition,
    construct_dominance_path,
    dominance_graph,
    indirectly_dominates,
    lemma2_sufficient,
    matched_blocks_of,
    preference_partition,
    replay_dominance_path,
)
from .stable_sets import (
    SearchResult,
    StableSetReport,
    enumerate_dem,
    enumerate_fss,
    singleton_fss,
    stable_matchings,
    verify_dem,
    verify_fss,
)
from .textio import (
    Diagnostic,
    FormatError,
    parse_market,
    parse_market_with_diagnostics,
    parse_matching,
    parse_matching_set,
    serialize_market,
    serialize_matching,
)
from .exports import export_dot, export_json, report_dict, verdict_dict
from .generate import generate_market, random_corpus_market

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
