"""Per-vertex protocol state (local knowledge only)."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PhaseLedger:
    """Fragment-level registers, meaningful at fragment roots."""

    diameter: int | None = None
    in_small_set: bool = False
    mwoe: tuple | None = None  # (w, lo, hi)
    g_parent: int | None = None  # parent fragment id in the candidate forest
    cv_color: int | None = None
    cv_iterations: int = 0
    matched: bool = False
    match_role: str | None = None  # "parent" | "child"
    partner: int | None = None
    joins: bool = False


@dataclass
class VertexState:
    id: int
    weights: dict
    is_root: bool = False  # BFS root rt
    # BFS tree tau
    parent: int | None = None
    children: tuple = ()
    depth: int = 0
    subtree_size: int = 1
    height: int = 0
    # interval labeling
    lo: int = 0
    hi: int = 0
    child_sizes: dict = field(default_factory=dict)
    child_intervals: tuple = ()  # (lo, hi, child), ascending lo
    n: int = 0
    ecc: int = 0
    max_id: int = 0
    k: int = 0
    # fragment forest
    frag_id: int = 0
    frag_parent: int | None = None
    frag_children: set = field(default_factory=set)
    nbr_frag: dict = field(default_factory=dict)
    # per-phase locals
    small: bool = False
    mwoe_target: int | None = None  # set on the fragment's MWOE endpoint
    g_parent_target: bool = False  # True when the MWOE endpoint links to a candidate-forest parent
    foreign_children: dict = field(default_factory=dict)  # nbr -> [fragment id, matched]
    got_matched: bool = False
    frag_matched: bool = False
    frag_joins: bool = False
    new_children: set = field(default_factory=set)
    ledger: PhaseLedger = field(default_factory=PhaseLedger)
    # boruvka levels
    base_frag: int = 0
    cur_frag: int = 0
    nbr_cur: dict = field(default_factory=dict)
    frag_height: int = 0
    frag_height_max: int = 0
    directory: dict | None = None  # at rt: base fragment id -> interval lo
    coarse_of: dict | None = None  # at rt: base fragment id -> coarse fragment id
    final: bool = False
    base_count: int = 0  # at rt
    levels: int = 0  # at rt
    # output
    mst: set = field(default_factory=set)

    def output(self):
        return sorted((x, self.weights[x]) for x in self.mst)

    @property
    def is_frag_root(self) -> bool:
        return self.frag_parent is None
