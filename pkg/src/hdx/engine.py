"""The assembled index: truncated tree + per-path inversion tables.

Building takes one pass: pad the text, build the partition tree over its
suffixes with a transient exact comparison backend, truncate at the
``sigma`` threshold, label the leaves per path string, and build one
function-inversion structure per realised path string from the leaf
membership tables.  ``mode="linear"`` keeps the exact backend for query
time; ``mode="succinct"`` swaps it for sampled fingerprints with parameter
``tau`` (the exact backend and the leaf membership lists are both dropped,
which is where the space saving comes from).

A query walks the tree with the radius-routing recursion while the
remaining radius is positive.  Any call that reaches radius zero switches
to the base case: a manual traversal to the variant's destination plus a
matching-node sweep; internal matching nodes contribute their pivots,
reached leaves contribute ``(label, path)`` entries to the leaf list.  Leaf
entries are resolved back to suffix positions through the inversion tables,
and every candidate — pivot or leaf member — is admitted only by a final
distance check against the original, unaltered query and suffix.

Debug runs (``python`` without ``-O``) assert that the routed walk never
produces a duplicate candidate and that the leaf list is duplicate-free;
optimised runs deduplicate defensively instead.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Sequence

from .errors import FingerprintCollision, KOutOfRange, RadiusOutOfRange
from .inversion import InversionIndex, build_inversion_index, choose_params
from .lcp import MismatchOracle, QueryContext, init_query, text_context, within_distance
from .text import (
    AlteredString,
    DictionaryCorpus,
    PaddedText,
    as_symbols,
    dictionary_query_transform,
    dictionary_transform,
    hamming_naive,
    pad_text,
    query_string,
    text_suffix,
)
from .tree import (
    Tree,
    TruncLeaf,
    build_tree,
    matching_nodes,
    run_query,
    traverse_from,
)
from .truncate import eval_f, label_values, truncate_labels

# (leaf label, path label) pairs, ordered by first encounter, duplicate-free
LeafList = list[tuple[int, str]]

_MAX_FINGERPRINT_RETRIES = 4


@dataclass
class BuildReport:
    """What a build produced, for logs and the bench harness."""

    n: int
    k: int
    sigma: int | None
    mode: str
    tau: int
    node_count: int
    leaf_count: int
    height: int
    lambda_leaves: dict[str, int] = field(repr=False, default_factory=dict)
    chain_entries: dict[str, int] = field(repr=False, default_factory=dict)
    missing_entries: dict[str, int] = field(repr=False, default_factory=dict)
    build_seconds: float = 0.0

    def summary(self) -> dict[str, int | float | str | None]:
        return {
            "n": self.n,
            "k": self.k,
            "sigma": self.sigma,
            "mode": self.mode,
            "tau": self.tau,
            "nodes": self.node_count,
            "leaves": self.leaf_count,
            "height": self.height,
            "lambdas": len(self.lambda_leaves),
            "max_lambda_leaves": max(self.lambda_leaves.values(), default=0),
            "chain_entries": sum(self.chain_entries.values()),
            "missing_entries": sum(self.missing_entries.values()),
            "build_seconds": round(self.build_seconds, 6),
        }


@dataclass
class EngineStats:
    """Counters for one query."""

    routed: int = 0  # nodes entered with positive remaining radius
    zero_cases: int = 0  # radius-zero base cases taken
    dfs: int = 0  # nodes swept by all-match descent
    traversal_steps: int = 0  # nodes stepped through by manual traversals
    matched: int = 0  # prefix-matching nodes found in base cases
    leaf_list: int = 0  # distinct leaves reached
    pivot_candidates: int = 0
    inverted: int = 0  # suffix positions recovered from leaves
    lcp_calls: int = 0
    retries: int = 0  # query reruns after detected fingerprint collisions
    hits: int = 0


class MismatchIndex:
    """A queryable index over one padded text.

    Create with :func:`build_index`.  Queries never mutate the index (all
    scratch state is per call), so one index may serve concurrent queries.
    """

    def __init__(
        self,
        padded: PaddedText,
        k: int,
        sigma: int | None,
        mode: str,
        tau: int,
        seed: int,
        cluster_cap: int,
        oracle: MismatchOracle,
        tree: Tree,
        inversions: dict[str, InversionIndex],
        report: BuildReport | None = None,
    ):
        self.padded = padded
        self.k = k
        self.sigma = sigma
        self.mode = mode
        self.tau = tau
        self.seed = seed
        self.cluster_cap = cluster_cap
        self.oracle = oracle
        self.tree = tree
        self.inversions = inversions
        self.report = report
        self._tctx: QueryContext | None = None

    @property
    def n(self) -> int:
        return self.padded.n

    # -- evaluator plumbing --------------------------------------------------

    def _text_ctx(self) -> QueryContext:
        """A text-only comparison context, refreshed after any reseed."""
        if self._tctx is None or self._tctx.epoch != self.oracle.epoch:
            self._tctx = text_context(self.oracle)
        return self._tctx

    def _evaluator_for(self, lam: str):
        def evaluate(i: int) -> int | None:
            return eval_f(self.tree, lam, i, self._text_ctx())

        return evaluate

    def rebind_evaluators(self) -> None:
        """Point every inversion table at this index's evaluator (after load)."""
        for lam, inv in self.inversions.items():
            inv.evaluator = self._evaluator_for(lam)

    # -- queries --------------------------------------------------------------

    def query(self, q, r: int) -> list[tuple[int, int]]:
        """All ``(position, distance)`` pairs with distance at most ``r``.

        Positions are 1-based suffix starts, sorted ascending; each appears
        once.  Raises :class:`RadiusOutOfRange` for ``r`` outside ``0..k``,
        and the query-validation errors of :func:`hdx.lcp.init_query`.
        """
        hits, _ = self._run(q, r)
        return hits

    def query_with_stats(self, q, r: int) -> tuple[list[tuple[int, int]], EngineStats]:
        return self._run(q, r)

    def collect_leaves(
        self, q, r: int, ctx: QueryContext | None = None
    ) -> tuple[LeafList, list[tuple[int, int]]]:
        """The leaf list and the filtered pivot outputs for one query.

        This is the tree half of :meth:`query`: leaf entries still need
        inversion to become positions.  ``ctx`` may carry a prepared query
        context; by default one is created (and validated) here.
        """
        if ctx is None:
            ctx = init_query(q, self.oracle)
        self._check_radius(r)
        stats = EngineStats()
        leaf_nodes, pivots, zero_pivots = self._collect(ctx, r, stats)
        pivot_hits = self._filter_pivots(pivots, zero_pivots, r, ctx, stats)
        return [(lf.label, lf.path) for lf in leaf_nodes], pivot_hits

    def _check_radius(self, r: int) -> None:
        if r < 0 or r > self.k:
            raise RadiusOutOfRange(f"radius {r} outside 0..{self.k}")

    def _run(self, q, r: int) -> tuple[list[tuple[int, int]], EngineStats]:
        self._check_radius(r)
        retries = 0
        while True:
            try:
                hits, stats = self._run_once(q, r)
                stats.retries = retries
                return hits, stats
            except FingerprintCollision:
                if retries >= _MAX_FINGERPRINT_RETRIES:
                    raise
                retries += 1
                self.oracle.reseed()

    def _run_once(self, q, r: int) -> tuple[list[tuple[int, int]], EngineStats]:
        ctx = init_query(q, self.oracle)
        stats = EngineStats()
        leaf_nodes, pivots, zero_pivots = self._collect(ctx, r, stats)

        out: dict[int, int] = {}
        for pos, dist in self._filter_pivots(pivots, zero_pivots, r, ctx, stats):
            out.setdefault(pos, dist)

        qv = query_string()
        memos: dict[str, dict] = {}
        for lf in leaf_nodes:
            inv = self.inversions[lf.path]
            for base in inv.invert(lf.label, memos.setdefault(lf.path, {})):
                stats.inverted += 1
                ok, dist = within_distance(qv, text_suffix(base), r, ctx)
                if ok:
                    out.setdefault(base, dist)

        stats.lcp_calls = ctx.lcp_calls
        stats.hits = len(out)
        return sorted(out.items()), stats

    def _collect(
        self, ctx: QueryContext, r: int, stats: EngineStats
    ) -> tuple[list[TruncLeaf], list[AlteredString], list[AlteredString]]:
        """Walk the tree: distinct leaves, routed pivots, base-case pivots."""
        zero_pivots: list[AlteredString] = []
        zero_leaves: list[TruncLeaf] = []

        def zero_case(node, qv) -> None:
            stats.zero_cases += 1
            dest, path, _outcome = traverse_from(node, qv, ctx)
            stats.traversal_steps += len(path)
            if isinstance(dest, TruncLeaf):
                zero_leaves.append(dest)
            found = matching_nodes(node, qv, ctx, leaves=zero_leaves)
            stats.matched += len(found)
            zero_pivots.extend(v.pivot for v in found)

        cands, leaves, tstats = run_query(self.tree, ctx, r, zero_case=zero_case)
        stats.routed = tstats.rpos_visited
        stats.dfs = tstats.dfs_visited

        leaf_nodes: list[TruncLeaf] = []
        seen: set[int] = set()
        for lf in leaves + zero_leaves:
            if id(lf) not in seen:
                seen.add(id(lf))
                leaf_nodes.append(lf)
        # each leaf is reached at most once by the routed walk; base cases
        # may re-touch one, so uniqueness is asserted on the deduplicated list
        assert len({(lf.label, lf.path) for lf in leaf_nodes}) == len(leaf_nodes)
        stats.leaf_list = len(leaf_nodes)
        stats.pivot_candidates = len(cands) + len(zero_pivots)
        return leaf_nodes, cands, zero_pivots

    def _filter_pivots(
        self,
        pivots: list[AlteredString],
        zero_pivots: list[AlteredString],
        r: int,
        ctx: QueryContext,
        stats: EngineStats,
    ) -> list[tuple[int, int]]:
        qv = query_string()
        out: dict[int, int] = {}
        routed_seen: set[int] = set()
        for p in pivots:
            base = p.start
            # the routed walk reaches each suffix variant family at most once
            assert base not in routed_seen, f"duplicate routed candidate {base}"
            routed_seen.add(base)
            ok, dist = within_distance(qv, text_suffix(base), r, ctx)
            # routed candidates carry exactly the alterations already paid for
            assert ok, f"routed candidate {base} failed the final filter"
            if ok:
                out.setdefault(base, dist)
        for p in zero_pivots:
            # prefix-matching pivots may repeat across twin subsets and may
            # legitimately fail the final filter; the filter decides
            ok, dist = within_distance(qv, text_suffix(p.start), r, ctx)
            if ok:
                out.setdefault(p.start, dist)
        return sorted(out.items())

    # -- accounting -----------------------------------------------------------

    def space_summary(self) -> dict[str, int]:
        """Entry/node counts per component (see hdx.storage for byte sizes)."""
        chain = sum(
            s["chain_entries"]
            for s in (inv.space_summary() for inv in self.inversions.values())
        )
        missing = sum(
            sum(len(v) for v in inv.missing.values())
            for inv in self.inversions.values()
        )
        return {
            "n": self.n,
            "padded_length": self.padded.padded_length,
            "tree_nodes": self.tree.node_count,
            "tree_leaves": self.tree.leaf_count,
            "lambdas": len(self.tree.lambdas),
            "chain_entries": chain,
            "missing_entries": missing,
            "fingerprint_samples": self.oracle.fp.sample_count,
        }


def build_index(
    text,
    k: int | None = None,
    *,
    sigma: int | None = None,
    mode: str = "linear",
    tau: int = 8,
    seed: int = 0,
    cluster_cap: int = 0,
    keep_members: bool = False,
) -> MismatchIndex:
    """Index ``text`` for mismatch queries up to radius ``k``.

    ``text`` is a string, bytes, symbol sequence, or an already padded text.
    ``sigma=None`` keeps the full tree (no leaves, no inversion tables);
    with ``sigma`` given, subtrees of at most ``sigma`` suffixes become
    labelled leaves backed by inversion tables.  ``mode="linear"`` answers
    comparisons exactly; ``mode="succinct"`` uses sampled fingerprints with
    parameter ``tau``.  ``cluster_cap`` bounds the chain clusters per
    inversion table: the default 0 stores explicit inverse entries (fastest
    queries); higher caps trade query time for smaller tables.
    ``keep_members`` retains leaf membership lists for auditing (they are
    dropped by default — inversion replaces them).
    """
    if mode not in ("linear", "succinct"):
        raise ValueError(f"unknown index mode {mode!r}")
    if sigma is not None and sigma < 1:
        raise ValueError(f"sigma must be at least 1, got {sigma}")
    if tau < 1:
        raise ValueError(f"tau must be at least 1, got {tau}")
    t0 = time.perf_counter()
    if isinstance(text, PaddedText):
        padded = text
        if k is None:
            k = padded.k
        elif k != padded.k:
            raise KOutOfRange(
                f"text was padded for k={padded.k}, cannot index it with k={k}"
            )
    else:
        padded = pad_text(text, 1 if k is None else k)
        k = padded.k

    build_oracle = MismatchOracle(padded, mode="exact")
    tree = build_tree(padded, k=k, sigma=sigma, oracle=build_oracle)
    if mode == "linear":
        oracle = build_oracle
        tau = 1
    else:
        oracle = MismatchOracle(padded, mode="sampled", tau=tau, seed=seed)

    index = MismatchIndex(
        padded=padded,
        k=k,
        sigma=sigma,
        mode=mode,
        tau=tau,
        seed=seed,
        cluster_cap=cluster_cap,
        oracle=oracle,
        tree=tree,
        inversions={},
    )

    lambda_leaves: dict[str, int] = {}
    chain_entries: dict[str, int] = {}
    missing_entries: dict[str, int] = {}
    if sigma is not None:
        truncate_labels(tree)
        tables = label_values(tree)
        rng = random.Random(seed ^ 0x5DEECE66D)
        for lam, leaves in tree.lambdas.items():
            values = tables[lam]
            defined = sum(1 for v in values[1:] if v is not None)
            params = choose_params(
                padded.n,
                sigma,
                defined,
                cluster_cap=cluster_cap,
                seed=rng.getrandbits(64),
            )
            inv = build_inversion_index(
                index._evaluator_for(lam), params, values=values
            )
            index.inversions[lam] = inv
            lambda_leaves[lam] = len(leaves)
            s = inv.space_summary()
            chain_entries[lam] = s["chain_entries"]
            missing_entries[lam] = s["missing_entries"]
        if not keep_members:
            for leaves in tree.lambdas.values():
                for lf in leaves:
                    lf.members = None

    index.report = BuildReport(
        n=padded.n,
        k=k,
        sigma=sigma,
        mode=mode,
        tau=tau,
        node_count=tree.node_count,
        leaf_count=tree.leaf_count,
        height=tree.height,
        lambda_leaves=lambda_leaves,
        chain_entries=chain_entries,
        missing_entries=missing_entries,
        build_seconds=time.perf_counter() - t0,
    )
    return index


# ---------------------------------------------------------------------------
# Dictionary front-end
# ---------------------------------------------------------------------------


class DictionaryIndex:
    """Approximate membership over a set of strings.

    Entries are interleaved with position counters and flattened into one
    indexable text; a query, transformed the same way, finds every entry at
    least as long as itself through the text index.  Entries *shorter* than
    the query cannot surface from the transformed text at radius ``k`` (the
    sentinel gap charges their alignments), so they are checked directly
    against the stored entry list — the reported distance is always the
    generalized Hamming distance over the shorter length.
    """

    def __init__(self, corpus: DictionaryCorpus, index: MismatchIndex):
        self.corpus = corpus
        self.index = index
        self._entry_at = {off: t for t, off in enumerate(corpus.offsets)}

    @property
    def size(self) -> int:
        return len(self.corpus.offsets)

    def query(self, q, r: int) -> list[tuple[int, int]]:
        """All ``(entry_index, distance)`` pairs with distance at most ``r``.

        ``entry_index`` is 0-based into the entry list given at build time;
        results are sorted by entry index.
        """
        qs = as_symbols(q)
        tq = dictionary_query_transform(q)
        out: dict[int, int] = {}
        for pos, dist in self.index.query(tq, r):
            t = self._entry_at.get(pos)
            if t is not None and self.corpus.entry_lengths[t] >= len(qs):
                out.setdefault(t, dist)
        for t, entry in enumerate(self.corpus.entries):
            if len(entry) < len(qs):
                d = hamming_naive(qs, entry)
                if d <= r:
                    out.setdefault(t, d)
        return sorted(out.items())


def build_dictionary_index(
    entries: Sequence,
    k: int,
    *,
    sigma: int | None = None,
    mode: str = "linear",
    tau: int = 8,
    seed: int = 0,
    cluster_cap: int = 0,
) -> DictionaryIndex:
    """Index a set of strings for approximate lookup up to radius ``k``."""
    corpus = dictionary_transform(entries, k)
    inner = build_index(
        corpus.padded,
        k,
        sigma=sigma,
        mode=mode,
        tau=tau,
        seed=seed,
        cluster_cap=cluster_cap,
    )
    return DictionaryIndex(corpus, inner)
