"""The median-partition search tree over altered suffixes.

Each internal node holds a pivot (the lexicographic lower-median element of
its set), the lower-median agreement length ``m`` of the remaining elements
with that pivot, and up to seven children:

====================  ======================================================
slot                  contents
====================  ======================================================
``LESS_M``            elements agreeing with the pivot on fewer than ``m``
                      symbols
``LESS_L``            agreement exactly ``m``, element sorts before the pivot
``GREATER_L``         agreement exactly ``m``, element sorts after the pivot
``GREATER_M``         agreement above ``m``
``ALT_*``             copies of the corresponding unaltered set whose next
                      disagreeing symbol has been rewritten to match the
                      pivot (one extra alteration, so only built while the
                      remaining alteration budget ``k_rem`` is positive);
                      the ``GREATER_M`` set never gets an altered twin
====================  ======================================================

Every child holds at most half of its parent's elements, so the height is
at most ``ceil(log2 n)``.  With a truncation threshold ``sigma``, sets of at
most ``sigma`` elements become integer-labelled leaves instead of subtrees;
``sigma=None`` builds the full tree.

Queries follow a radius-routing table: at each node the query variant is
compared against the pivot once (one kangaroo walk), and each child subset
is searched either with the same variant, with the variant rewritten toward
the pivot at the cost of one radius unit, or exhaustively (DFS) when every
element below is a guaranteed match.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Callable, Iterator

from .errors import RadiusOutOfRange
from .lcp import (
    MismatchOracle,
    QueryContext,
    init_query,
    lcp_altered,
    probe,
    text_pair_ops,
    within_distance,
)
from .text import AlteredString, PaddedText, query_string, text_suffix

# ---------------------------------------------------------------------------
# Node types and child slots
# ---------------------------------------------------------------------------

LESS_M, ALT_LESS_M, LESS_L, ALT_LESS_L, GREATER_L, ALT_GREATER_L, GREATER_M = range(7)

UNALTERED_SLOTS = (LESS_M, LESS_L, GREATER_L, GREATER_M)
SLOT_NAMES = (
    "less_m",
    "alt_less_m",
    "less_l",
    "alt_less_l",
    "greater_l",
    "alt_greater_l",
    "greater_m",
)

TAG_LESS_M = "less_m"
TAG_LESS_L = "less_l"
TAG_GREATER_L = "greater_l"
TAG_GREATER_M = "greater_m"
TAG_PIVOT = "pivot"

TAG_TO_SLOT = {
    TAG_LESS_M: LESS_M,
    TAG_LESS_L: LESS_L,
    TAG_GREATER_L: GREATER_L,
    TAG_GREATER_M: GREATER_M,
}
TAG_TO_ALT_SLOT = {
    TAG_LESS_M: ALT_LESS_M,
    TAG_LESS_L: ALT_LESS_L,
    TAG_GREATER_L: ALT_GREATER_L,
    # TAG_GREATER_M deliberately absent: that subset never has an altered twin
}


class TreeNode:
    """Internal node: pivot element, median agreement, and child slots."""

    __slots__ = ("pivot", "median", "k_rem", "size", "children")

    def __init__(
        self,
        pivot: AlteredString,
        median: int,
        k_rem: int,
        size: int,
    ):
        self.pivot = pivot
        self.median = median
        self.k_rem = k_rem
        self.size = size
        self.children: list[TreeNode | TruncLeaf | None] = [None] * 7

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"TreeNode(pivot={self.pivot.start}+{len(self.pivot.alterations)}a, "
            f"m={self.median}, size={self.size})"
        )


class TruncLeaf:
    """Truncated leaf: a set of at most ``sigma`` elements behind a label.

    ``members`` (pairs of ``(base_start, alterations)``) are kept during
    construction so the inversion tables can be seeded, then dropped unless
    the tree was built for auditing.
    """

    __slots__ = ("label", "path", "size", "members")

    def __init__(self, size: int, members: tuple | None):
        self.label: int | None = None
        self.path: str | None = None
        self.size = size
        self.members = members

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TruncLeaf(label={self.label}, path={self.path!r}, size={self.size})"


@dataclass
class Tree:
    """A built tree plus the construction parameters it depends on."""

    root: TreeNode | TruncLeaf
    padded: PaddedText
    k: int
    sigma: int | None
    node_count: int = 0
    leaf_count: int = 0
    height: int = 0
    # filled in by hdx.truncate.truncate_labels:
    lambdas: dict[str, list[TruncLeaf]] = field(default_factory=dict)


def preorder(
    v: TreeNode | TruncLeaf, lam: str = ""
) -> Iterator[tuple[TreeNode | TruncLeaf, str]]:
    """Yield ``(node, edge-label-string)`` pairs in fixed slot order."""
    yield v, lam
    if isinstance(v, TreeNode):
        for slot in range(7):
            child = v.children[slot]
            if child is not None:
                step = "u" if slot in UNALTERED_SLOTS else "a"
                yield from preorder(child, lam + step)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


@dataclass
class BuildOps:
    """Element-level primitives the construction runs on.

    Elements are ``(base, alterations)`` pairs; ``base`` identifies an
    underlying string (a padded-text suffix start in production, an index
    into a literal string list in tests).
    """

    pair_lcp: Callable[[int, tuple, int, tuple], int]
    compare: Callable[[tuple, tuple], int]
    char: Callable[[int, tuple, int], int]
    length: Callable[[int], int]


def text_build_ops(oracle: MismatchOracle) -> BuildOps:
    pair_lcp, compare, elem_char = text_pair_ops(oracle)
    big_n = oracle.padded.padded_length

    def length(base: int) -> int:
        return big_n - base + 1

    return BuildOps(pair_lcp=pair_lcp, compare=compare, char=elem_char, length=length)


def _insert_alteration(alts: tuple, off: int, sym: int) -> tuple:
    """Canonical insert of ``(off, sym)``; a repeated offset is overwritten."""
    if not alts or alts[-1][0] < off:
        return alts + ((off, sym),)
    out = []
    placed = False
    for o, s in alts:
        if o == off:
            out.append((off, sym))
            placed = True
        elif o > off and not placed:
            out.append((off, sym))
            out.append((o, s))
            placed = True
        else:
            out.append((o, s))
    if not placed:
        out.append((off, sym))
    return tuple(out)


def build_tree(
    padded: PaddedText,
    k: int | None = None,
    sigma: int | None = None,
    oracle: MismatchOracle | None = None,
) -> Tree:
    """Build the partition tree over all ``n`` text suffixes.

    ``sigma=None`` builds the full tree (single-element leaves are ordinary
    nodes); with ``sigma`` given, sets of at most ``sigma`` elements become
    :class:`TruncLeaf` nodes carrying their members.

    The construction needs exact LCP answers; if ``oracle`` lacks an exact
    backend a transient one is built for the duration of the call.
    """
    if k is None:
        k = padded.k
    if oracle is None or oracle.exact is None:
        oracle = MismatchOracle(padded, mode="exact")
    ops = text_build_ops(oracle)

    n = padded.n
    big_n = padded.padded_length
    sa = oracle.exact.sa
    kas = oracle.exact._kasai

    # root order and adjacent agreements, restricted to data suffixes
    bases: list[int] = []
    adj: list[int] = []
    cur_min: int | None = None
    seen_any = False
    for t in range(big_n):
        if seen_any:
            step = kas[t - 1]
            if cur_min is None or step < cur_min:
                cur_min = step
        start = sa[t] + 1
        if start <= n:
            if seen_any:
                adj.append(cur_min)
            bases.append(start)
            cur_min = None
            seen_any = True

    root = _build_core(bases, [()] * n, adj, k, sigma, ops)
    tree = Tree(root=root, padded=padded, k=k, sigma=sigma)
    _fill_counts(tree)
    return tree


def _fill_counts(tree: Tree) -> None:
    nodes = leaves = 0
    height = 0
    stack: list[tuple[TreeNode | TruncLeaf, int]] = [(tree.root, 0)]
    while stack:
        v, d = stack.pop()
        height = max(height, d)
        if isinstance(v, TruncLeaf):
            leaves += 1
            continue
        nodes += 1
        for c in v.children:
            if c is not None:
                stack.append((c, d + 1))
    tree.node_count = nodes
    tree.leaf_count = leaves
    tree.height = height


def _build_core(
    bases: list[int],
    alts: list[tuple],
    adj: list[int],
    k: int,
    sigma: int | None,
    ops: BuildOps,
) -> TreeNode | TruncLeaf:
    """Iterative construction from a sorted element array with adjacent LCPs."""
    compare = ops.compare
    cmp_key = cmp_to_key(compare)
    big = float("inf")

    holder: list = [None]
    # work items: (bases, alts, adj, k_rem, parent_children, slot)
    stack = [(bases, alts, adj, k, holder, 0)]
    while stack:
        bases, alts, adj, k_rem, parent, slot = stack.pop()
        sz = len(bases)

        if sigma is not None and sz <= sigma:
            parent[slot] = TruncLeaf(size=sz, members=tuple(zip(bases, alts)))
            continue
        if sz == 1:
            node = TreeNode(
                pivot=text_suffix(bases[0], alts[0]),
                median=0,
                k_rem=k_rem,
                size=1,
            )
            parent[slot] = node
            continue

        r = (sz + 1) // 2 - 1  # lower-median rank, 0-based

        # agreement of every element with the pivot, via prefix-minima of the
        # adjacent agreements (sorted order makes these exact)
        lcps = [0] * sz
        cur = big
        for t in range(r - 1, -1, -1):
            a = adj[t]
            if a < cur:
                cur = a
            lcps[t] = cur
        cur = big
        for t in range(r + 1, sz):
            a = adj[t - 1]
            if a < cur:
                cur = a
            lcps[t] = cur

        vals = sorted(lcps[:r] + lcps[r + 1 :])
        m = vals[(sz - 2) // 2]  # lower median over the non-pivot elements

        # left side (before the pivot): agreements non-decreasing toward it
        lt_end = 0
        while lt_end < r and lcps[lt_end] < m:
            lt_end += 1
        eq_end = lt_end
        while eq_end < r and lcps[eq_end] == m:
            eq_end += 1
        # right side: agreements non-increasing away from the pivot
        gt_stop = r + 1
        while gt_stop < sz and lcps[gt_stop] > m:
            gt_stop += 1
        eq_stop = gt_stop
        while eq_stop < sz and lcps[eq_stop] == m:
            eq_stop += 1

        node = TreeNode(
            pivot=text_suffix(bases[r], alts[r]),
            median=m,
            k_rem=k_rem,
            size=sz,
        )
        parent[slot] = node
        children = node.children

        def seam(x: int, y: int) -> int:
            # agreement of two elements on opposite sides of the pivot
            return lcps[x] if lcps[x] <= lcps[y] else lcps[y]

        def run_slices(a: int, b: int):
            return bases[a:b], alts[a:b], adj[a : b - 1] if b - a > 1 else []

        # ---- LESS_M: both extremes, concatenated around everything else
        left_has = lt_end > 0
        right_has = eq_stop < sz
        if left_has or right_has:
            if left_has and right_has:
                cb = bases[0:lt_end] + bases[eq_stop:sz]
                ca = alts[0:lt_end] + alts[eq_stop:sz]
                cj = (
                    adj[0 : lt_end - 1]
                    + [seam(lt_end - 1, eq_stop)]
                    + adj[eq_stop : sz - 1]
                )
            elif left_has:
                cb, ca, cj = run_slices(0, lt_end)
            else:
                cb, ca, cj = run_slices(eq_stop, sz)
            stack.append((cb, ca, cj, k_rem, children, LESS_M))
            if k_rem > 0:
                lcp_of = lcps[0:lt_end] + lcps[eq_stop:sz]
                stack.append(
                    _altered_item(cb, ca, lcp_of, node, k_rem, children,
                                  ALT_LESS_M, ops, cmp_key)
                )

        # ---- LESS_L: run just before the pivot with agreement exactly m
        if eq_end > lt_end:
            cb, ca, cj = run_slices(lt_end, eq_end)
            stack.append((cb, ca, cj, k_rem, children, LESS_L))
            if k_rem > 0:
                stack.append(
                    _altered_item(cb, ca, [m] * len(cb), node, k_rem, children,
                                  ALT_LESS_L, ops, cmp_key)
                )

        # ---- GREATER_L: run just after the pivot with agreement exactly m
        if eq_stop > gt_stop:
            cb, ca, cj = run_slices(gt_stop, eq_stop)
            stack.append((cb, ca, cj, k_rem, children, GREATER_L))
            if k_rem > 0:
                stack.append(
                    _altered_item(cb, ca, [m] * len(cb), node, k_rem, children,
                                  ALT_GREATER_L, ops, cmp_key)
                )

        # ---- GREATER_M: the runs hugging the pivot on both sides
        left_has = eq_end < r
        right_has = gt_stop > r + 1
        if left_has or right_has:
            if left_has and right_has:
                cb = bases[eq_end:r] + bases[r + 1 : gt_stop]
                ca = alts[eq_end:r] + alts[r + 1 : gt_stop]
                cj = (
                    adj[eq_end : r - 1]
                    + [seam(r - 1, r + 1)]
                    + adj[r + 1 : gt_stop - 1]
                )
            elif left_has:
                cb, ca, cj = run_slices(eq_end, r)
            else:
                cb, ca, cj = run_slices(r + 1, gt_stop)
            stack.append((cb, ca, cj, k_rem, children, GREATER_M))
            # no altered twin: those elements already agree past the median

    return holder[0]


def _altered_item(
    bases: list[int],
    alts: list[tuple],
    lcp_of: list[int],
    node: TreeNode,
    k_rem: int,
    children: list,
    slot: int,
    ops: BuildOps,
    cmp_key,
):
    """Create the altered twin of a run and package it as a work item.

    An element whose agreement with the pivot already spans one of the two
    materialisations (possible once alterations have copied tail sentinels
    from short pivots) has no next symbol to rewrite and is carried over
    unchanged — it already matches the pivot as far as the pivot goes.
    """
    pair_lcp = ops.pair_lcp
    elem_char = ops.char
    length = ops.length
    pb = node.pivot.start
    pa = node.pivot.alterations
    len_p = length(pb)
    elems = [
        (b, a)
        if lc >= len_p or lc >= length(b)
        else (b, _insert_alteration(a, lc + 1, elem_char(pb, pa, lc + 1)))
        for b, a, lc in zip(bases, alts, lcp_of)
    ]
    elems.sort(key=cmp_key)
    cb = [e[0] for e in elems]
    ca = [e[1] for e in elems]
    cj = [
        pair_lcp(cb[t], ca[t], cb[t + 1], ca[t + 1]) for t in range(len(cb) - 1)
    ]
    return (cb, ca, cj, k_rem - 1, children, slot)


# ---------------------------------------------------------------------------
# Classification and basic walks
# ---------------------------------------------------------------------------


def _side_tag(node: TreeNode, s: AlteredString, i: int, ctx: QueryContext) -> str:
    """Subset tag for a non-pivot string with agreement ``i`` to the pivot."""
    m = node.median
    if i < m:
        return TAG_LESS_M
    if i > m:
        return TAG_GREATER_M
    p = node.pivot
    if i >= ctx.length(s):
        # s is a proper prefix of the pivot: it sorts before it
        return TAG_LESS_L
    if i >= ctx.length(p):
        # the pivot is a proper prefix of s: s sorts after it
        return TAG_GREATER_L
    return TAG_LESS_L if ctx.char(s, i + 1) < ctx.char(p, i + 1) else TAG_GREATER_L


def classify(
    s: AlteredString, node: TreeNode, ctx: QueryContext
) -> tuple[str, int]:
    """Which subset of ``node`` the string ``s`` belongs to, plus the agreement.

    Returns ``(tag, lcp)`` where tag is one of ``less_m``, ``less_l``,
    ``greater_l``, ``greater_m``, or ``pivot`` when ``s`` materialises to the
    pivot itself.
    """
    p = node.pivot
    i = lcp_altered(s, p, ctx)
    if i == ctx.length(s) and i == ctx.length(p):
        return TAG_PIVOT, i
    return _side_tag(node, s, i, ctx), i


def traverse_from(
    node: TreeNode | TruncLeaf, s: AlteredString, ctx: QueryContext
) -> tuple[TreeNode | TruncLeaf, list[TreeNode | TruncLeaf], str]:
    """Walk ``s`` down from ``node`` as construction would have placed it.

    Returns ``(destination, visited_path, outcome)`` where outcome is
    ``"leaf"`` (walk ended at a node with no matching child or a truncated
    leaf), ``"pivot"`` (``s`` equals some pivot on the way), or
    ``"dead_end"`` (the required child does not exist).
    """
    path: list[TreeNode | TruncLeaf] = [node]
    while isinstance(node, TreeNode):
        tag, _ = classify(s, node, ctx)
        if tag == TAG_PIVOT:
            return node, path, "pivot"
        child = node.children[TAG_TO_SLOT[tag]]
        if child is None:
            return node, path, "dead_end"
        node = child
        path.append(node)
    return node, path, "leaf"


def manual_traversal(
    tree: Tree, s: AlteredString, ctx: QueryContext
) -> tuple[TreeNode | TruncLeaf, list[TreeNode | TruncLeaf], str]:
    """:func:`traverse_from` starting at the root."""
    return traverse_from(tree.root, s, ctx)


def dfs_collect(node: TreeNode | TruncLeaf) -> list[tuple[int, tuple]]:
    """All elements of the subtree's original set.

    Collects the pivots of the node and of every descendant reachable through
    unaltered child slots, plus the members of reachable truncated leaves —
    exactly the set the node was built from.
    """
    out: list[tuple[int, tuple]] = []
    stack: list[TreeNode | TruncLeaf] = [node]
    while stack:
        v = stack.pop()
        if isinstance(v, TruncLeaf):
            if v.members is None:
                raise RuntimeError("leaf members were dropped after construction")
            out.extend(v.members)
            continue
        out.append((v.pivot.start, v.pivot.alterations))
        for slot in UNALTERED_SLOTS:
            c = v.children[slot]
            if c is not None:
                stack.append(c)
    return out


def path_label(tree: Tree, target: TreeNode | TruncLeaf) -> str | None:
    """Edge-label string (``u``/``a`` per edge) from the root to ``target``."""
    for v, lam in preorder(tree.root):
        if v is target:
            return lam
    return None


def matching_nodes(
    node: TreeNode | TruncLeaf,
    qv: AlteredString,
    ctx: QueryContext,
    leaves: list[TruncLeaf] | None = None,
) -> list[TreeNode]:
    """All descendant nodes (inclusive) whose pivot has ``qv`` as a prefix.

    Equivalent to a prefix scan over every subtree pivot, altered descendants
    included, but organised as a walk: at a prefix-matching node, subsets
    whose members provably all keep the prefix are swallowed whole, the
    others are recursed into.  When ``leaves`` is given, every truncated
    leaf the walk touches (whose members may therefore contain
    prefix-matching elements) is appended to it.
    """
    out: list[TreeNode] = []
    _match_walk(node, qv, ctx, out, leaves)
    return out


def _collect_all_nodes(
    v: TreeNode | TruncLeaf | None,
    out: list[TreeNode],
    leaves: list[TruncLeaf] | None,
) -> None:
    if v is None:
        return
    if isinstance(v, TruncLeaf):
        if leaves is not None:
            leaves.append(v)
        return
    out.append(v)
    for c in v.children:
        _collect_all_nodes(c, out, leaves)


def _match_walk(
    v: TreeNode | TruncLeaf | None,
    qv: AlteredString,
    ctx: QueryContext,
    out: list[TreeNode],
    leaves: list[TruncLeaf] | None = None,
) -> None:
    if v is None:
        return
    if isinstance(v, TruncLeaf):
        if leaves is not None:
            leaves.append(v)
        return
    p = v.pivot
    i = lcp_altered(qv, p, ctx)
    lq = ctx.length(qv)
    ch = v.children
    if i == lq:
        out.append(v)
        m = v.median
        if i <= m:
            # every element with agreement >= m keeps the prefix, and so do
            # all of their descendants (pairwise agreements exceed lq, so
            # later rewrites never touch the first lq symbols)
            for slot in (LESS_L, ALT_LESS_L, GREATER_L, ALT_GREATER_L, GREATER_M):
                _collect_all_nodes(ch[slot], out, leaves)
            _match_walk(ch[LESS_M], qv, ctx, out, leaves)
            _match_walk(ch[ALT_LESS_M], qv, ctx, out, leaves)
        else:
            _match_walk(ch[GREATER_M], qv, ctx, out, leaves)
            _match_walk(ch[LESS_M], qv, ctx, out, leaves)
            for slot in (ALT_LESS_M, ALT_LESS_L, ALT_GREATER_L):
                _match_walk(ch[slot], qv, ctx, out, leaves)
    else:
        # Prefix-matching pivots can hide below the child the query routes
        # to and below any altered twin (a rewrite may re-agree with qv).
        # They can also hide below the below-median subtree: its members
        # disagree with qv where they disagree with the pivot, but deeper
        # rewrites copy subtree-pivot symbols that may equal the pivot's own
        # prefix there.  The other unaltered subtrees disagree with qv at a
        # fixed offset whose symbol every deeper rewrite preserves.
        tag = _side_tag(v, qv, i, ctx)
        _match_walk(ch[TAG_TO_SLOT[tag]], qv, ctx, out, leaves)
        if tag != TAG_LESS_M:
            _match_walk(ch[LESS_M], qv, ctx, out, leaves)
        for slot in (ALT_LESS_M, ALT_LESS_L, ALT_GREATER_L):
            _match_walk(ch[slot], qv, ctx, out, leaves)


# ---------------------------------------------------------------------------
# Radius-routed query
# ---------------------------------------------------------------------------


@dataclass
class QueryStats:
    """Counters describing one query's walk through the tree."""

    visited: int = 0  # nodes entered in routed mode
    rpos_visited: int = 0  # ... of those, entered with positive radius
    zero_visited: int = 0  # ... entered with radius zero
    dfs_visited: int = 0  # nodes swept by exhaustive (all-match) descent
    leaf_hits: int = 0


def run_query(
    tree: Tree,
    ctx: QueryContext,
    r: int,
    zero_case: Callable[[TreeNode, AlteredString], None] | None = None,
) -> tuple[list[AlteredString], list[TruncLeaf], QueryStats]:
    """Walk the tree for the context's query at radius ``r``.

    Returns ``(pivot_candidates, leaves, stats)``: pivots whose local check
    passed (or that were swept by an all-match descent) and every truncated
    leaf the walk reached.  Candidates still need the final filter against
    the unaltered suffix.

    With ``zero_case`` given, any recursive call whose remaining radius is
    zero is handed to it as ``zero_case(node, variant)`` instead of being
    routed further (the truncated-tree engine resolves those by manual
    traversal plus matching-node collection); without it, zero-radius calls
    keep routing through unaltered children.
    """
    stats = QueryStats()
    cands: list[AlteredString] = []
    leaves: list[TruncLeaf] = []
    root = tree.root
    if isinstance(root, TruncLeaf):
        leaves.append(root)
        stats.leaf_hits = 1
        return cands, leaves, stats
    _visit(root, query_string(), r, ctx, cands, leaves, stats, zero_case)
    stats.leaf_hits = len(leaves)
    return cands, leaves, stats


def _dfs_all(v, cands, leaves, stats) -> None:
    if v is None:
        return
    stack = [v]
    while stack:
        u = stack.pop()
        if isinstance(u, TruncLeaf):
            leaves.append(u)
            continue
        stats.dfs_visited += 1
        cands.append(u.pivot)
        ch = u.children
        for slot in UNALTERED_SLOTS:
            c = ch[slot]
            if c is not None:
                stack.append(c)


def _visit(node, qv, r, ctx, cands, leaves, stats, zero_case=None) -> None:
    if node is None:
        return
    if isinstance(node, TruncLeaf):
        leaves.append(node)
        return
    if r == 0 and zero_case is not None:
        zero_case(node, qv)
        return
    stats.visited += 1
    if r > 0:
        stats.rpos_visited += 1
    else:
        stats.zero_visited += 1

    p = node.pivot
    i, ok, _dist = probe(qv, p, r, ctx)
    if ok:
        cands.append(p)

    lq = ctx.length(qv)
    m = node.median
    ch = node.children

    if i == lq:
        # the query variant is a prefix of the pivot
        if i < m:
            _visit(ch[LESS_M], qv, r, ctx, cands, leaves, stats, zero_case)
            _dfs_all(ch[LESS_L], cands, leaves, stats)
            _dfs_all(ch[GREATER_L], cands, leaves, stats)
            _dfs_all(ch[GREATER_M], cands, leaves, stats)
        elif i == m:
            if r > 0:
                _visit(ch[ALT_LESS_M], qv, r - 1, ctx, cands, leaves, stats, zero_case)
                _visit(ch[ALT_LESS_L], qv, r - 1, ctx, cands, leaves, stats, zero_case)
                _visit(ch[ALT_GREATER_L], qv, r - 1, ctx, cands, leaves, stats, zero_case)
            else:
                # radius spent: the unaltered twins match the prefix exactly
                _dfs_all(ch[LESS_L], cands, leaves, stats)
                _dfs_all(ch[GREATER_L], cands, leaves, stats)
            _dfs_all(ch[GREATER_M], cands, leaves, stats)
        else:
            if r > 0:
                _visit(ch[ALT_LESS_M], qv, r - 1, ctx, cands, leaves, stats, zero_case)
                _visit(ch[ALT_LESS_L], qv, r - 1, ctx, cands, leaves, stats, zero_case)
                _visit(ch[ALT_GREATER_L], qv, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[GREATER_M], qv, r, ctx, cands, leaves, stats, zero_case)
        return

    if i < m:
        _visit(ch[LESS_M], qv, r, ctx, cands, leaves, stats, zero_case)
        if r > 0:
            qh = qv.with_alteration(i + 1, ctx.char(p, i + 1))
            _visit(ch[LESS_L], qh, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[GREATER_L], qh, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[GREATER_M], qh, r - 1, ctx, cands, leaves, stats, zero_case)
    elif i > m:
        if r > 0:
            _visit(ch[ALT_LESS_M], qv, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[ALT_LESS_L], qv, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[ALT_GREATER_L], qv, r - 1, ctx, cands, leaves, stats, zero_case)
        _visit(ch[GREATER_M], qv, r, ctx, cands, leaves, stats, zero_case)
    else:
        # i == m: route by which side of the pivot the variant falls on
        if i >= ctx.length(p):
            greater = True  # the pivot is a proper prefix of the variant
        else:
            greater = ctx.char(qv, i + 1) > ctx.char(p, i + 1)
        if greater:
            if r > 0:
                _visit(ch[ALT_LESS_M], qv, r - 1, ctx, cands, leaves, stats, zero_case)
                qh = qv.with_alteration(i + 1, ctx.char(p, i + 1))
                _visit(ch[ALT_LESS_L], qh, r - 1, ctx, cands, leaves, stats, zero_case)
                _visit(ch[GREATER_M], qh, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[GREATER_L], qv, r, ctx, cands, leaves, stats, zero_case)
        else:
            if r > 0:
                _visit(ch[ALT_LESS_M], qv, r - 1, ctx, cands, leaves, stats, zero_case)
                qh = qv.with_alteration(i + 1, ctx.char(p, i + 1))
                _visit(ch[ALT_GREATER_L], qh, r - 1, ctx, cands, leaves, stats, zero_case)
                _visit(ch[GREATER_M], qh, r - 1, ctx, cands, leaves, stats, zero_case)
            _visit(ch[LESS_L], qv, r, ctx, cands, leaves, stats, zero_case)


def query_full(
    tree: Tree,
    q,
    r: int,
    oracle: MismatchOracle,
    strict: bool = False,
) -> list[tuple[int, int]]:
    """All ``(suffix_start, distance)`` pairs within radius ``r`` of ``q``.

    Runs directly on a full (untruncated) tree; truncated trees additionally
    report leaves, which the index engine resolves through its inversion
    tables.  Every candidate is re-verified against the unaltered suffix
    before being reported (``strict`` additionally asserts the re-check and
    uniqueness, for tests).
    """
    if r < 0 or r > tree.k:
        raise RadiusOutOfRange(f"radius {r} outside 0..{tree.k}")
    ctx = init_query(q, oracle)
    cands, leaves, _stats = run_query(tree, ctx, r)
    if strict and tree.sigma is None:
        assert not leaves
    qv = query_string()
    out: dict[int, int] = {}
    for pivot in cands:
        base = pivot.start
        ok, dist = within_distance(qv, text_suffix(base), r, ctx)
        if strict:
            assert ok, f"candidate pivot at {base} failed the final filter"
            assert base not in out, f"duplicate candidate for suffix {base}"
        if ok and base not in out:
            out[base] = dist
    return sorted(out.items())
