"""Reference oracles and structural checkers.

Everything in this module is deliberately simple and independent of the
indexed data structures: linear scans over materialised strings, set algebra
over explicit preimages, and a recursive walker that re-derives every
structural invariant of a built tree from scratch.  Tests measure the fast
paths against these.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .text import PaddedText, SymbolsLike, as_symbols, hamming_naive


def brute_force_query(
    text: PaddedText, q: SymbolsLike, r: int
) -> list[tuple[int, int]]:
    """All ``(position, distance)`` pairs with distance at most ``r``.

    Compares the query against every padded suffix ``1..n`` directly,
    counting mismatches over the overlap (trailing symbols of the longer
    string are free).  Vectorised with numpy; see
    :func:`brute_force_query_scalar` for the plain-Python twin used to check
    this implementation itself.
    """
    qs = np.asarray(as_symbols(q), dtype=np.int64)
    if qs.size == 0:
        raise ValueError("query must be non-empty")
    big_n = text.padded_length
    ext = np.concatenate(
        [np.asarray(text.symbols, dtype=np.int64), np.full(qs.size, -1, dtype=np.int64)]
    )
    windows = np.lib.stride_tricks.sliding_window_view(ext, qs.size)[: text.n]
    dist = (windows != qs).sum(axis=1)
    starts = np.arange(1, text.n + 1)
    overlap = big_n - starts + 1
    dist = dist - np.maximum(qs.size - overlap, 0)
    hits = np.nonzero(dist <= r)[0]
    return [(int(i) + 1, int(dist[i])) for i in hits]


def brute_force_query_scalar(
    text: PaddedText, q: SymbolsLike, r: int
) -> list[tuple[int, int]]:
    """Plain-Python equivalent of :func:`brute_force_query`."""
    qs = as_symbols(q)
    out: list[tuple[int, int]] = []
    for i in range(1, text.n + 1):
        suffix = text.symbols[i - 1 :]
        d = hamming_naive(qs, suffix)
        if d <= r:
            out.append((i, d))
    return out


def brute_force_preimage(
    f: Callable[[int], int | None], n: int, j: int
) -> list[int]:
    """All ``i`` in ``1..n`` with ``f(i) == j``, by exhaustive evaluation."""
    return [i for i in range(1, n + 1) if f(i) == j]


def walk_invariants(tree, oracle=None, audit: bool = False) -> list[str]:
    """Re-derive every structural invariant of a built tree from scratch.

    Returns a list of human-readable violation strings; an empty list means
    the tree is sound.  The cheap pass checks bookkeeping that survives
    serialisation: size fields, the halving guarantee, alteration budgets,
    slot occupancy rules, leaf sizes, and label numbering.  With
    ``audit=True`` (requires leaf members and an exact-capable ``oracle``)
    it additionally rebuilds each node's element set and confirms the pivot
    rank, the median, the placement of every element, and the altered twins'
    contents element by element.
    """
    from functools import cmp_to_key
    from math import ceil, log2

    from .lcp import MismatchOracle, text_context
    from .tree import (
        SLOT_NAMES,
        TAG_TO_ALT_SLOT,
        TAG_TO_SLOT,
        TruncLeaf,
        TreeNode,
        UNALTERED_SLOTS,
        classify,
        dfs_collect,
        preorder,
        text_build_ops,
        _insert_alteration,
    )

    out: list[str] = []
    n = tree.padded.n
    sigma = tree.sigma

    def note(msg: str) -> None:
        out.append(msg)

    def size_of(v) -> int:
        return v.size

    # -- bookkeeping walk ----------------------------------------------------
    nodes = leaves = 0
    max_depth = 0
    stack: list[tuple[object, int, int, int | None]] = [(tree.root, tree.k, 0, None)]
    while stack:
        v, k_rem, depth, parent_size = stack.pop()
        max_depth = max(max_depth, depth)
        if parent_size is not None and size_of(v) > parent_size // 2:
            note(f"halving violated: child size {size_of(v)} under parent "
                 f"of size {parent_size}")
        if isinstance(v, TruncLeaf):
            leaves += 1
            if sigma is None:
                note("truncated leaf in a tree built without a threshold")
            elif not (1 <= v.size <= sigma):
                note(f"leaf size {v.size} outside 1..{sigma}")
            if v.members is not None and len(v.members) != v.size:
                note(f"leaf stores {len(v.members)} members but size {v.size}")
            continue
        if not isinstance(v, TreeNode):
            note(f"unexpected node type {type(v).__name__}")
            continue
        nodes += 1
        if v.k_rem != k_rem:
            note(f"k_rem {v.k_rem} where the path implies {k_rem}")
        if sigma is not None and v.size <= sigma:
            note(f"internal node of size {v.size} should be a leaf "
                 f"(threshold {sigma})")
        if len(v.pivot.alterations) > tree.k - k_rem:
            note(f"pivot carries {len(v.pivot.alterations)} alterations with "
                 f"only {tree.k - k_rem} spent")
        offs = [o for o, _ in v.pivot.alterations]
        if offs != sorted(set(offs)):
            note("pivot alterations not in canonical strictly-increasing order")
        if not (1 <= v.pivot.start <= n):
            note(f"pivot base {v.pivot.start} outside 1..{n}")
        kids = v.children
        if v.size == 1 and any(c is not None for c in kids):
            note("singleton node has children")
        unaltered_total = sum(
            size_of(kids[s]) for s in UNALTERED_SLOTS if kids[s] is not None
        )
        if v.size != 1 + unaltered_total:
            note(f"size {v.size} != 1 + children {unaltered_total}")
        for tag, slot in TAG_TO_SLOT.items():
            alt = TAG_TO_ALT_SLOT.get(tag)
            if alt is None:
                continue
            have_plain = kids[slot] is not None
            have_alt = kids[alt] is not None
            if have_alt and not have_plain:
                note(f"altered {SLOT_NAMES[alt]} without its unaltered run")
            if have_alt and k_rem <= 0:
                note(f"altered {SLOT_NAMES[alt]} despite exhausted budget")
            if have_plain and k_rem > 0 and not have_alt:
                note(f"missing altered twin for {SLOT_NAMES[slot]}")
            if have_plain and have_alt and size_of(kids[alt]) != size_of(kids[slot]):
                note(f"altered {SLOT_NAMES[alt]} size {size_of(kids[alt])} != "
                     f"unaltered size {size_of(kids[slot])}")
        for slot in range(7):
            c = kids[slot]
            if c is None:
                continue
            child_k = k_rem if slot in UNALTERED_SLOTS else k_rem - 1
            stack.append((c, child_k, depth + 1, v.size))

    if nodes != tree.node_count:
        note(f"node_count {tree.node_count} != walked {nodes}")
    if leaves != tree.leaf_count:
        note(f"leaf_count {tree.leaf_count} != walked {leaves}")
    if max_depth != tree.height:
        note(f"height {tree.height} != walked {max_depth}")
    if n >= 2 and max_depth > ceil(log2(n)):
        note(f"height {max_depth} exceeds ceil(log2 {n})")
    if isinstance(tree.root, TreeNode) and tree.root.size != n:
        note(f"root size {tree.root.size} != {n}")

    # -- leaf label numbering --------------------------------------------------
    by_path: dict[str, list] = {}
    for v, lam in preorder(tree.root):
        if isinstance(v, TruncLeaf):
            by_path.setdefault(lam, []).append(v)
    if tree.lambdas:
        if set(tree.lambdas) != set(by_path):
            note("lambda table paths differ from the tree's leaf paths")
        for lam, group in by_path.items():
            if tree.lambdas.get(lam, []) != group:
                note(f"lambda table for {lam!r} lists wrong leaves")
            labels = [lf.label for lf in group]
            if labels != list(range(1, len(group) + 1)):
                note(f"labels under {lam!r} are {labels}, expected "
                     f"1..{len(group)}")
            for lf in group:
                if lf.path is not None and lf.path != lam:
                    note(f"leaf path {lf.path!r} does not match its position "
                         f"{lam!r}")
                if lf.label is not None and not (1 <= lf.label <= max(1, n - 1)):
                    note(f"leaf label {lf.label} outside 1..{max(1, n - 1)}")

    # -- path labels -----------------------------------------------------------
    # every path spends at most k alterations, and the paths of the internal
    # nodes pivoting on any one suffix are mutually prefix-free (so a walk
    # meets each suffix's pivot at most once)
    paths_by_base: dict[int, list[str]] = {}
    for v, lam in preorder(tree.root):
        spent = lam.count("a")
        if spent > tree.k:
            note(f"path label {lam!r} spends {spent} alterations, budget "
                 f"{tree.k}")
        if isinstance(v, TreeNode):
            paths_by_base.setdefault(v.pivot.start, []).append(lam)
    for base, labels in paths_by_base.items():
        labels.sort()
        for a, b in zip(labels, labels[1:]):
            if b.startswith(a):
                note(f"pivot paths for suffix {base} are not prefix-free: "
                     f"{a!r} and {b!r}")

    if not audit:
        return out

    # -- deep audit ------------------------------------------------------------
    if oracle is None or oracle.exact is None:
        oracle = MismatchOracle(tree.padded, mode="exact")
    ctx = text_context(oracle)
    ops = text_build_ops(oracle)
    cmp_key = cmp_to_key(ops.compare)

    from .text import text_suffix

    for v, lam in preorder(tree.root):
        if not isinstance(v, TreeNode) or v.size == 1:
            continue
        elems = dfs_collect(v)
        if len(elems) != v.size:
            note(f"at {lam!r}: collected {len(elems)} elements, size says "
                 f"{v.size}")
        bases = [b for b, _ in elems]
        if len(set(bases)) != len(bases):
            note(f"at {lam!r}: duplicate bases within one set")
        ordered = sorted(elems, key=cmp_key)
        rank = (v.size + 1) // 2 - 1
        if ordered[rank] != (v.pivot.start, v.pivot.alterations):
            note(f"at {lam!r}: pivot is not the lower-median element")
        groups: dict[str, list] = {}
        lcp_by_elem: dict[tuple, int] = {}
        for b, a in elems:
            if (b, a) == (v.pivot.start, v.pivot.alterations):
                continue
            tag, i = classify(text_suffix(b, a), v, ctx)
            groups.setdefault(tag, []).append((b, a))
            lcp_by_elem[(b, a)] = i
        agreements = sorted(lcp_by_elem.values())
        if agreements and v.median != agreements[(v.size - 2) // 2]:
            note(f"at {lam!r}: median {v.median} is not the lower median of "
                 f"the agreements")
        for tag, slot in TAG_TO_SLOT.items():
            want = sorted(groups.get(tag, []))
            child = v.children[slot]
            got = sorted(dfs_collect(child)) if child is not None else []
            if want != got:
                note(f"at {lam!r}: {SLOT_NAMES[slot]} holds the wrong set")
                continue
            alt_slot = TAG_TO_ALT_SLOT.get(tag)
            if alt_slot is None or v.children[alt_slot] is None:
                continue
            len_p = ops.length(v.pivot.start)
            expect = []
            for b, a in groups.get(tag, []):
                lc = lcp_by_elem[(b, a)]
                if lc >= len_p or lc >= ops.length(b):
                    expect.append((b, a))
                else:
                    expect.append(
                        (b, _insert_alteration(
                            a, lc + 1, ops.char(v.pivot.start,
                                                v.pivot.alterations, lc + 1)))
                    )
            got_alt = sorted(dfs_collect(v.children[alt_slot]))
            if sorted(expect) != got_alt:
                note(f"at {lam!r}: {SLOT_NAMES[alt_slot]} is not the altered "
                     f"image of {SLOT_NAMES[slot]}")
    return out
