"""Leaf labelling and path-function evaluation for truncated trees.

A truncated tree replaces every subtree of at most ``sigma`` elements with a
labelled leaf.  Grouping leaves by their root path (a string over ``u`` /
``a`` for unaltered / altered edges) yields, per path ``lam``, a partial
function

    ``f_lam(i) = label of the leaf that suffix i reaches along lam``

mapping suffix starts ``1..n`` to leaf labels (at most ``n - 1`` of them) or
to "no leaf" (``None``).  The index stores these functions' *inverses*
(:mod:`hdx.inversion`) instead of the leaf members themselves; evaluating
``f_lam`` forward — a root-to-leaf walk re-deriving the construction's
placement decisions — is what makes the inversion machinery work.
"""

from __future__ import annotations

from .lcp import QueryContext
from .text import text_suffix
from .tree import (
    TAG_PIVOT,
    TAG_TO_ALT_SLOT,
    TAG_TO_SLOT,
    Tree,
    TruncLeaf,
    classify,
    preorder,
)


def truncate_labels(tree: Tree) -> dict[str, int]:
    """Label every truncated leaf, numbering per path in preorder.

    Fills ``leaf.label`` (1-based within the leaf's path group) and
    ``leaf.path``, stores the groups on ``tree.lambdas``, and returns
    ``{path: leaf_count}``.
    """
    lambdas: dict[str, list[TruncLeaf]] = {}
    for v, lam in preorder(tree.root):
        if isinstance(v, TruncLeaf):
            lambdas.setdefault(lam, []).append(v)
    for lam, leaves in lambdas.items():
        for idx, leaf in enumerate(leaves, start=1):
            leaf.label = idx
            leaf.path = lam
    tree.lambdas = lambdas
    return {lam: len(leaves) for lam, leaves in lambdas.items()}


def eval_f(tree: Tree, lam: str, i: int, ctx: QueryContext) -> int | None:
    """Evaluate ``f_lam(i)``: walk from the root consuming ``lam``.

    Each ``u`` step follows the child the current string classifies into;
    each ``a`` step rewrites the string toward the current pivot and follows
    the altered twin.  Returns the reached leaf's label, or ``None`` when the
    walk dies: the string becomes a pivot, an ``a`` step lands on the
    above-median subset (which has no altered twin), the required child does
    not exist, a leaf is reached before ``lam`` is consumed, or ``lam`` ends
    at an internal node.
    """
    node = tree.root
    s = text_suffix(i)
    for step in lam:
        if isinstance(node, TruncLeaf):
            return None
        tag, lcp = classify(s, node, ctx)
        if tag == TAG_PIVOT:
            return None
        if step == "u":
            child = node.children[TAG_TO_SLOT[tag]]
        elif step == "a":
            alt_slot = TAG_TO_ALT_SLOT.get(tag)
            if alt_slot is None:
                return None
            child = node.children[alt_slot]
            p = node.pivot
            if lcp < ctx.length(s) and lcp < ctx.length(p):
                s = s.with_alteration(lcp + 1, ctx.char(p, lcp + 1))
            # otherwise the agreement spans a whole string and the
            # construction carried the element over unchanged
        else:
            raise ValueError(f"path step must be 'u' or 'a', got {step!r}")
        if child is None:
            return None
        node = child
    if isinstance(node, TruncLeaf):
        return node.label
    return None


def label_values(tree: Tree) -> dict[str, list[int | None]]:
    """Per path, the full value table of ``f_lam`` over suffixes ``1..n``.

    Read straight off the leaf membership lists (index 0 of each table is
    unused padding), avoiding ``n`` root-to-leaf walks per path.  Requires
    leaf members, so it must run before they are dropped.
    """
    n = tree.padded.n
    tables: dict[str, list[int | None]] = {}
    for lam, leaves in tree.lambdas.items():
        values: list[int | None] = [None] * (n + 1)
        for leaf in leaves:
            if leaf.members is None:
                raise RuntimeError("leaf members were dropped after construction")
            for base, _alts in leaf.members:
                if values[base] is not None:
                    # one deterministic walk per (path, suffix): a suffix can
                    # reach at most one leaf of a given path
                    raise RuntimeError(
                        f"suffix {base} appears under two leaves of path {lam!r}"
                    )
                values[base] = leaf.label
        tables[lam] = values
    return tables
