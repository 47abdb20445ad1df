"""Inverting label functions with hash chains plus a certified patch table.

Given ``f`` mapping the universe ``1..n`` to labels ``1..n-1`` (or to no
label), with every preimage of size at most ``sigma``, the index answers
``invert(j) = { i : f(i) = j }`` exactly while storing far fewer than ``n``
entries.

The construction runs ``C`` independent *clusters*.  Each cluster ``c`` draws
a seeded hash ``g_c`` onto ``1..n`` and walks chains of the step function

    ``h_c(i) = g_c(f(i))``  (or ``g_c(n + i)`` where ``f`` is undefined),

storing only each chain's ``end -> start`` pair.  To invert ``j``, walk
``w = g_c(j), h_c(w), ...`` for at most ``chain_length`` steps; if a stored
end is hit, replay that one chain from its start and collect the elements
mapping to ``j``.  The walk enters any chain containing a preimage of ``j``
one step after that preimage, so the replay finds it — unless hash
collisions or chain overlaps hide it.

Rather than hoping, the build *certifies*: it re-runs the inversion walk for
every label (vectorised over numpy) and stores the preimages the chains
failed to produce in an explicit ``missing`` table.  Queries are therefore
exact regardless of hash behaviour; randomness only controls how small
``missing`` gets.  With ``clusters=0`` the index degenerates to the full
explicit inverse.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BotQuery

_MASK64 = (1 << 64) - 1
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """The splitmix64 finalizer: a cheap, well-distributed 64-bit mixer."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * _MIX_A) & _MASK64
    x ^= x >> 27
    x = (x * _MIX_B) & _MASK64
    x ^= x >> 31
    return x


def hash_onto(seed: int, v: int, n: int) -> int:
    """Seeded hash of ``v`` onto ``1..n`` (the ``g_c`` family)."""
    return mix64(v ^ seed) % n + 1


def _mix64_np(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX_A)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX_B)
    x ^= x >> np.uint64(31)
    return x


def hash_onto_np(seed: int, v: np.ndarray, n: int) -> np.ndarray:
    """Vectorised :func:`hash_onto`; bit-identical to the scalar version."""
    mixed = _mix64_np(v.astype(np.uint64) ^ np.uint64(seed))
    return (mixed % np.uint64(n)).astype(np.int64) + 1


@dataclass(frozen=True)
class InversionParams:
    """Sizing of one inversion structure."""

    n: int  # universe size: elements are 1..n
    sigma: int  # max preimage size of the inverted function
    chain_length: int
    clusters: int
    starts_per_cluster: int
    seed: int

    @classmethod
    def defaults(
        cls, n: int, sigma: int, cluster_cap: int = 64, seed: int = 0
    ) -> "InversionParams":
        """Parameter choices that balance chain coverage against table size.

        Chain length grows a bit faster than ``sigma`` so a chain can carry
        a whole preimage class; the cluster count grows fast enough that at
        least one cluster separates any fixed preimage class with constant
        probability, capped because certification makes extra clusters a
        size/speed trade rather than a correctness need.
        """
        if n < 1:
            raise ValueError(f"universe size must be positive, got {n}")
        if sigma < 1:
            raise ValueError(f"sigma must be at least 1, got {sigma}")
        length = max(1, math.ceil(sigma * math.log2(sigma + 1)))
        clusters = min(
            math.ceil(sigma**2 * math.log2(sigma + 2) ** 3), max(0, cluster_cap)
        )
        starts = max(1, math.ceil(n / length**3))
        return cls(
            n=n,
            sigma=sigma,
            chain_length=length,
            clusters=clusters,
            starts_per_cluster=starts,
            seed=seed,
        )


def choose_params(
    n: int,
    sigma: int,
    explicit_entries: int,
    cluster_cap: int = 64,
    seed: int = 0,
) -> InversionParams:
    """Defaults, downgraded to the explicit inverse when chains cannot win.

    ``explicit_entries`` is the number of defined elements of the function.
    Storing them outright costs exactly that many entries, while the chain
    tables are bounded below by one entry per start; when the chain bound is
    not strictly smaller, chains would both cost more space and slow the
    build (they must hash the whole universe), so ``clusters`` drops to 0
    and the build falls back to the certified-complete explicit table.
    """
    params = InversionParams.defaults(n, sigma, cluster_cap=cluster_cap, seed=seed)
    chain_bound = params.clusters * params.starts_per_cluster
    if chain_bound >= max(1, explicit_entries):
        params = InversionParams(
            n=params.n,
            sigma=params.sigma,
            chain_length=params.chain_length,
            clusters=0,
            starts_per_cluster=params.starts_per_cluster,
            seed=params.seed,
        )
    return params


@dataclass
class Cluster:
    """One seeded chain family: only the ``end -> start`` pairs survive."""

    seed: int
    ends: dict[int, int]


@dataclass
class InversionIndex:
    params: InversionParams
    clusters: list[Cluster]
    missing: dict[int, tuple[int, ...]]
    evaluator: Callable[[int], int | None] | None = None

    def space_summary(self) -> dict[str, int]:
        chain_entries = sum(len(c.ends) for c in self.clusters)
        missing_entries = sum(len(v) for v in self.missing.values())
        return {
            "chain_entries": chain_entries,
            "missing_labels": len(self.missing),
            "missing_entries": missing_entries,
            "stored_entries": chain_entries + missing_entries,
        }

    # -- querying -----------------------------------------------------------

    def _eval(self, i: int, memo: dict) -> int | None:
        got = memo.get(i, _UNSET)
        if got is _UNSET:
            got = self.evaluator(i)
            memo[i] = got
        return got

    def _chase(self, j: int, memo: dict) -> set[int]:
        """Preimages of ``j`` recoverable from the chain tables alone."""
        found: set[int] = set()
        n = self.params.n
        length = self.params.chain_length
        for cl in self.clusters:
            seed = cl.seed
            ends = cl.ends
            w = hash_onto(seed, j, n)
            for t in range(length + 1):
                start = ends.get(w)
                if start is not None:
                    e = start
                    for step in range(length + 1):
                        fe = self._eval(e, memo)
                        if fe == j:
                            found.add(e)
                        if step < length:
                            e = hash_onto(seed, fe if fe is not None else n + e, n)
                    break
                if t < length:
                    fw = self._eval(w, memo)
                    w = hash_onto(seed, fw if fw is not None else n + w, n)
        return found

    def invert(self, j: int, memo: dict | None = None) -> tuple[int, ...]:
        """All elements mapping to label ``j``, in increasing order.

        ``memo`` caches evaluator results; pass a shared dict when inverting
        several labels of the same function.

        Raises:
            BotQuery: ``j`` is None (the "no label" value has no preimage
                set; it is not a label).
        """
        if j is None:
            raise BotQuery("cannot invert the undefined value")
        if memo is None:
            memo = {}
        found = self._chase(j, memo) if self.clusters else set()
        found.update(self.missing.get(j, ()))
        return tuple(sorted(found))

    def invert_chains_only(self, j: int, memo: dict | None = None) -> tuple[int, ...]:
        """Chain-table recovery without the certified patch table (tests)."""
        if j is None:
            raise BotQuery("cannot invert the undefined value")
        if memo is None:
            memo = {}
        return tuple(sorted(self._chase(j, memo))) if self.clusters else ()


_UNSET = object()


def build_inversion_index(
    evaluator: Callable[[int], int | None] | None,
    params: InversionParams,
    values: Sequence[int | None] | None = None,
) -> InversionIndex:
    """Build chains for ``f`` and certify them against its full value table.

    ``values`` is the table ``f(1..n)`` (index 0 unused); when omitted it is
    computed by sweeping ``evaluator``.  The returned index uses
    ``evaluator`` at query time for chain replay, so one of the two must be
    provided (indexes loaded from storage get their evaluator reattached).
    """
    n = params.n
    if values is None:
        if evaluator is None:
            raise ValueError("need an evaluator or a value table")
        values = [None] + [evaluator(i) for i in range(1, n + 1)]
    if len(values) != n + 1:
        raise ValueError(f"value table must have {n + 1} entries, got {len(values)}")

    # full preimage lists, for certification
    preimages: dict[int, list[int]] = {}
    for i in range(1, n + 1):
        v = values[i]
        if v is not None:
            preimages.setdefault(v, []).append(i)

    rng = random.Random(params.seed)
    clusters: list[Cluster] = []
    missing: dict[int, tuple[int, ...]] = {}

    if params.clusters == 0 or not preimages:
        for _ in range(params.clusters):  # keep rng stream stable vs. C>0
            rng.getrandbits(64)
            for _ in range(params.starts_per_cluster):
                rng.randrange(1, n + 1)
        missing = {j: tuple(p) for j, p in preimages.items()}
        return InversionIndex(params, [], missing, evaluator)

    # h-value per element, as an array: h_c(i) = g_c(values[i] or n + i)
    raw = np.array(
        [0] + [values[i] if values[i] is not None else n + i for i in range(1, n + 1)],
        dtype=np.uint64,
    )
    fv = np.array(
        [0] + [values[i] if values[i] is not None else 0 for i in range(1, n + 1)],
        dtype=np.int64,
    )
    labels = sorted(preimages)
    lab_arr = np.array(labels, dtype=np.uint64)
    recovered: dict[int, set[int]] = {j: set() for j in labels}

    for _c in range(params.clusters):
        seed_c = rng.getrandbits(64)
        starts = [rng.randrange(1, n + 1) for _ in range(params.starts_per_cluster)]
        h_of = hash_onto_np(seed_c, raw[1:], n)  # h_of[i-1] = h_c(i)

        s_arr = np.array(starts, dtype=np.int64)
        chain = np.empty((len(starts), params.chain_length + 1), dtype=np.int64)
        chain[:, 0] = s_arr
        cur = s_arr
        for t in range(1, params.chain_length + 1):
            cur = h_of[cur - 1]
            chain[:, t] = cur

        ends_col = chain[:, -1]
        # first-writer-wins end map and start->row map
        uniq_ends, first_idx = np.unique(ends_col, return_index=True)
        end_map = np.zeros(n + 1, dtype=np.int64)
        end_map[uniq_ends] = s_arr[first_idx]
        uniq_starts, first_rows = np.unique(s_arr, return_index=True)
        row_of_start = np.full(n + 1, -1, dtype=np.int64)
        row_of_start[uniq_starts] = first_rows

        ends_dict = {int(e): int(s) for e, s in zip(uniq_ends, s_arr[first_idx])}
        clusters.append(Cluster(seed=seed_c, ends=ends_dict))

        # certification: replay the inversion walk for every label at once
        w = hash_onto_np(seed_c, lab_arr, n)
        alive = np.ones(len(labels), dtype=bool)
        hit_row = np.full(len(labels), -1, dtype=np.int64)
        for t in range(params.chain_length + 1):
            hits = alive & (end_map[w] != 0)
            if hits.any():
                hit_row[hits] = row_of_start[end_map[w[hits]]]
                alive &= ~hits
            if t < params.chain_length:
                w = np.where(alive, h_of[w - 1], w)
        found_idx = np.nonzero(hit_row >= 0)[0]
        if found_idx.size:
            rows = chain[hit_row[found_idx]]
            matches = fv[rows] == lab_arr[found_idx].astype(np.int64)[:, None]
            for pos, li in enumerate(found_idx):
                j = labels[int(li)]
                got = rows[pos][matches[pos]]
                if got.size:
                    recovered[j].update(int(x) for x in got)

    for j, pre in preimages.items():
        rest = [i for i in pre if i not in recovered[j]]
        if rest:
            missing[j] = tuple(rest)

    return InversionIndex(params, clusters, missing, evaluator)
