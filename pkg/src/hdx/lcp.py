"""Longest-common-prefix backends and the kangaroo mismatch walker.

Two interchangeable backends answer "how far do these two suffixes agree?":

* :class:`ExactLcpBackend` — suffix array + Kasai LCP array + sparse-table
  RMQ over the padded text.  Deterministic, O(1) per text/text question,
  linear space.
* :class:`FingerprintLcpBackend` — Karp–Rabin prefix fingerprints sampled
  every ``tau`` positions (``ceil(N / tau) + 1`` samples total), answering
  via exponential + binary search on fingerprinted blocks followed by at
  most ``tau`` direct symbol reads.  Monte Carlo; *paranoid* verification
  re-reads the boundary symbols directly and raises
  :class:`~hdx.errors.FingerprintCollision` on any inconsistency, after
  which the caller reseeds and retries.

Query symbols are never part of the text, so query/text questions always go
through fingerprints (the exact backend carries a ``tau = 1`` fingerprint
table for them).  On top of the raw backends, :func:`first_mismatches`
implements the kangaroo walk over altered strings: it alternates raw LCP
jumps with single-symbol probes at alteration offsets, so two strings with
``a`` and ``b`` rewrites need at most ``a + b + limit`` LCP calls to locate
their first ``limit`` mismatches.
"""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np

from .errors import (
    EmptyQuery,
    FingerprintCollision,
    SentinelInQuery,
)
from .text import (
    QUERY,
    SENTINEL,
    TEXT,
    AlteredString,
    PaddedText,
    Symbols,
)

#: Modulus for Karp–Rabin fingerprints: the Mersenne prime 2^61 - 1.  All
#: symbol codes (data < 2^32, sentinel = 2^32, counters < 2^33) stay far
#: below it, so symbols are valid field elements as-is.
FP_MODULUS = (1 << 61) - 1


# ---------------------------------------------------------------------------
# Exact backend: suffix array + Kasai + sparse-table RMQ
# ---------------------------------------------------------------------------


def build_suffix_array(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Suffix array and rank array of ``codes`` by prefix doubling.

    Returns ``(sa, rank)`` with ``sa[r]`` the 0-based start of the ``r``-th
    smallest suffix and ``rank`` its inverse.
    """
    n = int(codes.size)
    if n == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    changed = np.empty(n, dtype=bool)
    changed[0] = False
    changed[1:] = sorted_codes[1:] != sorted_codes[:-1]
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.cumsum(changed)
    width = 1
    while rank[order[-1]] != n - 1:
        key2 = np.full(n, -1, dtype=np.int64)
        key2[: n - width] = rank[width:]
        order = np.lexsort((key2, rank))
        r1 = rank[order]
        r2 = key2[order]
        changed[0] = False
        changed[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.cumsum(changed)
        rank = np.empty(n, dtype=np.int64)
        rank[order] = new_rank
        width *= 2
    return order, rank


def kasai_lcp(codes: Sequence[int], sa: Sequence[int], rank: Sequence[int]) -> list[int]:
    """Adjacent-suffix LCPs: ``lcp[r] = LCP(suffix sa[r], suffix sa[r+1])``."""
    n = len(codes)
    lcp = [0] * max(n - 1, 0)
    h = 0
    for i in range(n):
        r = rank[i]
        if r == n - 1:
            h = 0
            continue
        j = sa[r + 1]
        while i + h < n and j + h < n and codes[i + h] == codes[j + h]:
            h += 1
        lcp[r] = h
        if h:
            h -= 1
    return lcp


class _SparseMin:
    """Static range-minimum over a fixed integer array (O(1) queries)."""

    __slots__ = ("levels",)

    def __init__(self, values: Sequence[int]):
        arr = np.asarray(values, dtype=np.int64)
        levels = [arr]
        j = 1
        while (1 << j) <= arr.size:
            prev = levels[-1]
            half = 1 << (j - 1)
            levels.append(np.minimum(prev[: prev.size - half], prev[half:]))
            j += 1
        # plain lists: scalar indexing is much faster than numpy scalars here
        self.levels = [lv.tolist() for lv in levels]

    def query(self, lo: int, hi: int) -> int:
        """``min(values[lo:hi])`` for ``lo < hi``."""
        span = hi - lo
        level = span.bit_length() - 1
        row = self.levels[level]
        a = row[lo]
        b = row[hi - (1 << level)]
        return a if a <= b else b


class ExactLcpBackend:
    """Suffix-array-based LCP answers for text/text suffix pairs."""

    def __init__(self, padded: PaddedText):
        self.padded = padded
        codes = np.asarray(padded.symbols, dtype=np.int64)
        sa, rank = build_suffix_array(codes)
        self.sa: list[int] = sa.tolist()
        self.rank: list[int] = rank.tolist()
        self._codes: list[int] = list(padded.symbols)
        self._kasai: list[int] = kasai_lcp(self._codes, self.sa, self.rank)
        self._rmq = _SparseMin(self._kasai) if self._kasai else None

    def suffix_lcp0(self, a0: int, b0: int) -> int:
        """LCP of the padded suffixes starting at 0-based ``a0`` and ``b0``."""
        n = len(self._codes)
        if a0 >= n or b0 >= n:
            return 0
        if a0 == b0:
            return n - a0
        ra = self.rank[a0]
        rb = self.rank[b0]
        if ra > rb:
            ra, rb = rb, ra
        return self._rmq.query(ra, rb)


# ---------------------------------------------------------------------------
# Fingerprint backend
# ---------------------------------------------------------------------------


def prefix_fingerprints(symbols: Sequence[int], base: int) -> list[int]:
    """All prefix fingerprints ``H(0)..H(len(symbols))`` of a short string."""
    out = [0] * (len(symbols) + 1)
    h = 0
    for i, c in enumerate(symbols):
        h = (h * base + c) % FP_MODULUS
        out[i + 1] = h
    return out


class FingerprintLcpBackend:
    """Sampled Karp–Rabin fingerprints over the padded text.

    Stores one prefix fingerprint every ``tau`` positions plus one for the
    full text — exactly ``ceil(N / tau) + 1`` samples for a padded length
    ``N``.  A random base modulo 2^61 - 1 is drawn from ``seed``;
    :meth:`reseed` redraws it (used after a detected collision).
    """

    def __init__(self, padded: PaddedText, tau: int, seed: int, paranoid: bool = True):
        if tau < 1:
            raise ValueError(f"tau must be >= 1, got {tau}")
        self.padded = padded
        self.tau = tau
        self.seed = seed
        self.paranoid = paranoid
        self.epoch = 0
        self.collisions_detected = 0
        self._codes: list[int] = list(padded.symbols)
        self._init_tables()

    def _init_tables(self) -> None:
        rng = random.Random(self.seed * 0x9E3779B1 + self.epoch)
        self.base = rng.randrange(1 << 8, FP_MODULUS - 1)
        codes = self._codes
        tau = self.tau
        samples: list[int] = []
        h = 0
        for pos, c in enumerate(codes):
            if pos % tau == 0:
                samples.append(h)
            h = (h * self.base + c) % FP_MODULUS
        self._samples = samples  # fingerprints at positions 0, tau, 2*tau, ...
        self._final = h  # fingerprint of the whole padded text
        self._pow_cache: dict[int, int] = {}

    @property
    def sample_count(self) -> int:
        return len(self._samples) + 1

    def reseed(self) -> None:
        """Redraw the fingerprint base (after a detected collision)."""
        self.epoch += 1
        self._init_tables()

    def _pow(self, e: int) -> int:
        p = self._pow_cache.get(e)
        if p is None:
            p = pow(self.base, e, FP_MODULUS)
            self._pow_cache[e] = p
        return p

    def text_prefix_hash(self, x: int) -> int:
        """Fingerprint of the first ``x`` padded symbols (≤ tau direct reads)."""
        if x >= len(self._codes):
            return self._final
        t, rem = divmod(x, self.tau)
        h = self._samples[t]
        if rem:
            base = self.base
            codes = self._codes
            start = t * self.tau
            for pos in range(start, x):
                h = (h * base + codes[pos]) % FP_MODULUS
        return h

    def _seg_hash(self, kind: str, start0: int, length: int, qpref: list[int] | None) -> int:
        if kind == TEXT:
            lo = self.text_prefix_hash(start0)
            hi = self.text_prefix_hash(start0 + length)
        else:
            lo = qpref[start0]
            hi = qpref[start0 + length]
        return (hi - lo * self._pow(length)) % FP_MODULUS

    def lcp(
        self,
        akind: str,
        a0: int,
        bkind: str,
        b0: int,
        limit: int,
        qsyms: Sequence[int] | None,
        qpref: list[int] | None,
    ) -> int:
        """Agreement length of two suffixes, capped at ``limit``.

        ``a0``/``b0`` are 0-based absolute starts within their sequences
        (text symbols or query symbols).  Raises
        :class:`~hdx.errors.FingerprintCollision` if paranoid verification
        contradicts a fingerprint-verified block.
        """
        if limit <= 0:
            return 0
        codes = self._codes
        tau = self.tau

        def seg_eq(d: int) -> bool:
            return self._seg_hash(akind, a0, d, qpref) == self._seg_hash(
                bkind, b0, d, qpref
            )

        def char(kind: str, seq_pos: int) -> int:
            return codes[seq_pos] if kind == TEXT else qsyms[seq_pos]

        verified = 0
        d = tau
        if d <= limit and seg_eq(d):
            verified = d
            d *= 2
            while d <= limit and seg_eq(d):
                verified = d
                d *= 2
            lo = verified // tau
            hi = min(d, limit) // tau
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if seg_eq(mid * tau):
                    lo = mid
                else:
                    hi = mid - 1
            verified = lo * tau
        if self.paranoid and verified:
            # direct re-read of the last fingerprint-verified symbol
            if char(akind, a0 + verified - 1) != char(bkind, b0 + verified - 1):
                self.collisions_detected += 1
                raise FingerprintCollision(
                    f"fingerprint claimed agreement of {verified} symbols but "
                    f"symbol {verified} differs"
                )
        scan_end = min(verified + tau, limit)
        pos = verified
        while pos < scan_end and char(akind, a0 + pos) == char(bkind, b0 + pos):
            pos += 1
        if pos == verified + tau and verified + tau < limit:
            # the block fingerprint at verified + tau said "different", but a
            # direct scan found no difference: some earlier fingerprinted
            # block must have collided
            self.collisions_detected += 1
            raise FingerprintCollision(
                "fingerprint block mismatch not confirmed by direct scan"
            )
        return pos


# ---------------------------------------------------------------------------
# Oracle facade and query context
# ---------------------------------------------------------------------------


class MismatchOracle:
    """LCP answers for any pair of (altered) text suffixes and query strings.

    ``mode="exact"`` keeps a suffix array for text/text questions and a
    ``tau = 1`` fingerprint table for query/text ones; ``mode="sampled"``
    answers everything through sampled fingerprints with parameter ``tau``.
    """

    def __init__(
        self,
        padded: PaddedText,
        mode: str = "exact",
        tau: int = 1,
        seed: int = 0,
        paranoid: bool = True,
    ):
        if mode not in ("exact", "sampled"):
            raise ValueError(f"unknown oracle mode {mode!r}")
        self.padded = padded
        self.mode = mode
        self.tau = 1 if mode == "exact" else tau
        self.seed = seed
        self.exact = ExactLcpBackend(padded) if mode == "exact" else None
        self.fp = FingerprintLcpBackend(padded, self.tau, seed, paranoid=paranoid)
        self.codes: list[int] = list(padded.symbols)

    def reseed(self) -> None:
        """Redraw fingerprint randomness; invalidates existing query contexts."""
        self.fp.reseed()

    @property
    def epoch(self) -> int:
        return self.fp.epoch


class QueryContext:
    """Per-query working state: symbols, fingerprints, and call counters.

    Built by :func:`init_query`; a context with ``q=None`` (from
    :func:`text_context`) serves text-only comparisons, e.g. during
    construction and label evaluation.
    """

    __slots__ = ("oracle", "q", "qpref", "epoch", "lcp_calls")

    def __init__(self, oracle: MismatchOracle, q: Symbols | None):
        self.oracle = oracle
        self.q = q
        self.qpref = (
            prefix_fingerprints(q, oracle.fp.base) if q is not None else None
        )
        self.epoch = oracle.epoch
        self.lcp_calls = 0

    # -- geometry ----------------------------------------------------------

    def length(self, s: AlteredString) -> int:
        if s.source == TEXT:
            return self.oracle.padded.padded_length - s.start + 1
        return len(self.q) - s.start + 1

    def char(self, s: AlteredString, pos: int) -> int:
        """Materialised symbol of ``s`` at 1-based offset ``pos``."""
        for off, sym in s.alterations:
            if off == pos:
                return sym
            if off > pos:
                break
        if s.source == TEXT:
            return self.oracle.codes[s.start - 2 + pos]
        return self.q[s.start - 2 + pos]

    # -- raw agreement of the unaltered bases -------------------------------

    def raw_lcp(self, a: AlteredString, b: AlteredString, off: int) -> int:
        """LCP of the *bases* of ``a`` and ``b`` shifted ``off`` symbols in."""
        self.lcp_calls += 1
        oracle = self.oracle
        a0 = a.start - 1 + off
        b0 = b.start - 1 + off
        big_n = oracle.padded.padded_length
        rem_a = (big_n - a0) if a.source == TEXT else (len(self.q) - a0)
        rem_b = (big_n - b0) if b.source == TEXT else (len(self.q) - b0)
        if rem_a <= 0 or rem_b <= 0:
            return 0
        if a.source == TEXT and b.source == TEXT and oracle.exact is not None:
            return oracle.exact.suffix_lcp0(a0, b0)
        if self.epoch != oracle.epoch:
            raise FingerprintCollision("stale query context after reseed")
        return oracle.fp.lcp(
            a.source, a0, b.source, b0, min(rem_a, rem_b), self.q, self.qpref
        )


def init_query(q, oracle: MismatchOracle) -> QueryContext:
    """Validate a query pattern and prepare its per-query state.

    Raises:
        EmptyQuery: the pattern has no symbols.
        SentinelInQuery: the pattern contains the sentinel code.
    """
    from .text import as_symbols

    symbols = as_symbols(q)
    if not symbols:
        raise EmptyQuery("query pattern must be non-empty")
    if SENTINEL in symbols:
        raise SentinelInQuery("query pattern must not contain the sentinel code")
    return QueryContext(oracle, symbols)


def text_context(oracle: MismatchOracle) -> QueryContext:
    """A context for comparing text suffixes with each other."""
    return QueryContext(oracle, None)


# ---------------------------------------------------------------------------
# Kangaroo walk over altered strings
# ---------------------------------------------------------------------------


def first_mismatches(
    a: AlteredString, b: AlteredString, limit: int, ctx: QueryContext
) -> tuple[list[int], bool]:
    """First ``limit`` mismatch offsets between two altered strings.

    Returns ``(offsets, exhausted)``: 1-based mismatch offsets within the
    overlap of the two materialisations, and whether the scan covered the
    whole overlap (i.e. the list is complete, not merely truncated at
    ``limit``).

    The walk advances through "events" — the next alteration on either side
    or the next disagreement of the raw bases — so each call costs at most
    ``|a.alterations| + |b.alterations| + limit`` raw LCP calls.
    """
    lim_pos = min(ctx.length(a), ctx.length(b))
    alts_a = a.alterations
    alts_b = b.alterations
    na_cnt = len(alts_a)
    nb_cnt = len(alts_b)
    ia = ib = 0
    out: list[int] = []
    pos = 0
    while len(out) < limit:
        while ia < na_cnt and alts_a[ia][0] <= pos:
            ia += 1
        while ib < nb_cnt and alts_b[ib][0] <= pos:
            ib += 1
        next_a = alts_a[ia][0] if ia < na_cnt else lim_pos + 1
        next_b = alts_b[ib][0] if ib < nb_cnt else lim_pos + 1
        event = pos + ctx.raw_lcp(a, b, pos) + 1
        if next_a < event:
            event = next_a
        if next_b < event:
            event = next_b
        if event > lim_pos:
            return out, True
        if ctx.char(a, event) != ctx.char(b, event):
            out.append(event)
        pos = event
    return out, False


def lcp_altered(a: AlteredString, b: AlteredString, ctx: QueryContext) -> int:
    """LCP of the materialisations of two altered strings."""
    ms, _ = first_mismatches(a, b, 1, ctx)
    if ms:
        return ms[0] - 1
    return min(ctx.length(a), ctx.length(b))


def within_distance(
    a: AlteredString, b: AlteredString, r: int, ctx: QueryContext
) -> tuple[bool, int | None]:
    """Whether the generalised Hamming distance is at most ``r``.

    Returns ``(True, distance)`` or ``(False, None)``; costs one kangaroo
    walk with limit ``r + 1``.
    """
    ms, _ = first_mismatches(a, b, r + 1, ctx)
    if len(ms) <= r:
        return True, len(ms)
    return False, None


def probe(
    a: AlteredString, b: AlteredString, r: int, ctx: QueryContext
) -> tuple[int, bool, int | None]:
    """Combined ``(lcp, within_r, distance)`` in a single kangaroo walk."""
    ms, _ = first_mismatches(a, b, r + 1, ctx)
    if ms:
        lcp = ms[0] - 1
    else:
        lcp = min(ctx.length(a), ctx.length(b))
    if len(ms) <= r:
        return lcp, True, len(ms)
    return lcp, False, None


# ---------------------------------------------------------------------------
# Specialised closures for tree construction (text/text, exact backend)
# ---------------------------------------------------------------------------


def text_pair_ops(oracle: MismatchOracle):
    """Fast comparison closures over ``(base, alterations)`` element pairs.

    Tree construction compares altered text suffixes millions of times; these
    closures skip the :class:`AlteredString` wrapper and bind the backend
    lookups to locals.  Elements are ``(base_start_1based, alterations)``.

    Returns ``(pair_lcp, compare, elem_char)``.
    """
    codes = oracle.codes
    big_n = len(codes)
    if oracle.exact is not None:
        suffix_lcp0 = oracle.exact.suffix_lcp0
    else:
        fp = oracle.fp

        def suffix_lcp0(a0: int, b0: int) -> int:
            rem = min(big_n - a0, big_n - b0)
            return fp.lcp(TEXT, a0, TEXT, b0, rem, None, None)

    def elem_char(base: int, alts: tuple, pos: int) -> int:
        for off, sym in alts:
            if off == pos:
                return sym
            if off > pos:
                break
        return codes[base - 2 + pos]

    def first_mismatch(abase: int, aalts: tuple, bbase: int, balts: tuple):
        """1-based offset of the first mismatch, or None if none in overlap."""
        lim_pos = big_n + 1 - max(abase, bbase)
        ia = ib = 0
        na_cnt = len(aalts)
        nb_cnt = len(balts)
        pos = 0
        while True:
            while ia < na_cnt and aalts[ia][0] <= pos:
                ia += 1
            while ib < nb_cnt and balts[ib][0] <= pos:
                ib += 1
            event = pos + suffix_lcp0(abase - 1 + pos, bbase - 1 + pos) + 1
            if ia < na_cnt and aalts[ia][0] < event:
                event = aalts[ia][0]
            if ib < nb_cnt and balts[ib][0] < event:
                event = balts[ib][0]
            if event > lim_pos:
                return None
            if elem_char(abase, aalts, event) != elem_char(bbase, balts, event):
                return event
            pos = event

    def pair_lcp(abase: int, aalts: tuple, bbase: int, balts: tuple) -> int:
        fm = first_mismatch(abase, aalts, bbase, balts)
        if fm is None:
            return big_n + 1 - max(abase, bbase)
        return fm - 1

    def compare(e1: tuple, e2: tuple) -> int:
        """Lexicographic comparison of two materialised elements."""
        abase, aalts = e1
        bbase, balts = e2
        fm = first_mismatch(abase, aalts, bbase, balts)
        if fm is None:
            # one materialisation is a prefix of the other; the shorter
            # (larger start) sorts first
            if abase == bbase:
                return 0
            return 1 if abase < bbase else -1
        ca = elem_char(abase, aalts, fm)
        cb = elem_char(bbase, balts, fm)
        if ca < cb:
            return -1
        if ca > cb:
            return 1
        return 0

    return pair_lcp, compare, elem_char
