"""Padded texts, altered strings, and the dictionary reduction.

Symbols are non-negative integers.  User data must stay below
:data:`DATA_CODE_LIMIT`; everything at or above it is reserved for the
library: :data:`SENTINEL` terminates/pads texts and separates dictionary
entries, and codes from :data:`COUNTER_BASE` upward encode the position
counters used by the dictionary reduction.  Helpers accept ``str`` (code
points) and ``bytes`` transparently via :func:`as_symbols`.

All positions and offsets in this package are **1-based**: suffix ``i`` of a
padded text starts at its ``i``-th symbol, and an alteration at offset ``o``
replaces the ``o``-th symbol of the string it decorates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import (
    AlterationPastEnd,
    EmptyText,
    EntryTooLong,
    KOutOfRange,
    LcpAtEnd,
    ReservedSymbolInInput,
)

#: Exclusive upper bound for user-supplied symbol codes.
DATA_CODE_LIMIT = 1 << 32

#: Reserved code used to pad texts and separate dictionary entries.  It is
#: strictly larger than every data code, so padded suffixes sort after their
#: extensions and never match query symbols.
SENTINEL = 1 << 32

#: First reserved code for dictionary position counters; counter ``j``
#: (1-based) is encoded as ``COUNTER_BASE + j - 1``.
COUNTER_BASE = SENTINEL + 1

#: Largest dictionary entry length whose counters stay encodable.
MAX_ENTRY_LENGTH = 1 << 31

Symbols = tuple[int, ...]
SymbolsLike = Union[str, bytes, bytearray, Iterable[int]]

#: Tags for the two kinds of base string an :class:`AlteredString` can wrap.
TEXT = "text"
QUERY = "query"


def as_symbols(data: SymbolsLike) -> Symbols:
    """Normalise ``data`` to a tuple of non-negative integer codes.

    Strings map to their code points, bytes to their byte values; any other
    iterable must yield non-negative integers.
    """
    if isinstance(data, str):
        return tuple(map(ord, data))
    if isinstance(data, (bytes, bytearray)):
        return tuple(data)
    out = tuple(int(c) for c in data)
    for c in out:
        if c < 0:
            raise ReservedSymbolInInput(f"negative symbol code {c}")
    return out


def counter_code(j: int) -> int:
    """Reserved code for the ``j``-th (1-based) position counter."""
    if not 1 <= j <= MAX_ENTRY_LENGTH:
        raise EntryTooLong(f"counter position {j} out of encodable range")
    return COUNTER_BASE + j - 1


# ---------------------------------------------------------------------------
# Padded text
# ---------------------------------------------------------------------------


class PaddedText:
    """A text of ``n`` data symbols followed by ``2k + 1`` sentinels.

    The padding guarantees that every suffix a query can be compared against
    has at least ``2k + 1`` trailing symbols that match nothing, which keeps
    every pivot alteration inside the string and makes all suffixes pairwise
    distinct.

    Instances are immutable; build them with :func:`pad_text`.
    """

    __slots__ = ("symbols", "n", "k", "padded_length")

    def __init__(self, symbols: Symbols, n: int, k: int):
        self.symbols = symbols
        self.n = n
        self.k = k
        self.padded_length = n + 2 * k + 1

    def suffix_length(self, i: int) -> int:
        """Length of padded suffix ``i`` (1-based start position)."""
        return self.padded_length - i + 1

    def __len__(self) -> int:
        return self.padded_length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PaddedText):
            return NotImplemented
        return (self.symbols, self.n, self.k) == (other.symbols, other.n, other.k)

    def __hash__(self) -> int:
        return hash((self.symbols, self.n, self.k))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"PaddedText(n={self.n}, k={self.k})"


def max_k(n: int) -> int:
    """Largest mismatch budget accepted for a text of ``n`` symbols.

    The nominal cap is ``floor(log2(n) / 2)``; ``k = 1`` is always allowed for
    any indexable text so that short inputs remain usable.
    """
    if n < 2:
        return 0
    return max(1, math.floor(math.log2(n) / 2))


def pad_text(raw: SymbolsLike, k: int, *, _allow_reserved: bool = False) -> PaddedText:
    """Validate ``raw`` and append ``2k + 1`` sentinel symbols.

    Raises:
        EmptyText: fewer than two data symbols.
        KOutOfRange: ``k < 1`` or ``k`` exceeds :func:`max_k`.
        ReservedSymbolInInput: a data symbol lies in the reserved code space.
    """
    symbols = as_symbols(raw)
    n = len(symbols)
    if n < 2:
        raise EmptyText(f"need at least 2 symbols to index, got {n}")
    if k < 1 or k > max_k(n):
        raise KOutOfRange(f"k={k} invalid for n={n} (allowed 1..{max_k(n)})")
    if not _allow_reserved:
        for c in symbols:
            if c >= DATA_CODE_LIMIT:
                raise ReservedSymbolInInput(f"symbol code {c} is reserved")
    padded = symbols + (SENTINEL,) * (2 * k + 1)
    return PaddedText(padded, n, k)


# ---------------------------------------------------------------------------
# Altered strings
# ---------------------------------------------------------------------------


Alterations = tuple[tuple[int, int], ...]


@dataclass(frozen=True, slots=True)
class AlteredString:
    """A text suffix or query string plus a small list of point rewrites.

    ``source`` selects the base: :data:`TEXT` means the padded-text suffix
    starting at position ``start``; :data:`QUERY` means the query suffix
    starting at offset ``start`` (1 = the whole query).  ``alterations`` is a
    canonical tuple of ``(offset, symbol)`` pairs — offsets 1-based relative
    to the base string, strictly increasing, each replacing one symbol.

    The string is never materialised in hot paths; comparisons run through
    the kangaroo routines in :mod:`hdx.lcp`.
    """

    source: str
    start: int
    alterations: Alterations = ()

    def __post_init__(self) -> None:
        if self.source not in (TEXT, QUERY):
            raise ValueError(f"unknown source tag {self.source!r}")
        if self.start < 1:
            raise ValueError(f"start position must be >= 1, got {self.start}")
        last = 0
        for off, _sym in self.alterations:
            if off <= last:
                raise ValueError("alteration offsets must be strictly increasing")
            last = off

    def with_alteration(self, offset: int, symbol: int) -> "AlteredString":
        """Return a copy with ``offset`` rewritten to ``symbol``.

        Keeps the alteration list canonical; a repeated offset overwrites the
        earlier entry (last writer wins).
        """
        alts = list(self.alterations)
        for idx, (off, _sym) in enumerate(alts):
            if off == offset:
                alts[idx] = (offset, symbol)
                break
            if off > offset:
                alts.insert(idx, (offset, symbol))
                break
        else:
            alts.append((offset, symbol))
        return AlteredString(self.source, self.start, tuple(alts))


def text_suffix(i: int, alterations: Alterations = ()) -> AlteredString:
    """The padded-text suffix starting at 1-based position ``i``."""
    return AlteredString(TEXT, i, alterations)


def query_string(alterations: Alterations = (), start: int = 1) -> AlteredString:
    """The query (suffix) starting at 1-based offset ``start``."""
    return AlteredString(QUERY, start, alterations)


def string_length(
    s: AlteredString, text: PaddedText, query: Sequence[int] | None = None
) -> int:
    """Length of the materialisation of ``s`` (alterations never change it)."""
    if s.source == TEXT:
        return text.suffix_length(s.start)
    if query is None:
        raise ValueError("query-based string needs the query symbols")
    return len(query) - s.start + 1


def char_at(
    s: AlteredString,
    pos: int,
    text: PaddedText,
    query: Sequence[int] | None = None,
) -> int:
    """Materialised symbol of ``s`` at 1-based offset ``pos``."""
    for off, sym in s.alterations:
        if off == pos:
            return sym
        if off > pos:
            break
    if s.source == TEXT:
        return text.symbols[s.start - 1 + pos - 1]
    if query is None:
        raise ValueError("query-based string needs the query symbols")
    return query[s.start - 1 + pos - 1]


def materialize(
    s: AlteredString, text: PaddedText, query: Sequence[int] | None = None
) -> Symbols:
    """Expand ``s`` to a concrete symbol tuple.

    Linear in the string length; meant for inspection and tests, not for the
    query path.

    Raises:
        AlterationPastEnd: an alteration offset exceeds the base length.
    """
    if s.source == TEXT:
        base = list(text.symbols[s.start - 1 :])
    else:
        if query is None:
            raise ValueError("query-based string needs the query symbols")
        base = list(query[s.start - 1 :])
    for off, sym in s.alterations:
        if off > len(base):
            raise AlterationPastEnd(
                f"alteration at offset {off} but string has length {len(base)}"
            )
        base[off - 1] = sym
    return tuple(base)


def pivot_alter(
    s: AlteredString,
    lcp: int,
    pivot: AlteredString,
    text: PaddedText,
    query: Sequence[int] | None = None,
) -> AlteredString:
    """Rewrite ``s`` at offset ``lcp + 1`` to agree with ``pivot`` there.

    ``lcp`` is the length of the longest common prefix of the two
    materialisations; the returned copy therefore agrees with ``pivot`` on at
    least ``lcp + 1`` symbols.

    Raises:
        LcpAtEnd: ``lcp`` already spans one of the strings, so there is no
            next symbol to copy.
    """
    if lcp < 0:
        raise ValueError(f"lcp must be non-negative, got {lcp}")
    len_s = string_length(s, text, query)
    len_p = string_length(pivot, text, query)
    if lcp >= min(len_s, len_p):
        raise LcpAtEnd(f"agreement {lcp} reaches the end of a string "
                       f"(lengths {len_s} and {len_p})")
    return s.with_alteration(lcp + 1, char_at(pivot, lcp + 1, text, query))


# ---------------------------------------------------------------------------
# Naive mismatch counting (reference path)
# ---------------------------------------------------------------------------


def hamming_naive(a: Sequence[int] | str, b: Sequence[int] | str) -> int:
    """Mismatch count over the first ``min(|a|, |b|)`` symbols.

    The generalised Hamming distance used throughout: trailing symbols of the
    longer string are ignored.
    """
    xs = as_symbols(a) if isinstance(a, (str, bytes, bytearray)) else a
    ys = as_symbols(b) if isinstance(b, (str, bytes, bytearray)) else b
    return sum(1 for x, y in zip(xs, ys) if x != y)


def mismatch_positions(
    a: Sequence[int] | str, b: Sequence[int] | str, limit: int | None = None
) -> list[int]:
    """1-based offsets where ``a`` and ``b`` disagree, by direct scan.

    Stops after ``limit`` mismatches when given.  This is the independent
    reference for the kangaroo routine in :mod:`hdx.lcp`.
    """
    xs = as_symbols(a) if isinstance(a, (str, bytes, bytearray)) else a
    ys = as_symbols(b) if isinstance(b, (str, bytes, bytearray)) else b
    out: list[int] = []
    for pos, (x, y) in enumerate(zip(xs, ys), start=1):
        if x != y:
            out.append(pos)
            if limit is not None and len(out) >= limit:
                break
    return out


# ---------------------------------------------------------------------------
# Dictionary reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DictionaryCorpus:
    """A set of dictionary entries flattened into one indexable text.

    Each entry ``e`` becomes the interleaving ``e[1], c(1), e[2], c(2), ...``
    of its symbols with reserved position counters, so that a transformed
    query aligned at an entry start sees counters that always agree and data
    symbols at the original offsets.  Consecutive transformed entries are
    separated by ``2k + 1`` sentinels, which charge at least ``k + 1``
    mismatches to any alignment that leaks past an entry's end.

    ``offsets[t]`` is the 1-based start of entry ``t`` in ``padded``.
    """

    padded: PaddedText
    offsets: tuple[int, ...]
    entry_lengths: tuple[int, ...]
    k: int
    entries: tuple[Symbols, ...] = field(repr=False, default=())


def dictionary_transform(entries: Sequence[SymbolsLike], k: int) -> DictionaryCorpus:
    """Interleave ``entries`` with position counters into one padded text.

    Raises:
        EmptyText: no entries, or an individual entry is empty.
        EntryTooLong: an entry is too long for its counters to stay encodable.
        ReservedSymbolInInput: an entry uses a reserved symbol code.
    """
    if not entries:
        raise EmptyText("dictionary must contain at least one entry")
    encoded = [as_symbols(e) for e in entries]
    flat: list[int] = []
    offsets: list[int] = []
    for idx, entry in enumerate(encoded):
        if not entry:
            raise EmptyText(f"dictionary entry {idx} is empty")
        if len(entry) > MAX_ENTRY_LENGTH:
            raise EntryTooLong(
                f"entry {idx} has length {len(entry)} > {MAX_ENTRY_LENGTH}"
            )
        for c in entry:
            if c >= DATA_CODE_LIMIT:
                raise ReservedSymbolInInput(
                    f"entry {idx} contains reserved symbol code {c}"
                )
        if idx > 0:
            flat.extend([SENTINEL] * (2 * k + 1))
        offsets.append(len(flat) + 1)
        for j, c in enumerate(entry, start=1):
            flat.append(c)
            flat.append(counter_code(j))
    padded = pad_text(flat, k, _allow_reserved=True)
    return DictionaryCorpus(
        padded=padded,
        offsets=tuple(offsets),
        entry_lengths=tuple(len(e) for e in encoded),
        k=k,
        entries=tuple(encoded),
    )


def dictionary_query_transform(q: SymbolsLike) -> Symbols:
    """Interleave a query with position counters, mirroring the corpus layout."""
    symbols = as_symbols(q)
    if not symbols:
        raise EmptyText("query must be non-empty")
    if len(symbols) > MAX_ENTRY_LENGTH:
        raise EntryTooLong(f"query length {len(symbols)} > {MAX_ENTRY_LENGTH}")
    out: list[int] = []
    for j, c in enumerate(symbols, start=1):
        if c >= DATA_CODE_LIMIT:
            raise ReservedSymbolInInput(f"query contains reserved symbol code {c}")
        out.append(c)
        out.append(counter_code(j))
    return tuple(out)
