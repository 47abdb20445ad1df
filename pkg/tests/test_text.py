"""Padded texts, altered strings, and the dictionary transform."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from hdx import text as tx
from hdx.errors import (
    AlterationPastEnd,
    EmptyText,
    EntryTooLong,
    KOutOfRange,
    LcpAtEnd,
    ReservedSymbolInInput,
)


def sym(s: str) -> tuple[int, ...]:
    return tx.as_symbols(s)


# ---------------------------------------------------------------------------
# pad_text
# ---------------------------------------------------------------------------


def test_pad_text_appends_2k_plus_1_sentinels():
    padded = tx.pad_text("AB", 1)
    assert padded.n == 2
    assert padded.k == 1
    assert padded.padded_length == 5
    assert padded.symbols == sym("AB") + (tx.SENTINEL,) * 3


def test_pad_text_banana():
    padded = tx.pad_text("BANANA", 1)
    assert padded.padded_length == 9
    assert padded.symbols[:6] == sym("BANANA")
    assert all(c == tx.SENTINEL for c in padded.symbols[6:])


def test_pad_text_rejects_empty_and_single():
    with pytest.raises(EmptyText):
        tx.pad_text("", 1)
    with pytest.raises(EmptyText):
        tx.pad_text("A", 1)


def test_pad_text_rejects_bad_k():
    with pytest.raises(KOutOfRange):
        tx.pad_text("AB", 0)
    with pytest.raises(KOutOfRange):
        tx.pad_text("AB", 2)  # max_k(2) == 1
    # n = 64: floor(log2(64)/2) = 3
    tx.pad_text("A" * 64, 3)
    with pytest.raises(KOutOfRange):
        tx.pad_text("A" * 64, 4)


def test_pad_text_rejects_reserved_codes():
    with pytest.raises(ReservedSymbolInInput):
        tx.pad_text([65, tx.SENTINEL], 1)
    with pytest.raises(ReservedSymbolInInput):
        tx.pad_text([65, tx.COUNTER_BASE + 5], 1)


def test_suffix_length():
    padded = tx.pad_text("BANANA", 1)
    assert padded.suffix_length(1) == 9
    assert padded.suffix_length(9) == 1


# ---------------------------------------------------------------------------
# Altered strings and materialisation
# ---------------------------------------------------------------------------


def test_materialize_query_alteration():
    q = sym("CANANC")
    s = tx.query_string(((1, ord("B")),))
    assert tx.materialize(s, tx.pad_text("XY", 1), q) == sym("BANANC")


def test_materialize_second_example():
    q = sym("BACDA$")
    s = tx.query_string(((3, ord("N")),))
    assert tx.materialize(s, tx.pad_text("XY", 1), q) == sym("BANDA$")


def test_materialize_text_suffix():
    padded = tx.pad_text("BANANA", 1)
    s = tx.text_suffix(3)
    assert tx.materialize(s, padded) == sym("NANA") + (tx.SENTINEL,) * 3


def test_materialize_rejects_alteration_past_end():
    padded = tx.pad_text("AB", 1)
    s = tx.text_suffix(5, ((2, 7),))  # suffix 5 has length 1
    with pytest.raises(AlterationPastEnd):
        tx.materialize(s, padded)


def test_with_alteration_keeps_canonical_order():
    s = tx.text_suffix(1)
    s = s.with_alteration(5, 10)
    s = s.with_alteration(2, 20)
    s = s.with_alteration(5, 30)  # overwrite
    assert s.alterations == ((2, 20), (5, 30))


def test_altered_string_rejects_non_increasing_offsets():
    with pytest.raises(ValueError):
        tx.AlteredString(tx.TEXT, 1, ((3, 1), (3, 2)))
    with pytest.raises(ValueError):
        tx.AlteredString(tx.TEXT, 1, ((4, 1), (2, 2)))


# ---------------------------------------------------------------------------
# Generalised Hamming distance
# ---------------------------------------------------------------------------


def test_hamming_ignores_trailing_symbols():
    assert tx.hamming_naive("AB", "ABCD") == 0
    assert tx.hamming_naive("ABCD", "AB") == 0


def test_hamming_counts_mismatches():
    assert tx.hamming_naive("BANANC", "BANANA") == 1
    assert tx.hamming_naive("CANANC", "BANANA") == 2


def test_mismatch_positions_matches_hamming():
    assert tx.mismatch_positions("CANANC", "BANANA") == [1, 6]
    assert tx.mismatch_positions("CANANC", "BANANA", limit=1) == [1]


@given(
    st.text(alphabet="AB", min_size=0, max_size=30),
    st.text(alphabet="AB", min_size=0, max_size=30),
)
def test_hamming_and_positions_agree(a, b):
    """The two naive paths count the same mismatches."""
    assert len(tx.mismatch_positions(a, b)) == tx.hamming_naive(a, b)


@given(
    st.text(alphabet="ABC", min_size=1, max_size=20),
    st.text(alphabet="ABC", min_size=1, max_size=20),
)
def test_hamming_symmetry(a, b):
    assert tx.hamming_naive(a, b) == tx.hamming_naive(b, a)


# ---------------------------------------------------------------------------
# pivot_alter
# ---------------------------------------------------------------------------


def test_pivot_alter_example():
    # s = BANCNAB$, pivot = BANANA..., agreement 3 -> BANANAB$
    padded = tx.pad_text("BANANA", 1)
    q = sym("BANCNAB$")
    s = tx.query_string()
    pivot = tx.text_suffix(1)  # BANANA$$$
    altered = tx.pivot_alter(s, 3, pivot, padded, q)
    assert altered.alterations == ((4, ord("A")),)
    assert tx.materialize(altered, padded, q) == sym("BANANAB$")


def test_pivot_alter_increases_agreement():
    padded = tx.pad_text("BANANA", 1)
    s = tx.text_suffix(3)  # NANA$$$
    p = tx.text_suffix(5)  # NA$$$
    # lcp(NANA$$$, NA$$$) = 2
    altered = tx.pivot_alter(s, 2, p, padded)
    assert tx.materialize(altered, padded)[:3] == tx.materialize(p, padded)[:3]


def test_pivot_alter_at_end_raises():
    padded = tx.pad_text("BANANA", 1)
    s = tx.text_suffix(1)
    p = tx.text_suffix(9)  # single sentinel, length 1
    with pytest.raises(LcpAtEnd):
        tx.pivot_alter(s, 1, p, padded)


# ---------------------------------------------------------------------------
# Dictionary reduction
# ---------------------------------------------------------------------------


def test_dictionary_transform_layout():
    corpus = tx.dictionary_transform(["ab", "cd"], 1)
    a, b, c, d = sym("abcd")
    c1, c2 = tx.counter_code(1), tx.counter_code(2)
    expected = (a, c1, b, c2) + (tx.SENTINEL,) * 3 + (c, c1, d, c2)
    assert corpus.padded.symbols[: len(expected)] == expected
    assert corpus.offsets == (1, 8)
    assert corpus.entry_lengths == (2, 2)


def test_dictionary_query_transform():
    a, d = ord("a"), ord("d")
    assert tx.dictionary_query_transform("ad") == (
        a,
        tx.counter_code(1),
        d,
        tx.counter_code(2),
    )


def test_dictionary_aligned_distance_matches_entry_distance():
    corpus = tx.dictionary_transform(["ab", "cd"], 1)
    tq = tx.dictionary_query_transform("ad")
    for offset, entry in zip(corpus.offsets, ["ab", "cd"]):
        window = corpus.padded.symbols[offset - 1 : offset - 1 + len(tq)]
        assert tx.hamming_naive(tq, window) == tx.hamming_naive("ad", entry)


def test_dictionary_rejects_empty_entry():
    with pytest.raises(EmptyText):
        tx.dictionary_transform(["ab", ""], 1)
    with pytest.raises(EmptyText):
        tx.dictionary_transform([], 1)


def test_counter_code_range():
    assert tx.counter_code(1) == tx.COUNTER_BASE
    with pytest.raises(EntryTooLong):
        tx.counter_code(tx.MAX_ENTRY_LENGTH + 1)


@given(st.lists(st.text(alphabet="xyz", min_size=1, max_size=6), min_size=1, max_size=8))
def test_dictionary_offsets_line_up(entries):
    corpus = tx.dictionary_transform(entries, 1)
    for offset, entry in zip(corpus.offsets, entries):
        # data symbols of the entry sit at even strides from its offset
        for j, ch in enumerate(tx.as_symbols(entry)):
            assert corpus.padded.symbols[offset - 1 + 2 * j] == ch
            assert corpus.padded.symbols[offset + 2 * j] == tx.counter_code(j + 1)
