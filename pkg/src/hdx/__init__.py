"""hdx — a text index for Hamming-distance-bounded suffix search.

Build an index over a text once, then report every suffix position whose
generalised Hamming distance to a query pattern is within a chosen radius.
:func:`build_index` is the front door; :func:`build_dictionary_index` wraps
it for approximate whole-entry lookup over a set of strings.  Indexes
serialise with :func:`save_index`/:func:`load_index`, and :func:`run_bench`
drives the space/time sweep behind the ``hdx bench`` command line.
"""

from __future__ import annotations

from .bench import BenchRow, generate_queries, render_figures, run_bench, write_csv
from .engine import (
    BuildReport,
    DictionaryIndex,
    EngineStats,
    MismatchIndex,
    build_dictionary_index,
    build_index,
)
from .errors import (
    BotQuery,
    EmptyQuery,
    EmptyText,
    EntryTooLong,
    FingerprintCollision,
    HdxError,
    IndexFormatError,
    KOutOfRange,
    RadiusOutOfRange,
    ReservedSymbolInInput,
    SentinelInQuery,
)
from .inversion import InversionIndex, InversionParams, build_inversion_index
from .storage import (
    index_bytes,
    load_index,
    load_index_bytes,
    save_index,
    space_report,
)
from .text import PaddedText, hamming_naive, max_k, pad_text
from .verify import brute_force_query, walk_invariants

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "BotQuery",
    "BuildReport",
    "DictionaryIndex",
    "EmptyQuery",
    "EmptyText",
    "EngineStats",
    "EntryTooLong",
    "FingerprintCollision",
    "HdxError",
    "IndexFormatError",
    "InversionIndex",
    "InversionParams",
    "KOutOfRange",
    "MismatchIndex",
    "PaddedText",
    "RadiusOutOfRange",
    "ReservedSymbolInInput",
    "SentinelInQuery",
    "brute_force_query",
    "build_dictionary_index",
    "build_index",
    "build_inversion_index",
    "generate_queries",
    "hamming_naive",
    "index_bytes",
    "load_index",
    "load_index_bytes",
    "max_k",
    "pad_text",
    "render_figures",
    "run_bench",
    "save_index",
    "space_report",
    "walk_invariants",
    "write_csv",
    "__version__",
]
