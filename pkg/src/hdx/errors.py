"""Exception types raised by the hdx library.

Every error raised on a documented contract violation derives from
:class:`HdxError`, so callers can catch the library's failures with a single
``except`` clause while still being able to tell the cases apart.
"""

from __future__ import annotations


class HdxError(Exception):
    """Base class for all hdx errors."""


class EmptyText(HdxError):
    """The input text (or a dictionary entry) is empty or too short to index."""


class KOutOfRange(HdxError):
    """The mismatch budget k is not valid for the given text length."""


class ReservedSymbolInInput(HdxError):
    """An input symbol collides with the reserved code space (sentinel/counters)."""


class AlterationPastEnd(HdxError):
    """An alteration offset falls beyond the end of the string it decorates."""


class LcpAtEnd(HdxError):
    """A pivot alteration was requested at an agreement length with no next symbol."""


class EntryTooLong(HdxError):
    """A dictionary entry exceeds the maximum encodable length."""


class EmptyQuery(HdxError):
    """The query pattern is empty."""


class SentinelInQuery(HdxError):
    """The query pattern contains the sentinel code."""


class RadiusOutOfRange(HdxError):
    """The requested search radius is negative or exceeds the index's budget k."""


class BotQuery(HdxError):
    """An inversion query was made for the undefined label (bottom)."""


class FingerprintCollision(HdxError):
    """Paranoid fingerprint verification caught a hash collision.

    Raised by the sampled-fingerprint LCP backend when a direct character
    check contradicts a hash-verified agreement.  Callers reseed the backend
    and retry; see :meth:`hdx.lcp.MismatchOracle.reseed`.
    """


class IndexFormatError(HdxError):
    """An index file is corrupt, truncated, or has an unknown magic/version."""
