"""Index persistence: a versioned little-endian binary format.

Layout (all integers little-endian, fixed width):

* header — magic ``HDX1``, format version, flags (text stored, succinct
  mode), ``n``, ``k``, ``sigma`` (0 when unset), ``tau``, build seed,
  cluster cap, fingerprint epoch, and a CRC-32 of the text so a file saved
  without its text can verify one supplied at load time.
* text section (optional) — symbol width in bytes, then the ``n`` raw data
  symbols; sentinels are re-appended at load.
* tree section — node/leaf counts and height, then the preorder node
  stream: internal records carry pivot base, length-prefixed alteration
  list, median, remaining budget, size, and a child-presence bitmap;
  leaf records carry label and size.  Leaf membership lists are never
  stored — the inversion tables subsume them.
* inversion sections — one per leaf path string, sorted: parameters,
  cluster seeds with their end→start tables, and the certified missing
  tables.
* trailer — CRC-32 of every preceding byte.

Files are deterministic: saving the same index twice produces identical
bytes, and every container is written in sorted order.
"""

from __future__ import annotations

import struct
import zlib
from io import BytesIO
from pathlib import Path

from .errors import IndexFormatError
from .inversion import Cluster, InversionIndex, InversionParams
from .lcp import MismatchOracle
from .text import as_symbols, pad_text, text_suffix
from .tree import Tree, TreeNode, TruncLeaf, UNALTERED_SLOTS
from .engine import MismatchIndex

MAGIC = b"HDX1"
VERSION = 1

_FLAG_HAS_TEXT = 1
_FLAG_SUCCINCT = 2

_HEADER = struct.Struct("<4sHHQIIIQIII")
_PARAMS = struct.Struct("<QIIIIQ")


def _symbol_width(symbols) -> int:
    top = max(symbols, default=0)
    for width in (1, 2, 4):
        if top < 1 << (8 * width):
            return width
    return 8


def _pack_symbols(symbols, width: int) -> bytes:
    buf = bytearray()
    for s in symbols:
        buf += int(s).to_bytes(width, "little")
    return bytes(buf)


def _unpack_symbols(data: bytes, width: int) -> tuple[int, ...]:
    return tuple(
        int.from_bytes(data[i : i + width], "little")
        for i in range(0, len(data), width)
    )


class _Writer:
    def __init__(self):
        self.buf = BytesIO()

    def raw(self, data: bytes) -> None:
        self.buf.write(data)

    def u8(self, v: int) -> None:
        self.buf.write(struct.pack("<B", v))

    def u16(self, v: int) -> None:
        self.buf.write(struct.pack("<H", v))

    def u32(self, v: int) -> None:
        self.buf.write(struct.pack("<I", v))

    def u64(self, v: int) -> None:
        self.buf.write(struct.pack("<Q", v))

    def tell(self) -> int:
        return self.buf.tell()

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def raw(self, count: int) -> bytes:
        end = self.pos + count
        if end > len(self.data):
            raise IndexFormatError("truncated index file")
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self.raw(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.raw(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.raw(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.raw(8))[0]


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _write_node(w: _Writer, v: TreeNode | TruncLeaf) -> None:
    if isinstance(v, TruncLeaf):
        w.u8(1)
        w.u64(v.label or 0)
        w.u64(v.size)
        return
    w.u8(0)
    w.u64(v.pivot.start)
    w.u8(len(v.pivot.alterations))
    for off, sym in v.pivot.alterations:
        w.u64(off)
        w.u64(sym)
    w.u64(v.median)
    w.u8(v.k_rem)
    w.u64(v.size)
    mask = 0
    for slot in range(7):
        if v.children[slot] is not None:
            mask |= 1 << slot
    w.u8(mask)
    for slot in range(7):
        child = v.children[slot]
        if child is not None:
            _write_node(w, child)


def _write_inversion(w: _Writer, path: str, inv: InversionIndex) -> None:
    encoded = path.encode("ascii")
    w.u16(len(encoded))
    w.raw(encoded)
    p = inv.params
    w.raw(
        _PARAMS.pack(
            p.n, p.sigma, p.chain_length, p.clusters, p.starts_per_cluster, p.seed
        )
    )
    for cluster in inv.clusters:
        w.u64(cluster.seed)
        w.u64(len(cluster.ends))
        for end, start in sorted(cluster.ends.items()):
            w.u64(end)
            w.u64(start)
    w.u64(len(inv.missing))
    for label in sorted(inv.missing):
        elems = inv.missing[label]
        w.u64(label)
        w.u64(len(elems))
        for e in elems:
            w.u64(e)


def index_bytes(
    index: MismatchIndex, *, include_text: bool = True
) -> tuple[bytes, dict[str, int]]:
    """Serialise ``index``; returns the bytes and per-section byte counts."""
    raw_text = index.padded.symbols[: index.n]
    width = _symbol_width(raw_text)
    text_crc = zlib.crc32(_pack_symbols(raw_text, 8))

    flags = 0
    if include_text:
        flags |= _FLAG_HAS_TEXT
    if index.mode == "succinct":
        flags |= _FLAG_SUCCINCT

    w = _Writer()
    w.raw(
        _HEADER.pack(
            MAGIC,
            VERSION,
            flags,
            index.n,
            index.k,
            index.sigma or 0,
            index.tau,
            index.seed,
            index.cluster_cap,
            index.oracle.epoch,
            text_crc,
        )
    )
    sizes = {"header": w.tell()}

    mark = w.tell()
    if include_text:
        w.u8(width)
        w.raw(_pack_symbols(raw_text, width))
    sizes["text"] = w.tell() - mark

    mark = w.tell()
    tree = index.tree
    w.u64(tree.node_count)
    w.u64(tree.leaf_count)
    w.u32(tree.height)
    _write_node(w, tree.root)
    sizes["tree"] = w.tell() - mark

    mark = w.tell()
    w.u32(len(index.inversions))
    for path in sorted(index.inversions):
        _write_inversion(w, path, index.inversions[path])
    sizes["inversions"] = w.tell() - mark

    payload = w.getvalue()
    data = payload + struct.pack("<I", zlib.crc32(payload))
    sizes["checksum"] = 4
    sizes["total"] = len(data)
    return data, sizes


def save_index(
    index: MismatchIndex, path, *, include_text: bool = True
) -> dict[str, int]:
    """Write ``index`` to ``path``; returns the per-section byte counts."""
    data, sizes = index_bytes(index, include_text=include_text)
    Path(path).write_bytes(data)
    return sizes


def space_report(index: MismatchIndex) -> dict[str, int]:
    """Per-section byte counts of the serialised form, without writing."""
    _, sizes = index_bytes(index)
    return sizes


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------


def _read_node(r: _Reader) -> TreeNode | TruncLeaf:
    kind = r.u8()
    if kind == 1:
        label = r.u64()
        size = r.u64()
        leaf = TruncLeaf(size, None)
        leaf.label = label or None
        return leaf
    if kind != 0:
        raise IndexFormatError(f"unknown tree record kind {kind}")
    base = r.u64()
    alts = tuple((r.u64(), r.u64()) for _ in range(r.u8()))
    median = r.u64()
    k_rem = r.u8()
    size = r.u64()
    node = TreeNode(text_suffix(base, alts), median, k_rem, size)
    mask = r.u8()
    for slot in range(7):
        if mask & (1 << slot):
            node.children[slot] = _read_node(r)
    return node


def _read_inversion(r: _Reader) -> tuple[str, InversionIndex]:
    path = r.raw(r.u16()).decode("ascii")
    params = InversionParams(*_PARAMS.unpack(r.raw(_PARAMS.size)))
    clusters = []
    for _ in range(params.clusters):
        seed = r.u64()
        count = r.u64()
        ends = {}
        for _ in range(count):
            end = r.u64()
            ends[end] = r.u64()
        clusters.append(Cluster(seed, ends))
    missing = {}
    for _ in range(r.u64()):
        label = r.u64()
        missing[label] = tuple(r.u64() for _ in range(r.u64()))
    return path, InversionIndex(params, clusters, missing)


def _assign_paths(root: TreeNode | TruncLeaf) -> dict[str, list[TruncLeaf]]:
    lambdas: dict[str, list[TruncLeaf]] = {}

    def walk(v, lam: str) -> None:
        if isinstance(v, TruncLeaf):
            v.path = lam
            lambdas.setdefault(lam, []).append(v)
            return
        for slot in range(7):
            child = v.children[slot]
            if child is not None:
                step = "u" if slot in UNALTERED_SLOTS else "a"
                walk(child, lam + step)

    walk(root, "")
    return lambdas


def load_index_bytes(data: bytes, *, text=None) -> MismatchIndex:
    """Reconstruct an index from serialised bytes.

    A file saved without its text needs the original ``text`` here; it is
    checked against the stored text checksum.
    """
    if len(data) < _HEADER.size + 4:
        raise IndexFormatError("file too small to be an index")
    payload, trailer = data[:-4], data[-4:]
    if struct.unpack("<I", trailer)[0] != zlib.crc32(payload):
        raise IndexFormatError("checksum mismatch: file is corrupt")

    r = _Reader(payload)
    magic, version, flags, n, k, sigma, tau, seed, cluster_cap, epoch, text_crc = (
        _HEADER.unpack(r.raw(_HEADER.size))
    )
    if magic != MAGIC:
        raise IndexFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise IndexFormatError(f"unsupported format version {version}")

    if flags & _FLAG_HAS_TEXT:
        width = r.u8()
        raw_text = _unpack_symbols(r.raw(n * width), width)
    elif text is None:
        raise IndexFormatError("index was saved without its text; supply it")
    else:
        raw_text = as_symbols(text)
        if len(raw_text) != n:
            raise IndexFormatError(
                f"supplied text has {len(raw_text)} symbols, index expects {n}"
            )
    if zlib.crc32(_pack_symbols(raw_text, 8)) != text_crc:
        raise IndexFormatError("supplied text does not match the indexed text")
    padded = pad_text(raw_text, k, _allow_reserved=True)

    node_count = r.u64()
    leaf_count = r.u64()
    height = r.u32()
    root = _read_node(r)
    tree = Tree(
        root=root,
        padded=padded,
        k=k,
        sigma=sigma or None,
        node_count=node_count,
        leaf_count=leaf_count,
        height=height,
    )
    if sigma:
        tree.lambdas = _assign_paths(root)

    inversions = {}
    for _ in range(r.u32()):
        path, inv = _read_inversion(r)
        inversions[path] = inv
    if r.pos != len(payload):
        raise IndexFormatError(f"{len(payload) - r.pos} trailing bytes in index")

    mode = "succinct" if flags & _FLAG_SUCCINCT else "linear"
    if mode == "linear":
        oracle = MismatchOracle(padded, mode="exact")
    else:
        oracle = MismatchOracle(padded, mode="sampled", tau=tau, seed=seed)
    for _ in range(epoch):
        oracle.reseed()

    index = MismatchIndex(
        padded=padded,
        k=k,
        sigma=sigma or None,
        mode=mode,
        tau=tau,
        seed=seed,
        cluster_cap=cluster_cap,
        oracle=oracle,
        tree=tree,
        inversions=inversions,
    )
    index.rebind_evaluators()
    return index


def load_index(path, *, text=None) -> MismatchIndex:
    """Read an index file written by :func:`save_index`."""
    return load_index_bytes(Path(path).read_bytes(), text=text)
