"""Lossless soft-edge-map compression: run-length tokens + canonical Huffman."""

import heapq
import struct
from dataclasses import dataclass

import numpy as np

from .softedge import SoftEdgeMap

MAX_CODE_LEN = 15
RUN_CAP = 255

SCAN_SPATIAL = 0
SCAN_TEMPORAL = 1


class CorruptStreamError(ValueError):
    pass


@dataclass(frozen=True)
class RunToken:
    label: int
    run: int


def rle_tokenize(labels) -> list:
    """Maximal runs over a label sequence, capped at 255 per token."""
    syms, runs = _rle_encode(np.asarray(labels, dtype=np.uint8).ravel())
    return [RunToken(int(s), int(r)) for s, r in zip(syms, runs)]


def rle_expand(tokens) -> np.ndarray:
    syms = np.array([t.label for t in tokens], dtype=np.uint8)
    runs = np.array([t.run for t in tokens], dtype=np.int64)
    return np.repeat(syms, runs)


def _rle_encode(a: np.ndarray):
    """Vectorized RLE returning (labels, runs) arrays with the 255 cap applied."""
    n = len(a)
    if n == 0:
        return np.zeros(0, np.uint8), np.zeros(0, np.int64)
    boundaries = np.flatnonzero(np.diff(a.astype(np.int16))) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [n]])
    lens = ends - starts
    labels = a[starts]
    reps = (lens + RUN_CAP - 1) // RUN_CAP
    out_labels = np.repeat(labels, reps)
    out_runs = np.full(int(reps.sum()), RUN_CAP, dtype=np.int64)
    last_pos = np.cumsum(reps) - 1
    out_runs[last_pos] = lens - (reps - 1) * RUN_CAP
    return out_labels, out_runs


class HuffmanTable:
    """Canonical prefix code derived from per-symbol code lengths."""

    def __init__(self, code_lengths):
        lengths = np.asarray(code_lengths, dtype=np.uint8)
        present = np.flatnonzero(lengths)
        if len(present) == 0:
            raise ValueError("table has no symbols")
        if lengths.max() > MAX_CODE_LEN:
            raise ValueError(f"code length exceeds {MAX_CODE_LEN}")
        kraft = sum(1 << (MAX_CODE_LEN - int(lengths[s])) for s in present)
        if kraft > 1 << MAX_CODE_LEN:
            raise ValueError("code lengths violate the Kraft inequality")
        self.code_lengths = lengths
        self._assign_codes()

    def _assign_codes(self):
        lengths = self.code_lengths
        order = sorted(np.flatnonzero(lengths), key=lambda s: (lengths[s], s))
        self.codes = np.zeros(len(lengths), dtype=np.uint32)
        code = 0
        prev_len = 0
        for s in order:
            code <<= int(lengths[s]) - prev_len
            self.codes[s] = code
            code += 1
            prev_len = int(lengths[s])
        # canonical decode tables: per length, first code and symbol slice
        self._sorted_symbols = order
        counts = np.bincount(lengths[lengths > 0], minlength=MAX_CODE_LEN + 1)
        self._counts = counts
        first = np.zeros(MAX_CODE_LEN + 2, dtype=np.int64)
        offset = np.zeros(MAX_CODE_LEN + 2, dtype=np.int64)
        code = 0
        total = 0
        for length in range(1, MAX_CODE_LEN + 1):
            first[length] = code
            offset[length] = total
            code = (code + int(counts[length])) << 1
            total += int(counts[length])
        self._first = first
        self._offset = offset

    def decode_symbol(self, reader: "BitReader") -> int:
        code = 0
        for length in range(1, MAX_CODE_LEN + 1):
            code = (code << 1) | reader.read_bit()
            idx = code - int(self._first[length])
            if 0 <= idx < int(self._counts[length]):
                return self._sorted_symbols[int(self._offset[length]) + idx]
        raise CorruptStreamError("code word not present in Huffman table")


def huffman_build(frequencies) -> HuffmanTable:
    """Optimal prefix code lengths for the given symbol counts.

    Tree ties are broken by lowest frequency, then lowest symbol value for
    leaves / earliest-created internal node, so tables are reproducible.
    Lengths beyond 15 bits are rebalanced while keeping Kraft validity.
    """
    freqs = np.asarray(frequencies, dtype=np.int64)
    present = np.flatnonzero(freqs)
    if len(present) == 0:
        raise ValueError("all frequencies are zero")
    lengths = np.zeros(len(freqs), dtype=np.uint8)
    if len(present) == 1:
        lengths[present[0]] = 1
        return HuffmanTable(lengths)

    # heap items: (freq, tie_key, node_id); leaf tie keys precede internal ones
    n_sym = len(freqs)
    heap = [(int(freqs[s]), int(s), int(s)) for s in present]
    heapq.heapify(heap)
    parent = {}
    next_id = n_sym
    next_tie = n_sym
    while len(heap) > 1:
        f1, _, n1 = heapq.heappop(heap)
        f2, _, n2 = heapq.heappop(heap)
        parent[n1] = next_id
        parent[n2] = next_id
        heapq.heappush(heap, (f1 + f2, next_tie, next_id))
        next_id += 1
        next_tie += 1
    depth_cache = {heap[0][2]: 0}

    def depth(node):
        if node not in depth_cache:
            depth_cache[node] = depth(parent[node]) + 1
        return depth_cache[node]

    for s in present:
        lengths[s] = depth(int(s))

    if lengths.max() > MAX_CODE_LEN:
        lengths = _limit_lengths(lengths)
    return HuffmanTable(lengths)


def _limit_lengths(lengths: np.ndarray) -> np.ndarray:
    lengths = np.minimum(lengths, MAX_CODE_LEN)
    present = np.flatnonzero(lengths)
    unit = 1 << MAX_CODE_LEN
    kraft = sum(1 << (MAX_CODE_LEN - int(lengths[s])) for s in present)
    while kraft > unit:
        # deepen the longest still-extendable code; highest symbol first
        cands = [s for s in present if lengths[s] < MAX_CODE_LEN]
        s = max(cands, key=lambda s: (lengths[s], s))
        kraft -= 1 << (MAX_CODE_LEN - int(lengths[s]) - 1)
        lengths[s] += 1
    return lengths


class BitWriter:
    """MSB-first bit packer."""

    def __init__(self):
        self._bytes = bytearray()
        self._acc = 0
        self._nbits = 0
        self.bit_count = 0

    def write(self, value: int, nbits: int):
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self._nbits += nbits
        self.bit_count += nbits
        while self._nbits >= 8:
            self._nbits -= 8
            self._bytes.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def getvalue(self) -> bytes:
        out = bytearray(self._bytes)
        if self._nbits:
            out.append((self._acc << (8 - self._nbits)) & 0xFF)
        return bytes(out)


class BitReader:
    """MSB-first bit reader over a bytes object."""

    def __init__(self, data: bytes, bit_count: int | None = None):
        self._data = data
        self._pos = 0
        self._limit = len(data) * 8 if bit_count is None else bit_count
        if self._limit > len(data) * 8:
            raise CorruptStreamError("declared bit count exceeds payload size")

    def read_bit(self) -> int:
        if self._pos >= self._limit:
            raise CorruptStreamError("payload truncated")
        byte = self._data[self._pos >> 3]
        bit = (byte >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    @property
    def bits_left(self) -> int:
        return self._limit - self._pos


@dataclass(frozen=True)
class CompressedChunk:
    """Entropy-coded soft edge maps for one GOP."""

    scan_mode: int
    frame_count: int
    width: int
    height: int
    k: int
    label_lengths: bytes  # k code lengths
    run_lengths: bytes  # 256 code lengths
    payload_bit_count: int
    payload: bytes

    def to_bytes(self) -> bytes:
        out = bytearray()
        out.append(self.scan_mode)
        out += struct.pack("<I", self.frame_count)
        out.append(self.k)
        out += self.label_lengths
        out += self.run_lengths
        out += struct.pack("<Q", self.payload_bit_count)
        out += self.payload
        return bytes(out)

    @property
    def size_bytes(self) -> int:
        return 1 + 4 + 1 + self.k + 256 + 8 + len(self.payload)

    @classmethod
    def from_bytes(cls, data: bytes, width: int, height: int, offset: int = 0):
        """Parse one chunk; returns (chunk, bytes consumed past offset)."""
        pos = offset
        try:
            scan_mode = data[pos]
            pos += 1
            (frame_count,) = struct.unpack_from("<I", data, pos)
            pos += 4
            k = data[pos]
            pos += 1
            label_lengths = bytes(data[pos : pos + k])
            if len(label_lengths) != k:
                raise IndexError
            pos += k
            run_lengths = bytes(data[pos : pos + 256])
            if len(run_lengths) != 256:
                raise IndexError
            pos += 256
            (payload_bit_count,) = struct.unpack_from("<Q", data, pos)
            pos += 8
        except (IndexError, struct.error):
            raise CorruptStreamError("chunk header truncated") from None
        if scan_mode not in (SCAN_SPATIAL, SCAN_TEMPORAL):
            raise CorruptStreamError(f"unknown scan mode {scan_mode}")
        payload_len = (payload_bit_count + 7) // 8
        payload = bytes(data[pos : pos + payload_len])
        if len(payload) != payload_len:
            raise CorruptStreamError("chunk payload truncated")
        pos += payload_len
        chunk = cls(
            scan_mode=scan_mode,
            frame_count=frame_count,
            width=width,
            height=height,
            k=k,
            label_lengths=label_lengths,
            run_lengths=run_lengths,
            payload_bit_count=payload_bit_count,
            payload=payload,
        )
        return chunk, pos - offset


def compress_chunk(maps) -> CompressedChunk:
    """Entropy-code a GOP of soft edge maps.

    Tokenizes both a spatial (frame-major) and a temporal (pixel-major) scan,
    keeps whichever yields fewer tokens (tie goes to spatial), then codes
    labels and run lengths with separate canonical Huffman tables.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("empty map list")
    w, h, k = maps[0].width, maps[0].height, maps[0].k
    for m in maps:
        if (m.width, m.height, m.k) != (w, h, k):
            raise ValueError("maps differ in dimensions or k")

    stack = np.stack([m.labels for m in maps])  # (F, H, W)
    spatial = stack.reshape(-1)
    temporal = stack.transpose(1, 2, 0).reshape(-1)

    sp_labels, sp_runs = _rle_encode(spatial)
    tm_labels, tm_runs = _rle_encode(temporal)
    if len(tm_labels) < len(sp_labels):
        scan_mode, tok_labels, tok_runs = SCAN_TEMPORAL, tm_labels, tm_runs
    else:
        scan_mode, tok_labels, tok_runs = SCAN_SPATIAL, sp_labels, sp_runs

    label_table = huffman_build(np.bincount(tok_labels, minlength=k))
    run_table = huffman_build(np.bincount(tok_runs, minlength=256))

    writer = BitWriter()
    lcodes, llens = label_table.codes, label_table.code_lengths
    rcodes, rlens = run_table.codes, run_table.code_lengths
    for lab, run in zip(tok_labels.tolist(), tok_runs.tolist()):
        writer.write(int(lcodes[lab]), int(llens[lab]))
        writer.write(int(rcodes[run]), int(rlens[run]))

    return CompressedChunk(
        scan_mode=scan_mode,
        frame_count=len(maps),
        width=w,
        height=h,
        k=k,
        label_lengths=label_table.code_lengths.tobytes(),
        run_lengths=run_table.code_lengths.tobytes(),
        payload_bit_count=writer.bit_count,
        payload=writer.getvalue(),
    )


def decompress_chunk(chunk: CompressedChunk) -> list:
    """Exact inverse of compress_chunk, with strict corruption checks."""
    try:
        label_table = HuffmanTable(np.frombuffer(chunk.label_lengths, np.uint8))
        run_table = HuffmanTable(np.frombuffer(chunk.run_lengths, np.uint8))
    except ValueError as exc:
        raise CorruptStreamError(f"bad Huffman table: {exc}") from exc

    total = chunk.frame_count * chunk.width * chunk.height
    reader = BitReader(chunk.payload, chunk.payload_bit_count)
    syms = []
    runs = []
    expanded = 0
    while expanded < total:
        lab = label_table.decode_symbol(reader)
        run = run_table.decode_symbol(reader)
        if run < 1:
            raise CorruptStreamError("zero-length run token")
        syms.append(lab)
        runs.append(run)
        expanded += run
    if expanded != total:
        raise CorruptStreamError(
            f"token stream expands to {expanded} labels, expected {total}"
        )
    if reader.bits_left != 0:
        raise CorruptStreamError(f"{reader.bits_left} unconsumed payload bits")
    pad_bits = chunk.payload_bit_count % 8
    if pad_bits:
        last = chunk.payload[-1]
        if last & ((1 << (8 - pad_bits)) - 1):
            raise CorruptStreamError("nonzero padding bits")

    flat = np.repeat(np.array(syms, dtype=np.uint8), np.array(runs, dtype=np.int64))
    if chunk.scan_mode == SCAN_TEMPORAL:
        stack = flat.reshape(chunk.height, chunk.width, chunk.frame_count)
        stack = stack.transpose(2, 0, 1)
    else:
        stack = flat.reshape(chunk.frame_count, chunk.height, chunk.width)
    return [SoftEdgeMap(labels=np.ascontiguousarray(f), k=chunk.k) for f in stack]
