"""Binary linear block codes for error-correcting delivery.

Packets are ``nbits``-bit ints. A code is applied column-wise: for every bit
position the ``k`` input bits form a message whose codeword supplies that bit
of the ``n`` output packets. Since the code is linear this is the same as
XOR-ing input packets along the columns of the generator matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from . import gf2

SYNDROME_TABLE_MAX_N = 24


class UnsupportedCode(ValueError):
    pass


class CodeTableMiss(LookupError):
    pass


class UncorrectableError(ValueError):
    """More corrupted packets than the code can correct (detected)."""


@dataclass(frozen=True, eq=False)
class LinearCode:
    n: int
    k: int
    d: int
    generator: np.ndarray
    parity_check: np.ndarray
    syndrome_table: dict[int, int] = field(repr=False)

    @property
    def correctable(self) -> int:
        return (self.d - 1) // 2

    def generator_rows(self) -> list[int]:
        return gf2.matrix_to_rows(self.generator)

    def check_rows(self) -> list[int]:
        return gf2.matrix_to_rows(self.parity_check)

    def encode_bits(self, message: Sequence[int]) -> np.ndarray:
        return (np.asarray(message, dtype=np.int64) @ self.generator) % 2

    def syndrome(self, word: int) -> int:
        s = 0
        for r, row in enumerate(self.check_rows()):
            s |= ((row & word).bit_count() & 1) << r
        return s

    def to_json(self) -> dict:
        width = max(1, -(-self.n // 4))
        return {
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "generator": [format(row, f"0{width}x") for row in self.generator_rows()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearCode":
        n, k, d = obj["n"], obj["k"], obj["d"]
        G = np.array([[(int(h, 16) >> j) & 1 for j in range(n)] for h in obj["generator"]], dtype=np.uint8)
        if not np.array_equal(G[:, :k], np.eye(k, dtype=np.uint8)):
            raise ValueError("only systematic generators [I_k | P] are supported")
        return _systematic(G[:, k:], d)


def _systematic(P: np.ndarray, d: int) -> LinearCode:
    """Code with generator ``[I_k | P]`` and parity check ``[P^T | I_r]``."""
    P = np.asarray(P, dtype=np.uint8)
    k, r = P.shape
    n = k + r
    G = np.concatenate([np.eye(k, dtype=np.uint8), P], axis=1)
    H = np.concatenate([P.T, np.eye(r, dtype=np.uint8)], axis=1)
    code = LinearCode(n, k, d, G, H, {})
    object.__setattr__(code, "syndrome_table", _syndrome_table(code))
    return code


def _syndrome_table(code: LinearCode) -> dict[int, int]:
    # nothing to tabulate for a code that corrects no errors
    if code.correctable and code.n > SYNDROME_TABLE_MAX_N:
        raise UnsupportedCode(f"syndrome table for n = {code.n} exceeds the n <= {SYNDROME_TABLE_MAX_N} guard")
    cols = [code.syndrome(1 << j) for j in range(code.n)]
    table = {0: 0}
    for w in range(1, code.correctable + 1):
        for pos in combinations(range(code.n), w):
            s = 0
            for j in pos:
                s ^= cols[j]
            if s in table:
                raise ValueError(f"syndrome collision: [{code.n},{code.k},{code.d}] cannot correct {w} errors")
            table[s] = sum(1 << j for j in pos)
    return table


def min_distance(rows: Sequence[int]) -> int:
    """Minimum weight of a non-zero codeword (Gray-code walk over all messages)."""
    rows = list(rows)
    if not rows:
        raise ValueError("empty code")
    best = None
    word = 0
    for i in range(1, 1 << len(rows)):
        word ^= rows[(i & -i).bit_length() - 1]
        w = word.bit_count()
        if best is None or w < best:
            best = w
    return best


def hamming_redundancy(k: int) -> int:
    """Smallest ``r`` with ``2^r - 1 - r >= k`` (shortened Hamming codes)."""
    r = 2
    while (1 << r) - 1 - r < k:
        r += 1
    return r


def build_code(k: int, d: int) -> LinearCode:
    """Construct a systematic ``[n, k, d]`` binary code.

    ``d = 1`` gives the identity code, ``k = 1`` the repetition code and
    ``d = 3`` a shortened Hamming code of the shortest possible length.
    """
    if k < 1 or d < 1:
        raise UnsupportedCode(f"no code for k = {k}, d = {d}")
    if d == 1:
        return _systematic(np.zeros((k, 0), dtype=np.uint8), 1)
    if k == 1:
        return _systematic(np.ones((1, d - 1), dtype=np.uint8), d)
    if d == 3:
        r = hamming_redundancy(k)
        # non-unit columns, lowest weight first so that a weight-3 codeword exists
        cols = sorted((v for v in range(1, 1 << r) if v.bit_count() >= 2), key=lambda v: (v.bit_count(), v))[:k]
        P = np.array([[(v >> i) & 1 for i in range(r)] for v in cols], dtype=np.uint8)
        return _systematic(P, 3)
    raise UnsupportedCode(f"no constructor for d = {d} with k = {k}; only d in (1, 3) or k = 1")


def _check_packets(packets: Sequence[int], count: int, nbits: int, what: str) -> None:
    if len(packets) != count:
        raise ValueError(f"{what}: expected {count} packets, got {len(packets)}")
    for p in packets:
        if p < 0 or p.bit_length() > nbits:
            raise ValueError(f"{what}: packet does not fit in {nbits} bits")


def concat_encode(packets: Sequence[int], code: LinearCode, nbits: int) -> list[int]:
    """Encode ``k`` packets into ``n`` packets, bit column by bit column."""
    _check_packets(packets, code.k, nbits, "concat_encode")
    out = []
    for j in range(code.n):
        v = 0
        for i in np.flatnonzero(code.generator[:, j]):
            v ^= packets[i]
        out.append(v)
    return out


def syndrome_decode(received: Sequence[int], code: LinearCode, nbits: int) -> list[int]:
    """Correct up to ``(d-1)//2`` corrupted packets and return the ``k`` data packets.

    Each bit column is decoded independently through the syndrome table.
    Raises :class:`UncorrectableError` when a column's syndrome is not in the
    table, or when the columns together blame more packets than the code
    corrects (a packet-level miscorrection).
    """
    _check_packets(received, code.n, nbits, "syndrome_decode")
    word = list(received)
    full = (1 << nbits) - 1
    checks = []
    for row in code.check_rows():
        s = 0
        for j in gf2.bits(row):
            s ^= word[j]
        checks.append(s)
    dirty = 0
    for s in checks:
        dirty |= s
    blamed = 0
    # visit each distinct non-zero syndrome once, via the lowest column carrying it
    remaining = dirty
    while remaining:
        b = (remaining & -remaining).bit_length() - 1
        syn = 0
        cols = full
        for r, s in enumerate(checks):
            if (s >> b) & 1:
                syn |= 1 << r
                cols &= s
            else:
                cols &= ~s
        remaining &= ~cols
        pattern = code.syndrome_table.get(syn)
        if pattern is None:
            raise UncorrectableError("syndrome outside the decoding table")
        blamed |= pattern
        for j in gf2.bits(pattern):
            word[j] ^= cols
    if blamed.bit_count() > code.correctable:
        raise UncorrectableError(
            f"{blamed.bit_count()} packets blamed but the code corrects at most {code.correctable}"
        )
    return word[: code.k]


# -- shortest-length table -------------------------------------------------


def griesmer_bound(k: int, d: int) -> int:
    return sum(-(-d // (1 << i)) for i in range(k))


def sphere_packing_ok(n: int, k: int, d: int) -> bool:
    t = (d - 1) // 2
    return sum(comb(n, i) for i in range(t + 1)) <= 1 << (n - k)


def length_lower_bound(k: int, d: int) -> int:
    n = max(griesmer_bound(k, d), k)
    while not sphere_packing_ok(n, k, d):
        n += 1
    return n


@lru_cache(maxsize=1)
def code_table() -> dict:
    with resources.files("sharedcache").joinpath("data/code_lengths.json").open() as fh:
        return json.load(fh)


def code_length_bounds(k: int, d: int) -> tuple[int, int]:
    """``(lower, upper)`` on ``N_2[k, d]``; equal when the value is known exactly."""
    if k < 0 or d < 1:
        raise ValueError("need k >= 0 and d >= 1")
    if k == 0:
        return 0, 0
    if d == 1:
        return k, k
    if d == 3:
        n = k + hamming_redundancy(k)
        return n, n
    entry = code_table()["entries"].get(str(d), {}).get(str(k))
    if entry is not None:
        return entry["lower"], entry["upper"]
    return length_lower_bound(k, d), k * d


def lookup_code_length(k: int, d: int) -> int:
    """``N_2[k, d]``, the shortest length of a binary linear code of dimension ``k`` and distance ``d``."""
    lower, upper = code_length_bounds(k, d)
    if lower != upper:
        raise CodeTableMiss(
            f"N_2[{k},{d}] is only known to lie in [{lower}, {upper}]; "
            f"the repetition code gives length {k * d}"
        )
    return lower
