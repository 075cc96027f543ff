"""GF(2) linear algebra on int bitsets (bit ``j`` of a row is column ``j``)."""

from __future__ import annotations

from typing import Iterable, Sequence


def bits(mask: int) -> Iterable[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def rank(rows: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    for v in rows:
        while v:
            p = v.bit_length() - 1
            if p not in pivots:
                pivots[p] = v
                break
            v ^= pivots[p]
    return len(pivots)


class Basis:
    """Reduced row-echelon basis; :meth:`reduce` gives canonical coset representatives."""

    __slots__ = ("pivots",)

    def __init__(self, pivots: dict[int, int] | None = None):
        self.pivots = dict(pivots) if pivots else {}

    def copy(self) -> "Basis":
        return Basis(self.pivots)

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, v: int) -> int:
        for p, row in self.pivots.items():
            if (v >> p) & 1:
                v ^= row
        return v

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        p = v.bit_length() - 1
        for q, row in self.pivots.items():
            if (row >> p) & 1:
                self.pivots[q] = row ^ v
        self.pivots[p] = v
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.pivots.values()))

    def vectors(self) -> list[int]:
        return list(self.pivots.values())


def solve_combination(rows: Sequence[int], target: int) -> int | None:
    """Bitmask ``c`` over row indices with ``XOR_{i in c} rows[i] == target``, or None."""
    pivots: dict[int, tuple[int, int]] = {}
    for i, v in enumerate(rows):
        combo = 1 << i
        while v:
            p = v.bit_length() - 1
            if p not in pivots:
                pivots[p] = (v, combo)
                break
            pv, pc = pivots[p]
            v ^= pv
            combo ^= pc
    combo = 0
    v = target
    while v:
        p = v.bit_length() - 1
        if p not in pivots:
            return None
        pv, pc = pivots[p]
        v ^= pv
        combo ^= pc
    return combo


def matrix_to_rows(matrix) -> list[int]:
    """0/1 matrix (rows x cols, array-like) to int rows, column ``j`` -> bit ``j``."""
    out = []
    for row in matrix:
        v = 0
        for j, b in enumerate(row):
            if int(b) & 1:
                v |= 1 << j
        out.append(v)
    return out
