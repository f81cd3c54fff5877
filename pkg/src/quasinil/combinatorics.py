"""Partition counts behind the moment formulas.

``gamma``   set partitions of {1..2p} into blocks of sizes 2n_1, ..., 2n_k.
``beta``    alternating colour-balanced single blocks of size 2n among 2p
            positions coloured red (odd) / white (even).
``alpha``   partitions of those 2p positions into alternating, colour-balanced
            blocks of sizes 2n_1, ..., 2n_k.
``s_sum``   sum of alpha over all shapes with k parts.

Every count has an independent brute-force route.  All arithmetic uses
Python integers.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .config import CapError, caps

Shape = tuple[int, ...]


def _check_shape(p: int, shape: Sequence[int]) -> Shape:
    shape = tuple(int(n) for n in shape)
    if not shape or any(n < 1 for n in shape):
        raise ValueError(f"shape must be a nonempty list of positive integers, got {shape}")
    if sum(shape) != p:
        raise ValueError(f"shape {shape} does not sum to p={p}")
    return tuple(sorted(shape, reverse=True))


def shapes(p: int) -> list[Shape]:
    """Integer partitions of p, parts nonincreasing, in decreasing lexicographic order."""
    if p < 1:
        raise ValueError("p must be >= 1")

    def gen(rest: int, largest: int):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, largest), 0, -1):
            for tail in gen(rest - first, first):
                yield (first,) + tail

    return list(gen(p, p))


def _multiplicity_factorials(shape: Shape) -> int:
    out = 1
    for m in Counter(shape).values():
        out *= math.factorial(m)
    return out


# gamma -----------------------------------------------------------------------

def gamma(p: int, shape: Sequence[int]) -> int:
    """(2p)! / (prod (2n_i)! * prod m_j!), m_j the multiplicities of repeated sizes."""
    shape = _check_shape(p, shape)
    den = _multiplicity_factorials(shape)
    for n in shape:
        den *= math.factorial(2 * n)
    num = math.factorial(2 * p)
    assert num % den == 0
    return num // den


def gamma_recursive(p: int, shape: Sequence[int]) -> int:
    """Peel off the largest part together with all its repeats:

    gamma(p; n^r, rest) = (1/r!) C(2p, 2n) C(2p-2n, 2n) ... gamma(p - rn; rest).
    """
    shape = _check_shape(p, shape)
    return _gamma_rec(p, shape)


def _gamma_rec(p: int, shape: Shape) -> int:
    if not shape:
        return 1 if p == 0 else 0
    n1 = shape[0]
    r = shape.count(n1)
    num, rest = 1, 2 * p
    for _ in range(r):
        num *= math.comb(rest, 2 * n1)
        rest -= 2 * n1
    num *= _gamma_rec(p - r * n1, shape[r:])
    assert num % math.factorial(r) == 0
    return num // math.factorial(r)


def gamma_bruteforce(p: int, shape: Sequence[int]) -> int:
    """Count set partitions of {0..2p-1} with block sizes 2*shape by direct enumeration."""
    shape = _check_shape(p, shape)

    def count(elems: tuple[int, ...], sizes: Counter) -> int:
        if not elems:
            return 1
        rest = elems[1:]
        total = 0
        for s in list(sizes):
            if sizes[s] == 0:
                continue
            sizes[s] -= 1
            for others in combinations(rest, 2 * s - 1):
                left = tuple(e for e in rest if e not in others)
                total += count(left, sizes)
            sizes[s] += 1
        return total

    return count(tuple(range(2 * p)), Counter(shape))


# beta ------------------------------------------------------------------------

def beta(p: int, n: int) -> int:
    """Number of alternating blocks with n reds and n whites, by the closed double sum.

    The red members sit at odd positions r_1 < ... < r_n of 1..2p.  A block
    starting red has (r_{i+1}-r_i)/2 white choices between consecutive reds and
    (2p+1-r_n)/2 after the last; a block starting white has (r_1-1)/2 before
    the first red instead.
    """
    if not 1 <= n <= p:
        raise ValueError("need 1 <= n <= p")
    odd = range(1, 2 * p, 2)
    total = 0
    for rs in combinations(odd, n):
        gaps = 1
        for a, b in zip(rs, rs[1:]):
            gaps *= b - a
        total += gaps * (2 * p + 1 - rs[-1])
        if rs[0] >= 2:
            total += gaps * (rs[0] - 1)
    out = Fraction(total, 2 ** n)
    assert out.denominator == 1
    return int(out)


def _alternates(positions: Sequence[int]) -> bool:
    return all((a - b) % 2 == 1 for a, b in zip(positions, positions[1:]))


def beta_bruteforce(p: int, n: int) -> int:
    """Enumerate all 2n-subsets of 1..2p and keep those with n of each colour that alternate."""
    if not 1 <= n <= p:
        raise ValueError("need 1 <= n <= p")
    count = 0
    for sub in combinations(range(1, 2 * p + 1), 2 * n):
        reds = sum(1 for x in sub if x % 2 == 1)
        if reds == n and _alternates(sub):
            count += 1
    return count


# alpha -----------------------------------------------------------------------

def _bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _check_alpha_cap(p: int, cap: int | None):
    cap = caps().alpha_p if cap is None else cap
    if p > cap:
        raise CapError(
            f"p={p} exceeds the alternating-partition cap {cap}; the search space has "
            f"up to Bell(2p) = {_bell(2 * p):.3e} set partitions (raise QUASINIL_ALPHA_P to allow)"
        )


def _alternating_blocks(mask: int, npos: int, size: int):
    """Bitmasks of alternating blocks of the given size inside ``mask`` that contain its lowest element."""
    first = (mask & -mask).bit_length() - 1

    def extend(block: int, last: int, need: int):
        if need == 0:
            yield block
            return
        for j in range(last + 1, npos - need + 1):
            if (mask >> j) & 1 and (j - last) % 2 == 1:
                yield from extend(block | (1 << j), j, need - 1)

    yield from extend(1 << first, first, size - 1)


@lru_cache(maxsize=None)
def _alpha_count(mask: int, npos: int, sizes: tuple[int, ...]) -> int:
    if mask == 0:
        return 1 if not sizes else 0
    total = 0
    for s in sorted(set(sizes), reverse=True):
        rest = list(sizes)
        rest.remove(s)
        rest_t = tuple(rest)
        for block in _alternating_blocks(mask, npos, 2 * s):
            total += _alpha_count(mask & ~block, npos, rest_t)
    return total


def alpha(p: int, shape: Sequence[int], cap: int | None = None) -> int:
    """Partitions of 2p alternately coloured positions into unlabeled alternating blocks.

    Blocks are built around the smallest unused position, so each unordered
    partition is produced exactly once.  Even-sized alternating blocks are
    automatically colour-balanced.
    """
    shape = _check_shape(p, shape)
    _check_alpha_cap(p, cap)
    return _alpha_count((1 << (2 * p)) - 1, 2 * p, shape)


def alpha_bruteforce(p: int, shape: Sequence[int]) -> int:
    """Enumerate all set partitions with the given block sizes and filter by colour rules."""
    shape = _check_shape(p, shape)

    def count(elems: tuple[int, ...], sizes: Counter) -> int:
        if not elems:
            return 1
        anchor, rest = elems[0], elems[1:]
        total = 0
        for s in list(sizes):
            if sizes[s] == 0:
                continue
            sizes[s] -= 1
            for others in combinations(rest, 2 * s - 1):
                block = (anchor,) + others
                reds = sum(1 for x in block if x % 2 == 0)  # 0-based even = 1-based odd
                if reds == s and _alternates(block):
                    left = tuple(e for e in rest if e not in others)
                    total += count(left, sizes)
            sizes[s] += 1
        return total

    return count(tuple(range(2 * p)), Counter(shape))


def s_sum(p: int, k: int, cap: int | None = None) -> int:
    """s_p(k): sum of alpha(p; shape) over the shapes of p with exactly k parts."""
    if not 1 <= k <= p:
        raise ValueError("need 1 <= k <= p")
    return sum(alpha(p, sh, cap) for sh in shapes(p) if len(sh) == k)


# tables ----------------------------------------------------------------------

def shape_text(shape: Shape) -> str:
    return ",".join(str(n) for n in shape)


@dataclass(frozen=True)
class CountRow:
    shape: Shape
    gamma: int
    alpha: int

    @property
    def k(self) -> int:
        return len(self.shape)


@dataclass(frozen=True)
class CountTable:
    p: int
    rows: tuple[CountRow, ...]
    gamma_sums: dict = field(default_factory=dict)   # k -> sum of gamma
    sums: dict = field(default_factory=dict)         # k -> s_p(k)

    def alpha_of(self, shape: Sequence[int]) -> int:
        key = tuple(sorted(shape, reverse=True))
        for row in self.rows:
            if row.shape == key:
                return row.alpha
        raise KeyError(key)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["shape", "k", "gamma", "alpha"])
        for r in self.rows:
            w.writerow([shape_text(r.shape), r.k, r.gamma, r.alpha])
        for k in sorted(self.sums):
            w.writerow(["*", k, self.gamma_sums[k], self.sums[k]])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "rows": [{"shape": list(r.shape), "k": r.k, "gamma": r.gamma, "alpha": r.alpha} for r in self.rows],
            "sums": [{"k": k, "gamma_sum": self.gamma_sums[k], "s_p": self.sums[k]} for k in sorted(self.sums)],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def count_table(p: int, cap: int | None = None) -> CountTable:
    _check_alpha_cap(p, cap)
    rows = tuple(CountRow(sh, gamma(p, sh), alpha(p, sh, cap)) for sh in shapes(p))
    sums: dict[int, int] = {}
    gsums: dict[int, int] = {}
    for r in rows:
        sums[r.k] = sums.get(r.k, 0) + r.alpha
        gsums[r.k] = gsums.get(r.k, 0) + r.gamma
    return CountTable(p, rows, gsums, sums)
