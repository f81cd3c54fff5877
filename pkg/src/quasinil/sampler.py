"""Rademacher-type step functions and Monte Carlo sampling of sum eps_n alpha^n.

A point x in [-1, 1] is addressed by the binary digits of u = (x + 1) / 2;
f_n(x) is +1 when the n-th digit is 1 and -1 otherwise.  At dyadic
breakpoints the left limit is used, so the digit sequence of u is the one
that does not end in all zeros (u = 1/2 reads as 0.0111...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coeffs import CoefficientSpec, coeffs
from .config import CapError
from .exact import is_real


def _digits_left(u: Fraction, N: int) -> list[int]:
    out = []
    for _ in range(N):
        u = 2 * u
        if u > 1:
            out.append(1)
            u -= 1
        else:
            out.append(0)
    return out


def f_eval(spec: CoefficientSpec, x, N: int) -> float:
    """sum_{n<=N} c_n f_n(x) for a real spec."""
    cs = coeffs(spec, N)
    if not all(is_real(c) for c in cs):
        raise ValueError("f_eval needs a real coefficient sequence")
    xq = Fraction(x) if not isinstance(x, Fraction) else x
    if not -1 <= xq <= 1:
        raise ValueError("x must lie in [-1, 1]")
    digits = _digits_left((xq + 1) / 2, N)
    return float(sum((c if d else -c for c, d in zip(cs, digits)), Fraction(0)))


def f_single(n: int, x) -> int:
    """f_n(x) in {-1, +1}."""
    xq = Fraction(x)
    return 1 if _digits_left((xq + 1) / 2, n)[-1] else -1


def cell_values(spec: CoefficientSpec, N: int) -> list[Fraction]:
    """Exact value of f on each of the 2^N dyadic cells of [-1, 1], left to right."""
    cs = coeffs(spec, N)
    if not all(is_real(c) for c in cs):
        raise ValueError("the step-function model needs a real coefficient sequence")
    vals = [Fraction(0)]
    for c in cs:
        vals = [v + s for v in vals for s in (-c, c)]
    return vals


# sampling ---------------------------------------------------------------------

MOMENT_ORDERS = tuple(range(1, 9))


@dataclass(frozen=True)
class SampleRun:
    alpha: float
    count: int
    seed: int
    N: int
    mean: float
    moments: tuple[float, ...]            # raw moments of orders 1..8
    standard_errors: tuple[float, ...]    # of the raw moments
    bin_edges: np.ndarray
    counts: np.ndarray
    ks_distance: float                    # sup |F_emp - F_uniform| on [-1, 1]
    samples: np.ndarray | None = field(default=None, repr=False)

    def moment(self, k: int) -> float:
        return self.moments[k - 1]

    def histogram_rows(self):
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            yield float(lo), float(hi), int(c)


def choose_level(alpha: float, bins: int, count: int) -> int:
    """Smallest N with alpha^{N+1}/(1-alpha) below half a bin and below 1/(4*count)."""
    half_bin = (2 * alpha / (1 - alpha)) / bins / 2
    target = min(half_bin, 0.25 / count)
    N = 1
    while alpha ** (N + 1) / (1 - alpha) >= target:
        N += 1
    return min(N, 63)


def _signs(seed: int, start: int, n: int, N: int) -> np.ndarray:
    """Bit matrix (n, N) for samples start..start+n-1, one 64-bit word per sample."""
    # Philox4x64 emits four words per counter step; chunks start on a block boundary
    assert start % 4 == 0
    bg = np.random.Philox(key=seed)
    bg.advance(start // 4)
    words = bg.random_raw(n).astype(np.uint64)
    shifts = np.arange(N, dtype=np.uint64)
    return ((words[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int8)


def ks_uniform(samples: np.ndarray, lo: float = -1.0, hi: float = 1.0) -> float:
    """Sup distance between the empirical CDF and the uniform CDF on [lo, hi]."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    F = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def sample_series(
    alpha,
    count: int,
    seed: int = 0,
    N: int | None = None,
    bins: int = 200,
    chunk: int = 1 << 18,
    keep: bool = False,
) -> SampleRun:
    """Draw ``count`` values of sum_{n<=N} eps_n alpha^n with fair independent signs.

    Sample i uses the i-th 64-bit output of a Philox stream keyed by ``seed``;
    bit n-1 of that word gives eps_n.  Results depend only on
    (alpha, count, seed, N, bins), not on the chunk size.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    a = float(alpha)
    if not 0 < a < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if N is None:
        N = choose_level(a, bins, count)
    if not 1 <= N <= 64:
        raise CapError("N must be between 1 and 64 (one 64-bit word per sample)")
    weights = a ** np.arange(1, N + 1)
    bound = float(weights.sum())
    edges = np.linspace(-bound, bound, bins + 1)
    hist = np.zeros(bins, dtype=np.int64)
    chunk = max(4, chunk - chunk % 4)
    out = np.empty(count)
    for start in range(0, count, chunk):
        n = min(chunk, count - start)
        bits = _signs(seed, start, n, N)
        eps = 2.0 * bits - 1.0
        # fixed summation order (no BLAS) keeps reruns bit-identical
        vals = np.zeros(n)
        for j in range(N):
            vals += eps[:, j] * weights[j]
        out[start:start + n] = vals
        hist += np.histogram(vals, bins=edges)[0]
    raw, ses = [], []
    for k in MOMENT_ORDERS:
        pk = out ** k
        m = math.fsum(pk) / count
        var = math.fsum((pk - m) ** 2) / max(count - 1, 1)
        raw.append(m)
        ses.append(math.sqrt(var / count))
    return SampleRun(
        alpha=a,
        count=count,
        seed=seed,
        N=N,
        mean=raw[0],
        moments=tuple(raw),
        standard_errors=tuple(ses),
        bin_edges=edges,
        counts=hist,
        ks_distance=ks_uniform(out),
        samples=out if keep else None,
    )
