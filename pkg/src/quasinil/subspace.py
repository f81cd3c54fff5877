"""Trace recursions for R_m = (A^m)* A^m, ratio profiles and invariance witnesses.

Throughout, A = sum alpha^n V_n with rational 0 < alpha < 1 and, for a word
w over {P, Q}, the quantity tau(R_m w) equals ||A^m w||_2^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coeffs import CoefficientSpec, elementary, sigma_tail_bound
from .config import CapError, caps
from .exact import to_exact
from .operators import a_trunc, check_commutes, check_invariance, proj_word, s_op
from .tensor import OperatorSum, apply, dense, exact_rank, norm2_squared


@dataclass(frozen=True)
class PQWord:
    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        if any(t not in ("P", "Q") for t in letters):
            raise ValueError(f"words use the letters P and Q only, got {''.join(letters)!r}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> "PQWord":
        t = text.strip().upper()
        return cls(tuple("" if t in ("", "1", "EMPTY") else t))

    @property
    def p_count(self) -> int:
        return self.letters.count("P")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(self.letters) or "1"


def _as_word(w) -> PQWord:
    if isinstance(w, PQWord):
        return w
    if isinstance(w, str):
        return PQWord.parse(w)
    return PQWord(tuple(w))


def _ratio_of(x) -> Fraction:
    if isinstance(x, CoefficientSpec):
        if not x.is_geometric:
            raise ValueError("the trace recursions need a geometric coefficient sequence")
        return x.ratio
    a = Fraction(to_exact(x))
    if not 0 < a < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return a


def rm_trace(word, alpha, m: int) -> Fraction:
    """tau(R_m w) by the self-similarity recursions.

    tau(R_m (P w)) = alpha^{2m}/2 * tau(R_m w)
    tau(R_m (Q w)) = alpha^{2m}/2 * (m^2 tau(R_{m-1} w) + tau(R_m w))
    tau(R_m)       = m^2 alpha^{2m} / (2 (1 - alpha^{2m})) * tau(R_{m-1})
    tau(R_0 w)     = 2^{-|w|}
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    return _rm(_as_word(word).letters, _ratio_of(alpha), m)


@lru_cache(maxsize=None)
def _rm(letters: tuple[str, ...], a: Fraction, m: int) -> Fraction:
    if m == 0:
        return Fraction(1, 2 ** len(letters))
    x = a ** (2 * m)
    if not letters:
        return m * m * x / (2 * (1 - x)) * _rm((), a, m - 1)
    head, rest = letters[0], letters[1:]
    if head == "P":
        return x / 2 * _rm(rest, a, m)
    return x / 2 * (m * m * _rm(rest, a, m - 1) + _rm(rest, a, m))


@dataclass(frozen=True)
class TruncatedValue:
    value: Fraction
    tail_bound: Fraction
    N: int


def rm_trace_direct(word, alpha, m: int, N: int = 60) -> TruncatedValue:
    """(m!)^2 2^{-|w|} e_m(y_1..y_N) with y_j = alpha^{2j} [w_j = Q] inside the word
    and alpha^{2j}/2 beyond it; the tail beyond N is bounded via e_m's expansion."""
    w = _as_word(word)
    a = _ratio_of(alpha)
    if N < len(w):
        raise ValueError("N must cover the word")
    ys = []
    for j in range(1, N + 1):
        x = a ** (2 * j)
        if j <= len(w):
            ys.append(x if w.letters[j - 1] == "Q" else Fraction(0))
        else:
            ys.append(x / 2)
    e = elementary(ys, m)
    tail = a ** (2 * (N + 1)) / (1 - a ** 2) / 2
    scale = Fraction(math.factorial(m) ** 2, 2 ** len(w))
    return TruncatedValue(scale * e[m], scale * sigma_tail_bound(e, m, tail), N)


def _root(q: Fraction, k: int) -> float:
    """q^(1/k) in double precision via logarithms of the exact parts."""
    if q == 0:
        return 0.0
    return math.exp((math.log(q.numerator) - math.log(q.denominator)) / k)


@dataclass(frozen=True)
class RatioRow:
    m: int
    ratio: Fraction     # tau(R_m w) / tau(R_m)
    root: float         # ratio^(1/(2m))


@dataclass(frozen=True)
class RatioProfile:
    word: PQWord
    alpha: Fraction
    rows: tuple[RatioRow, ...]

    @property
    def limit(self) -> Fraction:
        return self.alpha ** self.word.p_count

    def root_at(self, m: int) -> float:
        return self.rows[m - 1].root


def ratio_profile(word, alpha, m_max: int) -> RatioProfile:
    w = _as_word(word)
    a = _ratio_of(alpha)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    rows = []
    for m in range(1, m_max + 1):
        r = rm_trace(w, a, m) / rm_trace((), a, m)
        rows.append(RatioRow(m, r, _root(r, 2 * m)))
    return RatioProfile(w, a, tuple(rows))


# lower bound for general vectors -------------------------------------------------

@dataclass(frozen=True)
class LowerBoundRow:
    m: int
    ratio_sq: Fraction           # ||A^m xi||^2 / (||A^m 1||^2 ||xi||^2), infinite sequence, exact
    root: float                  # sqrt(ratio_sq)^(1/m)
    bound: float                 # alpha^r / sqrt(2)
    passed: bool                 # exact: ratio_sq >= alpha^{2rm} / 2^m
    truncated_root: float | None     # same quantity for A_N acting on the level-N model
    truncated_bound: float | None    # bound times the truncation slack^(1/(2m))
    truncated_passed: bool | None    # None when m exceeds what level N can resolve

    @property
    def margin(self) -> float:
        return self.root - self.bound


@dataclass(frozen=True)
class LowerBoundReport:
    r: int
    N: int
    alpha: Fraction
    rows: tuple[LowerBoundRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed and row.truncated_passed is not False for row in self.rows)

    @property
    def min_margin(self) -> float:
        return min(row.margin for row in self.rows)


def lower_bound_check(xi: OperatorSum, alpha, m_max: int, N: int, cap: int | None = None) -> LowerBoundReport:
    """Check (||A^m xi|| / ||A^m 1||)^(1/m) >= alpha^r / sqrt(2), xi normalized.

    Exact route: with r the last site touched by xi, split A = A_r + alpha^r A'
    where A' is a shifted copy of A on the sites after r.  Cross terms have
    zero trace, so
        ||A^m xi||^2 = sum_j C(m,j)^2 alpha^{2r(m-j)} ||A_r^j xi||^2 tau(R_{m-j}).
    Truncated route: A_N^m applied matrix-free to the columns of xi at level N.
    Only the first N - r sites after the word can carry V factors there, which
    shrinks the guaranteed bound by e_m(y_1..y_{N-r}) / e_m(y_1..y_N),
    y_j = alpha^{2j}; rows with m > N - r are reported but not judged.
    """
    a = _ratio_of(alpha)
    cap = caps().oracle_n if cap is None else cap
    if N > cap:
        raise CapError(f"level N={N} exceeds the oracle cap {cap}")
    if xi.is_zero():
        raise ValueError("xi must be nonzero")
    r = xi.max_site()
    if r > N:
        raise ValueError("xi acts beyond level N")
    spec = CoefficientSpec.geometric(a)
    ar = a_trunc(spec, r) if r else OperatorSum()
    xi_norm2 = norm2_squared(xi)
    head = [xi_norm2]
    cur = xi
    for _ in range(r):
        cur = ar * cur
        head.append(norm2_squared(cur))
    bound = float(a) ** r / math.sqrt(2)

    # truncated route
    an = a_trunc(spec, N)
    cols = dense(xi, N, cap=cap)
    ones = np.eye(2 ** N, dtype=complex)
    ys = [a ** (2 * j) for j in range(1, N + 1)]
    e_full = elementary(ys, m_max)
    e_short = elementary(ys[: N - r], m_max)

    rows = []
    for m in range(1, m_max + 1):
        num = Fraction(0)
        for j in range(0, min(m, r) + 1):
            num += math.comb(m, j) ** 2 * a ** (2 * r * (m - j)) * head[j] * rm_trace((), a, m - j)
        ratio_sq = num / (rm_trace((), a, m) * xi_norm2)
        exact_ok = ratio_sq >= a ** (2 * r * m) / 2 ** m
        root = _root(ratio_sq, 2 * m)

        cols = apply(an, cols, N)
        ones = apply(an, ones, N)
        t_root = t_bound = t_ok = None
        if m <= N - r:
            num_t = float(np.sum(np.abs(cols) ** 2))
            den_t = float(np.sum(np.abs(ones) ** 2)) * float(xi_norm2)
            t_root = (num_t / den_t) ** (1 / (2 * m))
            slack = _root(e_short[m] / e_full[m], 2 * m)
            t_bound = bound * slack
            t_ok = t_root >= t_bound * (1 - 1e-12)
        rows.append(LowerBoundRow(m, ratio_sq, root, bound, exact_ok, t_root, t_bound, t_ok))
    return LowerBoundReport(r, N, a, tuple(rows))


# hyperinvariance witnesses ---------------------------------------------------------

@dataclass(frozen=True)
class HyperinvarianceReport:
    word: PQWord
    N: int
    pair: tuple[int, int] | None
    witness: OperatorSum | None
    commutes_with_A: bool
    rank_p: int
    rank_join: int

    @property
    def found(self) -> bool:
        return self.pair is not None and self.commutes_with_A and self.rank_join > self.rank_p


def _candidate_pairs(L: int, N: int):
    first = [(L, L + 1)] if 1 <= L < N else []
    rest = [(n, m) for n in range(1, N) for m in range(n + 1, N + 1) if (n, m) not in first]
    return first + rest


def hyperinvariance_report(word, spec: CoefficientSpec, N: int, cap: int | None = None) -> HyperinvarianceReport:
    """Find S(n, m), n < m <= N, that commutes with A_N and moves range(p_w).

    The growth range(p_w) v range(S p_w) > range(p_w) is confirmed by exact
    ranks of the level-N matrices.
    """
    w = _as_word(word)
    if not 0 < len(w) < N:
        raise ValueError("need 1 <= len(word) < N")
    cap = caps().oracle_n if cap is None else cap
    if N > cap:
        raise CapError(f"level N={N} exceeds the oracle cap {cap}")
    p = proj_word(w.letters)
    an = a_trunc(spec, N)
    for n, m in _candidate_pairs(len(w), N):
        s = s_op(spec, n, m)
        verdict = check_invariance(p, s)
        if verdict.invariant:
            continue
        commutes = check_commutes(s, an).commutes
        pd = dense(p, N, exact=True, cap=cap)
        spd = dense(s * p, N, exact=True, cap=cap)
        rank_p = exact_rank(pd)
        rank_join = exact_rank(np.concatenate([pd, spd], axis=1))
        return HyperinvarianceReport(w, N, (n, m), verdict.witness, commutes, rank_p, rank_join)
    return HyperinvarianceReport(w, N, None, None, False, 0, 0)
