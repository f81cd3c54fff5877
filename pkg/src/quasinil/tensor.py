"""Exact algebra of finite tensor words over 2x2 site matrices.

Every site matrix is expanded in the basis ``{I, Q, V, V*}``::

    [[a, b], [c, d]] = a I + (d - a) Q + b V + c V*

Products of basis elements close on the basis (``V V* = P = I - Q``), so an
:class:`OperatorSum` is a finite map from basis words to exact weights and two
sums are equal as operators iff their maps are equal.  Trailing identity
sites are stripped, so a word carries no fixed length.

Basis convention for dense and matrix-free realisations: a state index is the
bitstring ``b_1 ... b_N`` with site 1 the most significant bit; bit 0 selects
the first (P-supported) coordinate and bit 1 the second (Q-supported) one.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import CapError, caps
from .exact import Exact, conj, format_exact, to_complex, to_exact

# basis indices
I_, Q_, V_, W_ = 0, 1, 2, 3  # W_ is V*
_BASIS_NAMES = ("I", "Q", "V", "V*")

# product table: (a, b) -> ((basis, coefficient), ...)
_MUL: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}
for _b in range(4):
    _MUL[(I_, _b)] = ((_b, 1),)
    _MUL[(_b, I_)] = ((_b, 1),)
_MUL.update({
    (Q_, Q_): ((Q_, 1),),
    (Q_, V_): (),
    (Q_, W_): ((W_, 1),),
    (V_, Q_): ((V_, 1),),
    (V_, V_): (),
    (V_, W_): ((I_, 1), (Q_, -1)),
    (W_, Q_): (),
    (W_, V_): ((Q_, 1),),
    (W_, W_): (),
})

_TRACE = (Fraction(1), Fraction(1, 2), Fraction(0), Fraction(0))
_ADJ = (I_, Q_, W_, V_)

# site letters as 2x2 integer matrices
LETTERS: dict[str, tuple[tuple[int, int], tuple[int, int]]] = {
    "I": ((1, 0), (0, 1)),
    "P": ((1, 0), (0, 0)),
    "Q": ((0, 0), (0, 1)),
    "V": ((0, 1), (0, 0)),
    "V*": ((0, 0), (1, 0)),
    "R": ((0, 1), (1, 0)),
    "T": ((0, 1), (-1, 0)),
}
_ALIASES = {"Vstar": "V*", "Vs": "V*", "V^*": "V*", "W": "V*"}


def matrix_to_basis(m) -> dict[int, Exact]:
    """Decompose an exact 2x2 matrix into the {I, Q, V, V*} basis."""
    (a, b), (c, d) = m
    a, b, c, d = (to_exact(x) for x in (a, b, c, d))
    out = {}
    for idx, w in ((I_, a), (Q_, d - a), (V_, b), (W_, c)):
        if w != 0:
            out[idx] = w
    return out


def _canon_letter(tok: str) -> str:
    tok = _ALIASES.get(tok, tok)
    if tok not in LETTERS:
        raise ValueError(f"unknown site letter {tok!r}")
    return tok


_TOKEN = re.compile(r"V\*|Vstar|V\^\*|Vs|[IPQVRT]")


def parse_letters(text: str) -> tuple[str, ...]:
    """Split ``"VPV*Q"`` / ``"V,P,V*,Q"`` / ``"V⊗P"`` into letters."""
    cleaned = re.sub(r"[\s,⊗x]+", "", text)
    if not cleaned or cleaned in ("1", "()"):
        return ()
    out, pos = [], 0
    while pos < len(cleaned):
        m = _TOKEN.match(cleaned, pos)
        if m is None:
            raise ValueError(f"cannot parse tensor word {text!r} at {cleaned[pos:]!r}")
        out.append(_canon_letter(m.group(0)))
        pos = m.end()
    return tuple(out)


@dataclass(frozen=True)
class TensorWord:
    """A product of site letters; site 1 is the leftmost letter."""

    letters: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(_canon_letter(t) for t in self.letters))

    @classmethod
    def parse(cls, text: str) -> "TensorWord":
        return cls(parse_letters(text))

    def __len__(self):
        return len(self.letters)

    def op(self) -> "OperatorSum":
        return word_op(self.letters)

    def __str__(self):
        return "⊗".join(self.letters) if self.letters else "1"


def word_trace(w: TensorWord | Sequence[str] | str) -> Fraction:
    """Normalised trace of a letter word: product of tr(M_i)/2."""
    letters = TensorWord.parse(w).letters if isinstance(w, str) else TensorWord(tuple(getattr(w, "letters", w))).letters
    out = Fraction(1)
    for t in letters:
        (a, _), (_, d) = LETTERS[t]
        out *= Fraction(a + d, 2)
    return out


def _strip(key: tuple[int, ...]) -> tuple[int, ...]:
    n = len(key)
    while n and key[n - 1] == I_:
        n -= 1
    return key[:n]


class OperatorSum:
    """Finite exact linear combination of basis tensor words (immutable)."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, ...], Exact] | None = None):
        clean: dict[tuple[int, ...], Exact] = {}
        if terms:
            for k, w in terms.items():
                k = _strip(tuple(k))
                w = clean.get(k, 0) + w
                if w != 0:
                    clean[k] = w
                else:
                    clean.pop(k, None)
        self._terms = clean
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls) -> "OperatorSum":
        return cls()

    @classmethod
    def identity(cls, weight=1) -> "OperatorSum":
        return cls({(): to_exact(weight)})

    @classmethod
    def _raw(cls, terms: dict) -> "OperatorSum":
        # terms already canonical: stripped keys, nonzero weights
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Exact]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def max_site(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def weight(self, key: Iterable[int]) -> Exact:
        return self._terms.get(_strip(tuple(key)), Fraction(0))

    def coefficient_of(self, word: "OperatorSum") -> Exact:
        """Weight of a single-term operator ``word`` inside this sum."""
        if len(word) != 1:
            raise ValueError("coefficient_of expects a single basis word")
        (k, w), = word.items()
        return self.weight(k) / w

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for k, w in other._terms.items():
            v = out.get(k, 0) + w
            if v != 0:
                out[k] = v
            else:
                out.pop(k, None)
        return OperatorSum._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return OperatorSum._raw({k: -w for k, w in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, s) -> "OperatorSum":
        s = to_exact(s)
        if s == 0:
            return OperatorSum()
        return OperatorSum._raw({k: w * s for k, w in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, OperatorSum):
            return opsum_mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __matmul__(self, other):
        return opsum_mul(self, other)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = OperatorSum.identity()
        base = self
        while n:
            if n & 1:
                out = opsum_mul(out, base)
            n >>= 1
            if n:
                base = opsum_mul(base, base)
        return out

    def adjoint(self) -> "OperatorSum":
        return opsum_adjoint(self)

    @property
    def H(self) -> "OperatorSum":
        return opsum_adjoint(self)

    def trace(self) -> Exact:
        return opsum_trace(self)

    def tensor(self, other: "OperatorSum", shift: int) -> "OperatorSum":
        """``self ⊗ other`` with ``other`` placed from site ``shift + 1`` on."""
        out: dict = {}
        for k1, w1 in self._terms.items():
            if len(k1) > shift:
                raise ValueError("left factor overlaps the shifted right factor")
            pad = k1 + (I_,) * (shift - len(k1))
            for k2, w2 in other._terms.items():
                k = _strip(pad + k2)
                v = out.get(k, 0) + w1 * w2
                if v != 0:
                    out[k] = v
                else:
                    out.pop(k, None)
        return OperatorSum._raw(out)

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"OperatorSum({self.pretty()})"

    def pretty(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for k in sorted(self._terms):
            w = self._terms[k]
            word = "⊗".join(_BASIS_NAMES[b] for b in k) if k else "1"
            parts.append(f"({format_exact(w)})·{word}")
        return " + ".join(parts)


def _coerce(x) -> OperatorSum | None:
    if isinstance(x, OperatorSum):
        return x
    try:
        return OperatorSum.identity(to_exact(x)) if to_exact(x) != 0 else OperatorSum()
    except TypeError:
        return None


# constructors ---------------------------------------------------------------

def site_op(matrix_or_letter, site: int, weight=1) -> OperatorSum:
    """``weight * I^{⊗(site-1)} ⊗ M``."""
    if site < 1:
        raise ValueError("sites are numbered from 1")
    m = LETTERS[_canon_letter(matrix_or_letter)] if isinstance(matrix_or_letter, str) else matrix_or_letter
    w = to_exact(weight)
    pad = (I_,) * (site - 1)
    return OperatorSum({pad + (b,): c * w for b, c in matrix_to_basis(m).items()})


def word_op(letters: Sequence | str, weight=1) -> OperatorSum:
    """Operator of a letter word (or sequence of exact 2x2 matrices)."""
    if isinstance(letters, str):
        letters = parse_letters(letters)
    elif isinstance(letters, TensorWord):
        letters = letters.letters
    partial: dict[tuple[int, ...], Exact] = {(): to_exact(weight)}
    for t in letters:
        m = LETTERS[_canon_letter(t)] if isinstance(t, str) else t
        dec = matrix_to_basis(m)
        nxt: dict = {}
        for k, w in partial.items():
            for b, c in dec.items():
                nxt[k + (b,)] = w * c
        partial = nxt
    return OperatorSum(partial)


# core operations ------------------------------------------------------------

def _mul_keys(k1: tuple[int, ...], k2: tuple[int, ...]):
    n = max(len(k1), len(k2))
    acc = [((), 1)]
    for i in range(n):
        a = k1[i] if i < len(k1) else I_
        b = k2[i] if i < len(k2) else I_
        prods = _MUL[(a, b)]
        if not prods:
            return []
        if len(prods) == 1:
            (bb, cc), = prods
            acc = [(k + (bb,), c * cc) for k, c in acc]
        else:
            acc = [(k + (bb,), c * cc) for k, c in acc for bb, cc in prods]
    return acc


def opsum_mul(x: OperatorSum, y: OperatorSum) -> OperatorSum:
    """Exact product, distributing over terms and multiplying sitewise."""
    out: dict = {}
    for k1, w1 in x.items():
        for k2, w2 in y.items():
            w = w1 * w2
            for k, c in _mul_keys(k1, k2):
                k = _strip(k)
                v = out.get(k, 0) + (w if c == 1 else w * c)
                if v != 0:
                    out[k] = v
                else:
                    out.pop(k, None)
    return OperatorSum._raw(out)


def opsum_adjoint(x: OperatorSum) -> OperatorSum:
    return OperatorSum._raw({tuple(_ADJ[b] for b in k): conj(w) for k, w in x.items()})


def opsum_trace(x: OperatorSum) -> Exact:
    """Normalised trace, exact."""
    total: Exact = Fraction(0)
    for k, w in x.items():
        t = Fraction(1)
        for b in k:
            t *= _TRACE[b]
            if not t:
                break
        if t:
            total = total + w * t
    return total


def commutator(x: OperatorSum, y: OperatorSum) -> OperatorSum:
    return opsum_mul(x, y) - opsum_mul(y, x)


def norm2_squared(x: OperatorSum) -> Exact:
    """tau(x* x), the squared 2-norm."""
    return opsum_trace(opsum_mul(opsum_adjoint(x), x))


# dense oracle ---------------------------------------------------------------

# nonzero (row, col) entries of each basis matrix
_ENTRIES = {I_: ((0, 0), (1, 1)), Q_: ((1, 1),), V_: ((0, 1),), W_: ((1, 0),)}


def _check_level(N: int, cap: int | None):
    cap = caps().oracle_n if cap is None else cap
    if N > cap:
        raise CapError(f"level N={N} exceeds the oracle cap {cap} "
                       f"({2 ** N}x{2 ** N} matrix); raise QUASINIL_ORACLE_N to allow it")


def _term_pattern(key: tuple[int, ...], N: int) -> tuple[np.ndarray, np.ndarray]:
    rows = np.zeros(1, dtype=np.int64)
    cols = np.zeros(1, dtype=np.int64)
    for i in range(N):
        b = key[i] if i < len(key) else I_
        ents = _ENTRIES[b]
        rows = np.concatenate([rows * 2 + r for r, _ in ents])
        cols = np.concatenate([cols * 2 + c for _, c in ents])
    return rows, cols


def dense(x: OperatorSum, N: int, exact: bool = False, cap: int | None = None) -> np.ndarray:
    """The literal 2^N x 2^N matrix; object dtype with exact entries if ``exact``."""
    if x.max_site() > N:
        raise ValueError(f"operator acts on site {x.max_site()} > N={N}")
    _check_level(N, cap)
    d = 2 ** N
    if exact:
        out = np.empty((d, d), dtype=object)
        out.fill(Fraction(0))
    else:
        out = np.zeros((d, d), dtype=complex)
    for k, w in x.items():
        rows, cols = _term_pattern(k, N)
        if exact:
            for r, c in zip(rows.tolist(), cols.tolist()):
                out[r, c] = out[r, c] + w
        else:
            out[rows, cols] += to_complex(w)
    return out


def exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of object arrays, skipping zero entries of ``a``."""
    n, m = a.shape
    m2, p = b.shape
    if m != m2:
        raise ValueError("shape mismatch")
    out = np.empty((n, p), dtype=object)
    out.fill(Fraction(0))
    for i in range(n):
        row = [(j, a[i, j]) for j in range(m) if a[i, j] != 0]
        if not row:
            continue
        acc = [Fraction(0)] * p
        for j, aij in row:
            bj = b[j]
            for t in range(p):
                v = bj[t]
                if v != 0:
                    acc[t] = acc[t] + aij * v
        out[i, :] = acc
    return out


def exact_trace(m: np.ndarray) -> Exact:
    total: Exact = Fraction(0)
    for i in range(m.shape[0]):
        total = total + m[i, i]
    return total


def exact_adjoint(m: np.ndarray) -> np.ndarray:
    out = np.empty((m.shape[1], m.shape[0]), dtype=object)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            out[j, i] = conj(m[i, j])
    return out


def exact_rank(m: np.ndarray) -> int:
    """Rank over the (complex) rationals by Gaussian elimination."""
    rows = [[to_exact(v) if not isinstance(v, Fraction) else v for v in r] for r in np.asarray(m, dtype=object).tolist()]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        inv = 1 / pr[col]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col]
            if f != 0:
                f = f * inv
                rr = rows[r]
                for c in range(col, ncols):
                    if pr[c] != 0:
                        rr[c] = rr[c] - f * pr[c]
        rank += 1
        if rank == len(rows):
            break
    return rank


# matrix-free application ----------------------------------------------------

@dataclass(frozen=True)
class StateVector:
    """Amplitudes indexed by site bitstrings (site 1 = most significant bit)."""

    level: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape[0] != 2 ** self.level:
            raise ValueError(f"expected {2 ** self.level} amplitudes, got {a.shape[0]}")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, level: int, bits: str | int) -> "StateVector":
        idx = int(bits, 2) if isinstance(bits, str) else bits
        a = np.zeros(2 ** level, dtype=complex)
        a[idx] = 1.0
        return cls(level, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _apply_key(key: tuple[int, ...], v: np.ndarray, N: int) -> np.ndarray | None:
    tail = v.shape[1]
    y = v
    for i, b in enumerate(key):
        if b == I_:
            continue
        shaped = y.reshape(2 ** i, 2, (2 ** (N - i - 1)) * tail)
        out = np.zeros_like(shaped)
        if b == Q_:
            out[:, 1] = shaped[:, 1]
        elif b == V_:
            out[:, 0] = shaped[:, 1]
        else:  # V*
            out[:, 1] = shaped[:, 0]
        y = out.reshape(v.shape)
    return y


def apply(x: OperatorSum, v, N: int | None = None):
    """Apply ``x`` to a state without forming its matrix.

    ``v`` may be a :class:`StateVector` or an array whose leading axis has
    length 2^N (extra axes are treated as a batch of columns).
    """
    if isinstance(v, StateVector):
        return StateVector(v.level, apply(x, v.amplitudes, v.level))
    arr = np.asarray(v, dtype=complex)
    if N is None:
        N = int(round(math.log2(arr.shape[0])))
    if arr.shape[0] != 2 ** N:
        raise ValueError("state length does not match the level")
    if x.max_site() > N:
        raise ValueError(f"operator acts on site {x.max_site()} > N={N}")
    flat = arr.reshape(arr.shape[0], -1)
    acc = np.zeros_like(flat)
    for k, w in x.items():
        y = _apply_key(k, flat, N)
        acc += to_complex(w) * y
    return acc.reshape(arr.shape)


@dataclass(frozen=True)
class NormResult:
    value: float
    iterations: int
    converged: bool


def op_norm(
    x: OperatorSum,
    N: int,
    tol: float = 1e-12,
    max_iter: int = 5000,
    seed: int = 0,
    power: int = 1,
) -> NormResult:
    """Largest singular value of x**power by power iteration on (x^p)* x^p (matrix-free).

    The power is applied factor by factor, which is much cheaper than
    expanding x**power into words.  Starts from the all-ones vector plus a
    small fixed-seed perturbation so that estimates are reproducible.
    Convergence: successive estimates differ by less than ``tol`` relative
    to the current estimate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if power < 0:
        raise ValueError("power must be >= 0")
    _check_level(N, None)
    if power == 0:
        return NormResult(1.0, 0, True)
    if x.is_zero():
        return NormResult(0.0, 0, True)
    xh = opsum_adjoint(x)

    def fwd(v):
        for _ in range(power):
            v = apply(x, v, N)
        return v

    def back(v):
        for _ in range(power):
            v = apply(xh, v, N)
        return v

    rng = np.random.default_rng(seed)
    v = np.ones(2 ** N, dtype=complex) + 1e-3 * rng.standard_normal(2 ** N)
    v /= np.linalg.norm(v)
    prev = None
    for it in range(1, max_iter + 1):
        xv = fwd(v)
        est = float(np.linalg.norm(xv))
        if est == 0.0:
            return NormResult(0.0, it, True)
        w = back(xv)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return NormResult(est, it, True)
        v = w / nw
        if prev is not None and abs(est - prev) < tol * est:
            return NormResult(est, it, True)
        prev = est
    return NormResult(prev if prev is not None else 0.0, max_iter, False)
