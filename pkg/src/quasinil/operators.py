"""Named operators built from a coefficient sequence, and exact identity checks.

All checks are symbolic: an identity holds iff its residual is the empty
:class:`~quasinil.tensor.OperatorSum`.  Identities that hold for all indices
of the infinite operator are verified for every index up to the truncation
level ``N``, which each report names.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .coeffs import CoefficientSpec, coeff
from .exact import Exact, abs2, conj, to_exact
from .tensor import OperatorSum, commutator, norm2_squared, opsum_adjoint, site_op, word_op


@dataclass(frozen=True)
class NamedOperator:
    kind: str
    params: dict
    spec: CoefficientSpec | None
    realization: OperatorSum

    @property
    def op(self) -> OperatorSum:
        return self.realization


@dataclass(frozen=True)
class IdentityCheck:
    """Outcome of an exact operator identity ``lhs == rhs``."""

    name: str
    residual: OperatorSum
    N: int | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.residual.is_zero()

    def residual_text(self) -> str:
        return "0" if self.passed else self.residual.pretty()


_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


def sub(n: int) -> str:
    """Integer as subscript digits, for check names such as A₄."""
    return str(n).translate(_SUBSCRIPTS)


def identity_check(name: str, lhs: OperatorSum, rhs: OperatorSum, N: int | None = None, detail: str = "") -> IdentityCheck:
    return IdentityCheck(name, lhs - rhs, N, detail)


# builders ------------------------------------------------------------------

def _letter_word(site_letters: dict[int, str]) -> OperatorSum:
    n = max(site_letters)
    return word_op([site_letters.get(i, "I") for i in range(1, n + 1)])


def a_trunc(spec: CoefficientSpec, N: int) -> OperatorSum:
    """A_N = sum_{n<=N} c_n V_n."""
    out = OperatorSum()
    for n in range(1, N + 1):
        out = out + site_op("V", n, coeff(spec, n))
    return out


def x_trunc(spec: CoefficientSpec, N: int) -> OperatorSum:
    """X_N = sum_{n<=N} c_n R_n  (equals A_N + A_N* for real coefficients)."""
    out = OperatorSum()
    for n in range(1, N + 1):
        out = out + site_op("R", n, coeff(spec, n))
    return out


def y_trunc(spec: CoefficientSpec, N: int) -> OperatorSum:
    """Y_N = sum_{n<=N} c_n T_n  (equals A_N - A_N* for real coefficients)."""
    out = OperatorSum()
    for n in range(1, N + 1):
        out = out + site_op("T", n, coeff(spec, n))
    return out


def _nonzero(c: Exact, what: str):
    if c == 0:
        raise ValueError(f"{what} is zero; the quotient is undefined")


def s_op(spec: CoefficientSpec, n: int, m: int) -> OperatorSum:
    """S_{n,m} = P_n Q_m + Q_n P_m - (c_n/c_m) V_n V*_m - (c_m/c_n) V*_n V_m."""
    if not 1 <= n < m:
        raise ValueError("S_{n,m} needs 1 <= n < m")
    cn, cm = coeff(spec, n), coeff(spec, m)
    _nonzero(cn, f"c_{n}")
    _nonzero(cm, f"c_{m}")
    return (
        _letter_word({n: "P", m: "Q"})
        + _letter_word({n: "Q", m: "P"})
        - _letter_word({n: "V", m: "V*"}).scale(cn / cm)
        - _letter_word({n: "V*", m: "V"}).scale(cm / cn)
    )


def proj_word(word: str | Sequence[str]) -> OperatorSum:
    letters = tuple(word)
    if any(t not in ("P", "Q") for t in letters):
        raise ValueError("projection words use the letters P and Q only")
    return word_op(letters)


def d_lambda(lam) -> tuple:
    lam = to_exact(lam)
    return ((1, 0), (0, lam))


def w_similarity(a: CoefficientSpec, b: CoefficientSpec, n: int) -> tuple[OperatorSum, OperatorSum]:
    """W_n = D_{l_1} ⊗ ... ⊗ D_{l_n} with l_i = a_i / b_i, and its inverse."""
    fwd, inv = [], []
    for i in range(1, n + 1):
        ai, bi = coeff(a, i), coeff(b, i)
        _nonzero(ai, f"a_{i}")
        _nonzero(bi, f"b_{i}")
        lam = ai / bi
        fwd.append(d_lambda(lam))
        inv.append(d_lambda(1 / lam))
    return word_op(fwd), word_op(inv)


def w_commutator(a: CoefficientSpec, b: CoefficientSpec, N: int) -> OperatorSum:
    """W = sum_{n<=N} (a_n / b_n) P_n."""
    out = OperatorSum()
    for n in range(1, N + 1):
        bn = coeff(b, n)
        _nonzero(bn, f"b_{n}")
        out = out + site_op("P", n, coeff(a, n) / bn)
    return out


def q_power(spec: CoefficientSpec, k: int, N: int) -> OperatorSum:
    """q_k = sum_{n<=N} c_n^k Q_n."""
    return sum((site_op("Q", n, coeff(spec, n) ** k) for n in range(1, N + 1)), OperatorSum())


def p_power(spec: CoefficientSpec, k: int, N: int) -> OperatorSum:
    """p_k = sum_{n<=N} c_n^k P_n."""
    return sum((site_op("P", n, coeff(spec, n) ** k) for n in range(1, N + 1)), OperatorSum())


def v_cross(spec: CoefficientSpec, N: int) -> OperatorSum:
    """v = sum_{n<m<=N} (conj(c_n) c_m V*_n V_m + c_n conj(c_m) V_n V*_m).

    For real coefficients this is sum c_n c_m (V_n V*_m + V*_n V_m)."""
    out = OperatorSum()
    for n in range(1, N + 1):
        cn = coeff(spec, n)
        for m in range(n + 1, N + 1):
            cm = coeff(spec, m)
            out = out + _letter_word({n: "V*", m: "V"}).scale(conj(cn) * cm)
            out = out + _letter_word({n: "V", m: "V*"}).scale(cn * conj(cm))
    return out


_BUILDERS = {
    "A_trunc": lambda spec, N: a_trunc(spec, N),
    "X_trunc": lambda spec, N: x_trunc(spec, N),
    "Y_trunc": lambda spec, N: y_trunc(spec, N),
    "S": lambda spec, n, m: s_op(spec, n, m),
    "ProjWord": lambda spec, word: proj_word(word),
    "q_power": lambda spec, k, N: q_power(spec, k, N),
    "p_power": lambda spec, k, N: p_power(spec, k, N),
}


def build(kind: str, spec: CoefficientSpec | None = None, **params) -> NamedOperator:
    """Construct a named operator.

    ``W_similarity`` takes ``target`` (a second spec) and ``n``;
    ``W_commutator`` takes ``b`` and ``N``.
    """
    if kind == "W_similarity":
        w, _ = w_similarity(spec, params["target"], params["n"])
        return NamedOperator(kind, params, spec, w)
    if kind == "W_commutator":
        return NamedOperator(kind, params, spec, w_commutator(spec, params["b"], params["N"]))
    try:
        fn = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown operator kind {kind!r}") from None
    return NamedOperator(kind, params, spec, fn(spec, **params))


def _op(x) -> OperatorSum:
    return x.realization if isinstance(x, NamedOperator) else x


# checks --------------------------------------------------------------------

@dataclass(frozen=True)
class CommuteResult:
    residual: Exact            # tau(C* C) with C = xy - yx
    commutator: OperatorSum

    @property
    def commutes(self) -> bool:
        return self.residual == 0


def check_commutes(x, y) -> CommuteResult:
    c = commutator(_op(x), _op(y))
    return CommuteResult(norm2_squared(c), c)


def check_nilpotency(spec: CoefficientSpec, N: int) -> list[IdentityCheck]:
    """A_N^{N+1} = 0 and A_N^N = N! c_1...c_N V^{⊗N}."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = a_trunc(spec, N)
    aN = a ** N
    prod = Fraction(1)
    for n in range(1, N + 1):
        prod = prod * coeff(spec, n)
    top = word_op(["V"] * N, math.factorial(N) * prod)
    return [
        identity_check(f"A{sub(N)}^{N + 1} = 0", aN * a, OperatorSum(), N),
        identity_check(f"A{sub(N)}^{N} = {N}!·c₁⋯c{sub(N)}·V^⊗{N}", aN, top, N),
    ]


def check_generation_identities(spec: CoefficientSpec, N: int) -> list[IdentityCheck]:
    """A*A = q2 + v, AA* = p2 + v, p2 + q2 = (sum |c_n|^2) 1 and the
    commutator A q2 - q2 A = sum c_n |c_n|^2 V_n, at truncation N.

    q2 and p2 use |c_n|^2, which is c_n^2 for real sequences.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    a = a_trunc(spec, N)
    ah = opsum_adjoint(a)
    cs = [coeff(spec, n) for n in range(1, N + 1)]
    q2 = sum((site_op("Q", n, abs2(c)) for n, c in enumerate(cs, 1)), OperatorSum())
    p2 = sum((site_op("P", n, abs2(c)) for n, c in enumerate(cs, 1)), OperatorSum())
    v = v_cross(spec, N)
    s2 = sum((abs2(c) for c in cs), Fraction(0))
    cubes = sum((site_op("V", n, c * abs2(c)) for n, c in enumerate(cs, 1)), OperatorSum())
    return [
        identity_check("A*A = q₂ + v", ah * a, q2 + v, N),
        identity_check("AA* = p₂ + v", a * ah, p2 + v, N),
        identity_check("p₂ + q₂ = (Σ|cₙ|²)·1", p2 + q2, OperatorSum.identity(s2), N),
        identity_check("q₂A − Aq₂ = −Σ cₙ|cₙ|² Vₙ", q2 * a - a * q2, -cubes, N),
    ]


def check_similarity(a: CoefficientSpec, b: CoefficientSpec, n: int, N: int) -> IdentityCheck:
    """W_n A_N W_n^{-1} = B_n + A_N - A_n."""
    if N < n:
        raise ValueError("need N >= n")
    w, winv = w_similarity(a, b, n)
    lhs = w * a_trunc(a, N) * winv
    rhs = a_trunc(b, n) + a_trunc(a, N) - a_trunc(a, n)
    sanity = w * winv - OperatorSum.identity()
    if not sanity.is_zero():
        raise AssertionError("W_n and its inverse do not multiply to the identity")
    return identity_check(f"W{sub(n)}A{sub(N)}W{sub(n)}⁻¹ = B{sub(n)}+A{sub(N)}−A{sub(n)}", lhs, rhs, N)


def check_commutator_realization(a: CoefficientSpec, b: CoefficientSpec, N: int) -> IdentityCheck:
    """[W, B] = A_N with W = sum (a_n/b_n) P_n and B = sum b_n V_n."""
    w = w_commutator(a, b, N)
    bb = a_trunc(b, N)
    return identity_check(f"[W,B{sub(N)}] = A{sub(N)}", commutator(w, bb), a_trunc(a, N), N)


@dataclass(frozen=True)
class InvarianceVerdict:
    invariant: bool
    witness: OperatorSum     # t p - p t p; empty iff invariant

    @property
    def verdict(self) -> str:
        return "invariant" if self.invariant else "not-invariant"


def is_projection(p: OperatorSum) -> bool:
    return (p * p - p).is_zero() and (opsum_adjoint(p) - p).is_zero()


def check_invariance(p, t) -> InvarianceVerdict:
    """Is range(p) invariant under t, i.e. t p = p t p?"""
    p, t = _op(p), _op(t)
    if not is_projection(p):
        raise ValueError("p is not a projection (p² = p = p* fails)")
    tp = t * p
    res = tp - p * tp
    return InvarianceVerdict(res.is_zero(), res)


def p_tensor(n: int) -> OperatorSum:
    """P^{⊗n}."""
    return word_op(["P"] * n)
