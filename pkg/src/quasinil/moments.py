"""Moments of X = A + A*, Y = A - A*, Re A, Im A and A*A by several routes.

Routes
------
combinatorial
    Sum over partition shapes of a partition count times an augmented
    monomial sum of x_n = |c_n|^2.  Exact.
dense
    Normalized trace of the literal 2^N x 2^N matrix power.  Exact rational
    or double precision.
charfn
    Coefficients of the product of truncated cosine series.  Exact rational
    value of the truncated product plus a certified bound on the dropped
    factors.
rademacher
    (1/2) * integral over [-1, 1] of f^n, summed exactly over dyadic cells.

Each report carries ``tail_bound``: a certified bound on the gap between the
truncated model at level N and the infinite sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

from . import combinatorics as comb
from .coeffs import CoefficientSpec, coeffs, power_sum, power_sum_tail, tail_l1
from .config import caps
from .exact import Exact, format_exact, is_real, modulus, to_complex
from .operators import a_trunc
from .sampler import cell_values
from .tensor import OperatorSum, dense, exact_matmul, exact_trace, opsum_adjoint

TARGETS = ("X", "Y", "re", "im", "AstarA", "mixed")
ROUTES = ("combinatorial", "dense", "charfn", "rademacher")


@dataclass(frozen=True)
class MomentReport:
    target: str
    order: int
    route: str
    value: Exact | float
    error_bound: float = 0.0        # numerical error of the route itself
    tail_bound: float = 0.0         # truncated model vs infinite sequence
    N: int | None = None            # None: the whole sequence, in closed form
    order2: int | None = None       # second exponent for mixed moments

    @property
    def exact(self) -> bool:
        return not isinstance(self.value, float)

    def value_text(self) -> str:
        if self.exact:
            return format_exact(self.value)
        return repr(self.value)

    def as_float(self) -> float:
        v = to_complex(self.value) if self.exact else complex(self.value)
        return v.real if v.imag == 0 else v  # type: ignore[return-value]


# augmented monomial sums -----------------------------------------------------

def _ps_table(spec: CoefficientSpec, N: int | None, mmax: int) -> list[Fraction]:
    return [Fraction(0)] + [power_sum(spec, m, N) for m in range(1, mmax + 1)]


def _monomial(exps: tuple[int, ...], ps: Sequence[Fraction]) -> Fraction:
    @lru_cache(maxsize=None)
    def rec(e: tuple[int, ...]) -> Fraction:
        if not e:
            return Fraction(1)
        first, rest = e[0], e[1:]
        out = ps[first] * rec(rest)
        for j in range(len(rest)):
            merged = list(rest)
            merged[j] += first
            out -= rec(tuple(sorted(merged, reverse=True)))
        return out

    return rec(tuple(sorted(exps, reverse=True)))


@dataclass(frozen=True)
class MonomialSum:
    value: Fraction
    tail_bound: Fraction
    N: int | None


def _resolve_level(spec: CoefficientSpec, N: int | None) -> int | None:
    if N is None and not spec.is_geometric:
        return len(spec.values)
    return N


def distinct_monomial_sum(shape: Sequence[int], spec: CoefficientSpec, N: int | None = None) -> MonomialSum:
    """sum over distinct index tuples (i_1..i_k) <= N of prod x_{i_j}^{n_j}, x = |c|^2.

    Computed from power sums P_m by the merge recursion
    m(l_1, rest) = P_{l_1} m(rest) - sum_j m(rest with l_1 added to its j-th entry).
    ``N=None`` evaluates a geometric spec in closed form.
    """
    shape = tuple(int(n) for n in shape)
    N = _resolve_level(spec, N)
    ps = _ps_table(spec, N, sum(shape))
    value = _monomial(shape, ps)
    if N is None:
        return MonomialSum(value, Fraction(0), None)
    # every tuple missing from the truncation has some entry beyond N
    bound = Fraction(0)
    for i, n in enumerate(shape):
        term = power_sum_tail(spec, n, N)
        for j, m in enumerate(shape):
            if j != i:
                term *= ps[m] + power_sum_tail(spec, m, N)
        bound += term
    return MonomialSum(value, bound, N)


def distinct_monomial_enum(shape: Sequence[int], xs: Sequence[Fraction]) -> Fraction:
    """Direct enumeration over ordered tuples of distinct indices."""
    total = Fraction(0)
    for idx in permutations(range(len(xs)), len(shape)):
        term = Fraction(1)
        for i, n in zip(idx, shape):
            term *= xs[i] ** n
        total += term
    return total


# combinatorial route -----------------------------------------------------------

def _weighted_shape_sum(spec, p, N, weight) -> tuple[Fraction, Fraction]:
    val, bound = Fraction(0), Fraction(0)
    for sh in comb.shapes(p):
        w = weight(p, sh)
        if w == 0:
            continue
        ms = distinct_monomial_sum(sh, spec, N)
        val += w * ms.value
        bound += w * ms.tail_bound
    return val, bound


def _x_even(spec: CoefficientSpec, p: int, N: int | None) -> tuple[Fraction, Fraction]:
    return _weighted_shape_sum(spec, p, N, lambda p, sh: comb.gamma(p, sh))


def moment_X(spec: CoefficientSpec, n: int, N: int | None = None) -> MomentReport:
    """tau(X^n) = sum_shapes gamma(p; shape) * m_shape(|c|^2) for n = 2p; 0 for odd n."""
    if n < 0:
        raise ValueError("order must be >= 0")
    N = _resolve_level(spec, N)
    if n % 2:
        return MomentReport("X", n, "combinatorial", Fraction(0), N=N)
    if n == 0:
        return MomentReport("X", 0, "combinatorial", Fraction(1), N=N)
    val, bound = _x_even(spec, n // 2, N)
    return MomentReport("X", n, "combinatorial", val, tail_bound=float(bound), N=N)


def moment_Y(spec: CoefficientSpec, n: int, N: int | None = None) -> MomentReport:
    """tau(Y^n) = (-1)^(n/2) tau(X^n)."""
    r = moment_X(spec, n, N)
    sign = -1 if n % 4 == 2 else 1
    return MomentReport("Y", n, "combinatorial", sign * r.value, tail_bound=r.tail_bound, N=r.N)


def moment_reim(spec: CoefficientSpec, n: int, N: int | None = None, part: str = "re") -> MomentReport:
    """tau(a^n) = tau(b^n) = 4^(-n/2) tau(X^n) with a = Re A, b = Im A."""
    if part not in ("re", "im"):
        raise ValueError("part must be 're' or 'im'")
    r = moment_X(spec, n, N)
    scale = Fraction(1, 2 ** n)
    return MomentReport(part, n, "combinatorial", r.value * scale, tail_bound=r.tail_bound * float(scale), N=r.N)


def moment_AstarA(spec: CoefficientSpec, p: int, N: int | None = None, cap: int | None = None) -> MomentReport:
    """tau((A*A)^p) = sum_k 2^-k sum_{shapes with k parts} alpha(p; shape) m_shape(|c|^2)."""
    if p < 0:
        raise ValueError("p must be >= 0")
    N = _resolve_level(spec, N)
    if p == 0:
        return MomentReport("AstarA", 0, "combinatorial", Fraction(1), N=N)
    val, bound = _weighted_shape_sum(
        spec, p, N, lambda p, sh: Fraction(comb.alpha(p, sh, cap), 2 ** len(sh))
    )
    return MomentReport("AstarA", p, "combinatorial", val, tail_bound=float(bound), N=N)


def x_tail_bound(spec: CoefficientSpec, n: int, N: int) -> Fraction:
    """Certified bound on tau(X^n) - tau(X_N^n) for the sum X = X_N + X_tail.

    Head and tail are independent and symmetric, |X_N| <= s, E X_tail^2 = T2 and
    |X_tail| <= t, so the gap is at most sum_{j>=1} C(n,2j) s^(n-2j) T2 t^(2j-2).
    """
    if n % 2 or n == 0:
        return Fraction(0)
    cs = coeffs(spec, N)
    s = sum((modulus(c)[0] for c in cs), Fraction(0))
    t = tail_l1(spec, N)
    t2 = power_sum_tail(spec, 1, N)
    out = Fraction(0)
    for j in range(1, n // 2 + 1):
        out += math.comb(n, 2 * j) * s ** (n - 2 * j) * t2 * t ** (2 * j - 2)
    return out


# dense oracle ------------------------------------------------------------------

def _target_op(target: str, spec: CoefficientSpec, N: int) -> OperatorSum:
    a = a_trunc(spec, N)
    ah = opsum_adjoint(a)
    if target == "X":
        return a + ah
    if target == "Y":
        return a - ah
    if target == "re":
        return (a + ah).scale(Fraction(1, 2))
    if target == "im":
        from .exact import make
        return (a - ah).scale(make(0, Fraction(-1, 2)))   # (A - A*) / (2i)
    if target == "AstarA":
        return ah * a
    raise ValueError(f"unknown target {target!r}")


def _dense_power_trace(m, k: int, exact: bool):
    d = m.shape[0]
    if k == 0:
        return Fraction(1) if exact else 1.0
    if exact:
        acc = m
        for _ in range(k - 1):
            acc = exact_matmul(acc, m)
        return exact_trace(acc) / d
    return complex(np.trace(np.linalg.matrix_power(m, k))) / d


def _clean(v, exact: bool):
    if exact:
        return v
    v = complex(v)
    return float(v.real) if abs(v.imag) <= 1e-14 * max(1.0, abs(v.real)) else v


def moment_dense_oracle(
    target: str,
    spec: CoefficientSpec,
    order: int,
    N: int,
    exact: bool = False,
    order2: int | None = None,
    cap: int | None = None,
) -> MomentReport:
    """2^-N trace of the target's matrix power at level N.

    For ``target='AstarA'`` the power is (A*A)^order; for ``'mixed'`` the
    value is tau(a^order b^order2) with a = Re A, b = Im A.
    """
    if target == "mixed":
        if order2 is None:
            raise ValueError("mixed moments need order2")
        ma = dense(_target_op("re", spec, N), N, exact=exact, cap=cap)
        mb = dense(_target_op("im", spec, N), N, exact=exact, cap=cap)
        val = _mixed_trace(ma, mb, order, order2, exact)
        return MomentReport("mixed", order, "dense", _clean(val, exact), N=N, order2=order2)
    m = dense(_target_op(target, spec, N), N, exact=exact, cap=cap)
    val = _dense_power_trace(m, order, exact)
    bound = 0.0
    if target in ("X", "Y", "re", "im"):
        bound = float(x_tail_bound(spec, order, N)) / (2 ** order if target in ("re", "im") else 1)
    elif target == "AstarA":
        bound = float(_astara_tail_bound(spec, order, N))
    return MomentReport(target, order, "dense", _clean(val, exact), error_bound=0.0 if exact else 1e-12,
                        tail_bound=bound, N=N)


def _astara_tail_bound(spec: CoefficientSpec, p: int, N: int) -> Fraction:
    if p == 0:
        return Fraction(0)
    _, bound = _weighted_shape_sum(spec, p, N, lambda p, sh: Fraction(comb.alpha(p, sh), 2 ** len(sh)))
    return bound


def _mixed_trace(ma, mb, n: int, m: int, exact: bool):
    d = ma.shape[0]
    if exact:
        eye = np.empty((d, d), dtype=object)
        eye.fill(Fraction(0))
        for i in range(d):
            eye[i, i] = Fraction(1)
        acc = eye
        for _ in range(n):
            acc = exact_matmul(acc, ma)
        for _ in range(m):
            acc = exact_matmul(acc, mb)
        return exact_trace(acc) / d
    prod = np.linalg.matrix_power(ma, n) @ np.linalg.matrix_power(mb, m)
    return complex(np.trace(prod)) / d


@dataclass(frozen=True)
class MixedCheck:
    n: int
    m: int
    N: int
    joint: Exact
    product: Exact

    @property
    def residual(self) -> Exact:
        return self.joint - self.product

    @property
    def passed(self) -> bool:
        return self.residual == 0


def mixed_moment_check(spec: CoefficientSpec, n: int, m: int, N: int, cap: int | None = None) -> MixedCheck:
    """Compare tau(a^n b^m) with tau(a^n) tau(b^m), all exact in the dense oracle."""
    ma = dense(_target_op("re", spec, N), N, exact=True, cap=cap)
    mb = dense(_target_op("im", spec, N), N, exact=True, cap=cap)
    joint = _mixed_trace(ma, mb, n, m, True)
    prod = _dense_power_trace(ma, n, True) * _dense_power_trace(mb, m, True)
    return MixedCheck(n, m, N, joint, prod)


# characteristic function route ------------------------------------------------

@dataclass(frozen=True)
class CharfnResult:
    moments: tuple[Fraction, ...]     # index k: k-th moment of the truncated product
    bounds: tuple[Fraction, ...]      # certified |truncated - infinite| per order
    n_series: int

    def report(self, k: int) -> MomentReport:
        return MomentReport("X", k, "charfn", self.moments[k], error_bound=float(self.bounds[k]),
                            tail_bound=float(self.bounds[k]), N=self.n_series)


def _cos_series(c: Fraction, deg: int) -> list[Fraction]:
    out = [Fraction(0)] * (deg + 1)
    for j in range(0, deg // 2 + 1):
        out[2 * j] = Fraction((-1) ** j) * c ** (2 * j) / math.factorial(2 * j)
    return out


def _series_mul(a: list[Fraction], b: list[Fraction], deg: int) -> list[Fraction]:
    out = [Fraction(0)] * (deg + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(0, deg + 1 - i):
            if b[j] != 0:
                out[i + j] += ai * b[j]
    return out


def charfn_moments(spec, max_order: int, tol: float = 1e-12, n_series: int | None = None) -> CharfnResult:
    """Moments of X from the product of cos(c_n t) expanded to degree ``max_order``.

    ``spec`` is a real CoefficientSpec or a rational ratio (geometric).  The
    number of factors is the smallest meeting ``tol`` for every order, capped
    by the series-length cap, unless ``n_series`` is given.
    """
    if not isinstance(spec, CoefficientSpec):
        spec = CoefficientSpec.geometric(Fraction(spec))
    if any(not is_real(c) for c in coeffs(spec, min(spec.level(None), 8))):
        raise ValueError("the cosine-product route needs a real coefficient sequence")
    if n_series is None:
        limit = spec.level(None) if not spec.is_geometric else caps().series_len
        n_series = 1
        while n_series < limit and any(
            x_tail_bound(spec, k, n_series) > Fraction(tol) for k in range(2, max_order + 1, 2)
        ):
            n_series += 1
    poly = [Fraction(1)] + [Fraction(0)] * max_order
    for c in coeffs(spec, n_series):
        poly = _series_mul(poly, _cos_series(c, max_order), max_order)
    moments, bounds = [], []
    for k in range(max_order + 1):
        # phi(t) = sum i^k E[X^k] t^k / k!
        mom = poly[k] * math.factorial(k)
        if k % 4 == 2:
            mom = -mom
        elif k % 2 == 1:
            mom = Fraction(0)
        moments.append(mom)
        bounds.append(x_tail_bound(spec, k, n_series))
    return CharfnResult(tuple(moments), tuple(bounds), n_series)


# step-function integral route ----------------------------------------------------

def rademacher_moment(spec: CoefficientSpec, n: int, N: int | None = None, cap: int | None = None) -> MomentReport:
    """(1/2) * integral_{-1}^{1} f(x)^n dx with f = sum_{k<=N} c_k f_k.

    f is constant on each of the 2^N dyadic cells of width 2^(1-N), so the
    integral is an exact average over the cells.
    """
    cap = caps().oracle_n if cap is None else cap
    if N is None:
        N = min(spec.level(None), cap)
    if N > cap:
        from .config import CapError
        raise CapError(f"dyadic depth N={N} exceeds the cap {cap}; raise QUASINIL_ORACLE_N")
    vals = cell_values(spec, N)
    total = sum((v ** n for v in vals), Fraction(0))
    val = total / len(vals)
    return MomentReport("X", n, "rademacher", val, tail_bound=float(x_tail_bound(spec, n, N)), N=N)


# route comparison -------------------------------------------------------------------

@dataclass(frozen=True)
class RouteComparison:
    reports: tuple[MomentReport, ...]
    max_discrepancy: float
    allowed: float

    @property
    def consistent(self) -> bool:
        return self.max_discrepancy <= self.allowed


def compare_routes(target: str, spec: CoefficientSpec, order: int, N: int, order2: int | None = None) -> RouteComparison:
    """Evaluate every applicable route and measure their spread against the declared bounds."""
    reports: list[MomentReport] = []
    if target == "mixed":
        reports.append(moment_dense_oracle("mixed", spec, order, N, exact=N <= 6, order2=order2))
        prod = (moment_reim(spec, order, None, "re").value * moment_reim(spec, order2, None, "im").value)
        reports.append(MomentReport("mixed", order, "combinatorial", prod, order2=order2))
    else:
        if target == "AstarA":
            reports.append(moment_AstarA(spec, order))
        elif target == "X":
            reports.append(moment_X(spec, order))
        elif target == "Y":
            reports.append(moment_Y(spec, order))
        else:
            reports.append(moment_reim(spec, order, None, target))
        reports.append(moment_dense_oracle(target, spec, order, N, exact=N <= 6))
        real = all(is_real(c) for c in coeffs(spec, min(spec.level(None), N)))
        if target in ("X", "Y", "re", "im") and real:
            cf = charfn_moments(spec, max(order, 2)).report(order)
            rd = rademacher_moment(spec, order, min(N, caps().oracle_n))
            scale = {"X": 1, "Y": (-1) ** (order // 2) if order % 2 == 0 else 0, "re": Fraction(1, 2 ** order),
                     "im": Fraction(1, 2 ** order)}[target]
            for r in (cf, rd):
                reports.append(MomentReport(target, order, r.route, r.value * scale,
                                            error_bound=r.error_bound * abs(float(scale)),
                                            tail_bound=r.tail_bound * abs(float(scale)), N=r.N))
    vals = [complex(to_complex(r.value)) if r.exact else complex(r.value) for r in reports]
    disc = max((abs(a - b) for a in vals for b in vals), default=0.0)
    allowed = sum(r.tail_bound + r.error_bound for r in reports) + 1e-12
    return RouteComparison(tuple(reports), disc, allowed)
