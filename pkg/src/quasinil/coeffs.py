"""Coefficient sequences, their tails and elementary symmetric functions.

A :class:`CoefficientSpec` is either geometric (``c_n = r**n`` with a rational
``0 < r < 1``) or an explicit finite list padded with zeros.  Every truncated
quantity is returned together with a certified bound on what the truncation
dropped.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import caps
from .exact import (
    Exact,
    abs2,
    format_exact,
    is_real,
    modulus,
    parse_exact,
    to_complex,
    to_exact,
)


@dataclass(frozen=True)
class CoefficientSpec:
    kind: str
    ratio: Fraction | None = None
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "geometric":
            r = Fraction(self.ratio)
            if not 0 < r < 1:
                raise ValueError(f"geometric ratio must lie strictly in (0, 1), got {r}")
            object.__setattr__(self, "ratio", r)
        elif self.kind == "explicit":
            object.__setattr__(self, "values", tuple(to_exact(v) for v in self.values))
        else:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @classmethod
    def geometric(cls, ratio) -> "CoefficientSpec":
        return cls("geometric", ratio=Fraction(ratio))

    @classmethod
    def explicit(cls, values: Sequence) -> "CoefficientSpec":
        return cls("explicit", values=tuple(values))

    @property
    def is_geometric(self) -> bool:
        return self.kind == "geometric"

    @property
    def length(self) -> int | None:
        """Number of possibly nonzero coefficients (``None`` if infinite)."""
        return None if self.is_geometric else len(self.values)

    @property
    def is_real(self) -> bool:
        return self.is_geometric or all(is_real(v) for v in self.values)

    def level(self, N: int | None = None) -> int:
        """Resolve a truncation level: explicit lists default to their length,
        geometric specs to the configured series cap."""
        if N is not None:
            return N
        return caps().series_len if self.is_geometric else len(self.values)

    def to_text(self) -> str:
        if self.is_geometric:
            return f"geometric:{format_exact(self.ratio)}"
        return "list:" + ",".join(format_exact(v) for v in self.values)

    def to_json(self) -> dict:
        if self.is_geometric:
            return {"kind": "geometric", "ratio": format_exact(self.ratio)}
        return {"kind": "explicit", "values": [format_exact(v) for v in self.values]}

    def __str__(self):
        return self.to_text()


def parse_spec(text: str) -> CoefficientSpec:
    """Parse ``geometric:p/q``, ``list:c1,c2,...`` or a JSON document."""
    s = text.strip()
    if s.startswith("{"):
        doc = json.loads(s)
        kind = doc.get("kind")
        if kind == "geometric":
            return CoefficientSpec.geometric(parse_exact(str(doc["ratio"])))
        if kind in ("explicit", "list"):
            return CoefficientSpec.explicit([parse_exact(str(v)) for v in doc["values"]])
        raise ValueError(f"unknown coefficient kind {kind!r}")
    head, sep, body = s.partition(":")
    if not sep:
        raise ValueError(f"coefficient spec needs a 'geometric:' or 'list:' prefix: {text!r}")
    head = head.strip().lower()
    if head in ("geometric", "geo"):
        r = parse_exact(body)
        if not is_real(r):
            raise ValueError("geometric ratio must be real")
        return CoefficientSpec.geometric(r)
    if head in ("list", "explicit"):
        items = [b for b in body.split(",") if b.strip()]
        return CoefficientSpec.explicit([parse_exact(b) for b in items])
    raise ValueError(f"unknown coefficient kind {head!r}")


def coeff(spec: CoefficientSpec, n: int) -> Exact:
    """c_n (1-based)."""
    if n < 1:
        raise ValueError("coefficient index starts at 1")
    if spec.is_geometric:
        return spec.ratio ** n
    return spec.values[n - 1] if n <= len(spec.values) else Fraction(0)


def coeffs(spec: CoefficientSpec, N: int) -> list[Exact]:
    return [coeff(spec, n) for n in range(1, N + 1)]


def tail_l1(spec: CoefficientSpec, N: int) -> Fraction:
    """Upper bound on sum_{n>N} |c_n| (exact for geometric and real lists)."""
    if spec.is_geometric:
        r = spec.ratio
        return r ** (N + 1) / (1 - r)
    return sum((modulus(v)[0] for v in spec.values[N:]), Fraction(0))


def power_sum_tail(spec: CoefficientSpec, m: int, N: int) -> Fraction:
    """sum_{n>N} |c_n|^(2m), exact."""
    if spec.is_geometric:
        x = spec.ratio ** (2 * m)
        return x ** (N + 1) / (1 - x)
    return sum((abs2(v) ** m for v in spec.values[N:]), Fraction(0))


def power_sum(spec: CoefficientSpec, m: int, N: int | None) -> Fraction:
    """P_m = sum_{n<=N} |c_n|^(2m); ``N=None`` means the whole sequence."""
    if spec.is_geometric:
        x = spec.ratio ** (2 * m)
        if N is None:
            return x / (1 - x)
        return x * (1 - x ** N) / (1 - x)
    vals = spec.values if N is None else spec.values[:N]
    return sum((abs2(v) ** m for v in vals), Fraction(0))


# elementary symmetric functions ---------------------------------------------

def abs_values(spec: CoefficientSpec, N: int) -> tuple[list[Fraction], bool]:
    out, exact = [], True
    for c in coeffs(spec, N):
        a, ok = modulus(c)
        out.append(a)
        exact = exact and ok
    return out, exact


def elementary(xs: Sequence, kmax: int) -> list:
    """[e_0, ..., e_kmax] of ``xs`` by the prefix recursion."""
    e = [Fraction(1)] + [Fraction(0)] * kmax
    for x in xs:
        for k in range(kmax, 0, -1):
            e[k] = e[k] + x * e[k - 1]
    return e


def elementary_from_power_sums(ps: Sequence, kmax: int) -> list:
    """Newton's identities: k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i.

    ``ps[i]`` is the i-th power sum (``ps[0]`` is ignored)."""
    e = [Fraction(1)]
    for k in range(1, kmax + 1):
        acc = Fraction(0)
        for i in range(1, k + 1):
            term = e[k - i] * ps[i]
            acc = acc + term if i % 2 else acc - term
        e.append(acc / k)
    return e


def _geometric_sigma(r: Fraction, k: int) -> Fraction:
    # e_k(r, r^2, ...) = r^(k(k+1)/2) / prod_{i<=k} (1 - r^i)
    den = Fraction(1)
    for i in range(1, k + 1):
        den *= 1 - r ** i
    return r ** (k * (k + 1) // 2) / den


@dataclass(frozen=True)
class SigmaValue:
    k: int
    N: int | None
    value: Fraction
    error_bound: Fraction
    exact_moduli: bool = True

    def __float__(self):
        return float(self.value)


def sigma_tail_bound(lower: Sequence[Fraction], k: int, tail: Fraction) -> Fraction:
    """Bound on e_k(all) - e_k(first N) given e_j(first N) and the l1 tail t.

    e_k(all) = sum_j e_{k-j}(head) e_j(tail) and e_j(tail) <= t^j / j!."""
    bound = Fraction(0)
    for j in range(1, k + 1):
        bound += lower[k - j] * tail ** j / math.factorial(j)
    return bound


def sigma_profile(spec: CoefficientSpec, kmax: int, N: int | None = None) -> list[SigmaValue]:
    """sigma_1..sigma_kmax at truncation N, each with its tail bound.

    ``N=None`` on a geometric spec evaluates the infinite sums in closed form.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    if N is None and spec.is_geometric:
        return [SigmaValue(k, None, _geometric_sigma(spec.ratio, k), Fraction(0)) for k in range(1, kmax + 1)]
    N = spec.level(N)
    xs, exact = abs_values(spec, N)
    e = elementary(xs, kmax)
    t = tail_l1(spec, N)
    return [SigmaValue(k, N, e[k], sigma_tail_bound(e, k, t), exact) for k in range(1, kmax + 1)]


def sigma(spec: CoefficientSpec, k: int, N: int | None = None) -> SigmaValue:
    """sigma_k = e_k(|c_1|, ..., |c_N|) with a certified tail bound."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sigma_profile(spec, k, N)[-1]


@dataclass(frozen=True)
class DecayEntry:
    k: int
    sigma_k: Fraction
    root_value: float  # (k! sigma_k)^(1/k)


@dataclass(frozen=True)
class DecayProfile:
    entries: tuple[DecayEntry, ...]
    N: int | None

    def roots(self) -> list[float]:
        return [e.root_value for e in self.entries]


def _log_fraction(q: Fraction) -> float:
    # math.log accepts arbitrarily large ints; avoids float overflow/underflow
    return math.log(q.numerator) - math.log(q.denominator)


def decay_profile(spec: CoefficientSpec, kmax: int, N: int | None = None) -> DecayProfile:
    """(k! sigma_k)^(1/k) for k = 1..kmax; exact products, root via logs."""
    entries = []
    for sv in sigma_profile(spec, kmax, N):
        if sv.value == 0:
            root = 0.0
        else:
            prod = math.factorial(sv.k) * sv.value
            root = math.exp(_log_fraction(prod) / sv.k)
        entries.append(DecayEntry(sv.k, sv.value, root))
    return DecayProfile(tuple(entries), None if N is None and spec.is_geometric else spec.level(N))


# the entire function g(z) = int_0^inf f(tz) e^{-t} dt ------------------------

@dataclass(frozen=True)
class GResult:
    z: complex
    value: complex
    error_estimate: float
    cutoff: float
    product_terms: int
    panels: int


class QuadratureError(RuntimeError):
    pass


def _gl_integrate(fun, a: float, b: float, panels: int, order: int) -> complex:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return complex(np.sum(w * fun(t)))


def g_eval(
    spec: CoefficientSpec,
    z,
    tol: float = 1e-12,
    order: int = 20,
    panels: int | None = None,
    max_panels: int = 4096,
) -> GResult:
    """Evaluate g(z) by composite Gauss-Legendre quadrature on [0, T].

    The cutoff T follows the growth estimate |f(tz)| <= K e^{t/2}: the first
    N0 factors are kept as a polynomial in t and the rest are bounded by
    exp(t |z| tail(N0)) <= e^{t/2}.  The neglected integral over [T, inf) is
    then bounded by incomplete gamma functions.
    """
    from scipy.special import gammaincc, gammaln

    z = complex(z)
    az = abs(z)
    budget = tol / 3

    if az == 0:
        return GResult(z, 1.0 + 0j, 0.0, 0.0, 0, 0)

    # N0: split point with |z| * tail(N0) <= 1/2
    n_cap = caps().series_len
    N0 = 0
    while az * float(tail_l1(spec, N0)) > 0.5:
        N0 += 1
        if N0 > n_cap:
            raise QuadratureError("coefficient tail too heavy for the series cap")
    head, _ = abs_values(spec, N0)
    e = elementary([Fraction(az) * h for h in head], N0)
    e = [float(x) for x in e]
    # decay exponent of the envelope: e^{-t} * e^{t |z| tail(N0)}
    rate = 1.0 - az * float(tail_l1(spec, N0))

    def envelope_tail(T):
        # sum_j e_j * int_T^inf t^j e^{-rate t} dt
        total = 0.0
        for j, ej in enumerate(e):
            if ej == 0:
                continue
            total += ej * math.exp(gammaln(j + 1) - (j + 1) * math.log(rate)) * gammaincc(j + 1, rate * T)
        return total

    def envelope_total():
        return sum(ej * math.exp(gammaln(j + 1) - (j + 1) * math.log(rate)) for j, ej in enumerate(e))

    T = 8.0
    while envelope_tail(T) > budget:
        T *= 1.25
        if T > 1e5:
            raise QuadratureError("cannot reach the requested tolerance with a finite cutoff")

    # product truncation: |f - f_N| <= |f_N| (exp(T |z| tail(N)) - 1)
    B = envelope_total()
    N = max(N0, 1)
    if spec.length is not None:
        N = max(N, spec.length)
    while B * math.expm1(T * az * float(tail_l1(spec, N))) > budget:
        N += 1
        if N > n_cap:
            raise QuadratureError("product truncation exceeds the series cap at this tolerance")
    cs = np.array([to_complex(c) for c in coeffs(spec, N)])

    def integrand(t):
        w = t[:, None] * z * cs[None, :]
        return np.prod(1.0 + w, axis=1) * np.exp(-t)

    if panels is None:
        panels = max(4, int(math.ceil(T / 4)))
    coarse = _gl_integrate(integrand, 0.0, T, panels, order)
    while True:
        fine = _gl_integrate(integrand, 0.0, T, 2 * panels, order)
        err = abs(fine - coarse)
        if err <= budget or 2 * panels >= max_panels:
            break
        panels *= 2
        coarse = fine
    if err > budget:
        raise QuadratureError(f"quadrature did not converge: estimate {err:.3e} > {budget:.3e}")
    total_err = err + envelope_tail(T) + B * math.expm1(T * az * float(tail_l1(spec, N)))
    return GResult(z, fine, float(total_err), T, N, 2 * panels)


def g_series(spec: CoefficientSpec, z, nmax: int, N: int | None = None) -> complex:
    """Partial sum sum_{n<=nmax} n! e_n(c_1..c_N) z^n of g's Taylor series.

    e_n uses the signed coefficients, so it coincides with sigma_n exactly
    when every c_n is nonnegative.
    """
    z = complex(z)
    if N is None and spec.is_geometric:
        es = [Fraction(1)] + [_geometric_sigma(spec.ratio, k) for k in range(1, nmax + 1)]
    else:
        es = elementary(coeffs(spec, spec.level(N)), nmax)
    return sum((math.factorial(k) * to_complex(es[k]) * z ** k for k in range(nmax + 1)), 0j)
