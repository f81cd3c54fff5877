"""Named suites of exact checks, run by ``quasinil verify``.

Every record names the identity it checks, the truncation level, and the
residual (``0`` when the identity holds).  Operator helpers are looked up
through the :mod:`quasinil.operators` module at call time so that a patched
builder is seen by the suites.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable

from . import moments as mom
from . import operators as ops
from . import subspace as sub
from .coeffs import CoefficientSpec, coeff
from .exact import format_exact
from .tensor import word_op

SUITES = ("algebra", "similarity", "subspace", "moments-crosscheck")


@dataclass(frozen=True)
class CheckRecord:
    suite: str
    id: str
    statement: str
    passed: bool
    residual: str
    N: int | None = None

    def line(self) -> str:
        return f"{self.statement}: {'pass' if self.passed else 'FAIL'}"

    def to_json(self) -> dict:
        return asdict(self)


def _from_identity(suite: str, ident: str, chk: ops.IdentityCheck) -> CheckRecord:
    return CheckRecord(suite, ident, chk.name, chk.passed, chk.residual_text(), chk.N)


def _specs_real() -> list[tuple[str, CoefficientSpec]]:
    return [
        ("geometric:1/2", CoefficientSpec.geometric(Fraction(1, 2))),
        ("list:1/2,-1/3,2/5,1/7,3/11,-1/13",
         CoefficientSpec.explicit([Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5), Fraction(1, 7),
                                   Fraction(3, 11), Fraction(-1, 13)])),
    ]


def _specs_all() -> list[tuple[str, CoefficientSpec]]:
    from .exact import make
    return _specs_real() + [
        ("list:1/2,1/2,1/2,1/2,1/2,1/2", CoefficientSpec.explicit([Fraction(1, 2)] * 6)),
        ("list:1/2+1/3i,1/4,-1/5i,1/3,2/7,1/9",
         CoefficientSpec.explicit([make(Fraction(1, 2), Fraction(1, 3)), Fraction(1, 4), make(0, Fraction(-1, 5)),
                                   Fraction(1, 3), Fraction(2, 7), Fraction(1, 9)])),
    ]


# suites --------------------------------------------------------------------------

def suite_algebra(N_max: int = 6) -> list[CheckRecord]:
    out: list[CheckRecord] = []
    for label, spec in _specs_all():
        for n in range(1, 5):
            for m in range(n + 1, 5):
                for N in range(m, N_max + 1):
                    res = ops.check_commutes(ops.s_op(spec, n, m), ops.a_trunc(spec, N))
                    out.append(CheckRecord(
                        "algebra", f"commutant.S{n}{m}.A{N}[{label}]",
                        f"[S({n},{m}),A{ops.sub(N)}] = 0 ({label})",
                        res.commutes, format_exact(res.residual), N))
        for N in range(1, N_max + 1):
            for i, chk in enumerate(ops.check_nilpotency(spec, N)):
                out.append(_from_identity("algebra", f"nilpotent.{i}.N{N}[{label}]", chk))
        for N in range(2, N_max + 1):
            for i, chk in enumerate(ops.check_generation_identities(spec, N)):
                out.append(_from_identity("algebra", f"generation.{i}.N{N}[{label}]", chk))
        for N in range(1, N_max + 1):
            for n in range(1, N + 1):
                v = ops.check_invariance(ops.p_tensor(n), ops.a_trunc(spec, N))
                out.append(CheckRecord(
                    "algebra", f"invariant.P{n}.A{N}[{label}]", f"P^⊗{n} invariant under A{ops.sub(N)} ({label})",
                    v.invariant, "0" if v.invariant else v.witness.pretty(), N))
        for n in range(1, N_max):
            s = ops.s_op(spec, n, n + 1)
            pn = ops.p_tensor(n)
            ratio = coeff(spec, n + 1) / coeff(spec, n)
            tail = word_op(["P"] * (n - 1) + ["V*", "V"], -ratio)
            v = ops.check_invariance(pn, s)
            out.append(CheckRecord(
                "algebra", f"not-invariant.P{n}.S{n}{n + 1}[{label}]",
                f"P^⊗{n} not invariant under S({n},{n + 1}), witness −(c_{n + 1}/c_{n})·P^⊗{n - 1}⊗V*⊗V ({label})",
                (not v.invariant) and (v.witness - tail).is_zero(),
                (v.witness - tail).pretty() if not (v.witness - tail).is_zero() else "0", n + 1))
            chk = ops.identity_check(
                f"S({n},{n + 1})·P^⊗{n} = P^⊗{n}⊗Q − (c_{n + 1}/c_{n})·P^⊗{n - 1}⊗V*⊗V ({label})",
                s * pn, word_op(["P"] * n + ["Q"]) + tail, n + 1)
            out.append(_from_identity("algebra", f"witness.S{n}{n + 1}[{label}]", chk))
        for n in range(1, 4):
            for m in range(n + 1, 5):
                s = ops.s_op(spec, n, m)
                selfadj = (s.adjoint() - s).is_zero()
                expect = abs(coeff(spec, n)) == abs(coeff(spec, m)) if _real(spec, m) else None
                if expect is None:
                    continue
                out.append(CheckRecord(
                    "algebra", f"selfadjoint.S{n}{m}[{label}]",
                    f"S({n},{m}) selfadjoint iff |c_{n}| = |c_{m}| ({label})",
                    selfadj == expect, "0" if selfadj == expect else f"selfadjoint={selfadj}", m))
    return out


def _real(spec: CoefficientSpec, n: int) -> bool:
    from .exact import is_real
    return all(is_real(coeff(spec, i)) for i in range(1, n + 1))


def suite_similarity(N_max: int = 6) -> list[CheckRecord]:
    half, third, quarter = Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)
    pairs = [
        ("(1/2,1/4)->(1/3,1/9)", CoefficientSpec.explicit([half, quarter]), CoefficientSpec.explicit([third, Fraction(1, 9)])),
        ("geometric:1/2->geometric:1/3", CoefficientSpec.geometric(half), CoefficientSpec.geometric(third)),
        ("geometric:1/4->geometric:1/2", CoefficientSpec.geometric(quarter), CoefficientSpec.geometric(half)),
        ("geometric:1/2->geometric:1/2", CoefficientSpec.geometric(half), CoefficientSpec.geometric(half)),
    ]
    out: list[CheckRecord] = []
    for label, a, b in pairs:
        n_max = 2 if not a.is_geometric else 4
        for n in range(1, n_max + 1):
            N_top = 3 if not a.is_geometric else N_max
            for N in range(n, N_top + 1):
                chk = ops.check_similarity(a, b, n, N)
                out.append(_from_identity("similarity", f"similarity.n{n}.N{N}[{label}]", chk))
        N_top = 2 if not a.is_geometric else N_max
        for N in range(1, N_top + 1):
            chk = ops.check_commutator_realization(a, b, N)
            out.append(_from_identity("similarity", f"commutator.N{N}[{label}]", chk))
    return out


def suite_subspace(alpha: Fraction = Fraction(1, 2)) -> list[CheckRecord]:
    out: list[CheckRecord] = []
    words = ["".join(w) for L in range(0, 4) for w in product("PQ", repeat=L)]
    for w in words:
        for m in range(0, 9):
            rec = sub.rm_trace(w, alpha, m)
            d = sub.rm_trace_direct(w, alpha, m, 60)
            gap = abs(rec - d.value)
            out.append(CheckRecord(
                "subspace", f"rm.{w or '1'}.m{m}",
                f"τ(R_{m}·{w or '1'}) recursion = direct sum within tail bound",
                gap <= d.tail_bound, f"{float(gap):.3e} <= {float(d.tail_bound):.3e}", 60))
        for m in range(1, 9):
            ok = sub.rm_trace("P" + w, alpha, m) == alpha ** (2 * m) / 2 * sub.rm_trace(w, alpha, m)
            out.append(CheckRecord(
                "subspace", f"rm.prefixP.{w or '1'}.m{m}",
                f"τ(R_{m}·P{w}) = α^{2 * m}/2·τ(R_{m}·{w or '1'})", ok, "0" if ok else "mismatch"))
    prof = sub.ratio_profile("P", alpha, 40)
    ok = all(r.ratio == alpha ** (2 * r.m) / 2 for r in prof.rows)
    out.append(CheckRecord("subspace", "ratio.P.closed", "ratio(P, m)^(2m) = α^(2m)/2 for m ≤ 40", ok,
                           "0" if ok else "mismatch"))
    spec = CoefficientSpec.geometric(alpha)
    for w in [w for w in words if w]:
        rep = sub.hyperinvariance_report(w, spec, 5)
        out.append(CheckRecord(
            "subspace", f"hyperinvariance.{w}",
            f"p_{w} moved by S{rep.pair} commuting with A_5; rank {rep.rank_p} -> {rep.rank_join}",
            rep.found, "0" if rep.found else "no witness", 5))
    xis = {
        "1": word_op(""),
        "P": word_op("P"),
        "2/3·QP − 1/5·P + Q": word_op("QP", Fraction(2, 3)) + word_op("P", Fraction(-1, 5)) + word_op("Q"),
    }
    for label, xi in xis.items():
        rep = sub.lower_bound_check(xi, alpha, 10, 8)
        out.append(CheckRecord(
            "subspace", f"lower-bound[{label}]",
            f"(‖A^m ξ‖/‖A^m 1‖)^(1/m) ≥ α^r/√2 for m ≤ 10, ξ = {label}",
            rep.passed, f"min margin {rep.min_margin:.6f}", 8))
    return out


def suite_moments() -> list[CheckRecord]:
    out: list[CheckRecord] = []
    specs = [
        ("list:1/2,-1/3,2/5,1/7", CoefficientSpec.explicit([Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5), Fraction(1, 7)])),
        ("list:1,1,1", CoefficientSpec.explicit([1, 1, 1])),
    ]
    for label, spec in specs:
        N = spec.length
        for n in range(1, 9):
            c = mom.moment_X(spec, n).value
            d = mom.moment_dense_oracle("X", spec, n, N, exact=True).value
            out.append(CheckRecord("moments-crosscheck", f"X{n}[{label}]", f"τ(X^{n}) combinatorial = dense ({label})",
                                   c == d, format_exact(c - d), N))
            r = mom.rademacher_moment(spec, n, N).value
            out.append(CheckRecord("moments-crosscheck", f"X{n}.integral[{label}]",
                                   f"τ(X^{n}) combinatorial = dyadic integral ({label})", c == r, format_exact(c - r), N))
        for n in range(1, 7):
            y = mom.moment_Y(spec, n).value
            d = mom.moment_dense_oracle("Y", spec, n, N, exact=True).value
            out.append(CheckRecord("moments-crosscheck", f"Y{n}[{label}]", f"τ(Y^{n}) = (−1)^(n/2)·τ(X^{n}) by dense ({label})",
                                   y == d, format_exact(y - d), N))
        for p in range(1, 5):
            c = mom.moment_AstarA(spec, p).value
            d = mom.moment_dense_oracle("AstarA", spec, p, N, exact=True).value
            out.append(CheckRecord("moments-crosscheck", f"AstarA{p}[{label}]", f"τ((A*A)^{p}) combinatorial = dense ({label})",
                                   c == d, format_exact(c - d), N))
    spec3 = CoefficientSpec.explicit([Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5)])
    for n in range(0, 7):
        for m in range(0, 7 - n):
            chk = mom.mixed_moment_check(spec3, n, m, 3)
            out.append(CheckRecord("moments-crosscheck", f"mixed.{n}.{m}", f"τ(a^{n} b^{m}) = τ(a^{n})·τ(b^{m})",
                                   chk.passed, format_exact(chk.residual), 3))
    for a in (Fraction(1, 2), Fraction(1, 3)):
        spec = CoefficientSpec.geometric(a)
        cf = mom.charfn_moments(a, 8)
        for k in range(1, 9):
            c = mom.moment_X(spec, k).value
            gap = abs(c - cf.moments[k])
            out.append(CheckRecord("moments-crosscheck", f"charfn{k}[{a}]",
                                   f"τ(X^{k}) combinatorial = cosine product within tail (α={a})",
                                   gap <= cf.bounds[k], f"{float(gap):.3e} <= {float(cf.bounds[k]):.3e}", cf.n_series))
    return out


_RUNNERS: dict[str, Callable[[], list[CheckRecord]]] = {
    "algebra": suite_algebra,
    "similarity": suite_similarity,
    "subspace": suite_subspace,
    "moments-crosscheck": suite_moments,
}


def run_suite(name: str) -> list[CheckRecord]:
    if name == "all":
        return [r for s in SUITES for r in _RUNNERS[s]()]
    try:
        return _RUNNERS[name]()
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}") from None


def first_failure(records: Iterable[CheckRecord]) -> CheckRecord | None:
    return next((r for r in records if not r.passed), None)
