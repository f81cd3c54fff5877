"""Acceptance criteria, one test each; the terminal summary prints a PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import csv
import io
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from quasinil.cli import main
from quasinil.coeffs import CoefficientSpec, coeff, decay_profile, g_eval, g_series, sigma_profile
from quasinil.combinatorics import (
    alpha,
    beta,
    beta_bruteforce,
    gamma,
    gamma_bruteforce,
    gamma_recursive,
    s_sum,
)
from quasinil.moments import charfn_moments, moment_AstarA, moment_dense_oracle, moment_X
from quasinil.operators import a_trunc, q_power
from quasinil.sampler import sample_series
from quasinil.subspace import ratio_profile
from quasinil.tensor import OperatorSum, op_norm, site_op
from quasinil.verify import run_suite

HALF = Fraction(1, 2)
GEO = CoefficientSpec.geometric(HALF)


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@pytest.mark.criterion("1 partition table p=4")
def test_partition_table(criterion, capsys):
    expected_alpha = {(4,): 1, (3, 1): 8, (2, 2): 6, (2, 1, 1): 40, (1, 1, 1, 1): 24}
    expected_s = {2: 14, 3: 40, 4: 24}
    t0 = time.perf_counter()
    assert main(["partitions", "--p", "4"]) == 0
    out = capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    parsed = list(csv.reader(io.StringIO(out)))
    assert parsed[0] == ["shape", "k", "gamma", "alpha"]
    rows = {r[0]: int(r[3]) for r in parsed[1:] if r[0] != "*"}
    sums = {int(r[1]): int(r[3]) for r in parsed[1:] if r[0] == "*"}
    assert rows == {",".join(map(str, sh)): a for sh, a in expected_alpha.items()}
    for k, s in expected_s.items():
        assert sums[k] == s == s_sum(4, k)
    for shape, a in expected_alpha.items():
        assert alpha(4, shape) == a
    criterion.note(f"runtime {elapsed:.3f}s")
    assert elapsed < 1.0


@pytest.mark.criterion("2 gamma laws")
def test_gamma_laws(criterion):
    for p in range(1, 8):
        ones = (1,) * p
        assert gamma(p, ones) == double_factorial(2 * p - 1) == gamma_recursive(p, ones)
        assert gamma(p, (p,)) == 1 == gamma_recursive(p, (p,))
        if p <= 5:
            assert gamma_bruteforce(p, ones) == double_factorial(2 * p - 1)
            assert gamma_bruteforce(p, (p,)) == 1
    criterion.note("p <= 7 closed form = recursion, p <= 5 brute force")


@pytest.mark.criterion("3 beta law")
def test_beta_law(criterion):
    for p in range(2, 8):
        assert beta(p, p - 1) == 2 * p == beta_bruteforce(p, p - 1)
    criterion.note("beta(p;p-1) = 2p, p = 2..7")


@pytest.mark.criterion("4 moments of X, alpha=1/2")
def test_moments_of_x(criterion):
    t0 = time.perf_counter()
    cf = charfn_moments(HALF, 4, tol=1e-10)
    worst_cf, worst_dense = 0.0, 0.0
    for n, target in ((2, Fraction(1, 3)), (4, Fraction(1, 5))):
        comb = moment_X(GEO, n).value
        assert comb == target
        # (a) characteristic function route, certified series tail below 1e-10
        assert cf.bounds[n] <= Fraction(1, 10 ** 10)
        assert abs(comb - cf.moments[n]) <= cf.bounds[n]
        worst_cf = max(worst_cf, float(abs(comb - cf.moments[n])))
        # (b) dense oracle at N = 10, geometric tail bound below 1e-5
        d = moment_dense_oracle("X", GEO, n, 10)
        assert d.tail_bound <= 1e-5
        assert abs(float(comb) - d.value) <= d.tail_bound
        worst_dense = max(worst_dense, abs(float(comb) - d.value))
    elapsed = time.perf_counter() - t0
    criterion.note(f"|comb-charfn| {worst_cf:.1e}, |comb-dense| {worst_dense:.1e}, runtime {elapsed:.2f}s")
    assert elapsed < 5.0


def _explicit_specs():
    vals = [Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5), Fraction(3, 4), Fraction(1)]
    cplx = CoefficientSpec.explicit  # rational real and complex-rational entries
    specs = [cplx(vals[:L]) for L in range(1, 5)]
    specs += [cplx([Fraction(1, 3)] * 4), cplx([2, Fraction(1, 2)]), cplx([Fraction(-1, 7), 1, Fraction(2, 3)])]
    from quasinil.coeffs import parse_spec
    specs += [parse_spec("list:1/2+1/3i,1/4,-1/5i,2/3"), parse_spec("list:1i,1/2")]
    return specs


@pytest.mark.criterion("5 A*A moments exact")
def test_astara_moments(criterion):
    t0 = time.perf_counter()
    count = 0
    for spec in _explicit_specs():
        L = spec.length
        for p in range(1, 5):
            assert moment_AstarA(spec, p).value == moment_dense_oracle("AstarA", spec, p, L, exact=True).value
            count += 1
    elapsed = time.perf_counter() - t0
    criterion.note(f"{count} exact equalities, runtime {elapsed:.2f}s")
    assert elapsed < 30.0


@pytest.mark.criterion("6 exact identity suite")
def test_identity_suite(criterion, capsys):
    t0 = time.perf_counter()
    code = main(["--quiet", "verify", "--suite", "all"])
    capsys.readouterr()
    records = run_suite("all")
    elapsed = time.perf_counter() - t0
    statements = " | ".join(r.statement for r in records)
    for n in range(1, 5):
        for m in range(n + 1, 5):
            assert f"[S({n},{m}),A" in statements
    for fragment in ("^7 = 0", "6!·c₁⋯c₆·V^⊗6", "A*A = q₂ + v", "q₂A − Aq₂", "W₂A₃W₂⁻¹ = B₂+A₃−A₂",
                     "[W,B", "invariant under A", "not invariant under S("):
        assert fragment in statements, fragment
    assert all(r.passed for r in records)
    assert all(r.residual == "0" for r in records if r.suite in ("algebra", "similarity"))
    assert code == 0
    criterion.note(f"{len(records)} checks, runtime {elapsed:.1f}s; sign of q2A-Aq2 checked as -sum c|c|^2 V")
    assert elapsed < 60.0


@pytest.mark.criterion("6b commutator identity as printed: q2A - Aq2 = sum c^3 V")
def test_commutator_identity_as_printed(criterion):
    """The identity exactly as the criterion prints it, for N <= 6 and c_n = 2^-n.

    The true commutator is minus this sum, so the residual is 2 sum c_n^3 V_n.
    """
    worst = None
    for N in range(1, 7):
        a = a_trunc(GEO, N)
        q2 = q_power(GEO, 2, N)
        rhs = sum((site_op("V", n, coeff(GEO, n) ** 3) for n in range(1, N + 1)), OperatorSum())
        residual = q2 * a - a * q2 - rhs
        if not residual.is_zero():
            worst = residual
    criterion.note("residual " + ("0" if worst is None else worst.pretty()))
    assert worst is None


@pytest.mark.criterion("7 quasinilpotence profile")
def test_quasinilpotence_profile(criterion):
    prof = decay_profile(GEO, 40)
    roots = [e.root_value for e in prof.entries]
    assert roots[39] < 0.05
    assert all(roots[k] < roots[k - 1] for k in range(5, 40))  # entries k = 5..40
    N = 10
    a = a_trunc(GEO, N)
    sig = sigma_profile(GEO, 10, N)
    norms, nroots = [], []
    for k in range(1, 11):
        nv = op_norm(a, N, tol=1e-12, power=k).value
        bound = math.factorial(k) * sig[k - 1].value
        assert nv <= float(bound) + 1e-8
        root = nv ** (1 / k)
        assert root <= float(bound) ** (1 / k) + 1e-8
        norms.append(nv)
        nroots.append(root)
    assert all(nroots[i] < nroots[i - 1] for i in range(1, 10))
    criterion.note(f"(k!σ_k)^(1/k) at k=40: {roots[39]:.3e}; ||A10^k||^(1/k): "
                   + ", ".join(f"{r:.4f}" for r in nroots))


@pytest.mark.criterion("8 ratio limits")
def test_ratio_limits(criterion):
    p = ratio_profile("P", HALF, 60)
    for row in p.rows:
        # root^(2m) = ratio exactly; compare with (alpha 2^(-1/(2m)))^(2m) = alpha^(2m)/2
        assert row.ratio == HALF ** (2 * row.m) / 2
        assert math.isclose(row.root, 0.5 * 2 ** (-1 / (2 * row.m)), rel_tol=1e-14)
    q = ratio_profile("Q", HALF, 60).root_at(60)
    pq = ratio_profile("PQ", HALF, 60).root_at(60)
    assert abs(q - 1) <= 0.05
    assert abs(pq - 0.5) <= 0.06
    criterion.note(f"Q root(60) {q:.6f}, PQ root(60) {pq:.6f}")


@pytest.mark.criterion("9 sampler")
def test_sampler(criterion, tmp_path, capsys):
    t0 = time.perf_counter()
    run = sample_series(0.5, 10 ** 6, seed=20240601, keep=True)
    elapsed = time.perf_counter() - t0
    z = (run.moment(2) - 1 / 3) / run.standard_errors[1]
    assert abs(z) <= 3
    assert run.ks_distance <= 0.005
    again = sample_series(0.5, 10 ** 6, seed=20240601, keep=True)
    assert run.samples.tobytes() == again.samples.tobytes()
    assert run.moments == again.moments and np.array_equal(run.counts, again.counts)
    for d in ("a", "b"):
        assert main(["--out", str(tmp_path / d), "--quiet", "sample", "--alpha", "1/2",
                     "--count", "1000000", "--seed", "20240601"]) == 0
    capsys.readouterr()
    for name in ("sample.csv", "sample.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    criterion.note(f"m2 z-score {z:+.2f}, KS {run.ks_distance:.5f}, runtime {elapsed:.2f}s")
    assert elapsed < 30.0


@pytest.mark.criterion("10 g-function")
def test_g_function(criterion):
    c1 = Fraction(2, 3)
    spec = CoefficientSpec.explicit([c1])
    worst = 0.0
    for r in np.linspace(0.0, 2.0, 5):
        for theta in np.linspace(0.0, 2 * math.pi, 8, endpoint=False):
            z = complex(r * math.cos(theta), r * math.sin(theta))
            g = g_eval(spec, z).value
            worst = max(worst, abs(g - (1 + float(c1) * z)))
    assert worst <= 1e-8
    gq = g_eval(GEO, 0.5).value
    gs = g_series(GEO, 0.5, 20)
    assert abs(gq - gs) <= 1e-6
    criterion.note(f"max |g - (1+c1 z)| {worst:.1e}; |g - partial sum| at 1/2 {abs(gq - gs):.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-rA"]))
