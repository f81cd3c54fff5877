"""Command-line interface: ``quasinil <command> [options]``.

Every command prints CSV to stdout, or with ``--out DIR`` writes
``<command>.csv``, ``<command>.json`` and ``<command>.manifest.json`` there.

Exit codes: 0 success, 2 configuration error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .coeffs import QuadratureError, decay_profile, g_eval, g_series, parse_spec, sigma_profile
from .config import ENV_PREFIX, CapError, caps
from .exact import format_exact, parse_exact

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3


class VerificationFailure(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    coeffs: str | None = None
    levels: dict = field(default_factory=dict)
    caps: dict = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    timestamp: str = ""


@dataclass
class Result:
    header: list[str]
    rows: list[list]
    payload: dict
    lines: list[str] = field(default_factory=list)    # extra human-readable lines (stderr)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v.real) + ("+" if v.imag >= 0 else "-") + repr(abs(v.imag)) + "j"
    if isinstance(v, Fraction) or type(v).__name__ == "ComplexRational":
        return format_exact(v)
    if v is None:
        return ""
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (Fraction,)) or type(o).__name__ == "ComplexRational":
        return format_exact(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


# commands ------------------------------------------------------------------------

def cmd_partitions(args, man: RunManifest) -> Result:
    from .combinatorics import count_table
    table = count_table(args.p)
    man.levels = {"p": args.p}
    rows = [[",".join(map(str, r.shape)), r.k, r.gamma, r.alpha] for r in table.rows]
    rows += [["*", k, table.gamma_sums[k], table.sums[k]] for k in sorted(table.sums)]
    return Result(["shape", "k", "gamma", "alpha"], rows, table.to_json())


def cmd_moments(args, man: RunManifest) -> Result:
    from . import moments as mom
    spec = parse_spec(args.coeffs)
    N = args.N if args.N is not None else min(spec.level(None), caps().oracle_n)
    man.coeffs, man.levels = spec.to_text(), {"N": N}
    op, n = args.op, args.order
    if op == "mixed" and args.order2 is None:
        raise ValueError("--op mixed needs --order2")
    reports = []
    disc = allowed = None
    if args.method == "all":
        cmp = mom.compare_routes(op, spec, n, N, args.order2)
        reports = list(cmp.reports)
        disc, allowed = cmp.max_discrepancy, cmp.allowed
    elif args.method == "combinatorial":
        if op == "X":
            reports.append(mom.moment_X(spec, n, args.N))
        elif op == "Y":
            reports.append(mom.moment_Y(spec, n, args.N))
        elif op in ("re", "im"):
            reports.append(mom.moment_reim(spec, n, args.N, op))
        elif op == "AstarA":
            reports.append(mom.moment_AstarA(spec, n, args.N))
        else:
            raise ValueError("mixed moments have no combinatorial route; use --method dense or all")
    elif args.method == "dense":
        reports.append(mom.moment_dense_oracle(op, spec, n, N, exact=args.exact, order2=args.order2))
    elif args.method == "charfn":
        if op != "X":
            raise ValueError("the cosine-product route computes moments of X only")
        reports.append(mom.charfn_moments(spec, max(n, 2)).report(n))
    elif args.method == "rademacher":
        if op != "X":
            raise ValueError("the dyadic-integral route computes moments of X only")
        reports.append(mom.rademacher_moment(spec, n, N))
    header = ["target", "order", "order2", "route", "value", "value_float", "error_bound", "tail_bound", "N"]
    rows = [[r.target, r.order, r.order2, r.route, r.value if r.exact else r.value,
             r.as_float() if r.exact else r.value, r.error_bound, r.tail_bound, r.N] for r in reports]
    payload = {"reports": [dict(zip(header, [_fmt(x) for x in row])) for row in rows]}
    lines = []
    if disc is not None:
        payload["max_discrepancy"], payload["allowed"] = disc, allowed
        lines.append(f"max discrepancy {disc:.3e} (allowed {allowed:.3e})")
        if disc > allowed:
            raise VerificationFailure(f"routes disagree: {disc:.3e} > {allowed:.3e}",
                                      Result(header, rows, payload, lines))
    return Result(header, rows, payload, lines)


def cmd_sigma(args, man: RunManifest) -> Result:
    spec = parse_spec(args.coeffs)
    N = None if (args.N is None and spec.is_geometric) else spec.level(args.N)
    man.coeffs, man.levels = spec.to_text(), {"N": N, "kmax": args.kmax}
    prof = decay_profile(spec, args.kmax, N)
    sig = sigma_profile(spec, args.kmax, N)
    rows = [[e.k, e.sigma_k, math.factorial(e.k) * e.sigma_k, e.root_value, s.error_bound]
            for e, s in zip(prof.entries, sig)]
    header = ["k", "sigma_k", "k_factorial_sigma_k", "root", "tail_bound"]
    return Result(header, rows, {"coeffs": spec.to_json(), "N": N,
                                 "rows": [dict(zip(header, map(_fmt, r))) for r in rows]})


def cmd_norms(args, man: RunManifest) -> Result:
    """||A_N^k|| next to k! sigma_k of the whole sequence and of its first N terms.

    The level-N value is the sharper bound for the truncated operator and is
    the one each row is judged against.
    """
    from .operators import a_trunc
    from .tensor import op_norm
    spec = parse_spec(args.coeffs)
    man.coeffs, man.levels = spec.to_text(), {"N": args.N, "kmax": args.kmax}
    a = a_trunc(spec, args.N)
    sig_all = sigma_profile(spec, args.kmax, None)
    sig_n = sigma_profile(spec, args.kmax, args.N)
    rows, bad = [], []
    for k in range(1, args.kmax + 1):
        res = op_norm(a, args.N, tol=args.tol, power=k)
        bound = math.factorial(k) * sig_all[k - 1].value
        bound_n = math.factorial(k) * sig_n[k - 1].value
        root = res.value ** (1.0 / k) if res.value > 0 else 0.0
        ok = res.value <= float(bound_n) + args.tol
        rows.append([k, res.value, root, bound, float(bound), bound_n, float(bound_n),
                     res.iterations, res.converged, ok])
        if not ok:
            bad.append(k)
    header = ["k", "norm", "root", "bound", "bound_float", "bound_N", "bound_N_float",
              "iterations", "converged", "within_bound"]
    payload = {"coeffs": spec.to_json(), "N": args.N, "rows": [dict(zip(header, map(_fmt, r))) for r in rows]}
    if bad:
        raise VerificationFailure(f"norm exceeds k!·sigma_k at k = {bad}", Result(header, rows, payload))
    return Result(header, rows, payload)


def cmd_ratio(args, man: RunManifest) -> Result:
    from .subspace import ratio_profile
    alpha = parse_exact(args.alpha)
    man.coeffs, man.levels = f"geometric:{format_exact(alpha)}", {"mmax": args.mmax}
    prof = ratio_profile(args.word, alpha, args.mmax)
    rows = [[r.m, r.ratio, r.root] for r in prof.rows]
    header = ["m", "ratio", "root"]
    return Result(header, rows, {"word": str(prof.word), "alpha": format_exact(prof.alpha),
                                 "limit": format_exact(prof.limit),
                                 "rows": [dict(zip(header, map(_fmt, r))) for r in rows]})


def cmd_verify(args, man: RunManifest) -> Result:
    from .verify import first_failure, run_suite
    records = run_suite(args.suite)
    man.levels = {"suite": args.suite}
    header = ["suite", "id", "statement", "passed", "residual", "N"]
    rows = [[r.suite, r.id, r.statement, "pass" if r.passed else "fail", r.residual, r.N] for r in records]
    fail = first_failure(records)
    payload = {"suite": args.suite, "passed": fail is None, "count": len(records),
               "checks": [r.to_json() for r in records]}
    lines = [f"{len(records)} checks, {sum(not r.passed for r in records)} failed"]
    if fail is not None:
        payload["first_failure"] = fail.to_json()
        res = Result(header, rows, payload, lines)
        raise VerificationFailure(f"first failing identity: {fail.statement} (residual {fail.residual})", res)
    return Result(header, rows, payload, lines)


def cmd_sample(args, man: RunManifest) -> Result:
    from .sampler import sample_series
    alpha = parse_exact(args.alpha)
    run = sample_series(float(alpha), args.count, seed=args.seed, N=args.N, bins=args.bins)
    man.coeffs, man.seed = f"geometric:{format_exact(alpha)}", args.seed
    man.levels = {"N": run.N, "count": args.count, "bins": args.bins}
    rows = [list(r) for r in run.histogram_rows()]
    payload = {
        "alpha": format_exact(alpha), "count": run.count, "seed": run.seed, "N": run.N,
        "mean": run.mean,
        "moments": {str(k): m for k, m in enumerate(run.moments, 1)},
        "standard_errors": {str(k): s for k, s in enumerate(run.standard_errors, 1)},
        "ks_distance_uniform": run.ks_distance,
    }
    return Result(["bin_left", "bin_right", "count"], rows, payload)


def _parse_z(text: str) -> complex:
    return complex(text.replace("i", "j").replace(" ", ""))


def cmd_gfun(args, man: RunManifest) -> Result:
    spec = parse_spec(args.coeffs)
    man.coeffs, man.levels = spec.to_text(), {"series_terms": args.terms}
    if args.z:
        zs = [_parse_z(t) for t in args.z]
    else:
        n = args.grid
        zs = [complex(args.zmax * (2 * i / (n - 1) - 1), 0.0) for i in range(n)] if n > 1 else [0j]
    rows = []
    for z in zs:
        r = g_eval(spec, z, tol=args.tol)
        s = g_series(spec, z, args.terms)
        rows.append([z.real, z.imag, r.value.real, r.value.imag, r.error_estimate, s.real, s.imag, r.cutoff, r.product_terms])
    header = ["z_re", "z_im", "g_re", "g_im", "error_estimate", "series_re", "series_im", "cutoff", "product_terms"]
    return Result(header, rows, {"coeffs": spec.to_json(), "rows": [dict(zip(header, r)) for r in rows]})


COMMANDS = {
    "partitions": cmd_partitions,
    "moments": cmd_moments,
    "sigma": cmd_sigma,
    "norms": cmd_norms,
    "ratio": cmd_ratio,
    "verify": cmd_verify,
    "sample": cmd_sample,
    "gfun": cmd_gfun,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasinil", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--out", type=Path, help="directory for CSV/JSON/manifest files")
    ap.add_argument("--quiet", action="store_true", help="do not print CSV to stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", help="gamma/alpha table and s_p(k) sums")
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("moments", help="moments by one or all routes")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--op", choices=["X", "Y", "re", "im", "AstarA", "mixed"], default="X")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--order2", type=int)
    p.add_argument("--method", choices=["combinatorial", "dense", "charfn", "rademacher", "all"], default="combinatorial")
    p.add_argument("--N", type=int, help="truncation level (default: whole sequence / oracle cap)")
    p.add_argument("--exact", action="store_true", help="exact rational dense oracle")

    p = sub.add_parser("sigma", help="sigma_k and the decay profile (k! sigma_k)^(1/k)")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--N", type=int, help="truncation (default: closed form for geometric)")

    p = sub.add_parser("norms", help="||A_N^k|| by power iteration against k! sigma_k")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("ratio", help="ratio profile tau(R_m w)/tau(R_m)")
    p.add_argument("--word", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--mmax", type=int, default=60)

    p = sub.add_parser("verify", help="run exact identity suites")
    p.add_argument("--suite", default="all", choices=["algebra", "subspace", "similarity", "moments-crosscheck", "all"])

    p = sub.add_parser("sample", help="Monte Carlo samples of sum eps_n alpha^n")
    p.add_argument("--alpha", required=True)
    p.add_argument("--count", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--N", type=int)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest", type=Path)

    p = sub.add_parser("gfun", help="g(z) by quadrature next to its Taylor partial sum")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--z", nargs="*", help="points such as 0.5 or 1+2j")
    p.add_argument("--zmax", type=float, default=2.0)
    p.add_argument("--grid", type=int, default=9)
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-10)
    return ap


def _emit(args, man: RunManifest, res: Result):
    csv_text = _csv_text(res.header, res.rows)
    if not args.quiet:
        sys.stdout.write(csv_text)
    for line in res.lines:
        print(line, file=sys.stderr)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        name = args.command
        _write_atomic(args.out / f"{name}.csv", csv_text)
        _write_atomic(args.out / f"{name}.json", json.dumps(res.payload, indent=2, default=_json_default) + "\n")
        man.caps = asdict(caps())
        man.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        _write_atomic(args.out / f"{name}.manifest.json", json.dumps(asdict(man), indent=2, default=_json_default) + "\n")


def _strip_output_options(argv: list[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--out":
            skip = True
        elif tok != "--quiet" and not tok.startswith("--out="):
            out.append(tok)
    return out


def _replay(args) -> int:
    """Run the recorded argv again under the recorded caps."""
    try:
        man = json.loads(args.manifest.read_text(encoding="utf-8"))
        argv = _strip_output_options(list(man["argv"]))
        recorded = dict(man.get("caps") or {})
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if argv and argv[0] == "replay":
        print("error: a manifest cannot replay another replay", file=sys.stderr)
        return EXIT_CONFIG
    prefix = (["--out", str(args.out)] if args.out is not None else []) + (["--quiet"] if args.quiet else [])
    saved = {k: os.environ.get(ENV_PREFIX + k.upper()) for k in recorded}
    try:
        for k, v in recorded.items():
            os.environ[ENV_PREFIX + k.upper()] = str(v)
        return main(prefix + argv)
    finally:
        for k, v in saved.items():
            if v is None:
                os.environ.pop(ENV_PREFIX + k.upper(), None)
            else:
                os.environ[ENV_PREFIX + k.upper()] = v


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.command == "replay":
        return _replay(args)
    man = RunManifest(command=args.command, argv=argv)
    try:
        res = COMMANDS[args.command](args, man)
    except VerificationFailure as exc:
        msg = exc.args[0]
        if len(exc.args) > 1:
            _emit(args, man, exc.args[1])
        print(f"verification failed: {msg}", file=sys.stderr)
        return EXIT_VERIFY
    except (CapError, ValueError, KeyError, QuadratureError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(args, man, res)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
