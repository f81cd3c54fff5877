from __future__ import annotations

import csv
import io
import json
import subprocess
import sys
from fractions import Fraction


from quasinil import operators
from quasinil.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_partitions_p4(capsys):
    code, out, _ = run(["partitions", "--p", "4"], capsys)
    assert code == EXIT_OK
    table = rows(out)
    assert table[0] == ["shape", "k", "gamma", "alpha"]
    assert ["2,1,1", "3", "210", "40"] in table
    assert ["*", "4", "105", "24"] in table


def test_partitions_p1(capsys):
    code, out, _ = run(["partitions", "--p", "1"], capsys)
    body = [r for r in rows(out)[1:] if r[0] != "*"]
    assert code == EXIT_OK and body == [["1", "1", "1", "1"]]


def test_partitions_cap(capsys):
    code, _, err = run(["partitions", "--p", "30"], capsys)
    assert code == EXIT_CONFIG and "cap" in err


def test_config_errors(capsys):
    assert run(["moments", "--coeffs", "nonsense", "--order", "2"], capsys)[0] == EXIT_CONFIG
    assert run(["verify", "--suite", "bogus"], capsys)[0] == EXIT_CONFIG
    assert run(["norms", "--coeffs", "geometric:1/2", "--N", "40"], capsys)[0] == EXIT_CONFIG
    assert run([], capsys)[0] == EXIT_CONFIG


def test_moments_exact_output(capsys):
    code, out, _ = run(["moments", "--coeffs", "geometric:1/2", "--order", "4"], capsys)
    assert code == EXIT_OK
    assert "1/5" in out


def test_moments_all_routes(capsys):
    code, out, _ = run(["moments", "--coeffs", "geometric:1/2", "--order", "4", "--method", "all", "--N", "8"], capsys)
    assert code == EXIT_OK
    routes = {r[rows(out)[0].index("route")] for r in rows(out)[1:] if len(r) > 1}
    assert {"combinatorial", "dense", "charfn", "rademacher"} <= routes


def test_norms_examples(capsys, tmp_path):
    code, _, _ = run(["--out", str(tmp_path), "--quiet", "norms", "--coeffs", "geometric:1/2", "--N", "1", "--kmax", "3"], capsys)
    assert code == EXIT_OK
    t = rows((tmp_path / "norms.csv").read_text())
    h = t[0]
    k1 = dict(zip(h, t[1]))
    assert abs(float(k1["norm"]) - 0.5) < 1e-12
    assert float(Fraction(k1["bound"])) == 1.0
    assert all(float(dict(zip(h, r))["norm"]) == 0.0 for r in t[2:])


def test_ratio_and_sigma(capsys):
    code, out, _ = run(["ratio", "--word", "P", "--alpha", "1/2", "--mmax", "3"], capsys)
    assert code == EXIT_OK and rows(out)[1][:2] == ["1", "1/8"]
    code, out, _ = run(["sigma", "--coeffs", "geometric:1/2", "--kmax", "3"], capsys)
    assert code == EXIT_OK


def test_gfun(capsys):
    code, out, _ = run(["gfun", "--coeffs", "list:1/2", "--z", "0.5", "1+1j"], capsys)
    assert code == EXIT_OK and len(rows(out)) == 3


def test_verify_named_checks(capsys):
    code, out, _ = run(["verify", "--suite", "algebra"], capsys)
    assert code == EXIT_OK
    assert "[S(1,2),A₄] = 0" in out
    code, out, _ = run(["verify", "--suite", "similarity"], capsys)
    assert code == EXIT_OK
    assert "W₂A₃W₂⁻¹ = B₂+A₃−A₂" in out


def test_verify_all_with_injected_sign_bug(capsys, monkeypatch, tmp_path):
    real = operators.s_op

    def flipped(spec, n, m):
        s = real(spec, n, m)
        cn, cm = operators.coeff(spec, n), operators.coeff(spec, m)
        # wrong sign on the V_n V*_m term
        return s + operators._letter_word({n: "V", m: "V*"}).scale(2 * cn / cm)

    monkeypatch.setattr(operators, "s_op", flipped)
    code, _, err = run(["--out", str(tmp_path), "--quiet", "verify", "--suite", "all"], capsys)
    assert code == EXIT_VERIFY
    assert "first failing identity" in err
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] is False and "first_failure" in report


def test_manifest_and_byte_identical_rerun(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["sample", "--alpha", "1/2", "--count", "20000", "--seed", "5"]
    assert run(["--out", str(a), "--quiet"] + argv, capsys)[0] == EXIT_OK
    man = json.loads((a / "sample.manifest.json").read_text())
    assert man["command"] == "sample" and man["seed"] == 5 and man["caps"]["oracle_n"] == 10
    assert man["version"] and man["timestamp"]
    assert run(["--out", str(b), "--quiet", "replay", str(a / "sample.manifest.json")], capsys)[0] == EXIT_OK
    assert (a / "sample.csv").read_bytes() == (b / "sample.csv").read_bytes()
    assert (a / "sample.json").read_bytes() == (b / "sample.json").read_bytes()


def test_exact_rerun_identical(capsys, tmp_path):
    outs = []
    for d in ("x", "y"):
        assert run(["--out", str(tmp_path / d), "--quiet", "moments", "--coeffs", "list:1/2,1/4+1/3i",
                    "--op", "AstarA", "--order", "3"], capsys)[0] == EXIT_OK
        outs.append((tmp_path / d / "moments.csv").read_bytes())
    assert outs[0] == outs[1]


def test_replay_bad_manifest(capsys, tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    assert run(["replay", str(bad)], capsys)[0] == EXIT_CONFIG


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quasinil", "partitions", "--p", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("shape,k,gamma,alpha")
