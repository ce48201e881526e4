from __future__ import annotations

import json
import math

import pytest

from expsums import cli, harness
from expsums.corpus import builtin_corpus

SMALL = """
[experiment]
polynomials = builtin:gauss, builtin:quad_n2, builtin:hyperbolic
characters = fixed
bounds = trivial
[moduli]
plan = primes_up_to
limit = 50
"""


def test_three_polys_fixed_character(tmp_path):
    cfg = harness.parse_config(SMALL)
    rep = harness.run_experiment(cfg)
    rows = rep.sums_rows()
    assert len(rows) == 3 * 15
    assert all(r["u"] == 1 for r in rows)
    assert rep.ok
    assert all(v["pass"] == "pass" for v in rep.verdict_rows() if v["bound"] == "trivial")
    written = rep.write(tmp_path)
    assert {p.name for p in written} == {"sums.csv", "verdicts.csv", "summary.json"}


def test_gauss_law_column():
    cfg = harness.parse_config("""
[experiment]
polynomials = builtin:gauss
bounds = trivial
[moduli]
plan = prime_powers
max_prime = 7
max_exponent = 4
""")
    rep = harness.run_experiment(cfg)
    for r in rep.sums_rows():
        N = int(r["N"])
        if N % 2:
            assert abs(float(r["magnitude"]) - N**-0.5) < 1e-8


def test_custom_polynomial_and_validation(tmp_path):
    text = """
[experiment]
polynomials = mine
bounds = trivial, cubefree
[polynomial:mine]
text = a^3 + b^3 + a*b
vars = a, b
[moduli]
plan = explicit
values = 25, 49
"""
    rep = harness.run_experiment(harness.parse_config(text))
    assert rep.ok and len(rep.sums_rows()) == 2
    with pytest.raises(harness.ConfigError):
        harness.parse_config(text.replace("a^3 + b^3 + a*b", "a^3 + + b"))
    with pytest.raises(harness.ConfigError):
        harness.parse_config(text.replace("values = 25, 49", "values = 7, 11"))
    with pytest.raises(harness.ConfigError):
        harness.parse_config(text.replace("a^3 + b^3 + a*b", "a + b"))


def test_cap_skips_instance():
    cfg = harness.parse_config(SMALL.replace("limit = 50", "limit = 50\n[caps]\nterms = 1000"))
    rep = harness.run_experiment(cfg)
    skipped = rep.summary()["skipped"]
    assert skipped and all("cap" in s["reason"] for s in skipped)


def test_cli_eval_json(capsys):
    assert cli.main(["eval", "x^2", "--N", "45"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["method"] == "crt" and abs(rec["magnitude"] - 1 / 3 / math.sqrt(5)) < 1e-12


def test_cli_eval_max_csv(capsys):
    assert cli.main(["eval", "builtin:diag3_n2", "--N", "49", "--max", "--format", "csv"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "f,N,u,re,im,magnitude,err,method,terms"


def test_cli_syntax_error(capsys):
    assert cli.main(["eval", "x^2 + * y", "--N", "5"]) != 0
    assert "position" in capsys.readouterr().err


def test_cli_invariants_and_poincare(capsys):
    assert cli.main(["invariants", "x1*x2 + x3*x4"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["newton"]["sigma"] == "2/1" and rec["newton"]["kappa"] == 3
    assert cli.main(["poincare", "x^2", "--p", "5", "--M", "10", "--s", "0"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["monodromy"]["ok"] and rec["stable"]


def test_cli_corpus(capsys):
    assert cli.main(["corpus"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert [r["id"] for r in recs] == [e.id for e in builtin_corpus()]


def test_cli_verify_config(tmp_path, capsys):
    cfgfile = tmp_path / "small.ini"
    cfgfile.write_text(SMALL)
    assert cli.main(["verify", "--config", str(cfgfile), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "sums.csv").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\npolynomials = builtin:nope\n")
    assert cli.main(["verify", "--config", str(bad)]) != 0


def test_threads_env(monkeypatch):
    from expsums import kernels

    monkeypatch.setenv(kernels.THREADS_ENV, "3")
    assert kernels.default_workers() == 3
