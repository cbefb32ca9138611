"""End-to-end checks of the _obwalks module and the CLI binary.

Stdlib only; the module path and the binary path arrive via PYTHONPATH and
OBWALKS_BIN (both set by ctest).
"""

import json
import os
import subprocess
import sys

import _obwalks as ob


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def test_module_basics():
    assert ob.__version__
    approx(ob.delta("s,t"), 1.0)
    approx(ob.delta("s,t,s+t,s-t"), 2.0)
    assert ob.normalize_family(" s , t ") == "s,t"
    assert ob.klapaklapa_point(3) == "1/231"  # 3 * 7 * 11

    try:
        ob.delta("s,s")
        raise AssertionError("proportional forms must be rejected")
    except ValueError:
        pass


def test_laws():
    approx(ob.gaussian_cdf(0.0), 0.5)
    approx(ob.arcsine_cdf(0.25), 1.0 / 3.0, 1e-12)
    approx(ob.arcsine_cdf(0.5), 0.5, 1e-12)
    assert abs(ob.tau_infinity(1.0) - 0.3708) < 2e-3
    prev = -1.0
    for i in range(25):
        v = ob.tau2(0.5 * i)
        assert v >= prev
        prev = v
    assert ob.tau2(12.0) > 0.9999


def test_sigma_model():
    model = ob.SigmaModel("s,t", 1e5)
    approx(model.delta, 1.0)
    approx(model.sigma(3), 0.5)
    approx(model.sigma(5), 0.0)
    approx(model.sigma(7), 0.25)
    approx(model.sigma(2), 2.0 / 3.0)
    assert model.S(1000) < model.S(10000) < model.S(100000)
    assert abs(model.beta_hat(1e5) - 0.529) < 0.01

    prof = model.profile("1/3")
    assert prof["point"] == "1/3"
    assert prof["c"] == "3"
    assert prof["obstructing"] == [2, 3]
    assert not model.is_locally_soluble("1/3", 2)
    assert not model.is_locally_soluble("1/3", 3)
    assert model.is_locally_soluble("1/3", 5)

    rows = model.path("7/9", "X", 1e4, 32)
    assert rows[0][0] == 0.0 and rows[-1][0] == 1.0
    assert all(rows[i][0] <= rows[i + 1][0] for i in range(len(rows) - 1))

    assert model.excess_mass("1/231", 1e5) >= 0.0


def test_experiment_roundtrip():
    raw = ob.run_experiment_json("least_prime", family="s,t", B=1e4, n=150, seed=3)
    rep = json.loads(raw)
    assert rep["experiment"] == "least_prime"
    assert rep["family"] == "s,t"
    assert rep["n"] == 150
    assert rep["rows"], "report must carry rows"
    for row in rep["rows"]:
        assert {"stat", "nt", "model", "law", "metric", "threshold", "pass"} <= set(row)

    again = json.loads(ob.run_experiment_json("least_prime", family="s,t", B=1e4, n=150, seed=3))
    rep.pop("runtime_seconds")
    again.pop("runtime_seconds")
    assert rep == again, "identical config and seed must reproduce the report"

    cmp_rep = json.loads(
        ob.run_experiment_json(
            "least_prime", family="s,t", B=1e4, n=150, seed=3, family_b="s,t,s+t,s-t"
        )
    )
    assert cmp_rep["experiment"] == "compare_delta_effect"


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [BIN] + args, capture_output=True, text=True, env=env, timeout=300
    )


def test_cli_contracts():
    out = run_cli(["profile", "--family", "s,t", "--point", "1/3"])
    assert out.returncode == 0, out.stderr
    assert json.loads(out.stdout) == {"point": "1/3", "c": "3", "obstructing": [2, 3]}

    laws = run_cli(["laws", "--law", "arcsine", "--grid", "0,0.25,0.5"])
    assert laws.returncode == 0
    assert laws.stdout.splitlines() == ["x,value", "0,0", "0.25,0.333333333333", "0.5,0.5"]

    bogus = run_cli(["frobnicate"])
    assert bogus.returncode == 2

    bad_point = run_cli(["profile", "--point", "0/1"])
    assert bad_point.returncode == 2

    too_big = run_cli(["sigma", "--pmax", "9e9"])
    assert too_big.returncode == 3

    args = ["experiment", "--kind", "least_prime", "--B", "2000", "--n", "120", "--seed", "9"]
    a = run_cli(args)
    b = run_cli(args)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout, "same argv and seed must give identical stdout"

    c = run_cli(args, {"OBSTRUCTION_WALKS_SEED": "10"})
    d = run_cli(args[:-1] + ["10"])
    assert c.stdout == d.stdout, "env seed must behave exactly like --seed"
    assert c.stdout != a.stdout


def main():
    test_module_basics()
    test_laws()
    test_sigma_model()
    test_experiment_roundtrip()
    if BIN:
        test_cli_contracts()
    else:
        print("OBWALKS_BIN not set; CLI contract checks skipped", file=sys.stderr)
    print("python smoke: all checks passed")


BIN = os.environ.get("OBWALKS_BIN", "")

if __name__ == "__main__":
    main()
