import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sturmbasis import cli
from sturmbasis.potential import load_potential

CEX = '{"kind": "counterexample", "case": 1, "eps1": 0.3, "eps2": 0.7, "K": 64}'
ZERO = '{"kind": "trig", "coeffs": []}'


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_coeffs_counterexample_support(capsys):
    code, out, _ = run(capsys, "coeffs", "--potential", CEX, "--n-max", "16")
    assert code == 0
    rows = json.loads(out)["rows"]
    nonzero = [r["n"] for r in rows if r["alpha"]["re"] != 0]
    assert nonzero == [2, 4, 8, 16]


def test_coeffs_constant_and_odd_power(capsys):
    _, out, _ = run(capsys, "coeffs", "--potential", '{"kind": "trig", "coeffs": [[0, 3, 0]]}')
    assert all(r["alpha"]["re"] == 0 and r["beta"]["re"] == 0 for r in json.loads(out)["rows"])
    _, out, _ = run(capsys, "coeffs", "--potential",
                    '{"kind": "power", "s_plus": 1.5, "s_minus": 1.5, "parity": "odd", "K": 32}')
    rows = json.loads(out)["rows"]
    assert all((r["alpha"]["re"] == 0) == (r["n"] % 2 == 0) for r in rows)


def test_spectrum_free_and_shifted(capsys):
    _, out, _ = run(capsys, "spectrum", "--potential", ZERO, "--n-max", "3")
    rows = json.loads(out)["rows"]
    for r in rows:
        assert r["lambda_minus"]["re"] == pytest.approx((2 * math.pi * r["n"]) ** 2, rel=1e-9)
    _, out, _ = run(capsys, "spectrum", "--potential", '{"kind": "trig", "coeffs": [[0, 2, 0]]}',
                    "--n-max", "3", "--oracle")
    rep = json.loads(out)
    for r in rep["rows"]:
        assert r["lambda_minus"]["re"] == pytest.approx((2 * math.pi * r["n"]) ** 2 + 2, rel=1e-9)
    assert rep["max_deviation"] < 1e-8


def test_check_verdicts_are_data(capsys):
    code, out, _ = run(capsys, "check", "--theorem", "2", "--potential", CEX)
    rep = json.loads(out)["report"]
    assert code == 0 and rep["verdict"] == "Consistent"
    assert rep["stats"]["slope"] == pytest.approx(0.4)
    code, out, _ = run(capsys, "check", "--theorem", "2", "--potential", ZERO)
    assert code == 0 and json.loads(out)["report"]["verdict"] == "Inconclusive"
    code, out, _ = run(capsys, "check", "--theorem", "1", "--potential",
                       '{"kind": "power", "s_plus": 1.5, "s_minus": 1.5, "parity": "even", "K": 64}')
    assert code == 0 and json.loads(out)["report"]["verdict"] == "Consistent"


def test_gram_sweep_free_ratio_one(capsys):
    code, out, _ = run(capsys, "gram", "--sweep", "--potential", ZERO, "--n-max", "16", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("window_lo,window_hi")
    ratios = [float(l.split(",")[5]) for l in lines[1:]]
    assert len(ratios) == 2 and all(abs(r - 1) < 1e-8 for r in ratios)


def test_density_flip(capsys):
    code, out, _ = run(capsys, "density", "--potential", ZERO, "--target", "BasisLike", "--n-max", "64")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["flipped"] is True
    assert rep["start_class"] != rep["perturbed_class"]
    load_potential(json.dumps(rep["perturbed_potential"]))


def test_counterexample_emits_loadable_file(capsys, tmp_path):
    out_path = tmp_path / "q.json"
    code, _, _ = run(capsys, "counterexample", "--case", "2", "--eps1", "0.2", "--eps2", "0.5",
                     "--K", "33", "--out", str(out_path))
    assert code == 0
    q = load_potential(str(out_path))
    assert q.coeff(5) != 0 and q.coeff(4) == 0
    code, out, _ = run(capsys, "coeffs", "--potential", str(out_path), "--case", "2")
    assert code == 0


@pytest.mark.parametrize("args", [
    ["coeffs", "--potential", '{"kind": "spline"}'],
    ["coeffs", "--potential", "/nonexistent/q.json"],
    ["coeffs"],
    ["check", "--potential", CEX],
    ["check", "--theorem", "3", "--potential", CEX],
    ["spectrum", "--potential", ZERO, "--tol", "-1"],
    ["spectrum", "--potential", ZERO, "--n0", "5", "--n-max", "3"],
    ["gram", "--potential", ZERO, "--n-max", "16", "--grid", "32"],
    ["counterexample", "--case", "1", "--eps1", "0.7", "--eps2", "0.3", "--K", "8"],
    ["check", "--theorem", "1", "--potential", CEX, "--theta", "0.5"],
    ["frobnicate"],
])
def test_config_errors_exit_2(capsys, args):
    code, out, err = run(capsys, *args)
    assert code == cli.EXIT_CONFIG
    assert out == ""
    lines = err.strip().splitlines()
    assert len(lines) == 1 and "error" in json.loads(lines[0])


def test_solver_failure_exit_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise cli.SolverError("no convergence")
    monkeypatch.setattr(cli.diagnostics, "gram_report", boom)
    code, _, err = run(capsys, "gram", "--potential", ZERO, "--n-max", "8")
    assert code == cli.EXIT_SOLVER
    assert json.loads(err)["kind"] == "solver"


def test_spectrum_reports_per_index_failures(capsys, monkeypatch):
    real = cli.floquet.find_pair

    def flaky(q, case, n, opts):
        if n == 2:
            raise cli.SolverError("pair search failed")
        return real(q, case, n, opts)
    monkeypatch.setattr(cli.floquet, "find_pair", flaky)
    code, out, _ = run(capsys, "spectrum", "--potential", ZERO, "--n-max", "3")
    rows = json.loads(out)["rows"]
    assert code == 0 and "error" in rows[1] and "lambda_minus" in rows[2]


def test_global_flags_before_or_after_command():
    a = cli.parse_config(["--case", "2", "coeffs", "--potential", ZERO])
    b = cli.parse_config(["coeffs", "--potential", ZERO, "--case", "2"])
    assert a == b and a.bc_case == 2


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.recursive(finite | st.integers() | st.text(max_size=5) | st.complex_numbers(allow_nan=False,
                                                                                     allow_infinity=False),
                    lambda c: st.lists(c, max_size=4) | st.dictionaries(st.text(max_size=4), c, max_size=4),
                    max_leaves=12))
def test_dumps_round_trips_floats(obj):
    text = cli.dumps(obj)
    back = json.loads(text)

    def same(a, b):
        if isinstance(a, complex):
            return b == {"re": a.real, "im": a.imag}
        if isinstance(a, float):
            return b == a
        if isinstance(a, list):
            return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
        if isinstance(a, dict):
            return list(a) == list(b) and all(same(a[k], b[k]) for k in a)
        return a == b
    assert same(obj, back)


def test_dumps_nonfinite():
    assert json.loads(cli.dumps([math.inf, -math.inf])) == ["Infinity", "-Infinity"]
