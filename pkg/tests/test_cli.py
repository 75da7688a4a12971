import csv
import json

import pytest

from mpmi.cli import main
from mpmi.parser import format_problem, parse_problem
from mpmi.verification.generators import GENERATORS

from conftest import CHAIN3, DATA, SIMPLEX, UNIT_BOX


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_prints_exact_and_decimal(write, capsys):
    code, out, _ = run_cli(capsys, "solve", write("c.mi", CHAIN3))
    assert code == 0
    assert out.strip() == "MI = 7/6 ≈ 1.16666666667"


def test_solve_root_choice_invariant(write, capsys):
    path = write("p.mi", format_problem(GENERATORS["path"](5, 0)))
    outs = {run_cli(capsys, "solve", path, "--root", r)[1] for r in ("auto", "x1", "x5")}
    assert len(outs) == 1


def test_solve_json(write, capsys):
    code, out, _ = run_cli(capsys, "--json", "solve", write("s.mi", SIMPLEX), "--table")
    data = json.loads(out)
    assert code == 0 and data["mi"] == "1/2"
    assert data["stats"]["n"] == 2 and data["stats"]["diameter"] == 1
    assert {"parse", "passes"} <= set(data["times"])
    assert "x2->x1" in data["table"]["messages"] or "x1->x2" in data["table"]["messages"]


@pytest.mark.parametrize("text,code", [
    ("(declare-real x) (assert (< x 1)", 2),
    ("(declare-real a) (declare-real b) (declare-real c) (assert (< 0 a)) (assert (< a 1))"
     "(assert (< 0 b)) (assert (< b 1)) (assert (< 0 c)) (assert (< c 1))"
     "(assert (< a b)) (assert (< b c)) (assert (< a c))", 3),
    ("(declare-real x) (declare-real y) (assert (< x y))", 4),
])
def test_solve_exit_codes(write, capsys, text, code):
    got, _, err = run_cli(capsys, "solve", write("bad.mi", text))
    assert got == code
    assert err.startswith("error:")


def test_solve_zero_mi_is_success(write, capsys):
    code, out, _ = run_cli(capsys, "solve", write("z.mi", "(declare-real x) (assert (< x 0)) (assert (< 1 x))"))
    assert code == 0 and out.startswith("MI = 0 ")


def test_query_command(write, capsys):
    p = write("p.mi", "(declare-real x) (declare-real y) (declare-real z)"
                      "(assert (< 0 x)) (assert (< x 1)) (assert (< 0 y)) (assert (< y 1))"
                      "(assert (< 0 z)) (assert (< z 1)) (assert (< x y)) (assert (< y z))")
    q = write("q.txt", "true\n(< x 1/2)\n(< (+ x y) 1)\n; comment\n(< z x)\n")
    code, out, err = run_cli(capsys, "--json", "query", p, q)
    data = json.loads(out)
    assert code == 0 and data["mi"] == "1/6"
    kinds = [r["kind"] for r in data["queries"]]
    assert kinds == ["const", "uni", "bi", "nonconforming"]
    probs = [r["probability"] for r in data["queries"]]
    assert probs[0] == "1" and probs[3] == "0"
    assert "nonconforming" in err


def test_marginal_and_moment(write, capsys):
    path = write("s.mi", SIMPLEX)
    code, out, _ = run_cli(capsys, "marginal", path, "x1")
    assert code == 0
    assert json.loads(out) == [{"lower": "0", "upper": "1", "coeffs": ["0", "2"]}]
    _, out, _ = run_cli(capsys, "moment", write("b.mi", UNIT_BOX), "x", "2")
    assert out.startswith("E[x^2] = 1/3")
    _, out, _ = run_cli(capsys, "--json", "moment", path, "x1", "0")
    assert json.loads(out)["moment"] == "1"


def test_marginal_undefined(write, capsys):
    code, _, err = run_cli(capsys, "marginal", write("z.mi", "(declare-real x) (assert (< x 0)) (assert (< 1 x))"), "x")
    assert code == 5 and "undefined" in err


def test_reduce_then_solve(tmp_path, capsys):
    out = tmp_path / "ex.mi"
    assert main(["reduce", str(DATA / "wmi_example.wmi"), "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("; variable origins")
    assert parse_problem(text).n == 6
    code, printed, _ = run_cli(capsys, "solve", str(out))
    assert printed.strip() == "MI = 73/24 ≈ 3.04166666667"


def test_reduce_pass_through_is_byte_identical(write, capsys):
    text = SIMPLEX + "; trailing comment\n"
    code, out, _ = run_cli(capsys, "reduce", write("s.mi", text))
    assert code == 0 and out == text


def test_reduce_unsupported_weight(write, capsys):
    text = ("(declare-real x) (declare-real y) (assert (< 0 x)) (assert (< x 2)) (assert (< 0 y))"
            "(assert (< y 2)) (assert (or (< x y) (< x 1))) (weight (< x y) 2 x)")
    code, _, err = run_cli(capsys, "reduce", write("w.wmi", text))
    assert code == 6 and "3-clique" in err


def test_gen_subset_chain(tmp_path, capsys):
    out = tmp_path / "chain.mi"
    code, _, _ = run_cli(capsys, "gen", "--shape", "subset-chain", "--S", "1,2,3", "--L", "3", "-o", str(out))
    assert code == 0
    truth = json.loads((tmp_path / "chain.mi.json").read_text())
    assert truth["query_mi"] == "2/27" and truth["mi"] == "8/27"
    code, printed, _ = run_cli(capsys, "--json", "query", str(out), str(tmp_path / "chain.mi.queries"))
    data = json.loads(printed)
    assert data["queries"][0]["probability"] == "1/4"


def test_gen_random_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.mi", tmp_path / "b.mi"
    for path in (a, b):
        assert main(["gen", "--shape", "star", "--n", "6", "--seed", "3", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "mi" in json.loads((tmp_path / "a.mi.json").read_text())


def test_gen_requires_seed(capsys):
    with pytest.raises(SystemExit):
        main(["gen", "--shape", "path", "--n", "5"])


def test_oracle_modes(write, capsys):
    path = write("c.mi", CHAIN3)
    code, out, _ = run_cli(capsys, "oracle", path, "--mode", "nested")
    assert code == 0 and out.strip() == "MI = 7/6 ≈ 1.16666666667"
    code, out, _ = run_cli(capsys, "--json", "oracle", path, "--mode", "mc", "--samples", "200000", "--seed", "1")
    est = json.loads(out)
    assert abs(est["estimate"] - 7 / 6) <= 4 * est["std_error"]
    with pytest.raises(SystemExit):
        main(["oracle", path, "--mode", "mc"])


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code, _, err = run_cli(capsys, "bench", "--shape", "path", "--n", "8", "--queries", "10",
                           "--kind", "mixed", "--seed", "0", "-o", str(out))
    assert code == 0 and "speedup" in err
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["query", "kind", "table_cumulative_s", "baseline_cumulative_s"]
    assert len(rows) == 12
    assert rows[1][1] == "passes"
    cumulative = [float(r[3]) for r in rows[1:]]
    assert cumulative == sorted(cumulative)


def test_nonconforming_queries_on_large_problem(write, capsys):
    path = write("p20.mi", format_problem(GENERATORS["path"](20, 0)))
    # unit clauses on two distant variables keep the tree shape
    code, out, _ = run_cli(capsys, "--json", "query", path, write("q1.txt", "(and (< x1 1) (< x3 1))\n"))
    assert code == 0 and json.loads(out)["queries"][0]["kind"] == "nonconforming"
    code, _, err = run_cli(capsys, "query", path, write("q2.txt", "(< x1 x3)\n"))
    assert code == 7 and "cycle" in err
