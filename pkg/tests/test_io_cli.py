import json
import random
from fractions import Fraction

import pytest

from capot.cli import main
from capot.io import (
    PLAN_HEADER,
    ProblemFormatError,
    dump_problem,
    dumps_report,
    load_problem,
    plan_csv_text,
    rational_field,
    read_plan_csv,
    read_support_csv,
    write_plan_csv,
)
from capot.measures import GridAxis
from capot.solver import solve
from conftest import random_feasible_instance, random_instance

F = Fraction


def swap_doc(phi="2", cost=None):
    return {
        "grid": {"nx": 2, "ny": 2},
        "mu": {"uniform": 2},
        "nu": {"uniform": 2},
        "eta": "product",
        "phi": phi,
        "cost": cost or {"type": "explicit", "values": [["0", "1"], ["1", "0"]]},
    }


def write_doc(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_dump_load_round_trip():
    rng = random.Random(5)
    for _ in range(10):
        p = random_instance(rng)
        assert load_problem(dump_problem(p)) == p


def test_shorthand_forms():
    p = load_problem(swap_doc())
    assert p.mu.weights == (F(1, 2), F(1, 2))
    assert p.cost.x_axis == GridAxis.cell_centers(2)
    assert p.eta.cells == ((F(1, 4),) * 2,) * 2
    assert p.caps == ((F(1, 2),) * 2,) * 2
    assert p.cost.values == ((F(0), F(1)), (F(1), F(0)))

    sep = load_problem(
        swap_doc(cost={"type": "separable", "u": ["0", "1"], "v": ["0", "2"]})
    )
    assert sep.cost.values == ((F(0), F(2)), (F(1), F(3)))
    named = load_problem(swap_doc(cost={"type": "builtin", "name": "neg_product"}))
    assert named.cost[(0, 0)] == F(-1, 16)
    frac_cost = load_problem(
        {
            "grid": {"nx": 3, "ny": 3},
            "mu": {"uniform": 3},
            "nu": {"uniform": 3},
            "eta": "product",
            "phi": 2,
            "cost": {"type": "fractal", "N": 3, "K": 1},
        }
    )
    assert frac_cost.cost[(0, 0)] == F(1, 2)


@pytest.mark.parametrize(
    "mangle, fragment",
    [
        (lambda d: d.pop("phi"), "phi"),
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d.update(mu={"n": 2, "weights": ["x/y", "1"]}), "mu"),
        (lambda d: d.update(phi=0.3), "phi"),
        (lambda d: d.update(cost={"type": "mystery"}), "cost"),
        (lambda d: d.update(cost={"type": "fractal", "N": 3, "K": 1}), "cost"),
        (lambda d: d.update(eta="products"), "eta"),
        (lambda d: d.update(eta=[["1/4", "1/4"], ["1/4"]]), "eta"),
    ],
)
def test_load_problem_rejects(mangle, fragment):
    doc = swap_doc()
    mangle(doc)
    with pytest.raises(ProblemFormatError) as err:
        load_problem(doc)
    assert fragment in str(err.value)


def test_malformed_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ProblemFormatError) as err:
        load_problem(path)
    assert "invalid JSON" in str(err.value)


def test_plan_csv_round_trip(tmp_path):
    rng = random.Random(11)
    for k in range(5):
        p = random_feasible_instance(rng)
        rep = solve(p)
        path = tmp_path / f"plan{k}.csv"
        write_plan_csv(path, p, rep.plan)
        text = path.read_text()
        assert text.splitlines()[0] == ",".join(PLAN_HEADER)
        assert read_plan_csv(path, p) == rep.plan


def test_plan_csv_tamper_detection(tmp_path):
    p = load_problem(swap_doc())
    rep = solve(p)
    lines = plan_csv_text(p, rep.plan).splitlines()

    def expect_error(rows, fragment):
        path = tmp_path / "bad.csv"
        path.write_text("\n".join(rows) + "\n")
        with pytest.raises(ProblemFormatError) as err:
            read_plan_csv(path, p)
        assert fragment in str(err.value)

    expect_error(["sigma,oops"] + lines[1:], "header")
    expect_error(lines[:-1], "missing cell")
    expect_error(lines + [lines[-1]], "duplicate")
    row = lines[1].split(",")
    row[4] = "7"  # sigma above cap
    expect_error([lines[0], ",".join(row)] + lines[2:], "outside")
    row = lines[1].split(",")
    row[2] = "9/7"  # wrong x coordinate
    expect_error([lines[0], ",".join(row)] + lines[2:], "coordinates")
    row = lines[1].split(",")
    row[4] = "nonsense"
    expect_error([lines[0], ",".join(row)] + lines[2:], "bad.csv:2")

    # swapping mass between rows keeps totals but breaks the marginals
    r1, r2 = lines[1].split(","), lines[2].split(",")
    r1[4], r2[4] = r2[4], r1[4]
    if r1[4] != r2[4]:
        expect_error(
            [lines[0], ",".join(r1), ",".join(r2)] + lines[3:], "marginal"
        )


def test_read_support_csv(tmp_path):
    path = tmp_path / "support.csv"
    path.write_text("i,j\n0,0\n1,1\n2,0\n")
    assert read_support_csv(path) == frozenset({(0, 0), (1, 1), (2, 0)})
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n0,0\n")
    with pytest.raises(ProblemFormatError):
        read_support_csv(bad)
    empty = tmp_path / "empty.csv"
    empty.write_text("i,j\n")
    with pytest.raises(ProblemFormatError):
        read_support_csv(empty)


def test_report_scalars():
    assert rational_field(F(1, 2)) == {"rational": "1/2", "decimal": "0.5"}
    assert rational_field(3) == {"rational": "3", "decimal": "3"}
    text = dumps_report({"b": 1, "a": {"z": 2, "y": 3}})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert text.index('"y"') < text.index('"z"')


def test_cli_solve_forced_instance(tmp_path, capsys):
    path = write_doc(tmp_path, swap_doc(phi="1"))
    assert main(["solve", str(path), "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "optimal: cost 1/2" in out and "uniqueness unique" in out
    report = json.loads((tmp_path / "problem_report.json").read_text())
    assert report["status"] == "optimal"
    assert report["cost"] == {"rational": "1/2", "decimal": "0.5"}
    assert report["is_vertex"] is True
    assert report["uniqueness"] == "unique"
    assert report["cells"]["interior"] == 0
    plan = read_plan_csv(tmp_path / "problem_plan.csv", load_problem(path))
    assert plan.cells == ((F(1, 4),) * 2,) * 2


def test_cli_solve_infeasible(tmp_path, capsys):
    path = write_doc(tmp_path, swap_doc(phi="1/2"))
    assert main(["solve", str(path), "--out-dir", str(tmp_path)]) == 2
    out = capsys.readouterr().out
    assert "infeasible" in out
    report = json.loads((tmp_path / "problem_report.json").read_text())
    assert report["status"] == "infeasible"
    assert report["feasibility"]["deficit"]["rational"] == "1/2"
    assert not (tmp_path / "problem_plan.csv").exists()


def test_cli_solve_error_paths(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["solve", str(bad), "--out-dir", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err
    missing = tmp_path / "missing.json"
    assert main(["solve", str(missing), "--out-dir", str(tmp_path)]) == 1


def test_cli_reports_deterministic(tmp_path, capsys):
    # a loose instance with a non-unique optimum exercises witness output
    doc = swap_doc(cost={"type": "separable", "u": ["0", "1"], "v": ["0", "2"]})
    runs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        path = write_doc(d, doc)
        assert main(["solve", str(path), "--out-dir", str(d)]) == 0
        report = json.loads((d / "problem_report.json").read_text())
        del report["timings"]
        runs.append((json.dumps(report, sort_keys=True),
                     (d / "problem_plan.csv").read_bytes()))
    assert runs[0] == runs[1]
    capsys.readouterr()


def test_cli_certify_exit_codes(tmp_path, capsys):
    sep = write_doc(
        tmp_path,
        swap_doc(cost={"type": "separable", "u": ["0", "1"], "v": ["0", "2"]}),
        "sep.json",
    )
    rep_path = tmp_path / "sep_report.json"
    assert main(["certify", str(sep), "--report", str(rep_path)]) == 3
    report = json.loads(rep_path.read_text())
    assert report["verdict"] == "degenerate"
    assert report["components"][0]["kind"] == "fit"
    assert report["certifier"]["certified"] is False

    prod = write_doc(
        tmp_path, swap_doc(cost={"type": "builtin", "name": "neg_product"}), "prod.json"
    )
    rep_path = tmp_path / "prod_report.json"
    assert main(["certify", str(prod), "--report", str(rep_path)]) == 0
    report = json.loads(rep_path.read_text())
    assert report["verdict"] == "non-degenerate"
    assert report["components"][0]["kind"] == "witness"
    assert report["certifier"]["certified"] is True
    capsys.readouterr()


def test_cli_certify_fractal_bounded_scan(tmp_path, capsys):
    # the dichotomy answers even when the bounded cycle scan sees nothing
    assert main(["counterexample", "fractal", "--N", "3", "--K", "1",
                 "--out-dir", str(tmp_path)]) == 0
    problem_path = tmp_path / "fractal_N3_K1_problem.json"
    rep_path = tmp_path / "cert.json"
    assert main(["certify", str(problem_path), "--max-n", "2", "--exhaustive",
                 "--report", str(rep_path)]) == 0
    report = json.loads(rep_path.read_text())
    assert report["verdict"] == "non-degenerate"
    assert report["cycle_scan"]["violations"] == 0
    assert report["quadruple_stats"]["violations"] == 0
    capsys.readouterr()


def test_cli_certify_support_file(tmp_path, capsys):
    prod = write_doc(
        tmp_path, swap_doc(cost={"type": "builtin", "name": "neg_product"}), "prod.json"
    )
    support = tmp_path / "support.csv"
    support.write_text("i,j\n0,0\n0,1\n1,0\n")  # no rectangle: fits trivially
    assert main(["certify", str(prod), "--support", str(support)]) == 3
    capsys.readouterr()


def test_cli_analyze(tmp_path, capsys):
    path = write_doc(tmp_path, swap_doc())
    assert main(["solve", str(path), "--out-dir", str(tmp_path)]) == 0
    plan_path = tmp_path / "problem_plan.csv"
    rep_path = tmp_path / "analysis.json"
    assert main(["analyze", str(path), "--plan", str(plan_path),
                 "--probe-uniqueness", "--report", str(rep_path)]) == 0
    report = json.loads(rep_path.read_text())
    assert report["plan_is_optimal"] is True
    assert report["uniqueness"] in ("unique", "non-unique")
    no_probe = tmp_path / "analysis2.json"
    assert main(["analyze", str(path), "--plan", str(plan_path),
                 "--report", str(no_probe)]) == 0
    assert json.loads(no_probe.read_text())["uniqueness"] == "unknown"
    capsys.readouterr()


def test_cli_refine(tmp_path, capsys):
    out = tmp_path / "profile.csv"
    assert main(["refine", "--cost", "neg_product", "--phi", "2",
                 "--grids", "2,4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,interior_cells,interior_eta_mass,opt_cost"
    assert len(lines) == 3
    ns = [int(l.split(",")[0]) for l in lines[1:]]
    assert ns == [2, 4]
    masses = [F(l.split(",")[2]) for l in lines[1:]]
    assert masses[1] <= masses[0]
    again = tmp_path / "profile2.csv"
    assert main(["refine", "--cost", "neg_product", "--phi", "2",
                 "--grids", "2,4", "--out", str(again)]) == 0
    assert again.read_text() == out.read_text()
    capsys.readouterr()


def test_cli_counterexample_fractal(tmp_path, capsys):
    assert main(["counterexample", "fractal", "--N", "3", "--K", "1",
                 "--verify", "--out-dir", str(tmp_path)]) == 0
    problem = load_problem(tmp_path / "fractal_N3_K1_problem.json")
    assert solve(problem).status == "optimal"
    report = json.loads((tmp_path / "fractal_N3_K1_report.json").read_text())
    assert report["passed"] is True
    assert report["claims"]["long_cycle_witness"]["gap"]["rational"] == "1/2"
    assert report["claims"]["short_cycles_balance"]["violations"] == 0
    assert report["claims"]["never_separable"]["fits"] == 0
    capsys.readouterr()


def test_cli_counterexample_degenerate(tmp_path, capsys):
    assert main(["counterexample", "degenerate", "--out-dir", str(tmp_path)]) == 0
    problem = load_problem(tmp_path / "degenerate_separable-2x2_problem.json")
    assert solve(problem).cost == F(3, 2)
    report = json.loads(
        (tmp_path / "degenerate_separable-2x2_report.json").read_text()
    )
    assert report["verdict"] == "non-unique"
    assert report["cost_gap"]["rational"] == "0"
    assert report["oracle"]["optimal_count"] == 2
    capsys.readouterr()
