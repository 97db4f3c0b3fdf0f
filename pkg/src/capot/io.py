"""Problem, plan, and report file formats.

Problems are JSON documents carrying exact rational strings; plans are CSV
tables over every grid cell; reports are JSON with "p/q" strings plus a
companion decimal for headline scalars.  Serialization is deterministic for
fixed inputs (sorted keys, no floats except under "timings", which callers
may strip before comparing).
"""

from __future__ import annotations

import csv
import io as _io
import json
from fractions import Fraction
from pathlib import Path

from .costs import (
    BUILTIN_COSTS,
    CostMatrix,
    builtin_cost,
    load_cost,
    multiplicative_cost,
    separable_cost,
)
from .counterexamples import FractalSpec, fractal_h
from .measures import (
    DiscreteMeasure,
    GridAxis,
    JointMeasure,
    TransportPlan,
    marginals,
    product_measure,
)
from .rationals import frac, frac_decimal, frac_str
from .solver import CapacityField, ConstrainedProblem

__all__ = [
    "ProblemFormatError",
    "load_problem",
    "dump_problem",
    "plan_csv_text",
    "write_plan_csv",
    "read_plan_csv",
    "read_support_csv",
    "rational_field",
    "dumps_report",
]

PLAN_HEADER = ("i", "j", "x", "y", "sigma", "cap", "eta")


class ProblemFormatError(ValueError):
    """Input file rejected; message carries the offending field path."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def _scalar(value, where: str) -> Fraction:
    """Exact rational from a JSON scalar.

    Accepts ints and "p/q" strings.  Floats are rejected unless integral:
    a literal like 0.1 is not the rational 1/10, so decimals must be spelled
    as strings.
    """
    if isinstance(value, bool):
        raise ProblemFormatError(where, f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value == int(value):
            return Fraction(int(value))
        raise ProblemFormatError(
            where, f"float {value!r} is inexact; write it as a string like \"1/10\""
        )
    if isinstance(value, str):
        try:
            return frac(value)
        except ValueError as exc:
            raise ProblemFormatError(where, str(exc)) from None
    raise ProblemFormatError(where, f"expected a rational, got {type(value).__name__}")


def _vector(value, n: int | None, where: str) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise ProblemFormatError(where, "expected a list")
    if n is not None and len(value) != n:
        raise ProblemFormatError(where, f"expected length {n}, got {len(value)}")
    return tuple(_scalar(v, f"{where}[{k}]") for k, v in enumerate(value))


def _matrix(value, nx: int, ny: int, where: str) -> tuple[tuple[Fraction, ...], ...]:
    if not isinstance(value, list):
        raise ProblemFormatError(where, "expected a list of rows")
    if len(value) != nx:
        raise ProblemFormatError(where, f"expected {nx} rows, got {len(value)}")
    return tuple(_vector(row, ny, f"{where}[{i}]") for i, row in enumerate(value))


def _require_keys(obj, required, optional, where: str) -> None:
    if not isinstance(obj, dict):
        raise ProblemFormatError(where, "expected an object")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ProblemFormatError(where, f"missing field(s): {', '.join(missing)}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise ProblemFormatError(where, f"unknown field(s): {', '.join(sorted(unknown))}")


def _parse_axis(n, coords, where: str) -> GridAxis:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemFormatError(where, f"grid size must be a positive integer, got {n!r}")
    if coords is None:
        return GridAxis.cell_centers(n)
    points = _vector(coords, n, where + ".coords")
    try:
        return GridAxis(points)
    except ValueError as exc:
        raise ProblemFormatError(where + ".coords", str(exc)) from None


def _parse_measure(value, axis: GridAxis, where: str) -> DiscreteMeasure:
    if isinstance(value, dict) and set(value) == {"uniform"}:
        n = value["uniform"]
        if n != axis.n:
            raise ProblemFormatError(where, f"uniform size {n} does not match grid {axis.n}")
        return DiscreteMeasure(axis, tuple(Fraction(1, axis.n) for _ in range(axis.n)))
    _require_keys(value, ("n", "weights"), (), where)
    if value["n"] != axis.n:
        raise ProblemFormatError(where + ".n", f"size {value['n']} does not match grid {axis.n}")
    weights = _vector(value["weights"], axis.n, where + ".weights")
    try:
        return DiscreteMeasure(axis, weights)
    except ValueError as exc:
        raise ProblemFormatError(where, str(exc)) from None


def _parse_cost(value, x_axis: GridAxis, y_axis: GridAxis, where: str) -> CostMatrix:
    if not isinstance(value, dict) or "type" not in value:
        raise ProblemFormatError(where, 'expected an object with a "type" field')
    kind = value["type"]
    try:
        if kind == "separable":
            _require_keys(value, ("type", "u", "v"), (), where)
            return separable_cost(
                x_axis,
                y_axis,
                _vector(value["u"], x_axis.n, where + ".u"),
                _vector(value["v"], y_axis.n, where + ".v"),
            )
        if kind == "multiplicative":
            _require_keys(value, ("type", "f", "g"), (), where)
            return multiplicative_cost(
                x_axis,
                y_axis,
                _vector(value["f"], x_axis.n, where + ".f"),
                _vector(value["g"], y_axis.n, where + ".g"),
            )
        if kind == "builtin":
            _require_keys(value, ("type", "name"), (), where)
            if value["name"] not in BUILTIN_COSTS:
                raise ProblemFormatError(
                    where + ".name",
                    f"unknown builtin {value['name']!r}; known: {', '.join(BUILTIN_COSTS)}",
                )
            return builtin_cost(value["name"], x_axis, y_axis)
        if kind == "explicit":
            _require_keys(value, ("type", "values"), (), where)
            return load_cost(
                x_axis, y_axis, _matrix(value["values"], x_axis.n, y_axis.n, where + ".values")
            )
        if kind == "fractal":
            _require_keys(value, ("type", "N", "K"), (), where)
            spec = FractalSpec(value["N"], value["K"])
            if x_axis.n != spec.side or y_axis.n != spec.side:
                raise ProblemFormatError(
                    where, f"fractal cost needs an N^K = {spec.side} square grid"
                )
            h = fractal_h(spec)
            if x_axis.points != h.x_axis.points or y_axis.points != h.y_axis.points:
                raise ProblemFormatError(
                    where, "fractal cost requires cell-center grid coordinates"
                )
            return h
    except ProblemFormatError:
        raise
    except ValueError as exc:
        raise ProblemFormatError(where, str(exc)) from None
    raise ProblemFormatError(
        where + ".type",
        f"unknown cost type {kind!r}; known: separable, multiplicative, builtin, explicit, fractal",
    )


def load_problem(source) -> ConstrainedProblem:
    """Parse a problem JSON file (given by path) or an already-decoded dict.

    Layout: {"grid": {"nx", "ny", "coords"?}, "mu", "nu", "eta", "phi",
    "cost"}.  Measures are {"uniform": n} or {"n", "weights"}; eta is the
    string "product" (meaning mu x nu) or an explicit cell matrix; phi is a
    scalar or a matrix; cost carries a "type" tag.  Raises
    ProblemFormatError with a field path on any malformed input.
    """
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(str(path), f"invalid JSON: {exc}") from None
    _require_keys(doc, ("grid", "mu", "nu", "eta", "phi", "cost"), (), "problem")
    grid = doc["grid"]
    _require_keys(grid, ("nx", "ny"), ("coords",), "grid")
    coords = grid.get("coords")
    cx = cy = None
    if coords is not None:
        _require_keys(coords, (), ("x", "y"), "grid.coords")
        cx, cy = coords.get("x"), coords.get("y")
    x_axis = _parse_axis(grid["nx"], cx, "grid.nx")
    y_axis = _parse_axis(grid["ny"], cy, "grid.ny")

    mu = _parse_measure(doc["mu"], x_axis, "mu")
    nu = _parse_measure(doc["nu"], y_axis, "nu")

    eta_val = doc["eta"]
    if eta_val == "product":
        eta = product_measure(mu, nu)
    elif isinstance(eta_val, list):
        cells = _matrix(eta_val, x_axis.n, y_axis.n, "eta")
        try:
            eta = JointMeasure(x_axis, y_axis, cells)
        except ValueError as exc:
            raise ProblemFormatError("eta", str(exc)) from None
    else:
        raise ProblemFormatError("eta", 'expected "product" or a cell matrix')

    phi_val = doc["phi"]
    if isinstance(phi_val, list):
        phi = CapacityField(x_axis, y_axis, _matrix(phi_val, x_axis.n, y_axis.n, "phi"))
    else:
        phi = CapacityField.constant(x_axis, y_axis, _scalar(phi_val, "phi"))

    cost = _parse_cost(doc["cost"], x_axis, y_axis, "cost")
    try:
        return ConstrainedProblem(mu, nu, eta, phi, cost)
    except ValueError as exc:
        raise ProblemFormatError("problem", str(exc)) from None


def dump_problem(problem: ConstrainedProblem, cost_json: dict | None = None) -> dict:
    """Problem as a JSON-ready dict that load_problem parses back exactly.

    The cost is emitted as explicit values unless the caller supplies the
    structured form it was built from.
    """
    x_axis, y_axis = problem.cost.x_axis, problem.cost.y_axis
    if cost_json is None:
        cost_json = {
            "type": "explicit",
            "values": [[frac_str(v) for v in row] for row in problem.cost.values],
        }
    return {
        "grid": {
            "nx": x_axis.n,
            "ny": y_axis.n,
            "coords": {
                "x": [frac_str(p) for p in x_axis.points],
                "y": [frac_str(p) for p in y_axis.points],
            },
        },
        "mu": {"n": x_axis.n, "weights": [frac_str(w) for w in problem.mu.weights]},
        "nu": {"n": y_axis.n, "weights": [frac_str(w) for w in problem.nu.weights]},
        "eta": [[frac_str(v) for v in row] for row in problem.eta.cells],
        "phi": [[frac_str(v) for v in row] for row in problem.phi.values],
        "cost": cost_json,
    }


def plan_csv_text(problem: ConstrainedProblem, plan: TransportPlan) -> str:
    """Plan as CSV over every grid cell, row-major, exact rational strings."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLAN_HEADER)
    n_x, n_y = problem.shape
    for i in range(n_x):
        for j in range(n_y):
            writer.writerow(
                (
                    i,
                    j,
                    frac_str(problem.cost.x_axis.points[i]),
                    frac_str(problem.cost.y_axis.points[j]),
                    frac_str(plan.cells[i][j]),
                    frac_str(problem.caps[i][j]),
                    frac_str(problem.eta.cells[i][j]),
                )
            )
    return buf.getvalue()


def write_plan_csv(path, problem: ConstrainedProblem, plan: TransportPlan) -> None:
    Path(path).write_text(plan_csv_text(problem, plan))


def read_plan_csv(path, problem: ConstrainedProblem) -> TransportPlan:
    """Parse a plan CSV and revalidate every cell against the problem.

    Checks the header, one row per grid cell, coordinates and cap/eta
    columns matching the problem exactly, bound and nonnegativity
    constraints, and that the plan's marginals equal mu and nu.
    """
    path = Path(path)
    where = str(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows or tuple(rows[0]) != PLAN_HEADER:
        raise ProblemFormatError(where, f"expected header {','.join(PLAN_HEADER)}")
    n_x, n_y = problem.shape
    caps = problem.caps
    cells = [[None] * n_y for _ in range(n_x)]
    for lineno, row in enumerate(rows[1:], start=2):
        at = f"{where}:{lineno}"
        if len(row) != len(PLAN_HEADER):
            raise ProblemFormatError(at, f"expected {len(PLAN_HEADER)} columns")
        try:
            i, j = int(row[0]), int(row[1])
        except ValueError:
            raise ProblemFormatError(at, "cell indices must be integers") from None
        if not (0 <= i < n_x and 0 <= j < n_y):
            raise ProblemFormatError(at, f"cell ({i}, {j}) outside the {n_x}x{n_y} grid")
        if cells[i][j] is not None:
            raise ProblemFormatError(at, f"duplicate cell ({i}, {j})")
        try:
            x, y, sigma, cap, eta = (frac(v) for v in row[2:])
        except ValueError as exc:
            raise ProblemFormatError(at, str(exc)) from None
        if x != problem.cost.x_axis.points[i] or y != problem.cost.y_axis.points[j]:
            raise ProblemFormatError(at, "coordinates do not match the problem grid")
        if cap != caps[i][j]:
            raise ProblemFormatError(at, f"cap {cap} does not match the problem cap {caps[i][j]}")
        if eta != problem.eta.cells[i][j]:
            raise ProblemFormatError(at, "eta does not match the problem")
        if sigma < 0 or sigma > cap:
            raise ProblemFormatError(at, f"sigma {sigma} outside [0, {cap}]")
        cells[i][j] = sigma
    holes = [(i, j) for i in range(n_x) for j in range(n_y) if cells[i][j] is None]
    if holes:
        raise ProblemFormatError(where, f"missing cell(s): {holes[:4]}")
    try:
        plan = TransportPlan(
            problem.cost.x_axis, problem.cost.y_axis, tuple(tuple(r) for r in cells)
        )
    except ValueError as exc:
        raise ProblemFormatError(where, str(exc)) from None
    got_mu, got_nu = marginals(plan)
    if got_mu.weights != problem.mu.weights:
        raise ProblemFormatError(where, "plan row marginal does not equal mu")
    if got_nu.weights != problem.nu.weights:
        raise ProblemFormatError(where, "plan column marginal does not equal nu")
    return plan


def read_support_csv(path) -> frozenset[tuple[int, int]]:
    """Cell list CSV with header i,j; returns the set of cells."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or tuple(rows[0]) != ("i", "j"):
        raise ProblemFormatError(str(path), "expected header i,j")
    cells = set()
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            cells.add((int(row[0]), int(row[1])))
        except (ValueError, IndexError):
            raise ProblemFormatError(
                f"{path}:{lineno}", "expected two integer columns"
            ) from None
    if not cells:
        raise ProblemFormatError(str(path), "support is empty")
    return frozenset(cells)


def rational_field(x) -> dict:
    """Headline scalar: exact string plus a 12-significant-digit decimal."""
    x = frac(x)
    return {"rational": frac_str(x), "decimal": frac_decimal(x)}


def dumps_report(doc: dict) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, one newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
