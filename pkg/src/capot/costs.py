"""Cost matrices h(x_i, y_j) on product grids, stored as exact rationals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .measures import GridAxis
from .rationals import frac

__all__ = [
    "CostMatrix",
    "separable_cost",
    "multiplicative_cost",
    "builtin_cost",
    "load_cost",
    "BUILTIN_COSTS",
]

BUILTIN_COSTS = ("neg_product", "sq_distance", "abs_distance")


@dataclass(frozen=True)
class CostMatrix:
    """Rational cost values per cell, tagged with how they were built.

    `provenance` is a short label ("builtin:neg_product", "separable",
    "multiplicative", "explicit", "fractal") used by reports; it carries no
    semantics beyond display.
    """

    x_axis: GridAxis
    y_axis: GridAxis
    values: tuple[tuple[Fraction, ...], ...]
    provenance: str = "explicit"

    def __post_init__(self):
        mat = tuple(tuple(frac(x) for x in row) for row in self.values)
        if len(mat) != self.x_axis.n:
            raise ValueError("cost matrix needs one row per x point")
        if any(len(row) != self.y_axis.n for row in mat):
            raise ValueError("cost matrix needs one column per y point")
        object.__setattr__(self, "values", mat)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_axis.n, self.y_axis.n)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.values[i][j]


def separable_cost(x_axis: GridAxis, y_axis: GridAxis, u_vals, v_vals) -> CostMatrix:
    """h(x_i, y_j) = u_i + v_j."""
    u = tuple(frac(a) for a in u_vals)
    v = tuple(frac(b) for b in v_vals)
    if len(u) != x_axis.n or len(v) != y_axis.n:
        raise ValueError("u and v must match the axis lengths")
    values = tuple(tuple(a + b for b in v) for a in u)
    return CostMatrix(x_axis, y_axis, values, provenance="separable")


def multiplicative_cost(x_axis: GridAxis, y_axis: GridAxis, f_vals, g_vals) -> CostMatrix:
    """h(x_i, y_j) = f_i * g_j."""
    f = tuple(frac(a) for a in f_vals)
    g = tuple(frac(b) for b in g_vals)
    if len(f) != x_axis.n or len(g) != y_axis.n:
        raise ValueError("f and g must match the axis lengths")
    values = tuple(tuple(a * b for b in g) for a in f)
    return CostMatrix(x_axis, y_axis, values, provenance="multiplicative")


def builtin_cost(name: str, x_axis: GridAxis, y_axis: GridAxis) -> CostMatrix:
    """Evaluate a named cost function exactly on the grid.

    neg_product   -x*y
    sq_distance   (x - y)**2
    abs_distance  |x - y|
    """
    if name == "neg_product":
        fn = lambda x, y: -x * y
    elif name == "sq_distance":
        fn = lambda x, y: (x - y) ** 2
    elif name == "abs_distance":
        fn = lambda x, y: abs(x - y)
    else:
        raise ValueError(f"unknown builtin cost {name!r}; expected one of {BUILTIN_COSTS}")
    values = tuple(tuple(fn(x, y) for y in y_axis.points) for x in x_axis.points)
    return CostMatrix(x_axis, y_axis, values, provenance=f"builtin:{name}")


def load_cost(x_axis: GridAxis, y_axis: GridAxis, rows, provenance: str = "explicit") -> CostMatrix:
    """Build a CostMatrix from raw row data, rejecting ragged or non-finite input."""
    mat = [list(row) for row in rows]
    if len(mat) != x_axis.n:
        raise ValueError(f"expected {x_axis.n} rows, got {len(mat)}")
    for i, row in enumerate(mat):
        if len(row) != y_axis.n:
            raise ValueError(f"row {i} has {len(row)} entries, expected {y_axis.n}")
    values = tuple(tuple(frac(x) for x in row) for row in mat)
    return CostMatrix(x_axis, y_axis, values, provenance=provenance)
