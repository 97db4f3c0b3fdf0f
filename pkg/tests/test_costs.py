import random
from fractions import Fraction

import pytest

from capot.costs import (
    BUILTIN_COSTS,
    builtin_cost,
    load_cost,
    multiplicative_cost,
    separable_cost,
)
from capot.measures import GridAxis


def test_builtin_neg_product_values():
    ax = GridAxis.cell_centers(2)  # points 1/4, 3/4
    h = builtin_cost("neg_product", ax, ax)
    assert h.values == (
        (Fraction(-1, 16), Fraction(-3, 16)),
        (Fraction(-3, 16), Fraction(-9, 16)),
    )
    assert h.provenance == "builtin:neg_product"


def test_builtin_sq_and_abs_distance():
    ax = GridAxis.cell_centers(2)
    sq = builtin_cost("sq_distance", ax, ax)
    assert sq.values == ((Fraction(0), Fraction(1, 4)), (Fraction(1, 4), Fraction(0)))
    ab = builtin_cost("abs_distance", ax, ax)
    assert ab.values == ((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(0)))


def test_builtin_unknown_name():
    ax = GridAxis.cell_centers(2)
    with pytest.raises(ValueError):
        builtin_cost("no_such_cost", ax, ax)
    assert set(BUILTIN_COSTS) == {"neg_product", "sq_distance", "abs_distance"}


def test_separable_cost_values():
    ax = GridAxis.cell_centers(2)
    h = separable_cost(ax, ax, (Fraction(0), Fraction(1)), (Fraction(1, 2), Fraction(2)))
    assert h.values == (
        (Fraction(1, 2), Fraction(2)),
        (Fraction(3, 2), Fraction(3)),
    )
    assert h.provenance == "separable"


def test_multiplicative_cost_values():
    ax = GridAxis.cell_centers(2)
    h = multiplicative_cost(ax, ax, (Fraction(2), Fraction(3)), (Fraction(1), Fraction(-1)))
    assert h.values == ((Fraction(2), Fraction(-2)), (Fraction(3), Fraction(-3)))


def test_neg_product_rectangle_identity():
    # alternating rectangle sum of -xy equals -(x1-x2)(y1-y2)
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(2, 6)
        ax = GridAxis.cell_centers(n)
        h = builtin_cost("neg_product", ax, ax)
        i1, i2 = rng.sample(range(n), 2)
        j1, j2 = rng.sample(range(n), 2)
        lhs = h[(i1, j1)] + h[(i2, j2)] - h[(i1, j2)] - h[(i2, j1)]
        rhs = -(ax.points[i1] - ax.points[i2]) * (ax.points[j1] - ax.points[j2])
        assert lhs == rhs


def test_load_cost_validation():
    ax = GridAxis.cell_centers(2)
    with pytest.raises(ValueError):
        load_cost(ax, ax, [[0, 1], [1]])  # ragged
    with pytest.raises(ValueError):
        load_cost(ax, ax, [[0, 1]])  # wrong row count
    with pytest.raises(ValueError):
        load_cost(ax, ax, [[0, float("nan")], [1, 0]])
    h = load_cost(ax, ax, [["1/3", 2], [0, "-5"]])
    assert h[(0, 0)] == Fraction(1, 3) and h[(1, 1)] == Fraction(-5)
    assert h.shape == (2, 2)
