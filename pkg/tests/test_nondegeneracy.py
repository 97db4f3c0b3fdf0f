import random
from fractions import Fraction

import pytest

from capot.costs import builtin_cost, load_cost, multiplicative_cost, separable_cost
from capot.measures import GridAxis
from capot.nondegeneracy import (
    CycleWitness,
    SeparableFit,
    SupportSet,
    cycle_scan,
    fit_separable,
    mixed_partial_certify,
    quadruple_scan,
)
from conftest import random_cost


def full(n_x, n_y=None):
    return SupportSet.full(n_x, n_x if n_y is None else n_y)


def test_fit_on_additive_cost_recovers_potentials():
    ax = GridAxis.cell_centers(3)
    h = separable_cost(ax, ax, list(ax.points), list(ax.points))  # h = x + y
    (res,) = fit_separable(full(3), h)
    assert isinstance(res, SeparableFit)
    assert res.anchor == 0
    x0 = ax.points[0]
    # normalization u(root) = 0 shifts the offset into v
    assert res.u == {i: ax.points[i] - x0 for i in range(3)}
    assert res.v == {j: ax.points[j] + x0 for j in range(3)}
    assert res.verify(h)


def test_product_cost_yields_rectangle_witness():
    # h = x*y on {0,1}: the rectangle sums are 1 and 0
    ax = GridAxis((Fraction(0), Fraction(1)))
    h = multiplicative_cost(ax, ax, list(ax.points), list(ax.points))
    (res,) = fit_separable(full(2), h)
    assert isinstance(res, CycleWitness)
    assert res.n == 2
    assert {res.sum_diag, res.sum_shift} == {Fraction(0), Fraction(1)}
    assert abs(res.gap) == 1
    res.verify(h)


def test_fit_per_component():
    # two disconnected blocks: one separable, one not
    ax = GridAxis.cell_centers(4)
    rows = [[0] * 4 for _ in range(4)]
    for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)):
        rows[i][j] = i + 2 * j  # separable on the block
    rows[2][2], rows[2][3], rows[3][2], rows[3][3] = 0, 1, 1, 1  # violates
    h = load_cost(ax, ax, rows)
    support = SupportSet(
        frozenset(
            {(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)}
        )
    )
    results = fit_separable(support, h)
    assert len(results) == 2
    assert isinstance(results[0], SeparableFit) and results[0].anchor == 0
    assert isinstance(results[1], CycleWitness)
    results[1].verify(h, support)


def test_witness_cells_stay_in_support():
    ax = GridAxis.cell_centers(3)
    h = builtin_cost("neg_product", ax, ax)
    support = SupportSet(frozenset({(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)}))
    results = fit_separable(support, h)
    # (2,2) is its own component and fits trivially; the block gives a witness
    kinds = {type(r) for r in results}
    assert kinds == {SeparableFit, CycleWitness}
    for r in results:
        if isinstance(r, CycleWitness):
            r.verify(h, support)


def test_quadruple_scan_modes():
    ax = GridAxis.cell_centers(3)
    h = builtin_cost("neg_product", ax, ax)
    ex = quadruple_scan(full(3), h)
    assert ex.mode == "exhaustive"
    assert ex.checked == 9  # 3 row pairs x 3 col pairs
    assert len(ex.violations) == 9  # every rectangle of -xy violates
    for w in ex.violations:
        w.verify(h)
    sep = separable_cost(ax, ax, [1, 2, 3], [0, 5, 7])
    assert quadruple_scan(full(3), sep).violations == ()

    s1 = quadruple_scan(full(3), h, mode="sampled", count=5, seed=42)
    s2 = quadruple_scan(full(3), h, mode="sampled", count=5, seed=42)
    assert s1 == s2 and s1.checked == 5 and s1.mode == "sampled"
    with pytest.raises(ValueError):
        quadruple_scan(full(3), h, mode="nope")


def test_cycle_scan_finds_canonical_rectangles():
    ax = GridAxis.cell_centers(2)
    h = builtin_cost("neg_product", ax, ax)
    res = cycle_scan(full(2), h, max_n=2)
    assert not res.partial
    assert len(res.violations) == 1
    w = res.violations[0]
    assert w.xs == (0, 1) and w.ys == (0, 1)
    assert w.gap == h[(0, 0)] + h[(1, 1)] - h[(1, 0)] - h[(0, 1)]


def test_cycle_scan_budget_marks_partial():
    ax = GridAxis.cell_centers(4)
    h = builtin_cost("neg_product", ax, ax)
    res = cycle_scan(full(4), h, max_n=4, budget=3)
    unbounded = cycle_scan(full(4), h, max_n=2)
    assert not unbounded.partial
    assert unbounded.checked == 36  # C(4,2)^2 rectangles
    # the budget caps chain extensions, so the truncated scan saw fewer cycles
    assert res.partial and res.checked < unbounded.checked


def test_fit_iff_no_cycle_violation():
    rng = random.Random(101)
    for _ in range(60):
        n_x, n_y = rng.randint(2, 4), rng.randint(2, 4)
        ax, ay = GridAxis.cell_centers(n_x), GridAxis.cell_centers(n_y)
        if rng.random() < 0.5:
            h = random_cost(rng, ax, ay)
        else:
            h = separable_cost(
                ax,
                ay,
                [rng.randint(-5, 5) for _ in range(n_x)],
                [rng.randint(-5, 5) for _ in range(n_y)],
            )
        support = full(n_x, n_y)
        results = fit_separable(support, h)
        fits = all(isinstance(r, SeparableFit) for r in results)
        scan = cycle_scan(support, h, max_n=min(n_x, n_y))
        assert not scan.partial
        assert fits == (not scan.violations)
        for r in results:
            if isinstance(r, SeparableFit):
                assert r.verify(h)
            else:
                r.verify(h, support)


def test_certifier_exact_values():
    for n in (4, 8, 16):
        ax = GridAxis.cell_centers(n)
        d = Fraction(1, n)
        c = mixed_partial_certify(builtin_cost("neg_product", ax, ax))
        assert c.certified and c.min_abs_d == c.max_abs_d == d * d
        assert c.pass_fraction == 1
        c = mixed_partial_certify(builtin_cost("sq_distance", ax, ax))
        assert c.certified and c.min_abs_d == c.max_abs_d == 2 * d * d
        c = mixed_partial_certify(separable_cost(ax, ax, list(ax.points), list(ax.points)))
        assert not c.certified and c.max_abs_d == 0


def test_certifier_wider_stencil():
    ax = GridAxis.cell_centers(8)
    c = mixed_partial_certify(builtin_cost("neg_product", ax, ax), delta_steps=2)
    assert c.certified
    assert c.min_abs_d == Fraction(2, 8) * Fraction(2, 8)
    assert c.n_cells == 36  # (8-2)^2 stencil positions


def test_certifier_grid_too_small():
    ax = GridAxis.cell_centers(2)
    with pytest.raises(ValueError):
        mixed_partial_certify(builtin_cost("neg_product", ax, ax), delta_steps=2)


def test_abs_distance_not_certified_but_witnessed():
    # |x-y| has zero mixed difference off the diagonal band: coverage fails,
    # while the exact dichotomy still reports a witness
    ax = GridAxis.cell_centers(6)
    h = builtin_cost("abs_distance", ax, ax)
    c = mixed_partial_certify(h)
    assert not c.certified
    assert c.pass_fraction == Fraction(1, 5)
    (res,) = fit_separable(SupportSet.full(6, 6), h)
    assert isinstance(res, CycleWitness)
