"""Shared random-instance generators for the test suite.

Everything is seeded random.Random; no test draws from global state.  The
mixed generator aims for roughly half infeasible instances: one branch picks
a plan first and builds caps that dominate it (always feasible), the other
draws marginals, reference measure, and capacity factors independently
(mostly infeasible).
"""

import random
from fractions import Fraction

from capot.costs import load_cost
from capot.measures import (
    DiscreteMeasure,
    GridAxis,
    JointMeasure,
    TransportPlan,
    marginals,
    product_measure,
)
from capot.solver import CapacityField, ConstrainedProblem

WILD_PHI_POOL = (
    Fraction(0),
    Fraction(0),
    Fraction(1),
    Fraction(2),
    Fraction(3),
    Fraction(4),
)


def random_measure(rng: random.Random, axis: GridAxis) -> DiscreteMeasure:
    while True:
        w = [rng.randint(0, 5) for _ in range(axis.n)]
        if any(w):
            break
    s = sum(w)
    return DiscreteMeasure(axis, tuple(Fraction(x, s) for x in w))


def random_cells(rng: random.Random, n_x: int, n_y: int, hi: int):
    while True:
        w = [[rng.randint(0, hi) for _ in range(n_y)] for _ in range(n_x)]
        if any(any(r) for r in w):
            return w


def normalized(cells) -> tuple:
    s = sum(sum(r) for r in cells)
    return tuple(tuple(Fraction(v, s) for v in r) for r in cells)


def random_cost(rng: random.Random, x_axis: GridAxis, y_axis: GridAxis):
    rows = [[rng.randint(-10, 10) for _ in range(y_axis.n)] for _ in range(x_axis.n)]
    return load_cost(x_axis, y_axis, rows)


def random_instance(rng: random.Random) -> ConstrainedProblem:
    """Random problem up to 4x4 with integer costs of magnitude <= 10."""
    n_x, n_y = rng.randint(1, 4), rng.randint(1, 4)
    ax, ay = GridAxis.cell_centers(n_x), GridAxis.cell_centers(n_y)
    h = random_cost(rng, ax, ay)
    if rng.random() < 0.45:
        # feasible by construction: caps dominate a randomly chosen plan
        sigma = normalized(random_cells(rng, n_x, n_y, 4))
        noise = normalized(random_cells(rng, n_x, n_y, 4))
        eta = JointMeasure(
            ax,
            ay,
            tuple(
                tuple((a + b) / 2 for a, b in zip(r1, r2))
                for r1, r2 in zip(sigma, noise)
            ),
        )
        phi = CapacityField(
            ax,
            ay,
            tuple(
                tuple(Fraction(rng.choice((2, 3, 4))) for _ in range(n_y))
                for _ in range(n_x)
            ),
        )
        mu, nu = marginals(TransportPlan(ax, ay, sigma))
        return ConstrainedProblem(mu, nu, eta, phi, h)
    mu, nu = random_measure(rng, ax), random_measure(rng, ay)
    if rng.random() < 0.5:
        eta = product_measure(random_measure(rng, ax), random_measure(rng, ay))
    else:
        eta = JointMeasure(ax, ay, normalized(random_cells(rng, n_x, n_y, 4)))
    phi = CapacityField(
        ax,
        ay,
        tuple(
            tuple(rng.choice(WILD_PHI_POOL) for _ in range(n_y)) for _ in range(n_x)
        ),
    )
    return ConstrainedProblem(mu, nu, eta, phi, h)


def random_feasible_instance(rng: random.Random) -> ConstrainedProblem:
    """Draw random_instance until it is feasible (dominated branch hits fast)."""
    from capot.solver import check_feasible

    while True:
        p = random_instance(rng)
        if check_feasible(p).feasible:
            return p
