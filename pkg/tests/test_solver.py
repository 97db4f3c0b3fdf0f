import random
from fractions import Fraction

import pytest

from capot.costs import builtin_cost, load_cost
from capot.measures import (
    GridAxis,
    TransportPlan,
    marginals,
    product_measure,
    uniform_measure,
)
from capot.solver import (
    CapacityField,
    ConstrainedProblem,
    brute_force_oracle,
    check_feasible,
    plan_cost,
    solve,
)
from conftest import random_instance


def swap_problem(phi_value):
    # 2x2 cross cost: optimum moves mass onto the cheap diagonal when caps allow
    ax = GridAxis.cell_centers(2)
    mu = uniform_measure(ax)
    nu = uniform_measure(ax)
    eta = product_measure(mu, nu)
    phi = CapacityField.constant(ax, ax, phi_value)
    h = load_cost(ax, ax, [[0, 1], [1, 0]])
    return ConstrainedProblem(mu, nu, eta, phi, h)


def test_loose_caps_take_the_diagonal():
    p = swap_problem(2)  # caps 1/2
    rep = solve(p)
    assert rep.status == "optimal"
    assert rep.cost == 0
    assert rep.plan.cells == (
        (Fraction(1, 2), Fraction(0)),
        (Fraction(0), Fraction(1, 2)),
    )
    assert rep.is_vertex


def test_tight_caps_force_the_uniform_plan():
    p = swap_problem(1)  # caps 1/4: the only feasible plan is all cells at cap
    rep = solve(p)
    assert rep.status == "optimal"
    assert rep.cost == Fraction(1, 2)
    assert rep.plan.cells == ((Fraction(1, 4),) * 2,) * 2
    assert rep.n_interior == 0 and rep.n_saturated == 4
    orc = brute_force_oracle(p)
    assert orc.vertex_count == 1 and len(orc.optimal_plans) == 1


def test_infeasible_reports_violated_cut():
    p = swap_problem(Fraction(1, 2))  # caps 1/8: total capacity 1/2 < 1
    rep = solve(p)
    assert rep.status == "infeasible"
    fea = rep.feasibility
    assert fea.deficit == Fraction(1, 2)
    assert fea.max_mass == Fraction(1, 2)
    # Gale-Hoffman witness: mu(rows) - nu(complement cols) exceeds cut capacity by the gap
    assert fea.witness_gap == fea.deficit
    assert rep.plan is None and rep.cost is None


def test_check_feasible_matches_oracle():
    rng = random.Random(11)
    for _ in range(60):
        p = random_instance(rng)
        assert check_feasible(p).feasible == brute_force_oracle(p).feasible


def test_engines_agree():
    rng = random.Random(13)
    for _ in range(40):
        p = random_instance(rng)
        a = solve(p, engine="ssp")
        b = solve(p, engine="network_simplex")
        assert a.status == b.status
        if a.status == "optimal":
            assert a.cost == b.cost


def test_solve_is_deterministic():
    rng = random.Random(17)
    for _ in range(20):
        p = random_instance(rng)
        a = solve(p)
        b = solve(p)
        assert a == b  # dataclass equality covers plan, duals, and counters


def test_duals_certify_optimality():
    # exact complementary slackness: r > 0 forces 0, r < 0 forces cap
    rng = random.Random(19)
    checked = 0
    while checked < 30:
        p = random_instance(rng)
        rep = solve(p)
        if rep.status != "optimal":
            continue
        checked += 1
        n_x, n_y = p.shape
        dual = sum(rep.alpha[i] * p.mu.weights[i] for i in range(n_x))
        dual += sum(rep.beta[j] * p.nu.weights[j] for j in range(n_y))
        for i in range(n_x):
            for j in range(n_y):
                r = p.cost[(i, j)] - rep.alpha[i] - rep.beta[j]
                if r > 0:
                    assert rep.plan.cells[i][j] == 0
                if r < 0:
                    assert rep.plan.cells[i][j] == p.caps[i][j]
                    dual += r * p.caps[i][j]
        assert dual == rep.cost


def test_solution_is_vertex_and_feasible():
    rng = random.Random(23)
    seen_optimal = 0
    while seen_optimal < 40:
        p = random_instance(rng)
        rep = solve(p)
        if rep.status != "optimal":
            continue
        seen_optimal += 1
        assert rep.is_vertex
        mu, nu = marginals(rep.plan)
        assert mu.weights == p.mu.weights and nu.weights == p.nu.weights
        n_x, n_y = p.shape
        for i in range(n_x):
            for j in range(n_y):
                assert 0 <= rep.plan.cells[i][j] <= p.caps[i][j]
        assert plan_cost(p.cost, rep.plan) == rep.cost


def test_oracle_bound_guard():
    ax = GridAxis.cell_centers(5)
    mu = uniform_measure(ax)
    eta = product_measure(mu, mu)
    p = ConstrainedProblem(
        mu, mu, eta, CapacityField.constant(ax, ax, 2), builtin_cost("neg_product", ax, ax)
    )
    with pytest.raises(ValueError):
        brute_force_oracle(p, max_cells=16)  # 25 active cells


def test_single_row_instances():
    ax1 = GridAxis.cell_centers(1)
    ax3 = GridAxis.cell_centers(3)
    mu = uniform_measure(ax1)
    nu = uniform_measure(ax3)
    eta = product_measure(mu, nu)
    h = load_cost(ax1, ax3, [[3, 1, 2]])
    p = ConstrainedProblem(mu, nu, eta, CapacityField.constant(ax1, ax3, 2), h)
    rep = solve(p)
    # marginals pin the plan: each column gets exactly nu_j
    assert rep.status == "optimal"
    assert rep.plan.cells == ((Fraction(1, 3),) * 3,)
    assert rep.cost == 2
