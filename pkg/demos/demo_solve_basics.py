"""Solve a small capacity-constrained transport problem exactly.

Moves mass between two 3-point marginals under a density bound: the plan
sigma must satisfy 0 <= sigma_ij <= phi * eta_ij cell by cell.  Everything
below is exact rational arithmetic; printed fractions are the true values.
"""

from fractions import Fraction

from capot import (
    CapacityField,
    ConstrainedProblem,
    DiscreteMeasure,
    GridAxis,
    builtin_cost,
    product_measure,
    solve,
)

axis = GridAxis.cell_centers(3)
mu = DiscreteMeasure(axis, (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
nu = DiscreteMeasure(axis, (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)))
eta = product_measure(mu, nu)

problem = ConstrainedProblem(
    mu=mu,
    nu=nu,
    eta=eta,
    phi=CapacityField.constant(axis, axis, Fraction(3)),
    cost=builtin_cost("neg_product", axis, axis),
)

report = solve(problem)
print("status:", report.status)
print("cost:  ", report.cost)
print("plan:")
for row in report.plan.cells:
    print("   ", [str(v) for v in row])
print("dual potentials alpha:", [str(a) for a in report.alpha])
print("dual potentials beta: ", [str(b) for b in report.beta])
print("vertex of the feasible polytope:", report.is_vertex)
print("cells interior/saturated/zero:",
      report.n_interior, report.n_saturated, report.n_zero)

# spread the capacity uniformly: row 0 carries mass 1/2 but can route
# at most 3 * (1/9), so no feasible plan exists
uniform = DiscreteMeasure(axis, (Fraction(1, 3),) * 3)
tight = ConstrainedProblem(
    mu=mu,
    nu=nu,
    eta=product_measure(uniform, uniform),
    phi=CapacityField.constant(axis, axis, Fraction(1)),
    cost=builtin_cost("neg_product", axis, axis),
)
report = solve(tight)
print()
print("with uniform capacity 1/9 per cell the same marginals are", report.status)
fea = report.feasibility
print("max routable mass:", fea.max_mass, " deficit:", fea.deficit)
print("violating cut: rows", list(fea.witness_rows),
      "vs cols", list(fea.witness_cols), " gap", fea.witness_gap)
