"""Separable costs make capacity-constrained optima non-unique.

Take any two distinct plans sigma and pi with the same marginals and set
the capacity to sigma + pi wherever either puts mass.  Both plans are then
feasible, and when the cost splits as u + v every feasible plan costs
sum(u * mu) + sum(v * nu): the whole feasible set is optimal.  The probe
below exhibits a second optimum constructively and cross-checks it against
exhaustive vertex enumeration.
"""

from capot import (
    brute_force_oracle,
    degenerate_preset,
    find_zero_cost_cycle,
    solve,
    verify_nonuniqueness,
)

preset = degenerate_preset("separable-2x2")
p = preset.problem
print("cost h = u + v with u =", [str(x) for x in preset.u],
      "and v =", [str(x) for x in preset.v])
print("capacity field phi:")
for row in p.phi.values:
    print("   ", [str(v) for v in row])

report = solve(p)
print()
print("solver's optimal plan (cost", str(report.cost) + "):")
for row in report.plan.cells:
    print("   ", [str(v) for v in row])

cycle = find_zero_cost_cycle(report, p)
print("zero-cost cycle: +", cycle.cells_plus, " -", cycle.cells_minus,
      " gain", cycle.gain)

probe = verify_nonuniqueness(p)
print()
print("verdict:", probe.verdict, " cost gap:", probe.cost_gap)
print("second optimum at the same cost:")
for row in probe.second_plan.cells:
    print("   ", [str(v) for v in row])

oracle = brute_force_oracle(p)
print()
print("exhaustive enumeration:", oracle.vertex_count, "vertices,",
      len(oracle.optimal_plans), "of them optimal at cost",
      str(oracle.optimal_cost))
