"""Optimal plans push against their bounds as the grid refines.

With uniform data, constant phi, and the strictly non-separable cost -xy,
every optimal vertex has at most 2n-1 cells strictly between 0 and the
capacity, so the eta-mass of that interior is at most (2n-1)/n^2 and
vanishes under refinement: in the limit the optimizer only takes the
values 0 and phi * eta (bang-bang).
"""

from fractions import Fraction

from capot import bang_bang_profile

rows = bang_bang_profile("neg_product", Fraction(2), (4, 8, 16, 32, 64))

print(f"{'n':>4} {'interior cells':>15} {'bound 2n-1':>11} "
      f"{'interior eta-mass':>18} {'bound (2n-1)/n^2':>17} {'opt cost':>12}")
for r in rows:
    bound_cells = 2 * r.n - 1
    bound_mass = Fraction(2 * r.n - 1, r.n * r.n)
    print(f"{r.n:>4} {r.interior_cells:>15} {bound_cells:>11} "
          f"{str(r.interior_eta_mass):>18} {str(bound_mass):>17} "
          f"{str(r.opt_cost):>12}")

print()
print("the mass bound shrinks like 2/n; whatever the interior does on a")
print("fixed grid, refinement forces the plan toward its bounds.")
