"""Decide whether a cost is separable on a support set, with certificates.

A cost h is degenerate on a set A when h = u + v there; in that case every
feasible plan has the same cost and optimizers carry no information.  The
dichotomy below either returns the exact split (u, v) or an alternating
cycle whose two matchings have different cost sums, which rules any split
out.  The local certifier checks the discrete mixed difference instead and
is sufficient only.
"""

from fractions import Fraction

from capot import (
    GridAxis,
    SeparableFit,
    SupportSet,
    builtin_cost,
    fit_separable,
    mixed_partial_certify,
    quadruple_scan,
    separable_cost,
)

axis = GridAxis.cell_centers(4)
support = SupportSet.full(4, 4)

# an additive cost splits; the fit is exact on every cell
additive = separable_cost(axis, axis, [0, 1, 3, 6], [2, 2, 5, 7])
(result,) = fit_separable(support, additive)
print("additive cost:", type(result).__name__)
print("  u:", {i: str(v) for i, v in sorted(result.u.items())})
print("  v:", {j: str(v) for j, v in sorted(result.v.items())})
print("  verifies:", result.verify(additive))

# the product cost -xy cannot split: every 2x2 rectangle is a witness
product = builtin_cost("neg_product", axis, axis)
(result,) = fit_separable(support, product)
print()
print("product cost:", type(result).__name__)
print("  rows", result.xs, "cols", result.ys)
print("  diagonal sum", result.sum_diag, " shifted sum", result.sum_shift,
      " gap", result.gap)

scan = quadruple_scan(support, product)
print("  rectangles violating additivity:", len(scan.violations),
      "of", scan.checked)

print()
for name in ("neg_product", "sq_distance", "abs_distance"):
    cert = mixed_partial_certify(builtin_cost(name, axis, axis))
    tag = "certified" if cert.certified else "not certified"
    print(f"{name}: {tag}, |D| range [{cert.min_abs_d}, {cert.max_abs_d}], "
          f"pass fraction {cert.pass_fraction}")
print("abs_distance fails the local check off the diagonal band,")
print("yet the dichotomy above still decides it exactly:")
(result,) = fit_separable(support, builtin_cost("abs_distance", axis, axis))
print("  ", "fits" if isinstance(result, SeparableFit) else
      f"witness with gap {result.gap}")
