"""A self-similar measure on which every short cycle test is blind.

The support lives on base-N digit pairs drawn from a 2N-element set S; the
cost charges 2^-(k+1) whenever the k-th digits of both coordinates are 0.
Every alternating cycle through fewer than N rows of the support balances
exactly, so a bounded scan reports nothing, while one length-N cycle has a
gap of at least 2^-K.  No product measure behaves this way: there, 2x2
rectangles already decide separability.
"""

from capot import FractalSpec, cycle_scan, fit_separable, fractal_eta, fractal_h
from capot.nondegeneracy import SupportSet

for n, k in ((3, 1), (3, 2), (4, 1)):
    spec = FractalSpec(n, k)
    eta = fractal_eta(spec)
    h = fractal_h(spec)
    support = SupportSet.from_eta(eta)
    print(f"N={n} K={k}: grid {spec.side}x{spec.side}, "
          f"{len(support.cells)} support cells of weight 1/{(2 * n) ** k}")

    short = cycle_scan(support, h, max_n=n - 1)
    print(f"  cycles up to length {n - 1}: {short.checked} checked, "
          f"{len(short.violations)} unbalanced")

    full = cycle_scan(support, h, max_n=n)
    worst = max(full.violations, key=lambda w: abs(w.gap))
    print(f"  length-{n} cycles: {len(full.violations)} unbalanced, "
          f"worst gap {worst.gap}")
    print(f"    rows {worst.xs} cols {worst.ys}")

    fits = fit_separable(support, h)
    print(f"  separable fits on {len(fits)} component(s): "
          f"{sum(1 for r in fits if not hasattr(r, 'gap'))}")
    print()

print("a scan capped below N passes while the cost is provably not")
print("separable: bounded cycle tests cannot replace the dichotomy here.")
