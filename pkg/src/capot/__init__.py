"""Exact tools for capacity-constrained discrete optimal transport.

Plans live on finite grids with cell masses bounded by cap = phi * eta; all
solver, certification, and perturbation arithmetic is exact rational.  The
package solves such problems to provable optimality, decides whether a cost
is separable (u(x) + v(y)) on a support set, analyzes the bang-bang
structure and uniqueness of optima, and constructs the boundary instances
that separate those behaviors.
"""

from .costs import (
    BUILTIN_COSTS,
    CostMatrix,
    builtin_cost,
    load_cost,
    multiplicative_cost,
    separable_cost,
)
from .counterexamples import (
    DEGENERATE_PRESETS,
    DegeneratePreset,
    EscapeBoundReport,
    FractalReport,
    FractalSpec,
    NonuniquenessReport,
    degenerate_instance,
    degenerate_preset,
    fractal_eta,
    fractal_h,
    verify_escape_bound,
    verify_fractal_claims,
    verify_nonuniqueness,
)
from .io import (
    ProblemFormatError,
    dump_problem,
    load_problem,
    plan_csv_text,
    read_plan_csv,
    read_support_csv,
    write_plan_csv,
)
from .measures import (
    DiscreteMeasure,
    GridAxis,
    JointMeasure,
    TransportPlan,
    marginals,
    product_measure,
    uniform_measure,
)
from .nondegeneracy import (
    CycleScanResult,
    CycleWitness,
    MixedPartialCertificate,
    QuadrupleScanResult,
    SeparableFit,
    SupportSet,
    cycle_scan,
    fit_separable,
    mixed_partial_certify,
    quadruple_scan,
)
from .rationals import common_denominator, frac, frac_decimal, frac_str
from .solver import (
    CapacityField,
    ConstrainedProblem,
    FeasibilityReport,
    OracleResult,
    SolveReport,
    brute_force_oracle,
    check_feasible,
    plan_cost,
    solve,
)
from .structure import (
    AlternatingCycle,
    ImprovingCycleResult,
    InteriorSet,
    ProfileRow,
    apply_cycle,
    bang_bang_profile,
    find_improving_cycle,
    find_zero_cost_cycle,
    interior_set,
    strict_interior_cells,
)

__version__ = "0.1.0"
