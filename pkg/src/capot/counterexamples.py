"""Boundary instances: a product-free self-similar measure and a degenerate cost.

Two constructions bracket the non-degeneracy dichotomy.  The self-similar
(fractal) measure carries a cost whose short alternating cycles all balance
while a length-N cycle does not, so no bounded cycle test can replace the
separable-fit dichotomy off product measures.  The degenerate instance turns
any separable cost into a capacity-constrained problem whose optimum is
provably non-unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .costs import CostMatrix, separable_cost
from .measures import (
    GridAxis,
    JointMeasure,
    TransportPlan,
    marginals,
)
from .nondegeneracy import (
    CycleScanResult,
    CycleWitness,
    SeparableFit,
    SupportSet,
    cycle_scan,
    fit_separable,
)
from .solver import (
    CapacityField,
    ConstrainedProblem,
    brute_force_oracle,
    plan_cost,
    solve,
)
from .structure import AlternatingCycle, apply_cycle, find_zero_cost_cycle

__all__ = [
    "FractalSpec",
    "FractalReport",
    "EscapeBoundReport",
    "DegeneratePreset",
    "NonuniquenessReport",
    "DEGENERATE_PRESETS",
    "fractal_eta",
    "fractal_h",
    "verify_fractal_claims",
    "verify_escape_bound",
    "degenerate_instance",
    "degenerate_preset",
    "verify_nonuniqueness",
]

MAX_FRACTAL_SUPPORT = 4096


@dataclass(frozen=True)
class FractalSpec:
    """Depth-K truncation of the self-similar measure on base-N digit pairs.

    Mass sits on cells all of whose digit pairs lie in S, the diagonal plus
    the shifted subdiagonal of the N x N digit grid.  |S| = 2N, so depth K
    supports (2N)^K cells, each of weight (2N)^-K.
    """

    N: int
    K: int
    max_support: int = field(default=MAX_FRACTAL_SUPPORT)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("base N must be at least 2")
        if self.K < 1:
            raise ValueError("depth K must be at least 1")
        if (2 * self.N) ** self.K > self.max_support:
            raise ValueError(
                f"support size (2N)^K = {(2 * self.N) ** self.K} exceeds "
                f"the verification limit {self.max_support}"
            )

    @property
    def S(self) -> frozenset[tuple[int, int]]:
        """Digit-pair support: {(i,i)} plus {((j+1) mod N, j)}."""
        diag = {(i, i) for i in range(self.N)}
        shift = {((j + 1) % self.N, j) for j in range(self.N)}
        return frozenset(diag | shift)

    @property
    def side(self) -> int:
        """Grid side length N^K."""
        return self.N**self.K

    def digits(self, i: int) -> tuple[int, ...]:
        """Base-N digits of a grid index, most significant first."""
        out = []
        for k in range(self.K):
            out.append((i // self.N ** (self.K - 1 - k)) % self.N)
        return tuple(out)


def fractal_eta(spec: FractalSpec) -> JointMeasure:
    """The truncated self-similar measure on the N^K x N^K cell-center grid.

    A cell (i, j) is supported iff every digit pair (i^(k), j^(k)) lies in
    spec.S; supported cells share the weight (2N)^-K.  Both marginals come
    out uniform because each digit value appears in S exactly twice.
    """
    side = spec.side
    axis = GridAxis.cell_centers(side)
    s = spec.S
    w = Fraction(1, (2 * spec.N) ** spec.K)
    cells = []
    for i in range(side):
        di = spec.digits(i)
        row = []
        for j in range(side):
            dj = spec.digits(j)
            ok = all((di[k], dj[k]) in s for k in range(spec.K))
            row.append(w if ok else Fraction(0))
        cells.append(tuple(row))
    return JointMeasure(axis, axis, tuple(cells))


def fractal_h(spec: FractalSpec) -> CostMatrix:
    """Digit-indicator cost: sum over levels of [i^(k)=0 and j^(k)=0] * 2^-k.

    Defined grid-wide by the same formula, so the matrix is usable by the
    solver everywhere; off the support of fractal_eta the values never enter
    any cost integral.
    """
    side = spec.side
    axis = GridAxis.cell_centers(side)
    rows = []
    for i in range(side):
        di = spec.digits(i)
        row = []
        for j in range(side):
            dj = spec.digits(j)
            v = sum(
                (
                    Fraction(1, 2 ** (k + 1))
                    for k in range(spec.K)
                    if di[k] == 0 and dj[k] == 0
                ),
                Fraction(0),
            )
            row.append(v)
        rows.append(tuple(row))
    return CostMatrix(axis, axis, tuple(rows), f"fractal:N={spec.N},K={spec.K}")


@dataclass(frozen=True)
class FractalReport:
    """Checked facts about one truncated instance."""

    spec: FractalSpec
    support_size: int
    total_mass: Fraction
    marginals_uniform: bool
    short_scan: CycleScanResult
    balanced_below: bool
    witness: CycleWitness | None
    witness_gap: Fraction | None
    components: int
    separable_fits: int
    passed: bool


def verify_fractal_claims(spec: FractalSpec, budget=None) -> FractalReport:
    """Check the three claims that make the instance a counterexample.

    (a) every alternating cycle through fewer than N support rows balances
        exactly (exhaustive scan with max_n = N-1);
    (b) some length-N cycle does not balance, with gap at least 2^-K;
    (c) fit_separable finds a cycle witness on every support component, so
        the cost is certified non-separable on the support.

    Together (a) and (b) show a bounded cycle test with any fixed limit
    below N passes while separability fails, which is exactly why the
    dichotomy cannot be replaced by short-cycle checks off product measures.
    budget caps the number of cycles enumerated per scan (partial results
    fail the report unless the witness was already found).
    """
    eta = fractal_eta(spec)
    h = fractal_h(spec)
    support = SupportSet.from_eta(eta)
    support_size = len(support.cells)
    total = sum(sum(row) for row in eta.cells)
    mu, nu = marginals(
        TransportPlan(eta.x_axis, eta.y_axis, eta.cells)
    )
    side = spec.side
    uniform = all(w == Fraction(1, side) for w in mu.weights) and all(
        w == Fraction(1, side) for w in nu.weights
    )

    short = cycle_scan(support, h, max_n=spec.N - 1, budget=budget)
    balanced_below = not short.violations and not short.partial

    full = cycle_scan(support, h, max_n=spec.N, budget=budget)
    witness = None
    gap = None
    for w in full.violations:
        g = abs(w.gap)
        if gap is None or g > gap:
            witness, gap = w, g
    if witness is not None:
        witness.verify(h, support)

    fits = fit_separable(support, h)
    n_fits = sum(1 for r in fits if isinstance(r, SeparableFit))

    passed = (
        support_size == (2 * spec.N) ** spec.K
        and total == 1
        and uniform
        and balanced_below
        and witness is not None
        and gap >= Fraction(1, 2**spec.K)
        and n_fits == 0
    )
    return FractalReport(
        spec,
        support_size,
        total,
        uniform,
        short,
        balanced_below,
        witness,
        gap,
        len(fits),
        n_fits,
        passed,
    )


@dataclass(frozen=True)
class EscapeBoundReport:
    """Counting step behind the mass bound for candidate separability sets.

    Support cells group into (2N)^(K-1) sibling boxes by their first K-1
    digit pairs.  If every box misses at least one cell of A, then
    eta(A) <= (2N-1)/(2N).  If instead some box lies entirely inside A, that
    box embeds a length-N unbalanced cycle (gap exactly 2^-K), so the cost
    cannot be separable on A.
    """

    eta_mass: Fraction
    bound: Fraction
    escapes_everywhere: bool
    full_box_prefix: tuple[tuple[int, int], ...] | None
    witness: CycleWitness | None


def verify_escape_bound(spec: FractalSpec, cells) -> EscapeBoundReport:
    """Evaluate the per-scale counting argument on one candidate cell set."""
    eta = fractal_eta(spec)
    support = SupportSet.from_eta(eta)
    a = frozenset((int(i), int(j)) for i, j in cells)
    mass = sum((eta.cells[i][j] for i, j in a if (i, j) in support.cells), Fraction(0))
    bound = Fraction(2 * spec.N - 1, 2 * spec.N)

    boxes: dict[tuple, list] = {}
    for i, j in support.cells:
        di, dj = spec.digits(i), spec.digits(j)
        prefix = tuple(zip(di[:-1], dj[:-1]))
        boxes.setdefault(prefix, []).append((i, j))

    full_prefix = None
    for prefix in sorted(boxes):
        if all(cell in a for cell in boxes[prefix]):
            full_prefix = prefix
            break
    escapes = full_prefix is None
    if escapes and mass > bound:
        raise RuntimeError("counting bound violated; box partition is wrong")

    witness = None
    if full_prefix is not None:
        base_i = sum(p[0] * spec.N ** (spec.K - 2 - m) for m, p in enumerate(full_prefix))
        base_j = sum(p[1] * spec.N ** (spec.K - 2 - m) for m, p in enumerate(full_prefix))
        xs = tuple(base_i * spec.N + t for t in range(spec.N))
        ys = tuple(base_j * spec.N + t for t in range(spec.N))
        h = fractal_h(spec)
        diag = sum((h.values[x][y] for x, y in zip(xs, ys)), Fraction(0))
        shift = sum(
            (h.values[xs[(t + 1) % spec.N]][ys[t]] for t in range(spec.N)),
            Fraction(0),
        )
        witness = CycleWitness(xs, ys, diag, shift)
        witness.verify(h, support)
        if abs(witness.gap) != Fraction(1, 2**spec.K):
            raise RuntimeError("embedded box cycle has the wrong gap")
    return EscapeBoundReport(mass, bound, escapes, full_prefix, witness)


def degenerate_instance(
    h: CostMatrix,
    sigma: TransportPlan,
    pi: TransportPlan,
    eta: JointMeasure,
) -> ConstrainedProblem:
    """Build the capacity field that makes both sigma and pi feasible.

    With A the union of the two supports, set Phi = (sigma + pi)/eta on A and
    0 elsewhere; the problem takes sigma's marginals.  Both plans then sit
    inside the feasible set, and when h is separable on A every feasible plan
    costs the same, so the optimum cannot be unique once sigma != pi.
    """
    m_s = marginals(sigma)
    m_p = marginals(pi)
    if m_s[0].weights != m_p[0].weights or m_s[1].weights != m_p[1].weights:
        raise ValueError("sigma and pi must share both marginals")
    n_x, n_y = len(eta.x_axis.points), len(eta.y_axis.points)
    phi_rows = []
    for i in range(n_x):
        row = []
        for j in range(n_y):
            both = sigma.cells[i][j] + pi.cells[i][j]
            if both == 0:
                row.append(Fraction(0))
            elif eta.cells[i][j] == 0:
                raise ValueError(
                    f"plan mass at cell ({i}, {j}) where the reference measure vanishes"
                )
            else:
                row.append(both / eta.cells[i][j])
        phi_rows.append(tuple(row))
    phi = CapacityField(eta.x_axis, eta.y_axis, tuple(phi_rows))
    return ConstrainedProblem(m_s[0], m_s[1], eta, phi, h)


@dataclass(frozen=True)
class DegeneratePreset:
    name: str
    problem: ConstrainedProblem
    sigma: TransportPlan
    pi: TransportPlan
    u: tuple[Fraction, ...]
    v: tuple[Fraction, ...]


DEGENERATE_PRESETS = ("separable-2x2",)


def degenerate_preset(name: str = "separable-2x2") -> DegeneratePreset:
    """Named ready-made degenerate instances.

    separable-2x2: h = u + v with u = (0, 1), v = (0, 2) on the 2x2
    cell-center grid, sigma the diagonal plan, pi the anti-diagonal plan,
    eta uniform.  The derived capacity field is Phi = 2 everywhere, and
    every feasible plan costs exactly 3/2.
    """
    if name != "separable-2x2":
        raise ValueError(f"unknown preset {name!r}; known: {DEGENERATE_PRESETS}")
    axis = GridAxis.cell_centers(2)
    half = Fraction(1, 2)
    quarter = Fraction(1, 4)
    u = (Fraction(0), Fraction(1))
    v = (Fraction(0), Fraction(2))
    h = separable_cost(axis, axis, u, v)
    sigma = TransportPlan(axis, axis, ((half, Fraction(0)), (Fraction(0), half)))
    pi = TransportPlan(axis, axis, ((Fraction(0), half), (half, Fraction(0))))
    eta = JointMeasure(axis, axis, ((quarter, quarter), (quarter, quarter)))
    problem = degenerate_instance(h, sigma, pi, eta)
    return DegeneratePreset(name, problem, sigma, pi, u, v)


@dataclass(frozen=True)
class NonuniquenessReport:
    """Outcome of the constructive uniqueness probe on one problem."""

    verdict: str
    optimal_cost: Fraction
    plan: TransportPlan
    second_plan: TransportPlan | None
    cycle: AlternatingCycle | None
    cost_gap: Fraction | None
    oracle_checked: bool
    oracle_optimal_count: int | None


def verify_nonuniqueness(p: ConstrainedProblem, oracle_max_cells: int = 16) -> NonuniquenessReport:
    """Decide uniqueness of the optimal plan and exhibit a second optimum.

    Solves, then searches the zero-reduced-cost cells for a feasible
    cost-neutral cycle.  Finding one yields a distinct plan of exactly equal
    cost (verdict non-unique, gap 0); finding none certifies the vertex is
    the only optimum (verdict unique).  Small instances are cross-checked
    against exhaustive vertex enumeration.  The "unknown" verdict is
    reserved for callers that skip or truncate the probe; this function
    always decides.
    """
    report = solve(p)
    if report.status != "optimal":
        raise ValueError(f"cannot probe uniqueness of a {report.status} problem")
    cycle = find_zero_cost_cycle(report, p)
    second = None
    gap = None
    if cycle is not None:
        second = apply_cycle(report.plan, p, cycle)
        if second.cells == report.plan.cells:
            raise RuntimeError("zero-cost cycle produced an identical plan")
        gap = plan_cost(p.cost, second) - report.cost
        if gap != 0:
            raise RuntimeError(f"second optimum has nonzero cost gap {gap}")
    verdict = "non-unique" if cycle is not None else "unique"

    n_x, n_y = p.shape
    active = sum(
        1 for i in range(n_x) for j in range(n_y) if p.caps[i][j] > 0
    )
    oracle_checked = active <= oracle_max_cells
    oracle_count = None
    if oracle_checked:
        oracle = brute_force_oracle(p, max_cells=oracle_max_cells)
        oracle_count = len(oracle.optimal_plans)
        if oracle.optimal_cost != report.cost:
            raise RuntimeError("oracle and solver disagree on the optimal cost")
        if (oracle_count >= 2) != (verdict == "non-unique"):
            raise RuntimeError(
                f"oracle counts {oracle_count} optimal vertices but the "
                f"cycle probe says {verdict}"
            )
    return NonuniquenessReport(
        verdict,
        report.cost,
        report.plan,
        second,
        cycle,
        gap,
        oracle_checked,
        oracle_count,
    )
