"""Structural analysis of solved plans: interior mass, uniqueness, perturbations.

The continuum theory says an optimal plan under a non-degenerate cost puts no
mass strictly between 0 and the cap.  Discretely that becomes: the strictly
interior cells of an optimal vertex form a forest (at most n_x + n_y - 1
cells), cost-neutral feasible cycles certify non-uniqueness, and
marginal-preserving cycle shifts (the discrete analogue of the proof's
perturbation) move between optima or strictly improve a suboptimal plan.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

from .costs import builtin_cost
from .measures import GridAxis, TransportPlan, product_measure, uniform_measure
from .rationals import frac
from .solver import (
    CapacityField,
    ConstrainedProblem,
    SolveReport,
    plan_cost,
    solve,
)

__all__ = [
    "InteriorSet",
    "AlternatingCycle",
    "ImprovingCycleResult",
    "ProfileRow",
    "interior_set",
    "strict_interior_cells",
    "find_zero_cost_cycle",
    "find_improving_cycle",
    "apply_cycle",
    "bang_bang_profile",
]


@dataclass(frozen=True)
class InteriorSet:
    """Cells whose mass sits well inside (0, cap), and their eta-mass."""

    cells: frozenset[tuple[int, int]]
    eta_mass: Fraction
    epsilon: Fraction


@dataclass(frozen=True)
class AlternatingCycle:
    """Marginal-preserving perturbation direction: +eps on plus, -eps on minus.

    Plus and minus cells alternate around a cycle in the bipartite cell
    graph, so every row and column gains exactly as much as it loses; `gain`
    is the cost change per unit of mass shifted.
    """

    cells_plus: tuple[tuple[int, int], ...]
    cells_minus: tuple[tuple[int, int], ...]
    gain: Fraction

    def __post_init__(self):
        if not self.cells_plus or len(self.cells_plus) != len(self.cells_minus):
            raise ValueError("cycle needs equally many plus and minus cells")
        if set(self.cells_plus) & set(self.cells_minus):
            raise ValueError("plus and minus cells must be disjoint")
        rows = Counter(i for i, _ in self.cells_plus)
        rows.subtract(Counter(i for i, _ in self.cells_minus))
        cols = Counter(j for _, j in self.cells_plus)
        cols.subtract(Counter(j for _, j in self.cells_minus))
        if any(rows.values()) or any(cols.values()):
            raise ValueError("plus and minus cells do not balance per row/column")

    @property
    def n(self) -> int:
        return len(self.cells_plus)


@dataclass(frozen=True)
class ImprovingCycleResult:
    """cycle is None and exhaustive=True certifies optimality; None with
    exhaustive=False only means the bounded search found nothing."""

    cycle: AlternatingCycle | None
    exhaustive: bool


def interior_set(
    plan: TransportPlan,
    problem: ConstrainedProblem,
    epsilon=Fraction(1, 10**6),
) -> InteriorSet:
    """Cells with eps*cap < sigma < (1-eps)*cap, and their exact eta-mass.

    epsilon must lie strictly in (0, 1/2); it mirrors the two-sided margin
    the uniqueness proof carves out and keeps reports stable for plans that
    only approximately sit at their bounds.  All comparisons are exact.
    """
    eps = frac(epsilon)
    if not Fraction(0) < eps < Fraction(1, 2):
        raise ValueError("epsilon must be in (0, 1/2)")
    caps = problem.caps
    n_x, n_y = problem.shape
    cells = frozenset(
        (i, j)
        for i in range(n_x)
        for j in range(n_y)
        if caps[i][j] > 0
        and eps * caps[i][j] < plan.cells[i][j] < (1 - eps) * caps[i][j]
    )
    mass = sum((problem.eta.cells[i][j] for i, j in cells), Fraction(0))
    return InteriorSet(cells, mass, eps)


def strict_interior_cells(
    plan: TransportPlan, problem: ConstrainedProblem
) -> frozenset[tuple[int, int]]:
    """Cells with 0 < sigma < cap exactly (the epsilon -> 0 interior)."""
    caps = problem.caps
    n_x, n_y = problem.shape
    return frozenset(
        (i, j)
        for i in range(n_x)
        for j in range(n_y)
        if 0 < plan.cells[i][j] < caps[i][j]
    )


def _residual_arcs(plan: TransportPlan, problem: ConstrainedProblem, cells):
    """Directed residual arcs over row/column nodes for the given cells.

    A cell (i, j) contributes row->col when its mass can grow (sigma < cap)
    and col->row when it can shrink (sigma > 0).  Adjacency lists are sorted
    for determinism.
    """
    caps = problem.caps
    fwd: dict[int, list[tuple[int, tuple[int, int]]]] = {}
    bwd: dict[int, list[tuple[int, tuple[int, int]]]] = {}
    for i, j in sorted(cells):
        if plan.cells[i][j] < caps[i][j]:
            fwd.setdefault(i, []).append((j, (i, j)))
        if plan.cells[i][j] > 0:
            bwd.setdefault(j, []).append((i, (i, j)))
    return fwd, bwd


def _cycle_from_path(path_arcs, problem: ConstrainedProblem) -> AlternatingCycle:
    """Assemble an AlternatingCycle from (direction, cell) arcs."""
    plus = tuple(cell for d, cell in path_arcs if d == "+")
    minus = tuple(cell for d, cell in path_arcs if d == "-")
    h = problem.cost.values
    gain = sum((h[i][j] for i, j in plus), Fraction(0)) - sum(
        (h[i][j] for i, j in minus), Fraction(0)
    )
    return AlternatingCycle(plus, minus, gain)


def find_zero_cost_cycle(
    report: SolveReport, problem: ConstrainedProblem
) -> AlternatingCycle | None:
    """Search for a cost-neutral feasible cycle through reduced-cost-zero cells.

    Restricted to cells with r_ij = h_ij - alpha_i - beta_j = 0, look for a
    directed cycle whose forward cells have sigma < cap and backward cells
    have sigma > 0.  Such a cycle generates a second optimum (the optimal
    plan is NOT unique); if none exists over all zero-reduced-cost cells the
    optimum is unique.  Exact and exhaustive: for each candidate cell the
    complementary path is sought by BFS with that cell removed.
    """
    if report.status != "optimal":
        raise ValueError("uniqueness probe needs an optimal report")
    plan = report.plan
    caps = problem.caps
    h = problem.cost.values
    n_x, n_y = problem.shape
    zero_cells = [
        (i, j)
        for i in range(n_x)
        for j in range(n_y)
        if caps[i][j] > 0 and h[i][j] - report.alpha[i] - report.beta[j] == 0
    ]
    fwd, bwd = _residual_arcs(plan, problem, zero_cells)

    def bfs(start_kind, start, goal_kind, goal, banned):
        """Shortest residual path between row/col nodes avoiding one cell."""
        prev = {(start_kind, start): None}
        queue = deque([(start_kind, start)])
        while queue:
            kind, idx = queue.popleft()
            arcs = fwd if kind == "r" else bwd
            next_kind = "c" if kind == "r" else "r"
            for nxt, cell in arcs.get(idx, ()):
                if cell == banned or (next_kind, nxt) in prev:
                    continue
                prev[(next_kind, nxt)] = ((kind, idx), cell)
                if (next_kind, nxt) == (goal_kind, goal):
                    arcs_out = []
                    node = (goal_kind, goal)
                    while prev[node] is not None:
                        node, cell_ = prev[node]
                        arcs_out.append(("+" if node[0] == "r" else "-", cell_))
                    return arcs_out[::-1]
                queue.append((next_kind, nxt))
        return None

    for cell in zero_cells:
        i, j = cell
        if plan.cells[i][j] < caps[i][j]:
            # use the cell forward; close the loop from its column to its row
            path = bfs("c", j, "r", i, cell)
            if path is not None:
                cycle = _cycle_from_path([("+", cell)] + path, problem)
                assert cycle.gain == 0
                return cycle
        if plan.cells[i][j] > 0:
            path = bfs("r", i, "c", j, cell)
            if path is not None:
                cycle = _cycle_from_path(path + [("-", cell)], problem)
                assert cycle.gain == 0
                return cycle
    return None


def find_improving_cycle(
    plan: TransportPlan,
    problem: ConstrainedProblem,
    max_n: int | None = None,
) -> ImprovingCycleResult:
    """Look for a feasible cycle with strictly negative gain.

    Runs label-correcting (Bellman-Ford) over the residual arcs weighted by
    the cost: forward cell (i,j) costs +h_ij, backward -h_ij.  A negative
    cycle IS an improving perturbation; with unbounded rounds the search is
    complete, so cycle=None with exhaustive=True certifies optimality.
    max_n caps the number of relaxation rounds at 2*max_n (cycles through at
    most max_n plus-cells); a None result is then flagged non-exhaustive.
    """
    caps = problem.caps
    h = problem.cost.values
    n_x, n_y = problem.shape
    all_cells = [
        (i, j) for i in range(n_x) for j in range(n_y) if caps[i][j] > 0
    ]
    arcs = []  # (from_node, to_node, weight, direction, cell)
    for i, j in all_cells:
        if plan.cells[i][j] < caps[i][j]:
            arcs.append((("r", i), ("c", j), h[i][j], "+", (i, j)))
        if plan.cells[i][j] > 0:
            arcs.append((("c", j), ("r", i), -h[i][j], "-", (i, j)))
    nodes = sorted({a[0] for a in arcs} | {a[1] for a in arcs})
    full_rounds = len(nodes)
    rounds = full_rounds if max_n is None else min(2 * max_n, full_rounds)
    exhaustive = rounds >= full_rounds

    dist = {v: Fraction(0) for v in nodes}
    pred: dict = {v: None for v in nodes}
    relaxed_node = None
    for _ in range(rounds + 1):
        relaxed_node = None
        for u, v, w, d, cell in arcs:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                pred[v] = (u, d, cell)
                relaxed_node = v
        if relaxed_node is None:
            return ImprovingCycleResult(None, True)

    # Relaxation persisted through the final pass.  With full rounds that
    # proves a negative cycle; walk predecessor pointers until a node
    # repeats, which closes a predecessor-graph cycle (always of negative
    # total weight).  With bounded rounds the walk may instead run off the
    # end of a chain, which is inconclusive.
    order: dict = {}
    chain = []
    node = relaxed_node
    while node is not None and node not in order:
        order[node] = len(chain)
        chain.append(node)
        entry = pred[node]
        node = entry[0] if entry is not None else None
    if node is None:
        return ImprovingCycleResult(None, False)
    path_arcs = [
        (pred[v][1], pred[v][2]) for v in chain[order[node]:]
    ]
    cycle = _cycle_from_path(path_arcs, problem)
    assert cycle.gain < 0
    return ImprovingCycleResult(cycle, exhaustive)


def apply_cycle(
    plan: TransportPlan,
    problem: ConstrainedProblem,
    cycle: AlternatingCycle,
    eps=None,
) -> TransportPlan:
    """Shift eps of mass around the cycle: +eps on plus cells, -eps on minus.

    Marginals are preserved exactly and the cost changes by exactly
    eps * cycle.gain.  eps defaults to the full available slack, which moves
    the plan onto a face where some cycle cell hits 0 or its cap.
    """
    caps = problem.caps
    slack = None
    for i, j in cycle.cells_plus:
        room = caps[i][j] - plan.cells[i][j]
        slack = room if slack is None or room < slack else slack
    for i, j in cycle.cells_minus:
        room = plan.cells[i][j]
        slack = room if slack is None or room < slack else slack
    if eps is None:
        eps = slack
    eps = frac(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps > slack:
        raise ValueError(f"eps {eps} exceeds the cycle slack {slack}")
    cells = [list(row) for row in plan.cells]
    for i, j in cycle.cells_plus:
        cells[i][j] += eps
    for i, j in cycle.cells_minus:
        cells[i][j] -= eps
    return TransportPlan(plan.x_axis, plan.y_axis, tuple(tuple(r) for r in cells))


@dataclass(frozen=True)
class ProfileRow:
    n: int
    interior_cells: int
    interior_eta_mass: Fraction
    opt_cost: Fraction


def bang_bang_profile(cost_name: str, phi_value, grids) -> tuple[ProfileRow, ...]:
    """Solve a uniform-data family across grid sizes and track interior mass.

    For each n: uniform marginals and product reference on the cell-center
    grid, constant density bound phi_value, builtin cost cost_name.  Records
    the strictly interior cell count, its eta-mass, and the optimal cost.
    The vertex property bounds the interior count by 2n-1, so the eta-mass
    is at most (2n-1)/n^2 and must shrink as the grid refines.
    """
    phi_value = frac(phi_value)
    rows = []
    for n in grids:
        axis = GridAxis.cell_centers(n)
        mu = uniform_measure(axis)
        nu = uniform_measure(axis)
        eta = product_measure(mu, nu)
        phi = CapacityField.constant(axis, axis, phi_value)
        cost = builtin_cost(cost_name, axis, axis)
        problem = ConstrainedProblem(mu, nu, eta, phi, cost)
        report = solve(problem)
        if report.status != "optimal":
            raise RuntimeError(f"profile instance n={n} is infeasible")
        interior = strict_interior_cells(report.plan, problem)
        mass = sum((eta.cells[i][j] for i, j in interior), Fraction(0))
        bound = (2 * n - 1) * max(max(r) for r in eta.cells)
        if mass > bound:
            raise RuntimeError(f"interior eta-mass exceeds the vertex bound at n={n}")
        rows.append(ProfileRow(n, len(interior), mass, report.cost))
    return tuple(rows)
