"""Exact solver for capacity-constrained discrete optimal transport.

The problem: minimize sum_ij h_ij sigma_ij over plans sigma with row sums
mu_i, column sums nu_j, and 0 <= sigma_ij <= c_ij, where the cell capacity is
c_ij = Phi_ij * eta_ij for a bounded density Phi and reference measure eta.

Everything runs in exact arithmetic.  The network is rescaled to integers,
solved by a min-cost-flow engine, optionally reduced to a vertex of the
feasible polytope, and certified: dual potentials (alpha, beta) are recovered
from the residual graph and complementary slackness is checked cell by cell
with Fractions before a report is returned.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import networkx as nx

from .costs import CostMatrix
from .measures import DiscreteMeasure, GridAxis, JointMeasure, TransportPlan
from .rationals import common_denominator, frac

__all__ = [
    "CapacityField",
    "ConstrainedProblem",
    "FeasibilityReport",
    "SolveReport",
    "OracleResult",
    "check_feasible",
    "solve",
    "plan_cost",
    "brute_force_oracle",
    "DEFAULT_ENGINE",
]

# Chosen by benchmark (see tests/test_solver.py): successive shortest paths
# handles the largest supported grids well within budget, and needs no graph
# object churn per solve.
DEFAULT_ENGINE = "ssp"


@dataclass(frozen=True)
class CapacityField:
    """Bounded density Phi >= 0 per cell; capacities are Phi * eta."""

    x_axis: GridAxis
    y_axis: GridAxis
    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        mat = tuple(tuple(frac(x) for x in row) for row in self.values)
        if len(mat) != self.x_axis.n or any(len(r) != self.y_axis.n for r in mat):
            raise ValueError("density matrix does not match the axes")
        if any(x < 0 for row in mat for x in row):
            raise ValueError("density values must be nonnegative")
        object.__setattr__(self, "values", mat)

    @classmethod
    def constant(cls, x_axis: GridAxis, y_axis: GridAxis, value) -> "CapacityField":
        v = frac(value)
        return cls(x_axis, y_axis, ((v,) * y_axis.n,) * x_axis.n)

    def caps(self, eta: JointMeasure) -> tuple[tuple[Fraction, ...], ...]:
        """Cell capacities c_ij = Phi_ij * eta_ij."""
        if eta.shape != (self.x_axis.n, self.y_axis.n):
            raise ValueError("eta does not match the density field")
        return tuple(
            tuple(p * e for p, e in zip(prow, erow))
            for prow, erow in zip(self.values, eta.cells)
        )


@dataclass(frozen=True)
class ConstrainedProblem:
    """Marginals, reference measure, density bound, and cost on one grid."""

    mu: DiscreteMeasure
    nu: DiscreteMeasure
    eta: JointMeasure
    phi: CapacityField
    cost: CostMatrix
    caps: tuple[tuple[Fraction, ...], ...] = field(init=False)

    def __post_init__(self):
        ax, ay = self.mu.axis, self.nu.axis
        for name, (xa, ya) in (
            ("eta", (self.eta.x_axis, self.eta.y_axis)),
            ("phi", (self.phi.x_axis, self.phi.y_axis)),
            ("cost", (self.cost.x_axis, self.cost.y_axis)),
        ):
            if xa != ax or ya != ay:
                raise ValueError(f"{name} axes do not match the marginals")
        object.__setattr__(self, "caps", self.phi.caps(self.eta))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.mu.n, self.nu.n)


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the capacitated marginal-matching max-flow check.

    When infeasible, (witness_rows, witness_cols) violate the cut inequality:
    the rows' supply exceeds the named columns' demand plus all capacity
    leaving the rows toward the remaining columns, by exactly `witness_gap`.
    """

    feasible: bool
    max_mass: Fraction
    deficit: Fraction
    witness_rows: tuple[int, ...] | None = None
    witness_cols: tuple[int, ...] | None = None
    witness_gap: Fraction | None = None


@dataclass(frozen=True)
class SolveReport:
    status: str  # "optimal" or "infeasible"
    engine: str
    feasibility: FeasibilityReport
    plan: TransportPlan | None
    cost: Fraction | None
    alpha: tuple[Fraction, ...] | None
    beta: tuple[Fraction, ...] | None
    is_vertex: bool = False
    n_interior: int = 0
    n_saturated: int = 0
    n_zero: int = 0


@dataclass(frozen=True)
class OracleResult:
    """Exhaustive enumeration of the feasible polytope's vertices."""

    feasible: bool
    optimal_cost: Fraction | None
    optimal_plans: tuple[TransportPlan, ...]
    vertex_count: int


def plan_cost(cost: CostMatrix, plan: TransportPlan) -> Fraction:
    """Exact transport cost sum_ij h_ij sigma_ij."""
    return sum(
        h * s
        for hrow, srow in zip(cost.values, plan.cells)
        for h, s in zip(hrow, srow)
    )


def _scaled_network(problem: ConstrainedProblem):
    """Rescale masses and costs to integers.

    Masses are multiplied by M (lcm of all mass denominators); costs are
    shifted by their minimum and multiplied by L.  Since plans carry total
    mass 1, true cost = (scaled cost)/(M*L) + h_min.
    """
    caps = problem.caps
    M = common_denominator(
        [
            *problem.mu.weights,
            *problem.nu.weights,
            *(c for row in caps for c in row),
        ]
    )
    a = [int(w * M) for w in problem.mu.weights]
    b = [int(w * M) for w in problem.nu.weights]
    C = [[int(c * M) for c in row] for row in caps]
    h = problem.cost.values
    h_min = min(min(row) for row in h)
    L = common_denominator([x - h_min for row in h for x in row])
    W = [[int((x - h_min) * L) for x in row] for row in h]
    return M, L, h_min, a, b, C, W


def check_feasible(problem: ConstrainedProblem) -> FeasibilityReport:
    """Decide whether any plan meets both marginals under the capacities.

    Runs an exact integer max-flow; on failure the minimum cut is converted
    into a violated supply/demand inequality as a certificate.
    """
    M, _, _, a, b, C, _ = _scaled_network(problem)
    n_x, n_y = problem.shape
    G = nx.DiGraph()
    for i, ai in enumerate(a):
        G.add_edge("s", ("r", i), capacity=ai)
    for j, bj in enumerate(b):
        G.add_edge(("c", j), "t", capacity=bj)
    for i in range(n_x):
        for j in range(n_y):
            if C[i][j] > 0:
                G.add_edge(("r", i), ("c", j), capacity=C[i][j])
    cut_value, (source_side, _) = nx.minimum_cut(G, "s", "t")
    max_mass = Fraction(min(cut_value, M), M)
    if cut_value >= M:
        return FeasibilityReport(True, Fraction(1), Fraction(0))
    rows = tuple(sorted(i for kind, i in source_side - {"s"} if kind == "r"))
    cols = tuple(sorted(j for kind, j in source_side - {"s"} if kind == "c"))
    col_set = set(cols)
    gap = (
        sum(problem.mu.weights[i] for i in rows)
        - sum(problem.nu.weights[j] for j in cols)
        - sum(
            problem.caps[i][j]
            for i in rows
            for j in range(n_y)
            if j not in col_set
        )
    )
    assert gap == 1 - max_mass
    return FeasibilityReport(False, max_mass, 1 - max_mass, rows, cols, gap)


def _solve_ssp(n_x, n_y, a, b, C, W):
    """Min-cost flow by successive shortest paths with node potentials.

    All-integer.  Returns {(i, j): flow} for cells with positive capacity.
    """
    n = n_x + n_y + 2
    s, t = 0, n - 1
    to, cap, cst = [], [], []
    g = [[] for _ in range(n)]

    def add(u, v, c, w):
        g[u].append(len(to))
        to.append(v)
        cap.append(c)
        cst.append(w)
        g[v].append(len(to))
        to.append(u)
        cap.append(0)
        cst.append(-w)

    for i, ai in enumerate(a):
        if ai > 0:
            add(s, 1 + i, ai, 0)
    cell_edge = {}
    for i in range(n_x):
        for j in range(n_y):
            if C[i][j] > 0:
                cell_edge[(i, j)] = len(to)
                add(1 + i, 1 + n_x + j, C[i][j], W[i][j])
    for j, bj in enumerate(b):
        if bj > 0:
            add(1 + n_x + j, t, bj, 0)

    total = sum(a)
    # any simple path costs strictly less than this
    inf = 1 + sum(sum(row) for row in W)
    pot = [0] * n
    sent = 0
    while sent < total:
        dist = [inf] * n
        prev = [-1] * n
        dist[s] = 0
        pq = [(0, s)]
        while pq:
            d, u = heapq.heappop(pq)
            if d > dist[u]:
                continue
            pu = pot[u]
            for e in g[u]:
                if cap[e] <= 0:
                    continue
                v = to[e]
                nd = d + cst[e] + pu - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    prev[v] = e
                    heapq.heappush(pq, (nd, v))
        dt = dist[t]
        if dt >= inf:
            raise RuntimeError("network disconnected before demand was met")
        for v in range(n):
            pot[v] += dist[v] if dist[v] < dt else dt
        push = total - sent
        v = t
        while v != s:
            e = prev[v]
            if cap[e] < push:
                push = cap[e]
            v = to[e ^ 1]
        v = t
        while v != s:
            e = prev[v]
            cap[e] -= push
            cap[e ^ 1] += push
            v = to[e ^ 1]
        sent += push
    return {ij: cap[e ^ 1] for ij, e in cell_edge.items()}


def _solve_network_simplex(n_x, n_y, a, b, C, W):
    """Min-cost flow via networkx.network_simplex on the same integer data."""
    G = nx.DiGraph()
    for i, ai in enumerate(a):
        G.add_node(("r", i), demand=-ai)
    for j, bj in enumerate(b):
        G.add_node(("c", j), demand=bj)
    for i in range(n_x):
        for j in range(n_y):
            if C[i][j] > 0:
                G.add_edge(("r", i), ("c", j), capacity=C[i][j], weight=W[i][j])
    _, flow = nx.network_simplex(G)
    return {
        (i, j): flow[("r", i)].get(("c", j), 0)
        for i in range(n_x)
        for j in range(n_y)
        if C[i][j] > 0
    }


_ENGINES = {"ssp": _solve_ssp, "network_simplex": _solve_network_simplex}


def _find_interior_cycle(cells):
    """Find a cycle in the bipartite graph whose edges are the given cells.

    Cells are edges between row and column nodes.  Edges are added to a
    forest in sorted order; the first edge closing a cycle is returned
    together with the tree path between its endpoints, as a cyclically
    ordered list of cells.  Returns None if the cells form a forest.
    """
    parent = {}

    def find(x):
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        return root

    adj = {}
    for (i, j) in sorted(cells):
        u, v = ("r", i), ("c", j)
        ru, rv = find(u), find(v)
        if ru == rv:
            # BFS path u..v through the forest built so far
            prev = {u: (None, None)}
            queue = deque([u])
            while v not in prev:
                w = queue.popleft()
                for nbr, cell in adj.get(w, ()):
                    if nbr not in prev:
                        prev[nbr] = (w, cell)
                        queue.append(nbr)
            path = []
            w = v
            while w != u:
                w, cell = prev[w]
                path.append(cell)
            path.reverse()
            path.append((i, j))
            return path
        parent[ru] = rv
        adj.setdefault(u, []).append((v, (i, j)))
        adj.setdefault(v, []).append((u, (i, j)))
    return None


def _cycle_signs(cycle_cells):
    """Alternating +1/-1 signs around a bipartite cycle of cells.

    Consecutive cells share alternately a row and a column, so alternating
    signs preserve both marginals when mass moves around the cycle.
    """
    signs = [1 if k % 2 == 0 else -1 for k in range(len(cycle_cells))]
    # sanity: consecutive cells must share a node
    m = len(cycle_cells)
    for k in range(m):
        a_, b_ = cycle_cells[k], cycle_cells[(k + 1) % m]
        if a_[0] != b_[0] and a_[1] != b_[1]:
            raise ValueError("cells do not form an alternating cycle")
    return signs


def _reduce_to_vertex(C, W, flows):
    """Cancel zero-gain cycles among strictly interior cells, in place.

    An optimal flow whose interior cells contain a cycle is a convex mix of
    optimal vertices; pushing the bottleneck around the cycle (the direction
    is cost-neutral at an optimum) removes at least one interior cell per
    pass, ending at a vertex without changing cost or marginals.
    """
    while True:
        interior = [ij for ij, f in flows.items() if 0 < f < C[ij[0]][ij[1]]]
        cycle = _find_interior_cycle(interior)
        if cycle is None:
            return
        signs = _cycle_signs(cycle)
        gain = sum(s * W[i][j] for s, (i, j) in zip(signs, cycle))
        if gain != 0:
            raise RuntimeError("interior cycle with nonzero gain: flow not optimal")
        push = None
        for s, (i, j) in zip(signs, cycle):
            room = C[i][j] - flows[(i, j)] if s > 0 else flows[(i, j)]
            if push is None or room < push:
                push = room
        for s, (i, j) in zip(signs, cycle):
            flows[(i, j)] += s * push


def _recover_scaled_potentials(n_x, n_y, C, W, flows):
    """Shortest distances from an all-zeros source over the residual graph.

    Arcs: row_i -> col_j with weight W_ij while the cell is unsaturated, and
    col_j -> row_i with weight -W_ij while it carries flow.  An optimal flow
    admits no negative cycle, so label-correcting converges; the distances
    turn into dual potentials.
    """
    n = n_x + n_y
    arcs = [[] for _ in range(n)]
    for (i, j), f in flows.items():
        if f < C[i][j]:
            arcs[i].append((n_x + j, W[i][j]))
        if f > 0:
            arcs[n_x + j].append((i, -W[i][j]))
    dist = [0] * n
    in_queue = [True] * n
    pops = [0] * n
    q = deque(range(n))
    while q:
        u = q.popleft()
        in_queue[u] = False
        pops[u] += 1
        if pops[u] > n + 1:
            raise RuntimeError("negative residual cycle: flow not optimal")
        du = dist[u]
        for v, w in arcs[u]:
            if du + w < dist[v]:
                dist[v] = du + w
                if not in_queue[v]:
                    in_queue[v] = True
                    q.append(v)
    return dist


def _verify_optimal(problem, sigma, alpha, beta):
    """Exact certificate check; raises RuntimeError on any violation."""
    n_x, n_y = problem.shape
    caps = problem.caps
    h = problem.cost.values
    for i in range(n_x):
        if sum(sigma[i]) != problem.mu.weights[i]:
            raise RuntimeError(f"row {i} marginal violated")
    for j in range(n_y):
        if sum(sigma[i][j] for i in range(n_x)) != problem.nu.weights[j]:
            raise RuntimeError(f"column {j} marginal violated")
    dual_penalty = Fraction(0)
    for i in range(n_x):
        for j in range(n_y):
            s, c = sigma[i][j], caps[i][j]
            if s < 0 or s > c:
                raise RuntimeError(f"cell ({i},{j}) outside [0, cap]")
            r = h[i][j] - alpha[i] - beta[j]
            if r > 0 and s != 0:
                raise RuntimeError(f"slackness violated at ({i},{j}): r > 0, sigma > 0")
            if r < 0 and s != c:
                raise RuntimeError(f"slackness violated at ({i},{j}): r < 0, sigma < cap")
            if r < 0:
                dual_penalty += r * c
    primal = sum(
        h[i][j] * sigma[i][j] for i in range(n_x) for j in range(n_y)
    )
    dual = (
        sum(a * m for a, m in zip(alpha, problem.mu.weights))
        + sum(bt * m for bt, m in zip(beta, problem.nu.weights))
        + dual_penalty
    )
    if primal != dual:
        raise RuntimeError("primal and dual objectives disagree")
    return primal


def solve(
    problem: ConstrainedProblem,
    engine: str = "auto",
    reduce_to_vertex: bool = True,
) -> SolveReport:
    """Solve the constrained problem exactly and certify the result.

    Returns a report with status "infeasible" (and a cut witness) or
    "optimal" with the plan, its cost, and dual potentials satisfying
    complementary slackness.  With reduce_to_vertex the plan is a vertex of
    the feasible polytope: its strictly interior cells form a forest.
    """
    if engine == "auto":
        engine = DEFAULT_ENGINE
    if engine not in _ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {sorted(_ENGINES)}")
    feas = check_feasible(problem)
    if not feas.feasible:
        return SolveReport(
            status="infeasible",
            engine=engine,
            feasibility=feas,
            plan=None,
            cost=None,
            alpha=None,
            beta=None,
        )
    n_x, n_y = problem.shape
    M, L, h_min, a, b, C, W = _scaled_network(problem)
    flows = _ENGINES[engine](n_x, n_y, a, b, C, W)
    if reduce_to_vertex:
        _reduce_to_vertex(C, W, flows)
    dist = _recover_scaled_potentials(n_x, n_y, C, W, flows)
    alpha = tuple(h_min - Fraction(dist[i], L) for i in range(n_x))
    beta = tuple(Fraction(dist[n_x + j], L) for j in range(n_y))
    sigma = [
        [Fraction(flows.get((i, j), 0), M) for j in range(n_y)]
        for i in range(n_x)
    ]
    cost = _verify_optimal(problem, sigma, alpha, beta)
    caps = problem.caps
    n_interior = n_saturated = n_zero = 0
    for i in range(n_x):
        for j in range(n_y):
            s, c = sigma[i][j], caps[i][j]
            if s == 0:
                n_zero += 1
            elif s == c:
                n_saturated += 1
            else:
                n_interior += 1
    interior = [
        (i, j)
        for i in range(n_x)
        for j in range(n_y)
        if 0 < sigma[i][j] < caps[i][j]
    ]
    is_vertex = _find_interior_cycle(interior) is None
    plan = TransportPlan(
        problem.mu.axis, problem.nu.axis, tuple(tuple(row) for row in sigma)
    )
    return SolveReport(
        status="optimal",
        engine=engine,
        feasibility=feas,
        plan=plan,
        cost=cost,
        alpha=alpha,
        beta=beta,
        is_vertex=is_vertex,
        n_interior=n_interior,
        n_saturated=n_saturated,
        n_zero=n_zero,
    )


class _UnionFind:
    """Union by rank with an undo stack (no path compression)."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.trail = []

    def find(self, x):
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, x, y):
        """Join the sets of x and y; False if already joined (cycle)."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.trail.append((ry, rx, self.rank[rx]))
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        return True

    def mark(self):
        return len(self.trail)

    def rollback(self, mark):
        while len(self.trail) > mark:
            child, root, old_rank = self.trail.pop()
            self.parent[child] = child
            self.rank[root] = old_rank


def _row_patterns(mu_i, caps_row):
    """Admissible per-row cell-state assignments for the vertex enumeration.

    Each positive-capacity cell is pinned low (0), pinned high (cap), or free
    (strictly interior).  A pattern survives if the pinned mass can be
    completed to the row marginal: exactly, when nothing is free; with room
    to spare on both sides, otherwise.  Returns (pinned, high_cols,
    free_cols) triples; masses are scaled integers.
    """
    active = [j for j, c in enumerate(caps_row) if c > 0]
    patterns = []
    for states in product((0, 1, 2), repeat=len(active)):
        pinned = 0
        high, free = [], []
        free_cap = 0
        for j, st in zip(active, states):
            if st == 1:
                pinned += caps_row[j]
                high.append(j)
            elif st == 2:
                free.append(j)
                free_cap += caps_row[j]
        if not free:
            if pinned != mu_i:
                continue
        elif not pinned < mu_i < pinned + free_cap:
            continue
        patterns.append((pinned, tuple(high), tuple(free)))
    return patterns


def _solve_free_forest(caps, free_cells, row_resid, col_resid):
    """Assign strictly interior masses to the free cells, or None.

    The free cells form a forest over row/column nodes; leaf elimination
    determines every value.  Fails (returns None) if any value is not
    strictly inside (0, cap) or a node's residual does not close to zero.
    """
    values = {}
    degree = {}
    incident = {}
    resid = {}
    for i, r in enumerate(row_resid):
        resid[("r", i)] = r
    for j, r in enumerate(col_resid):
        resid[("c", j)] = r
    for (i, j) in free_cells:
        for node in (("r", i), ("c", j)):
            degree[node] = degree.get(node, 0) + 1
            incident.setdefault(node, set()).add((i, j))
    leaves = deque(node for node, d in degree.items() if d == 1)
    remaining = set(free_cells)
    while leaves:
        node = leaves.popleft()
        cells = incident[node] & remaining
        if not cells:
            continue
        (cell,) = cells
        i, j = cell
        v = resid[node]
        if not 0 < v < caps[i][j]:
            return None
        values[cell] = v
        resid[node] = 0  # the node's last cell takes its whole residual
        remaining.discard(cell)
        other = ("c", j) if node[0] == "r" else ("r", i)
        resid[other] -= v
        degree[other] -= 1
        if degree[other] == 1:
            leaves.append(other)
    if remaining:
        return None  # cycle: caller's forest bookkeeping failed
    # nodes touched by free cells must close exactly; untouched rows closed
    # by the row patterns, untouched columns checked by the caller
    for node in degree:
        if resid[node] != 0:
            return None
    return values


def brute_force_oracle(problem: ConstrainedProblem, max_cells: int = 16) -> OracleResult:
    """Enumerate every vertex of the feasible polytope and take the best.

    A plan is a vertex exactly when its strictly interior cells form a forest
    in the bipartite row/column graph, so vertices are enumerated by
    assigning each positive-capacity cell a state (low, high, free) with the
    free cells kept acyclic, then solving for the free masses.  Each vertex
    is produced exactly once.  Intended as an independent check for small
    instances; refuses more than max_cells positive-capacity cells.
    """
    n_x, n_y = problem.shape
    M, L, h_min, a, b, C, W = _scaled_network(problem)
    n_active = sum(1 for row in C for c in row if c > 0)
    if n_active > max_cells:
        raise ValueError(f"{n_active} active cells exceed the bound {max_cells}")

    row_patterns = []
    for i in range(n_x):
        pats = _row_patterns(a[i], C[i])
        if not pats:
            return OracleResult(False, None, (), 0)
        row_patterns.append(pats)
    order = sorted(range(n_x), key=lambda i: len(row_patterns[i]))
    # capacity still to come per column after DFS depth k, for interval pruning
    col_rest = [[0] * n_y for _ in range(n_x + 1)]
    for k in range(n_x - 1, -1, -1):
        for j in range(n_y):
            col_rest[k][j] = col_rest[k + 1][j] + C[order[k]][j]
    uf = _UnionFind(n_x + n_y)
    col_pinned = [0] * n_y
    col_free_cap = [0] * n_y
    best = {"cost": None, "plans": [], "count": 0}
    chosen = [None] * n_x

    def leaf():
        free_cells = []
        high_mass = [[0] * n_y for _ in range(n_x)]
        for i in range(n_x):
            pinned, high, free = chosen[i]
            for j in high:
                high_mass[i][j] = C[i][j]
            free_cells.extend((i, j) for j in free)
        row_resid = [a[i] - sum(high_mass[i]) for i in range(n_x)]
        col_resid = [
            b[j] - sum(high_mass[i][j] for i in range(n_x)) for j in range(n_y)
        ]
        free_set = set(free_cells)
        for j in range(n_y):
            if col_resid[j] != 0 and not any((i, j) in free_set for i in range(n_x)):
                return
        values = _solve_free_forest(C, free_cells, row_resid, col_resid)
        if values is None:
            return
        best["count"] += 1
        scaled_cost = sum(
            W[i][j] * high_mass[i][j] for i in range(n_x) for j in range(n_y)
        ) + sum(W[i][j] * v for (i, j), v in values.items())
        if best["cost"] is not None and scaled_cost > best["cost"]:
            return
        cells = tuple(
            tuple(
                Fraction(high_mass[i][j] + values.get((i, j), 0), M)
                for j in range(n_y)
            )
            for i in range(n_x)
        )
        plan = TransportPlan(problem.mu.axis, problem.nu.axis, cells)
        if best["cost"] is None or scaled_cost < best["cost"]:
            best["cost"] = scaled_cost
            best["plans"] = [plan]
        else:
            best["plans"].append(plan)

    def descend(k):
        if k == n_x:
            leaf()
            return
        i = order[k]
        rest = col_rest[k + 1]
        for pinned, high, free in row_patterns[i]:
            mark = uf.mark()
            ok = True
            for j in free:
                if not uf.union(i, n_x + j):
                    ok = False
                    break
            if ok:
                for j in high:
                    col_pinned[j] += C[i][j]
                for j in free:
                    col_free_cap[j] += C[i][j]
                for j in range(n_y):
                    if col_pinned[j] > b[j]:
                        ok = False
                        break
                    if col_pinned[j] + col_free_cap[j] + rest[j] < b[j]:
                        ok = False
                        break
                if ok:
                    chosen[i] = (pinned, high, free)
                    descend(k + 1)
                    chosen[i] = None
                for j in high:
                    col_pinned[j] -= C[i][j]
                for j in free:
                    col_free_cap[j] -= C[i][j]
            uf.rollback(mark)

    descend(0)
    if best["count"] == 0:
        return OracleResult(False, None, (), 0)
    cost = Fraction(best["cost"], M * L) + h_min
    return OracleResult(True, cost, tuple(best["plans"]), best["count"])
