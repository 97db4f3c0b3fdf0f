"""Separability analysis of cost matrices on support sets.

A cost h is degenerate on a cell set A when it splits as h_ij = u_i + v_j
there; degeneracy is what allows distinct optimal plans.  This module decides
the dichotomy constructively: for each connected component of A it returns
either exact potentials (u, v) or an alternating cycle whose two cost sums
differ, plus exhaustive/sampled cycle scans and a finite-difference
sufficient-condition certifier for non-degeneracy.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .costs import CostMatrix
from .measures import JointMeasure
from .rationals import frac

__all__ = [
    "SupportSet",
    "SeparableFit",
    "CycleWitness",
    "QuadrupleScanResult",
    "CycleScanResult",
    "MixedPartialCertificate",
    "fit_separable",
    "quadruple_scan",
    "cycle_scan",
    "mixed_partial_certify",
]


@dataclass(frozen=True)
class SupportSet:
    """A nonempty set of (row, column) cells."""

    cells: frozenset[tuple[int, int]]

    def __post_init__(self):
        cells = frozenset((int(i), int(j)) for i, j in self.cells)
        if not cells:
            raise ValueError("support set must be nonempty")
        if any(i < 0 or j < 0 for i, j in cells):
            raise ValueError("cell indices must be nonnegative")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_eta(cls, eta: JointMeasure) -> "SupportSet":
        """Cells where the reference measure is strictly positive."""
        return cls(eta.support())

    @classmethod
    def full(cls, n_x: int, n_y: int) -> "SupportSet":
        return cls(frozenset((i, j) for i in range(n_x) for j in range(n_y)))

    def rows(self) -> tuple[int, ...]:
        return tuple(sorted({i for i, _ in self.cells}))

    def check_within(self, h: CostMatrix):
        n_x, n_y = h.shape
        for i, j in self.cells:
            if i >= n_x or j >= n_y:
                raise ValueError(f"support cell ({i},{j}) outside the {n_x}x{n_y} grid")


@dataclass(frozen=True)
class SeparableFit:
    """Exact potentials u, v with h_ij = u_i + v_j on one component.

    Normalized by u[anchor] = 0 where anchor is the component's smallest row
    index; u and v are unique on the component up to that constant shift.
    """

    component: frozenset[tuple[int, int]]
    u: dict[int, Fraction]
    v: dict[int, Fraction]
    anchor: int

    def verify(self, h: CostMatrix) -> bool:
        return all(h[i, j] == self.u[i] + self.v[j] for i, j in self.component)


@dataclass(frozen=True)
class CycleWitness:
    """Alternating cycle with unequal cost sums, certifying non-separability.

    The cycle visits cells (x_1,y_1), (x_2,y_1), (x_2,y_2), ..., (x_1,y_n):
    sum_diag adds h over the (x_t, y_t) cells, sum_shift over the shifted
    (x_{t+1}, y_t) cells with x_{n+1} = x_1.
    """

    xs: tuple[int, ...]
    ys: tuple[int, ...]
    sum_diag: Fraction
    sum_shift: Fraction

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("witness needs n >= 2 rows and as many columns")

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def gap(self) -> Fraction:
        return self.sum_diag - self.sum_shift

    def cells_diag(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.xs, self.ys))

    def cells_shift(self) -> tuple[tuple[int, int], ...]:
        shifted = self.xs[1:] + self.xs[:1]
        return tuple(zip(shifted, self.ys))

    def verify(self, h: CostMatrix, support: SupportSet | None = None) -> bool:
        """Recompute both sums from raw cost values; check the imbalance."""
        diag = sum(h[c] for c in self.cells_diag())
        shift = sum(h[c] for c in self.cells_shift())
        if diag != self.sum_diag or shift != self.sum_shift:
            return False
        if support is not None:
            cells = set(self.cells_diag()) | set(self.cells_shift())
            if not cells <= support.cells:
                return False
        return diag != shift


def _witness_from_cell_cycle(cycle_cells, h: CostMatrix) -> CycleWitness:
    """Orient a cyclically ordered cell list into a CycleWitness.

    Consecutive cells share alternately a row and a column.  The list is
    rotated so that the first two cells share a column, which makes the
    even-position cells the diagonal ones.
    """
    m = len(cycle_cells)
    assert m % 2 == 0 and m >= 4
    first, second = cycle_cells[0], cycle_cells[1]
    if first[1] != second[1]:
        # first two share a row: rotate by one so they share a column
        cycle_cells = cycle_cells[1:] + cycle_cells[:1]
        first, second = cycle_cells[0], cycle_cells[1]
    assert first[1] == second[1]
    xs = tuple(cycle_cells[t][0] for t in range(0, m, 2))
    ys = tuple(cycle_cells[t][1] for t in range(0, m, 2))
    diag = sum(h[i, j] for i, j in zip(xs, ys))
    shifted = xs[1:] + xs[:1]
    shift = sum(h[i, j] for i, j in zip(shifted, ys))
    return CycleWitness(xs, ys, diag, shift)


def fit_separable(A: SupportSet, h: CostMatrix):
    """Decide separability of h on each connected component of A.

    Cells of A are edges of a bipartite row/column graph.  Starting from each
    component's smallest row with u = 0, potentials propagate along a BFS
    tree (v_j = h_ij - u_i, u_i = h_ij - v_j).  A non-tree cell that violates
    h_ij = u_i + v_j closes an alternating cycle with unequal sums; it is
    returned as the component's witness.  Otherwise the component is
    separable and the exact fit is returned.

    Returns a tuple with one SeparableFit or CycleWitness per component,
    ordered by the component's smallest row index.
    """
    A.check_within(h)
    row_cols: dict[int, list[int]] = {}
    col_rows: dict[int, list[int]] = {}
    for i, j in sorted(A.cells):
        row_cols.setdefault(i, []).append(j)
        col_rows.setdefault(j, []).append(i)
    visited_rows: set[int] = set()
    results = []
    for root in sorted(row_cols):
        if root in visited_rows:
            continue
        u: dict[int, Fraction] = {root: Fraction(0)}
        v: dict[int, Fraction] = {}
        parent: dict[tuple[str, int], tuple[tuple[str, int], tuple[int, int]]] = {}
        component: set[tuple[int, int]] = set()
        witness = None
        queue = deque([("r", root)])
        seen = {("r", root)}
        while queue and witness is None:
            kind, idx = queue.popleft()
            if kind == "r":
                visited_rows.add(idx)
                for j in row_cols.get(idx, ()):
                    component.add((idx, j))
                    if j not in v:
                        v[j] = h[idx, j] - u[idx]
                        parent[("c", j)] = (("r", idx), (idx, j))
                        if ("c", j) not in seen:
                            seen.add(("c", j))
                            queue.append(("c", j))
                    elif h[idx, j] != u[idx] + v[j]:
                        witness = _conflict_witness(parent, ("r", idx), ("c", j), h)
                        break
            else:
                for i in col_rows.get(idx, ()):
                    component.add((i, idx))
                    if i not in u:
                        u[i] = h[i, idx] - v[idx]
                        parent[("r", i)] = (("c", idx), (i, idx))
                        if ("r", i) not in seen:
                            seen.add(("r", i))
                            queue.append(("r", i))
                    elif h[i, idx] != u[i] + v[idx]:
                        witness = _conflict_witness(parent, ("r", i), ("c", idx), h)
                        break
        if witness is not None:
            results.append(witness)
            # the component's remaining rows must not seed new roots
            _mark_component_rows(row_cols, col_rows, root, visited_rows)
        else:
            results.append(
                SeparableFit(frozenset(component), dict(u), dict(v), root)
            )
    return tuple(results)


def _mark_component_rows(row_cols, col_rows, root, visited_rows):
    """Flood the bipartite component of `root`, marking all its rows."""
    queue = deque([("r", root)])
    seen = {("r", root)}
    while queue:
        kind, idx = queue.popleft()
        if kind == "r":
            visited_rows.add(idx)
            for j in row_cols.get(idx, ()):
                if ("c", j) not in seen:
                    seen.add(("c", j))
                    queue.append(("c", j))
        else:
            for i in col_rows.get(idx, ()):
                if ("r", i) not in seen:
                    seen.add(("r", i))
                    queue.append(("r", i))


def _conflict_witness(parent, row_node, col_node, h: CostMatrix) -> CycleWitness:
    """Build the alternating-cycle witness through a conflicting cell.

    The conflicting cell joins row_node and col_node, both already reached
    by the BFS tree; the witness is the tree path between them plus the
    cell.  Its imbalance equals u_i + v_j - h_ij, which is nonzero exactly
    when the consistency check failed.
    """
    def ancestry(node):
        chain = [node]
        while chain[-1] in parent:
            chain.append(parent[chain[-1]][0])
        return chain

    up_r = ancestry(row_node)
    up_c = ancestry(col_node)
    in_r = set(up_r)
    lca = next(node for node in up_c if node in in_r)
    path_cells = []
    node = row_node
    while node != lca:
        node, cell = parent[node]
        path_cells.append(cell)
    tail = []
    node = col_node
    while node != lca:
        node, cell = parent[node]
        tail.append(cell)
    # cells in cyclic order: row_node .. lca .. col_node, then the conflict
    cycle = path_cells + tail[::-1] + [(row_node[1], col_node[1])]
    return _witness_from_cell_cycle(cycle, h)


@dataclass(frozen=True)
class QuadrupleScanResult:
    violations: tuple[CycleWitness, ...]
    checked: int
    mode: str


def quadruple_scan(
    A: SupportSet,
    h: CostMatrix,
    mode: str = "exhaustive",
    count: int | None = None,
    seed: int | None = None,
) -> QuadrupleScanResult:
    """Test rectangles i1<i2, j1<j2 whose four corners all lie in A.

    A violation is h[i1,j1] + h[i2,j2] != h[i1,j2] + h[i2,j1], reported as an
    n = 2 witness.  mode "exhaustive" tests every complete rectangle;
    "sampled" draws `count` random row/column pairs with the given seed and
    tests those that form complete rectangles (attempts are capped at
    50*count so sparse supports terminate).
    """
    A.check_within(h)
    cells = A.cells

    def test(i1, i2, j1, j2):
        diag = h[i1, j1] + h[i2, j2]
        shift = h[i2, j1] + h[i1, j2]
        if diag != shift:
            return CycleWitness((i1, i2), (j1, j2), diag, shift)
        return None

    violations = []
    checked = 0
    if mode == "exhaustive":
        rows = sorted({i for i, _ in cells})
        cols_of = {i: {j for r, j in cells if r == i} for i in rows}
        for a in range(len(rows)):
            for b in range(a + 1, len(rows)):
                i1, i2 = rows[a], rows[b]
                shared = sorted(cols_of[i1] & cols_of[i2])
                for p in range(len(shared)):
                    for q in range(p + 1, len(shared)):
                        checked += 1
                        w = test(i1, i2, shared[p], shared[q])
                        if w is not None:
                            violations.append(w)
    elif mode == "sampled":
        if count is None or count < 1:
            raise ValueError("sampled mode needs a positive count")
        rng = random.Random(seed)
        rows = sorted({i for i, _ in cells})
        cols = sorted({j for _, j in cells})
        if len(rows) >= 2 and len(cols) >= 2:
            attempts = 0
            while checked < count and attempts < 50 * count:
                attempts += 1
                i1, i2 = sorted(rng.sample(rows, 2))
                j1, j2 = sorted(rng.sample(cols, 2))
                if {(i1, j1), (i1, j2), (i2, j1), (i2, j2)} <= cells:
                    checked += 1
                    w = test(i1, i2, j1, j2)
                    if w is not None:
                        violations.append(w)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected exhaustive or sampled")
    return QuadrupleScanResult(tuple(violations), checked, mode)


@dataclass(frozen=True)
class CycleScanResult:
    violations: tuple[CycleWitness, ...]
    checked: int
    partial: bool


def cycle_scan(
    A: SupportSet,
    h: CostMatrix,
    max_n: int,
    budget: int | None = None,
) -> CycleScanResult:
    """Exhaustively test alternating cycles of length 2..max_n within A.

    Only simple cycles (distinct rows, distinct columns) are enumerated;
    closed chains with repeats split into simple ones, so balance of all
    simple cycles implies balance of all chains.  Each geometric cycle is
    tested once: the first row is the smallest and the first column is
    smaller than the last (orientation canonicalization).

    `budget` caps the number of chain extensions; when exceeded the scan
    stops and the result is flagged partial.
    """
    if max_n < 2:
        raise ValueError("max_n must be >= 2")
    A.check_within(h)
    row_cols: dict[int, tuple[int, ...]] = {}
    col_rows: dict[int, tuple[int, ...]] = {}
    for i, j in sorted(A.cells):
        row_cols.setdefault(i, []).append(j)
        col_rows.setdefault(j, []).append(i)
    for i in row_cols:
        row_cols[i] = tuple(row_cols[i])
    for j in col_rows:
        col_rows[j] = tuple(col_rows[j])
    cells = A.cells
    violations = []
    checked = 0
    expansions = 0
    partial = False

    def over_budget():
        return budget is not None and expansions > budget

    def extend(x1, xs, ys):
        nonlocal checked, expansions, partial
        if over_budget():
            partial = True
            return
        k = len(ys)
        if k >= 2 and (x1, ys[-1]) in cells and ys[0] < ys[-1]:
            checked += 1
            diag = sum(h[i, j] for i, j in zip(xs, ys))
            shifted = xs[1:] + [x1]
            shift = sum(h[i, j] for i, j in zip(shifted, ys))
            if diag != shift:
                violations.append(
                    CycleWitness(tuple(xs), tuple(ys), diag, shift)
                )
        if k == max_n:
            return
        used_x, used_y = set(xs), set(ys)
        for nx in col_rows.get(ys[-1], ()):
            if nx <= x1 or nx in used_x:
                continue
            expansions += 1
            if over_budget():
                partial = True
                return
            for ny in row_cols.get(nx, ()):
                if ny in used_y:
                    continue
                xs.append(nx)
                ys.append(ny)
                extend(x1, xs, ys)
                xs.pop()
                ys.pop()
                if partial:
                    return

    for x1 in sorted(row_cols):
        if partial:
            break
        if len(row_cols[x1]) < 2:
            continue  # the first row needs two distinct columns
        for y1 in row_cols[x1]:
            if partial:
                break
            extend(x1, [x1], [y1])
    return CycleScanResult(tuple(violations), checked, partial)


@dataclass(frozen=True)
class MixedPartialCertificate:
    """Result of the second-difference non-degeneracy test.

    D_ij = h(x+d, y+d) - h(x, y+d) - h(x+d, y) + h(x, y) with d =
    delta_steps grid steps.  Certified when |D| >= threshold * dx * dy on at
    least `coverage` of the stencil cells.  Sufficient only: certification
    implies non-separability on the full grid, but a failed certificate
    decides nothing (fit_separable is the exact procedure).
    """

    certified: bool
    min_abs_d: Fraction
    max_abs_d: Fraction
    n_cells: int
    n_pass: int
    pass_fraction: Fraction
    fail_cells: tuple[tuple[int, int], ...]
    delta_steps: int
    delta_x: Fraction
    delta_y: Fraction
    threshold: float
    coverage: float


def mixed_partial_certify(
    h: CostMatrix,
    delta_steps: int = 1,
    threshold: float = 1e-9,
    coverage: float = 0.99,
) -> MixedPartialCertificate:
    """Certify non-degeneracy via exact second differences on a uniform grid.

    Requires both axes uniformly spaced.  All differences are exact
    rationals; the threshold comparison |D| >= threshold * dx * dy uses the
    exact binary value of the float threshold, so results are deterministic.
    """
    if delta_steps < 1:
        raise ValueError("delta_steps must be >= 1")
    if not 0 < coverage <= 1:
        raise ValueError("coverage must be in (0, 1]")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    step_x = h.x_axis.spacing()
    step_y = h.y_axis.spacing()
    n_x, n_y = h.shape
    if n_x <= delta_steps or n_y <= delta_steps:
        raise ValueError("grid too small for the stencil")
    d = delta_steps
    dx, dy = d * step_x, d * step_y
    bar = frac(threshold) * dx * dy
    vals = h.values
    min_abs = max_abs = None
    n_pass = 0
    fail = []
    for i in range(n_x - d):
        for j in range(n_y - d):
            D = vals[i + d][j + d] - vals[i][j + d] - vals[i + d][j] + vals[i][j]
            a = abs(D)
            if min_abs is None or a < min_abs:
                min_abs = a
            if max_abs is None or a > max_abs:
                max_abs = a
            if a >= bar:
                n_pass += 1
            else:
                fail.append((i, j))
    n_cells = (n_x - d) * (n_y - d)
    pass_fraction = Fraction(n_pass, n_cells)
    certified = pass_fraction >= frac(coverage)
    return MixedPartialCertificate(
        certified=certified,
        min_abs_d=min_abs,
        max_abs_d=max_abs,
        n_cells=n_cells,
        n_pass=n_pass,
        pass_fraction=pass_fraction,
        fail_cells=tuple(fail),
        delta_steps=d,
        delta_x=dx,
        delta_y=dy,
        threshold=threshold,
        coverage=coverage,
    )
