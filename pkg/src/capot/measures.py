"""Exact discrete measures on 1-D grids and their products.

Everything here is immutable and rational: weights are `fractions.Fraction`
values validated to sum to exactly 1, so downstream tie and uniqueness tests
never see rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rationals import frac

__all__ = [
    "GridAxis",
    "DiscreteMeasure",
    "JointMeasure",
    "TransportPlan",
    "uniform_measure",
    "product_measure",
    "marginals",
]


@dataclass(frozen=True)
class GridAxis:
    """Strictly increasing rational coordinates in [0, 1]."""

    points: tuple[Fraction, ...]

    def __post_init__(self):
        pts = tuple(frac(p) for p in self.points)
        if len(pts) < 1:
            raise ValueError("axis needs at least one point")
        for a, b in zip(pts, pts[1:]):
            if not a < b:
                raise ValueError("axis points must be strictly increasing")
        if pts[0] < 0 or pts[-1] > 1:
            raise ValueError("axis points must lie in [0, 1]")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @classmethod
    def cell_centers(cls, n: int) -> "GridAxis":
        """Default grid: centers (i + 1/2)/n of n equal cells of [0, 1]."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return cls(tuple(Fraction(2 * i + 1, 2 * n) for i in range(n)))

    def spacing(self) -> Fraction:
        """Common step of a uniformly spaced axis; error if non-uniform."""
        if self.n < 2:
            raise ValueError("spacing needs at least two points")
        step = self.points[1] - self.points[0]
        for a, b in zip(self.points, self.points[1:]):
            if b - a != step:
                raise ValueError("axis is not uniformly spaced")
        return step


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability weights on the points of a grid axis."""

    axis: GridAxis
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(frac(x) for x in self.weights)
        if len(w) != self.axis.n:
            raise ValueError("one weight per axis point required")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if sum(w) != 1:
            raise ValueError(f"weights must sum to exactly 1, got {sum(w)}")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.axis.n


def _frozen_matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    mat = tuple(tuple(frac(x) for x in row) for row in rows)
    if not mat or not mat[0]:
        raise ValueError("matrix must be nonempty")
    width = len(mat[0])
    if any(len(row) != width for row in mat):
        raise ValueError("matrix rows must have equal length")
    return mat


@dataclass(frozen=True)
class JointMeasure:
    """Probability weights on the cells of a product grid."""

    x_axis: GridAxis
    y_axis: GridAxis
    cells: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        mat = _frozen_matrix(self.cells)
        if len(mat) != self.x_axis.n or len(mat[0]) != self.y_axis.n:
            raise ValueError("cell matrix does not match the axes")
        if any(x < 0 for row in mat for x in row):
            raise ValueError("cell weights must be nonnegative")
        total = sum(x for row in mat for x in row)
        if total != 1:
            raise ValueError(f"cell weights must sum to exactly 1, got {total}")
        object.__setattr__(self, "cells", mat)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_axis.n, self.y_axis.n)

    def support(self) -> frozenset[tuple[int, int]]:
        """Cells with strictly positive weight."""
        return frozenset(
            (i, j)
            for i, row in enumerate(self.cells)
            for j, w in enumerate(row)
            if w > 0
        )


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative cell masses with total mass 1 on a product grid."""

    x_axis: GridAxis
    y_axis: GridAxis
    cells: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        mat = _frozen_matrix(self.cells)
        if len(mat) != self.x_axis.n or len(mat[0]) != self.y_axis.n:
            raise ValueError("cell matrix does not match the axes")
        if any(x < 0 for row in mat for x in row):
            raise ValueError("plan masses must be nonnegative")
        total = sum(x for row in mat for x in row)
        if total != 1:
            raise ValueError(f"plan masses must sum to exactly 1, got {total}")
        object.__setattr__(self, "cells", mat)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x_axis.n, self.y_axis.n)


def uniform_measure(axis: GridAxis) -> DiscreteMeasure:
    """Equal weight 1/n on every axis point."""
    w = Fraction(1, axis.n)
    return DiscreteMeasure(axis, (w,) * axis.n)


def product_measure(eta1: DiscreteMeasure, eta2: DiscreteMeasure) -> JointMeasure:
    """Exact product: cell (i, j) gets eta1_i * eta2_j."""
    cells = tuple(tuple(a * b for b in eta2.weights) for a in eta1.weights)
    return JointMeasure(eta1.axis, eta2.axis, cells)


def marginals(plan: TransportPlan) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Exact row-sum and column-sum measures of a plan."""
    row_sums = tuple(sum(row) for row in plan.cells)
    col_sums = tuple(sum(col) for col in zip(*plan.cells))
    return (
        DiscreteMeasure(plan.x_axis, row_sums),
        DiscreteMeasure(plan.y_axis, col_sums),
    )
