"""Explicit unit-vector families for the symmetric inequality I(n, n)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class CircleSpec:
    radius: float
    vertex_count: int
    base_angle: float

    def __post_init__(self):
        if not 0 < self.radius < 1:
            raise ValueError(f"radius must lie in (0, 1), got {self.radius}")
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")

    def planar_points(self) -> np.ndarray:
        step = 2 * math.pi / self.vertex_count
        theta = self.base_angle + step * np.arange(self.vertex_count)
        return self.radius * np.column_stack([np.cos(theta), np.sin(theta)])


THREE_CIRCLES = (
    CircleSpec(0.22, 4, math.pi / 4),
    CircleSpec(0.52, 10, math.pi / 2),
    CircleSpec(0.77, 16, math.pi / 2),
)


def three_circle_planar(circles: tuple[CircleSpec, ...] = THREE_CIRCLES) -> np.ndarray:
    """XY projections of the 30-point configuration, shape (30, 2)."""
    pts = np.vstack([c.planar_points() for c in circles])
    # exact zeros on the axes keep exported coordinates clean
    pts[np.abs(pts) < 1e-15] = 0.0
    return pts


def three_circle_points(circles: tuple[CircleSpec, ...] = THREE_CIRCLES) -> np.ndarray:
    """The planar points lifted to the upper unit hemisphere, shape (30, 3)."""
    xy = three_circle_planar(circles)
    z = np.sqrt(1.0 - np.einsum("ij,ij->i", xy, xy))
    return np.column_stack([xy, z])


def gram_half_vectors(n: int) -> np.ndarray:
    """n unit vectors in R^n with every pairwise inner product equal to 1/2.

    Rows of the Cholesky factor of G = (I + J) / 2.
    """
    if n < 1:
        raise ValueError("n must be positive")
    G = np.full((n, n), 0.5)
    np.fill_diagonal(G, 1.0)
    try:
        L = scipy.linalg.cholesky(G, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"Gram matrix of order {n} is not positive definite") from exc
    # remove rounding in the norms so downstream unit-norm checks are tight
    return L / np.linalg.norm(L, axis=1, keepdims=True)


def det_uniform_offdiag(n: int, a: float, b: float) -> float:
    """Determinant of the n x n matrix with ``a`` on the diagonal and ``b`` elsewhere."""
    if n < 1:
        raise ValueError("n must be positive")
    return (a - b) ** (n - 1) * (a + (n - 1) * b)


def closed_form_symmetric_ratio(n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return 1.5 - 0.5 / n


def planar_csv(points: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "x", "y"])
    for i, (x, y) in enumerate(points[:, :2], start=1):
        writer.writerow([i, repr(float(x)), repr(float(y))])
    return buf.getvalue()
