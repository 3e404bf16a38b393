"""One-dimensional meshes on [-R, R] with P1 or P2 node layouts.

Nodes are numbered left to right; for P2 the midpoint of every element sits
between its two vertices, so element ``e`` owns nodes ``2e, 2e+1, 2e+2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from lelandfem.model import default_half_width


@dataclass(frozen=True, eq=False)
class Mesh1D:
    order: int
    element_edges: np.ndarray

    def __post_init__(self) -> None:
        if self.order not in (1, 2):
            raise ValueError(f"element order must be 1 or 2, got {self.order}")
        edges = np.asarray(self.element_edges, dtype=float)
        if edges.ndim != 1 or edges.size < 3:
            raise ValueError("a mesh needs at least two elements")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("element edges must be strictly increasing")
        if not math.isclose(edges[0], -edges[-1], rel_tol=1e-12, abs_tol=1e-14):
            raise ValueError("mesh must span a symmetric interval [-R, R]")
        edges.setflags(write=False)
        object.__setattr__(self, "element_edges", edges)

    @property
    def R(self) -> float:
        return float(self.element_edges[-1])

    @property
    def n_elements(self) -> int:
        return self.element_edges.size - 1

    @cached_property
    def h(self) -> np.ndarray:
        return np.diff(self.element_edges)

    @cached_property
    def nodes(self) -> np.ndarray:
        e = self.element_edges
        if self.order == 1:
            x = e.copy()
        else:
            x = np.empty(2 * e.size - 1)
            x[0::2] = e
            x[1::2] = 0.5 * (e[:-1] + e[1:])
        x.setflags(write=False)
        return x

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def boundary_ids(self) -> tuple[int, int]:
        return 0, self.n_nodes - 1

    @property
    def interior(self) -> slice:
        return slice(1, self.n_nodes - 1)

    @cached_property
    def connectivity(self) -> np.ndarray:
        """(n_elements, order + 1) global node indices, local order left, [mid,] right."""
        e = np.arange(self.n_elements)
        if self.order == 1:
            return np.stack([e, e + 1], axis=1)
        return np.stack([2 * e, 2 * e + 1, 2 * e + 2], axis=1)

    @property
    def half_bandwidth(self) -> int:
        return self.order

    @property
    def h_max(self) -> float:
        return float(self.h.max())

    @property
    def h_min(self) -> float:
        return float(self.h.min())

    def node_index(self, x: float, tol: float = 1e-9) -> int | None:
        """Index of the node at ``x``, or None when no node is there."""
        i = int(np.argmin(np.abs(self.nodes - x)))
        return i if abs(self.nodes[i] - x) <= tol * max(1.0, abs(x)) else None


def build_uniform(R: float, n_elements: int, order: int = 1) -> Mesh1D:
    if n_elements < 2:
        raise ValueError(f"need at least 2 elements, got {n_elements}")
    if R <= 0:
        raise ValueError(f"half-width must be positive, got {R}")
    return Mesh1D(order, np.linspace(-R, R, n_elements + 1))


def build_graded(edges, order: int = 1) -> Mesh1D:
    return Mesh1D(order, np.asarray(edges, dtype=float))


def build_aligned(h: float, K: float, order: int = 1, R_min: float | None = None) -> Mesh1D:
    """Uniform mesh on [-R, R] with an element edge exactly at x = ln K.

    A symmetric uniform mesh has vertices at multiples of h/2 only when 2R/h is
    even, so h is nudged to 2|ln K|/j with j = round(2|ln K|/h) (a relative
    change below h/|ln K|), and R >= R_min is then the smallest half-width whose
    element count has the parity of j.
    """
    if h <= 0:
        raise ValueError(f"element size must be positive, got {h}")
    log_k = math.log(K)
    if R_min is None:
        R_min = default_half_width(K)
    if R_min <= abs(log_k):
        raise ValueError("R_min must exceed |ln K|")
    if log_k == 0.0:
        h_adj, j = h, 0
    else:
        j = max(1, round(2 * abs(log_k) / h))
        h_adj = 2 * abs(log_k) / j
    n = math.ceil(2 * R_min / h_adj - 1e-9)
    if (n - j) % 2:
        n += 1
    n = max(n, 2)
    R = 0.5 * n * h_adj
    edges = h_adj * (np.arange(n + 1) - 0.5 * n)
    if j:
        edges[(n + j) // 2 if log_k > 0 else (n - j) // 2] = log_k
    edges[0], edges[-1] = -R, R
    return Mesh1D(order, edges)
