"""Global Galerkin matrices, boundary vectors and banded linear algebra.

The unknowns of the u-equation are the interior nodes; the two Dirichlet nodes
are eliminated and their influence is kept in the vectors b_M, b_K and b_P
(interior rows, boundary columns of the full matrices times the boundary
values). The auxiliary field v = u_xx - u_x carries no boundary condition, so it
lives on every node and is obtained from the full mass matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.linalg.lapack import dgbtrf, dgbtrs

from lelandfem.elements import element_matrices
from lelandfem.mesh import Mesh1D
from lelandfem.model import boundary_slopes, boundary_values

PIVOT_TOL = 1e-14


class SingularMatrixError(ArithmeticError):
    pass


class BandedMatrix:
    """Square matrix with ``p`` sub- and super-diagonals.

    ``bands[p + i - j, j]`` holds entry (i, j), the layout LAPACK's general band
    routines use for the upper part of their work array.
    """

    def __init__(self, bands: np.ndarray, half_bandwidth: int):
        bands = np.asarray(bands, dtype=float)
        if bands.ndim != 2 or bands.shape[0] != 2 * half_bandwidth + 1:
            raise ValueError("bands must have 2p+1 rows")
        self.bands = bands
        self.half_bandwidth = half_bandwidth

    @property
    def dimension(self) -> int:
        return self.bands.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.dimension, self.dimension

    @classmethod
    def zeros(cls, n: int, p: int) -> BandedMatrix:
        return cls(np.zeros((2 * p + 1, n)), p)

    @classmethod
    def identity(cls, n: int, p: int = 1) -> BandedMatrix:
        out = cls.zeros(n, p)
        out.bands[p] = 1.0
        return out

    @classmethod
    def from_dense(cls, a: np.ndarray, p: int) -> BandedMatrix:
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        out = cls.zeros(n, p)
        q = min(p, n - 1)
        for k in range(-q, q + 1):
            d = np.diagonal(a, offset=k)
            if k >= 0:
                out.bands[p - k, k:] = d
            else:
                out.bands[p - k, : n + k] = d
        return out

    def to_dense(self) -> np.ndarray:
        n, p = self.dimension, self.half_bandwidth
        a = np.zeros((n, n))
        q = min(p, n - 1)
        for k in range(-q, q + 1):
            if k >= 0:
                a += np.diag(self.bands[p - k, k:], k)
            else:
                a += np.diag(self.bands[p - k, : n + k], k)
        return a

    def diagonal(self, k: int = 0) -> np.ndarray:
        p, n = self.half_bandwidth, self.dimension
        if abs(k) >= n:
            return np.zeros(0)
        return self.bands[p - k, k:] if k >= 0 else self.bands[p - k, : n + k]

    def block(self, start: int, stop: int) -> BandedMatrix:
        """Principal sub-matrix on indices [start, stop)."""
        p = self.half_bandwidth
        sub = self.bands[:, start:stop].copy()
        m = stop - start
        for r in range(2 * p + 1):
            offset = r - p  # row index i = j + offset
            if offset > 0:
                sub[r, max(m - offset, 0) :] = 0.0
            elif offset < 0:
                sub[r, : -offset] = 0.0
        return BandedMatrix(sub, p)

    def __add__(self, other: BandedMatrix) -> BandedMatrix:
        return BandedMatrix(self.bands + other.bands, self.half_bandwidth)

    def __sub__(self, other: BandedMatrix) -> BandedMatrix:
        return BandedMatrix(self.bands - other.bands, self.half_bandwidth)

    def __mul__(self, scalar: float) -> BandedMatrix:
        return BandedMatrix(self.bands * scalar, self.half_bandwidth)

    __rmul__ = __mul__

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return apply(self, x)

    def __repr__(self) -> str:
        return f"BandedMatrix(n={self.dimension}, p={self.half_bandwidth})"


def apply(matrix: BandedMatrix, vector: np.ndarray) -> np.ndarray:
    x = np.asarray(vector, dtype=float)
    n, p = matrix.dimension, matrix.half_bandwidth
    if x.shape != (n,):
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, vector has shape {x.shape}")
    y = matrix.bands[p] * x
    for k in range(1, p + 1):
        y[:-k] += matrix.bands[p - k, k:] * x[k:]
        y[k:] += matrix.bands[p + k, :-k] * x[:-k]
    return y


class BandedLU:
    """LU factors (partial pivoting) of a banded matrix, reusable across solves."""

    def __init__(self, matrix: BandedMatrix, pivot_tol: float = PIVOT_TOL):
        p, n = matrix.half_bandwidth, matrix.dimension
        work = np.zeros((3 * p + 1, n))
        work[p:] = matrix.bands
        lu, piv, info = dgbtrf(work, p, p)
        scale = float(np.max(np.abs(matrix.bands))) if matrix.bands.size else 0.0
        pivots = np.abs(lu[2 * p])
        if info > 0 or scale == 0.0 or pivots.min() < pivot_tol * scale:
            k = int(np.argmin(pivots))
            raise SingularMatrixError(
                f"pivot {pivots[k]:.3e} at row {k} is below {pivot_tol:g} x max|band| = {scale:.3e}"
            )
        if info < 0:
            raise ValueError(f"dgbtrf rejected argument {-info}")
        self._lu, self._piv, self._p, self.dimension = lu, piv, p, n

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=float)
        if b.shape != (self.dimension,):
            raise ValueError(f"rhs has shape {b.shape}, expected ({self.dimension},)")
        x, info = dgbtrs(self._lu, self._p, self._p, b, self._piv)
        if info != 0:
            raise ValueError(f"dgbtrs failed with info={info}")
        return x


def solve_banded(matrix: BandedMatrix, rhs: np.ndarray, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    return BandedLU(matrix, pivot_tol).solve(rhs)


@dataclass(frozen=True, eq=False)
class FullOperator:
    """An all-node matrix split into interior block and boundary coupling."""

    full: BandedMatrix
    interior: BandedMatrix = field(init=False)
    coupling: np.ndarray = field(init=False)  # (n_interior, 2): columns of the two boundary nodes

    def __post_init__(self) -> None:
        n = self.full.dimension
        p = self.full.half_bandwidth
        object.__setattr__(self, "interior", self.full.block(1, n - 1))
        c = np.zeros((n - 2, 2))
        # column 0 couples to rows 1..p, column n-1 to rows n-1-p..n-2
        for i in range(1, min(p, n - 2) + 1):
            c[i - 1, 0] = self.full.bands[p + i, 0]
        for i in range(max(1, n - 1 - p), n - 1):
            c[i - 1, 1] = self.full.bands[p + i - (n - 1), n - 1]
        object.__setattr__(self, "coupling", c)

    def boundary_vector(self, boundary_u: tuple[float, float]) -> np.ndarray:
        return self.coupling @ np.asarray(boundary_u, dtype=float)

    def rows_interior(self, x_full: np.ndarray) -> np.ndarray:
        """Interior rows of (full matrix) @ x_full."""
        return apply(self.full, x_full)[1:-1]


@dataclass(frozen=True, eq=False)
class GlobalSystem:
    mesh: Mesh1D
    mass: FullOperator
    stiffness: FullOperator
    convection: FullOperator
    abs_mass: FullOperator
    strike: float

    @property
    def M(self) -> BandedMatrix:
        return self.mass.interior

    @property
    def K(self) -> BandedMatrix:
        return self.stiffness.interior

    @property
    def P(self) -> BandedMatrix:
        return self.convection.interior

    @property
    def M_bar(self) -> BandedMatrix:
        return self.abs_mass.interior

    @property
    def n_interior(self) -> int:
        return self.mesh.n_nodes - 2

    def boundary_u(self, tau: float = 0.0) -> tuple[float, float]:
        return boundary_values(tau, self.mesh.R, self.strike)

    def boundary_slopes(self, tau: float = 0.0) -> tuple[float, float]:
        return boundary_slopes(tau, self.mesh.R, self.strike)

    def b_vectors(self, tau: float = 0.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(b_M, b_K, b_P) for the boundary data at time level ``tau``."""
        ub = self.boundary_u(tau)
        return (
            self.mass.boundary_vector(ub),
            self.stiffness.boundary_vector(ub),
            self.convection.boundary_vector(ub),
        )

    @property
    def b_M(self) -> np.ndarray:
        return self.b_vectors()[0]

    @property
    def b_K(self) -> np.ndarray:
        return self.b_vectors()[1]

    @property
    def b_P(self) -> np.ndarray:
        return self.b_vectors()[2]

    @cached_property
    def full_mass_lu(self) -> BandedLU:
        return BandedLU(self.mass.full)

    @cached_property
    def interior_mass_lu(self) -> BandedLU:
        return BandedLU(self.mass.interior)

    def with_abs_mass_equal_to_mass(self) -> GlobalSystem:
        return GlobalSystem(self.mesh, self.mass, self.stiffness, self.convection, self.mass, self.strike)

    def extend(self, u_interior: np.ndarray, tau: float = 0.0) -> np.ndarray:
        """Interior values plus Dirichlet data as an all-node vector."""
        left, right = self.boundary_u(tau)
        return np.concatenate(([left], u_interior, [right]))


def assemble_operator(mesh: Mesh1D, which: str) -> BandedMatrix:
    p = mesh.half_bandwidth
    n = mesh.n_nodes
    bands = np.zeros((2 * p + 1, n))
    conn = mesh.connectivity
    local = np.array([getattr(element_matrices(mesh.order, h), which) for h in mesh.h])
    for a in range(mesh.order + 1):
        for b in range(mesh.order + 1):
            i, j = conn[:, a], conn[:, b]
            np.add.at(bands, (p + i - j, j), local[:, a, b])
    return BandedMatrix(bands, p)


def assemble(mesh: Mesh1D, strike: float) -> GlobalSystem:
    """Scatter element matrices into global banded operators.

    Boundary data are u(-R) = 0 and u(R) = e^R - K.
    """
    boundary_values(0.0, mesh.R, strike)  # validates R > ln K
    ops = {name: FullOperator(assemble_operator(mesh, name)) for name in ("mass", "stiffness", "convection", "abs_mass")}
    return GlobalSystem(mesh, ops["mass"], ops["stiffness"], ops["convection"], ops["abs_mass"], strike)


BoundaryTreatment = Literal["dirichlet", "flux", "natural"]


def compute_v(
    sys: GlobalSystem, u: np.ndarray, tau: float = 0.0, boundary: BoundaryTreatment = "dirichlet"
) -> np.ndarray:
    """Nodal v = u_xx - u_x on all nodes.

    Interior rows always satisfy M v = K u - P u + b_K - b_P. The boundary
    entries depend on ``boundary``:

    * "dirichlet": v = 0 on both boundary nodes, the value u_xx - u_x takes for
      the far-field data u = 0 and u = e^x - K.
    * "flux": boundary rows of the all-node system keep the term [psi u_x] from
      integration by parts, with u_x from the far-field data.
    * "natural": boundary rows of the all-node system without that term.

    The last two leave an alternating error of size e^R h near x = R (the
    interpolant's second difference there is a point mass on the boundary row);
    once |v| rectifies it, the explicit Le-term grows it without bound for
    Le > 1.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (sys.n_interior,):
        raise ValueError(f"expected {sys.n_interior} interior values, got shape {u.shape}")
    full_u = sys.extend(u, tau)
    rhs = apply(sys.stiffness.full, full_u) - apply(sys.convection.full, full_u)
    if boundary == "dirichlet":
        v = np.zeros_like(rhs)
        v[1:-1] = sys.interior_mass_lu.solve(rhs[1:-1])
        return v
    if boundary == "flux":
        left, right = sys.boundary_slopes(tau)
        rhs[0] -= left
        rhs[-1] += right
    elif boundary != "natural":
        raise ValueError(f"unknown boundary treatment {boundary!r}")
    return sys.full_mass_lu.solve(rhs)
