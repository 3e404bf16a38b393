"""Element matrices for linear (P1) and quadratic (P2) Lagrange elements.

Local node order is left vertex, [midpoint,] right vertex. For an element of
size h the four matrices are

    mass        int psi_a psi_b
    stiffness  -int psi_a' psi_b'
    convection  int psi_a psi_b'
    abs_mass    weights of the nodal |v_b| in int psi_a |v|

The closed forms below are the ones used by the solver. ``verify_by_quadrature``
recomputes every entry from its defining integral with Gauss-Legendre rules on
sub-intervals cut at the sign changes of the shape functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from lelandfem.model import DomainError


@dataclass(frozen=True)
class ElementMatrices:
    mass: np.ndarray
    stiffness: np.ndarray
    convection: np.ndarray
    abs_mass: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {
            "mass": self.mass,
            "stiffness": self.stiffness,
            "convection": self.convection,
            "abs_mass": self.abs_mass,
        }


_P1_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_P1_STIFF = -np.array([[1.0, -1.0], [-1.0, 1.0]])
_P1_CONV = 0.5 * np.array([[-1.0, 1.0], [-1.0, 1.0]])

_P2_MASS = np.array([[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]]) / 30.0
_P2_STIFF = -np.array([[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]]) / 3.0
_P2_CONV = np.array([[-3.0, 4.0, -1.0], [-4.0, 0.0, 4.0], [1.0, -4.0, 3.0]]) / 6.0
_P2_ABS_MASS = np.array([[15.0, 8.0, 0.0], [8.0, 64.0, 8.0], [0.0, 8.0, 15.0]]) / 120.0


def _check_h(h: float) -> None:
    if not h > 0:
        raise DomainError(f"element size must be positive, got {h}")


def p1_matrices(h: float) -> ElementMatrices:
    _check_h(h)
    mass = h * _P1_MASS
    return ElementMatrices(mass, _P1_STIFF / h, _P1_CONV.copy(), mass.copy())


def p2_matrices(h: float) -> ElementMatrices:
    # abs_mass is kept symmetric; its midpoint row holds 8/120 where the
    # quadrature of psi_mid |psi_end| gives 15/120; see quadrature_discrepancies.
    _check_h(h)
    return ElementMatrices(h * _P2_MASS, _P2_STIFF / h, _P2_CONV.copy(), h * _P2_ABS_MASS)


def element_matrices(order: int, h: float) -> ElementMatrices:
    if order == 1:
        return p1_matrices(h)
    if order == 2:
        return p2_matrices(h)
    raise ValueError(f"unsupported element order {order}")


def shape_functions(order: int) -> list[Polynomial]:
    """Lagrange basis on the reference element [0, 1]."""
    if order == 1:
        return [Polynomial([1.0, -1.0]), Polynomial([0.0, 1.0])]
    if order == 2:
        xi = Polynomial([0.0, 1.0])
        return [2 * (xi - 0.5) * (xi - 1), -4 * xi * (xi - 1), 2 * xi * (xi - 0.5)]
    raise ValueError(f"unsupported element order {order}")


def _breakpoints(basis: list[Polynomial]) -> np.ndarray:
    cuts = {0.0, 1.0}
    for psi in basis:
        for root in psi.roots():
            if abs(root.imag) < 1e-14 and 1e-12 < root.real < 1 - 1e-12:
                cuts.add(float(root.real))
    return np.array(sorted(cuts))


def quadrature_matrices(order: int, h: float, n_points: int = 12) -> ElementMatrices:
    """Element matrices from numerical integration of their defining integrals.

    The abs_mass entry (a, b) integrates |psi_a^+ psi_b| - |psi_a^- psi_b| where
    psi_a^+ and psi_a^- are the nonnegative and nonpositive parts of psi_a.
    """
    _check_h(h)
    basis = shape_functions(order)
    deriv = [psi.deriv() for psi in basis]
    gx, gw = np.polynomial.legendre.leggauss(n_points)
    cuts = _breakpoints(basis)
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        xs.append(0.5 * (b - a) * gx + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * gw)
    xi = np.concatenate(xs)
    w = np.concatenate(ws) * h  # dx = h dxi

    vals = np.array([psi(xi) for psi in basis])
    dvals = np.array([d(xi) for d in deriv]) / h
    pos = np.maximum(vals, 0.0)
    neg = np.minimum(vals, 0.0)

    mass = np.einsum("aq,bq,q->ab", vals, vals, w)
    stiffness = -np.einsum("aq,bq,q->ab", dvals, dvals, w)
    convection = np.einsum("aq,bq,q->ab", vals, dvals, w)
    abs_mass = np.einsum("aq,bq,q->ab", np.abs(pos), np.abs(vals), w) - np.einsum(
        "aq,bq,q->ab", np.abs(neg), np.abs(vals), w
    )
    return ElementMatrices(mass, stiffness, convection, abs_mass)


def quadrature_discrepancies(order: int, h: float) -> dict[str, float]:
    closed = element_matrices(order, h).as_dict()
    quad = quadrature_matrices(order, h).as_dict()
    return {name: float(np.max(np.abs(closed[name] - quad[name]))) for name in closed}


def verify_by_quadrature(order: int, h: float) -> float:
    """Largest entrywise gap between closed-form and quadrature element matrices."""
    return max(quadrature_discrepancies(order, h).values())
