"""Element matrices against hand-transcribed constants and adaptive quadrature."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from lelandfem import DomainError, p1_matrices, p2_matrices, verify_by_quadrature
from lelandfem.elements import quadrature_discrepancies, quadrature_matrices

# quad reports roundoff on integrands that vanish identically over part of the element
pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")


def lagrange_basis(order, h):
    pts = np.linspace(0.0, h, order + 1)
    basis, derivs = [], []
    for a in range(order + 1):
        others = [p for b, p in enumerate(pts) if b != a]
        denom = np.prod([pts[a] - o for o in others])
        poly = np.poly1d(others, r=True) / denom
        basis.append(poly)
        derivs.append(poly.deriv())
    return basis, derivs


def integrate(f, h, order):
    # breakpoints at the interior roots of the P2 end functions
    pts = [h / 2] if order == 2 else None
    return quad(f, 0.0, h, points=pts, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


def oracle(order, h):
    psi, dpsi = lagrange_basis(order, h)
    n = order + 1
    out = {k: np.zeros((n, n)) for k in ("mass", "stiffness", "convection", "abs_mass")}
    for a in range(n):
        for b in range(n):
            out["mass"][a, b] = integrate(lambda x: psi[a](x) * psi[b](x), h, order)
            out["stiffness"][a, b] = -integrate(lambda x: dpsi[a](x) * dpsi[b](x), h, order)
            out["convection"][a, b] = integrate(lambda x: psi[a](x) * dpsi[b](x), h, order)
            out["abs_mass"][a, b] = integrate(
                lambda x: abs(max(psi[a](x), 0.0) * psi[b](x)) - abs(min(psi[a](x), 0.0) * psi[b](x)), h, order
            )
    return out


@pytest.mark.parametrize("h", [0.0125, 0.1, 1.0, 3.7])
def test_p1_against_quadrature(h):
    ref = oracle(1, h)
    got = p1_matrices(h).as_dict()
    for name in ref:
        assert np.allclose(got[name], ref[name], rtol=1e-12, atol=1e-13 * max(h, 1 / h)), name


@pytest.mark.parametrize("h", [0.0125, 0.1, 1.0])
def test_p2_mass_stiffness_convection_against_quadrature(h):
    ref = oracle(2, h)
    got = p2_matrices(h).as_dict()
    for name in ("mass", "stiffness", "convection"):
        assert np.allclose(got[name], ref[name], rtol=1e-12, atol=1e-13 * max(h, 1 / h)), name


def test_p2_abs_mass_quadrature_values():
    """Split-sign integrals of the quadratic basis on a unit element."""
    ref = oracle(2, 1.0)["abs_mass"] * 120
    assert np.allclose(ref, [[15, 8, 0], [15, 64, 15], [0, 8, 15]], atol=1e-9)
    assert np.allclose(quadrature_matrices(2, 1.0).abs_mass * 120, ref, atol=1e-9)


def test_p2_abs_mass_is_the_symmetric_table():
    # the midpoint row of the tabulated matrix differs from the quadrature by 7h/120
    h = 0.1
    assert np.allclose(p2_matrices(h).abs_mass, h / 120 * np.array([[15, 8, 0], [8, 64, 8], [0, 8, 15]]))
    assert quadrature_discrepancies(2, h)["abs_mass"] == pytest.approx(7 * h / 120, rel=1e-10)


@pytest.mark.parametrize("order", [1, 2])
def test_library_quadrature_matches_scipy_quad(order):
    ref = oracle(order, 0.3)
    got = quadrature_matrices(order, 0.3).as_dict()
    for name in ref:
        assert np.allclose(got[name], ref[name], atol=1e-12), name


@given(h=st.floats(1e-3, 10.0), lam=st.floats(0.1, 10.0))
def test_h_scaling(h, lam):
    for fn in (p1_matrices, p2_matrices):
        a, b = fn(h), fn(lam * h)
        assert np.allclose(b.mass, lam * a.mass, rtol=1e-12, atol=0)
        assert np.allclose(b.abs_mass, lam * a.abs_mass, rtol=1e-12, atol=0)
        assert np.allclose(b.stiffness, a.stiffness / lam, rtol=1e-12, atol=0)
        assert np.array_equal(b.convection, a.convection)


@pytest.mark.parametrize("fn", [p1_matrices, p2_matrices])
def test_structural_identities(fn):
    e = fn(0.2)
    assert e.mass.sum() == pytest.approx(0.2)  # partition of unity
    assert np.allclose(e.stiffness.sum(axis=1), 0)  # constants are in the kernel
    assert np.allclose(e.convection.sum(axis=1), 0)
    assert np.allclose(e.convection + e.convection.T, np.diag(np.r_[-1, [0] * (len(e.mass) - 2), 1]))


def test_p1_quadrature_verification_is_exact():
    assert verify_by_quadrature(1, 0.1) < 1e-14


def test_nonpositive_h():
    with pytest.raises(DomainError):
        p1_matrices(0.0)
    with pytest.raises(DomainError):
        verify_by_quadrature(2, -1.0)
