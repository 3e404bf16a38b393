import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lelandfem import (
    BandedMatrix,
    SingularMatrixError,
    apply,
    assemble,
    build_aligned,
    build_graded,
    build_uniform,
    compute_v,
    p1_matrices,
    p2_matrices,
    solve_banded,
)

NAMES = ("mass", "stiffness", "convection", "abs_mass")


def dense_scatter(mesh, name):
    """Plain double loop over elements into a dense array."""
    n = mesh.n_nodes
    out = np.zeros((n, n))
    fn = p1_matrices if mesh.order == 1 else p2_matrices
    for e, h in enumerate(mesh.h):
        local = getattr(fn(h), name)
        ids = [mesh.order * e + a for a in range(mesh.order + 1)]
        for a, i in enumerate(ids):
            for b, j in enumerate(ids):
                out[i, j] += local[a, b]
    return out


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("n", [2, 3, 7, 20])
def test_assembly_matches_dense_scatter(order, n):
    mesh = build_uniform(5.0, n, order)
    sys = assemble(mesh, 100.0)
    for name in NAMES:
        ref = dense_scatter(mesh, name)
        full = getattr(sys, name).full.to_dense()
        assert np.max(np.abs(full - ref)) <= 1e-14 * max(1.0, np.max(np.abs(ref)))
        assert np.array_equal(getattr(sys, name).interior.to_dense(), full[1:-1, 1:-1])
        assert np.array_equal(getattr(sys, name).coupling, full[1:-1][:, [0, -1]])


def test_graded_mesh_assembly():
    mesh = build_graded([-5.0, -3.0, -0.5, 0.0, 1.0, 4.7, 5.0], order=2)
    sys = assemble(mesh, 100.0)
    for name in NAMES:
        assert np.allclose(getattr(sys, name).full.to_dense(), dense_scatter(mesh, name), rtol=0, atol=1e-13)


def test_interior_blocks_and_boundary_vectors():
    mesh = build_uniform(5.0, 6, 1)
    sys = assemble(mesh, 100.0)
    ub = (0.0, np.exp(5.0) - 100.0)
    dense_k = dense_scatter(mesh, "stiffness")
    assert np.allclose(sys.b_K, dense_k[1:-1, [0, -1]] @ ub)
    assert np.array_equal(sys.M.to_dense(), dense_scatter(mesh, "mass")[1:-1, 1:-1])
    assert sys.b_M[1:-1].tolist() == [0.0] * (sys.n_interior - 2)


def random_banded(rng, n, p, dominant=True):
    a = np.zeros((n, n))
    for k in range(-min(p, n - 1), min(p, n - 1) + 1):
        a += np.diag(rng.normal(size=n - abs(k)), k)
    if dominant:
        a += np.diag(2 * p + 2 + np.abs(rng.normal(size=n)))
    return a


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 40), p=st.integers(1, 3), seed=st.integers(0, 2**31))
def test_banded_solve_matches_dense(n, p, seed):
    rng = np.random.default_rng(seed)
    a = random_banded(rng, n, p)
    b = rng.normal(size=n)
    mat = BandedMatrix.from_dense(a, p)
    assert np.allclose(mat.to_dense(), a)
    x = solve_banded(mat, b)
    assert np.allclose(x, np.linalg.solve(a, b), rtol=1e-10, atol=1e-12)
    assert np.allclose(apply(mat, b), a @ b, rtol=1e-12, atol=1e-12)


def test_solve_needs_pivoting():
    a = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 3.0]])
    b = np.array([1.0, 2.0, 3.0])
    assert np.allclose(solve_banded(BandedMatrix.from_dense(a, 1), b), np.linalg.solve(a, b))


def test_singular_matrix_raises():
    a = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(SingularMatrixError):
        solve_banded(BandedMatrix.from_dense(a, 1), np.ones(3))


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(BandedMatrix.identity(4), np.ones(3))


def test_banded_arithmetic():
    rng = np.random.default_rng(0)
    a, b = random_banded(rng, 6, 2), random_banded(rng, 6, 2)
    A, B = BandedMatrix.from_dense(a, 2), BandedMatrix.from_dense(b, 2)
    assert np.allclose((A - B * 0.3).to_dense(), a - 0.3 * b)
    assert np.allclose((A + B).to_dense(), a + b)
    assert np.allclose(A.diagonal(1), np.diag(a, 1))
    assert np.allclose(A.block(1, 5).to_dense(), a[1:5, 1:5])


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("c", [0.0, 3.0])
def test_compute_v_reproduces_quadratics_away_from_boundary(order, c):
    """For u = a + b x + c x^2 the exact v = 2c - b - 2c x."""
    mesh = build_aligned(0.1, 100.0, order)
    sys = assemble(mesh, 100.0)
    x = mesh.nodes
    R, top = mesh.R, np.exp(mesh.R) - 100.0
    b = top / (2 * R)
    a = top / 2 - c * R**2
    u = a + b * x + c * x**2
    v = compute_v(sys, u[1:-1])
    exact = 2 * c - b - 2 * c * x
    inner = np.abs(x) <= R - 2.0
    assert np.max(np.abs(v[inner] - exact[inner])) < 1e-9 * np.max(np.abs(exact))
    assert v[0] == 0.0 and v[-1] == 0.0


def test_compute_v_other_boundary_treatments_share_interior_equations():
    mesh = build_uniform(6.0, 30, 1)
    sys = assemble(mesh, 100.0)
    u = np.maximum(np.exp(mesh.nodes) - 100, 0)[1:-1]
    full = sys.extend(u)
    rhs = (sys.stiffness.full.to_dense() - sys.convection.full.to_dense()) @ full
    mass = sys.mass.full.to_dense()
    for mode in ("dirichlet", "flux", "natural"):
        v = compute_v(sys, u, boundary=mode)
        assert np.allclose((mass @ v)[1:-1], rhs[1:-1], rtol=1e-10, atol=1e-8)
    with pytest.raises(ValueError):
        compute_v(sys, u, boundary="bogus")
    with pytest.raises(ValueError):
        compute_v(sys, u[:-1])


@pytest.mark.parametrize("order", [1, 2])
def test_operator_invariants(order):
    sys = assemble(build_uniform(5.0, 12, order), 100.0)
    m = sys.M.to_dense()
    assert np.max(np.abs(m - m.T)) <= 1e-15
    ones = np.ones(sys.mesh.n_nodes)
    assert np.allclose(apply(sys.stiffness.full, ones)[1:-1], 0.0, atol=1e-12)
    assert np.allclose(apply(sys.convection.full, ones)[1:-1], 0.0, atol=1e-12)


def test_left_boundary_does_not_contribute():
    sys = assemble(build_uniform(5.0, 12, 2), 100.0)
    for vec in (sys.b_M, sys.b_K, sys.b_P):
        assert np.all(vec[:2] == 0.0)
        assert np.any(vec[-2:] != 0.0)
