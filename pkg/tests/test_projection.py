import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsiac_mra.experiments import compute_errors, get_test_function, project_test_function
from lsiac_mra.mesh_basis import (
    ModalField,
    NonFiniteError,
    UniformMesh,
    eval_field,
    gauss_legendre_rule,
    tensor_basis_values,
)
from lsiac_mra.mra import build_multiwavelets, reconstruct, WaveletDecomposition
from lsiac_mra.projection import coarsen_by_projection, project_function, refine_by_projection


def random_field(rng, d, p, N):
    m = UniformMesh(d, N)
    return ModalField(m, p, rng.standard_normal((m.n_elements, (p + 1) ** d)))


def test_constant_and_bilinear():
    F = project_function(lambda x, y: np.ones_like(x * y), UniformMesh(2, 3), 2)
    pts = np.random.default_rng(0).random((30, 2))
    np.testing.assert_allclose(eval_field(F, pts), 1.0, atol=1e-14)
    G = project_function(lambda x, y: x * y, UniformMesh(2, 2), 1)
    assert eval_field(G, np.array([0.7, 0.2])) == pytest.approx(0.14, abs=1e-13)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_polynomial_reproduction(d):
    p = 2

    def f(*x):
        out = 1.0
        for xi in x:
            out = out * (xi**2 - 0.5 * xi)
        return out

    F = project_function(f, UniformMesh(d, 3), p, q=p + 1)
    pts = np.random.default_rng(1).random((50, d))
    np.testing.assert_allclose(eval_field(F, pts), f(*pts.T), atol=1e-12)


def test_high_frequency_projection_error():
    f = get_test_function("ic2")
    # the (p+1)-point rule reproduces the reference table digits; the exact
    # cell average gives 4.002e-02
    u = project_test_function(f, 160, 0, q=1)
    rep = compute_errors(u, f, 640)
    assert f"{rep.L2:.2e}" == "4.01e-02"
    u = project_test_function(f, 160, 1, q=2)
    rep = compute_errors(u, f, 640)
    assert (f"{rep.L2:.2e}", f"{rep.Linf:.2e}") == ("1.02e-03", "6.10e-03")


def test_bad_inputs():
    with pytest.raises(ValueError):
        project_function(lambda x: x, UniformMesh(1, 2), 2, q=2)
    with pytest.raises(NonFiniteError):
        with np.errstate(invalid="ignore"):
            project_function(lambda x: np.log(x - 0.5), UniformMesh(1, 4), 1)


def test_breakpoint_splitting_is_exact_for_piecewise_polynomials():
    f = lambda x: np.where(x <= 0.3, x, 2.0 - x)
    F = project_function(f, UniformMesh(1, 4), 1, q=2, breaks=[0.3])
    # reference: per-piece integration with many points
    x, w = gauss_legendre_rule(40)
    e = 1  # element [0.25, 0.5)
    ref = np.zeros(2)
    for lo, hi in [(0.25, 0.3), (0.3, 0.5)]:
        xs = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        z = 2 * (xs - 0.375) / 0.25
        ref += 0.5 * (hi - lo) * (w * f(xs)) @ tensor_basis_values(1, z[:, None]) * 2 / 0.25
    np.testing.assert_allclose(F.coeffs[e], ref, atol=1e-14)


@given(st.integers(1, 3), st.integers(0, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_refine_is_exact_and_coarsen_inverts(d, p, N, seed):
    rng = np.random.default_rng(seed)
    F = random_field(rng, d, p, N)
    R = refine_by_projection(F)
    pts = rng.random((40, d))
    np.testing.assert_allclose(eval_field(R, pts), eval_field(F, pts), atol=1e-12)
    np.testing.assert_allclose(coarsen_by_projection(R).coeffs, F.coeffs, atol=1e-13)


def test_refine_random_2d_pointwise():
    rng = np.random.default_rng(5)
    F = random_field(rng, 2, 2, 4)
    pts = rng.random((100, 2))
    np.testing.assert_allclose(eval_field(refine_by_projection(F), pts), eval_field(F, pts), atol=1e-13)


def test_coarsen_kills_pure_details():
    rng = np.random.default_rng(3)
    p, d = 2, 2
    coarse = ModalField.zeros(UniformMesh(d, 3), p)
    n_det = build_multiwavelets(p, d).n_details
    det = rng.standard_normal((9, n_det))
    fine = reconstruct(WaveletDecomposition(coarse, det))
    np.testing.assert_allclose(coarsen_by_projection(fine).coeffs, 0, atol=1e-14)


def test_coarsen_linear_function():
    F = project_function(lambda x, y: 2 * x - y, UniformMesh(2, 8), 1)
    C = coarsen_by_projection(F)
    pts = np.random.default_rng(0).random((30, 2))
    np.testing.assert_allclose(eval_field(C, pts), 2 * pts[:, 0] - pts[:, 1], atol=1e-13)
    with pytest.raises(ValueError):
        coarsen_by_projection(project_function(lambda x: x, UniformMesh(1, 3), 1))


def test_orthogonality_of_residual():
    rng = np.random.default_rng(11)
    f = lambda x, y: np.exp(np.sin(3 * x) * np.cos(2 * y))
    m, p = UniformMesh(2, 3), 2
    F = project_function(f, m, p, q=12)
    x, w = gauss_legendre_rule(12)
    Z = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    W = np.outer(w, w).reshape(-1)
    for _ in range(50):
        V = rng.standard_normal((m.n_elements, (p + 1) ** 2))
        total = 0.0
        for e in range(m.n_elements):
            c = m.element_centers(np.array(np.unravel_index(e, m.shape)))
            X = c + 0.5 * m.h * Z
            phi = tensor_basis_values(p, Z)
            total += np.sum(W * (f(X[:, 0], X[:, 1]) - phi @ F.coeffs[e]) * (phi @ V[e]))
        assert abs(total) < 1e-12


@pytest.mark.parametrize("k", [1, 2])
def test_nested_error_invariance(k):
    f = get_test_function("ic1")
    u = project_test_function(f, 6, 2)
    ref = compute_errors(u, f, 24)
    v = u
    for _ in range(k):
        v = refine_by_projection(v)
    rep = compute_errors(v, f, 24)
    assert rep.L2 == pytest.approx(ref.L2, rel=1e-12)
    assert rep.Linf == pytest.approx(ref.Linf, rel=1e-12)
