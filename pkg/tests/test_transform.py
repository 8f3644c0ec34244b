import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cloaksim.errors import ConfigurationError
from cloaksim.transform import (
    Region,
    TransformMap,
    cloak_material,
    equivalent_material,
    eval_F,
    eval_Finv,
    jacobian,
    push_field,
    pushforward_identity_tensor,
)


def fd_jacobian(f, x, h=1e-6):
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_curl(field, y, h=1e-5):
    d = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        d.append((field(y + e) - field(y - e)) / (2 * h))
    # d[i][j] = dF_j / dy_i
    return np.array([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]])


def shell_points(count, lo, hi, seed):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(count, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * rng.uniform(lo, hi, (count, 1))


@pytest.mark.parametrize("rho", [0.4, 0.1, 0.01])
def test_profile_matches_boundaries(rho):
    fmap = TransformMap(rho)
    assert_allclose(fmap.g(rho), 1.0, rtol=1e-15)
    assert_allclose(fmap.g(2.0), 2.0, rtol=1e-15)
    assert_allclose(fmap.g_inv(fmap.g(0.3 + rho)), 0.3 + rho, rtol=1e-14)


@pytest.mark.parametrize("rho", [0.4, 0.1, 0.01])
def test_jacobian_against_finite_differences(rho):
    x = shell_points(50, rho * 1.01, 1.99, 1)
    for p in x:
        assert_allclose(jacobian(rho, p), fd_jacobian(lambda q: eval_F(rho, q), p), rtol=1e-6, atol=1e-8)
    inner = shell_points(5, 0.0, 0.99 * rho, 2)
    for p in inner:
        assert_allclose(jacobian(rho, p), np.eye(3) / rho)


@pytest.mark.parametrize("rho", [0.4, 0.1, 0.01])
def test_pushforward_eigenvalues_against_fd_assembly(rho):
    y = shell_points(1000, 1.001, 1.999, 11)
    worst = 0.0
    for p in y:
        x = eval_Finv(rho, p)
        A = fd_jacobian(lambda q: eval_F(rho, q), x, h=1e-7 * max(1.0, np.linalg.norm(x)))
        T = A @ A.T / np.linalg.det(A)
        fd_eigs = np.sort(np.linalg.eigvalsh(0.5 * (T + T.T)))
        sample = pushforward_identity_tensor(rho, p)
        closed = np.sort([sample.eigen_radial, sample.eigen_tangential, sample.eigen_tangential])
        worst = max(worst, float(np.max(np.abs(fd_eigs - closed) / closed)))
    assert worst <= 1e-6


@settings(max_examples=200, deadline=None)
@given(
    rho=st.floats(1e-4, 0.49),
    r=st.floats(0.0, 3.0),
    theta=st.floats(0.0, np.pi),
    phi=st.floats(0.0, 2 * np.pi),
)
def test_inverse_round_trip(rho, r, theta, phi):
    x = r * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    assert_allclose(eval_Finv(rho, eval_F(rho, x)), x, atol=1e-12)


def test_identity_outside_two():
    x = np.array([[0.0, 2.5, 0.0], [3.0, 1.0, -1.0]])
    assert_allclose(eval_F(0.1, x), x)
    assert_allclose(jacobian(0.1, x), np.broadcast_to(np.eye(3), (2, 3, 3)))


def test_tensor_is_consistent_with_eigen_split():
    rho = 0.2
    y = np.array([0.6, -1.0, 0.8])
    s = pushforward_identity_tensor(rho, y)
    d = y / np.linalg.norm(y)
    T = s.tensor
    assert_allclose(T @ d, s.eigen_radial * d, rtol=1e-14)
    assert_allclose(np.linalg.det(T), s.determinant, rtol=1e-13)


def test_tangential_eigenvalue_near_inner_boundary():
    s = cloak_material(0.01, np.array([0.0, 0.0, 1.0 + 1e-9]))
    # 1/g' with g' = 1/(2 - rho)
    assert_allclose(s.eigen_tangential, 1.99, rtol=1e-12)
    assert s.eigen_radial < 1e-4


def test_cloak_material_regions():
    assert cloak_material(0.1, [0.0, 2.5, 0.0]).region is Region.EXTERIOR
    assert cloak_material(0.1, [0.0, 1.5, 0.0]).region is Region.CLOAK_SHELL
    inside = cloak_material(0.1, [0.0, 0.5, 0.0])
    assert inside.region is Region.CLOAKED
    assert_allclose(inside.tensor, np.eye(3))
    ext = cloak_material(0.1, [2.5, 0.0, 0.0])
    assert (ext.eigen_radial, ext.eigen_tangential) == (1.0, 1.0)


def test_equivalent_material_scales_by_inverse_rho():
    s = equivalent_material(0.25, [0.0, 0.0, 0.1])
    assert s.region is Region.INCLUSION
    assert_allclose(s.tensor, 4.0 * np.eye(3))
    assert equivalent_material(0.25, [0.0, 0.0, 0.5]).region is Region.EXTERIOR


def test_user_interior_tensor():
    aniso = np.diag([2.0, 3.0, 4.0])
    s = cloak_material(0.1, [0.0, 0.0, 0.5], interior=lambda y: aniso)
    assert_allclose(s.tensor, aniso)
    e = equivalent_material(0.1, [0.0, 0.0, 0.05], interior=lambda y: aniso)
    assert_allclose(e.tensor, 10.0 * aniso)
    with pytest.raises(ConfigurationError):
        cloak_material(0.1, [0.0, 0.0, 0.5], interior=lambda y: np.array([[1.0, 2.0, 0], [0, 1, 0], [0, 0, 1]]))


@pytest.mark.parametrize("rho", [0.0, 0.5, -0.1, 0.7])
def test_rho_out_of_range(rho):
    with pytest.raises(ConfigurationError):
        TransformMap(rho)
    with pytest.raises(ConfigurationError):
        cloak_material(rho, [0.0, 0.0, 1.5])


def test_pushforward_rejects_points_off_shell():
    with pytest.raises(ConfigurationError):
        pushforward_identity_tensor(0.1, [0.0, 0.0, 0.5])


def test_pushed_field_curl_transforms_covariantly():
    # curl_y (DF^{-T} E o F^{-1}) = DF curl_x E / det DF
    rho, omega = 0.2, 1.3
    d = np.array([0.0, 0.6, 0.8])
    p = np.array([1.0, 0.0, 0.0])

    def E(x):
        return p * np.exp(1j * omega * (np.asarray(x) @ d))[..., None]

    def curl_E(x):
        return 1j * omega * np.cross(d, p) * np.exp(1j * omega * (x @ d))

    for y in shell_points(10, 1.1, 1.9, 4):
        lhs = fd_curl(lambda q: push_field(rho, E, q), y)
        x = eval_Finv(rho, y)
        A = jacobian(rho, x)
        rhs = A @ curl_E(x) / np.linalg.det(A)
        assert_allclose(lhs, rhs, rtol=1e-6, atol=1e-8)


def test_push_field_is_identity_outside_two():
    y = np.array([[0.0, 0.0, 2.5], [3.0, 0.0, 0.0]])
    f = lambda x: np.ones_like(x) * (1 + 2j)
    assert_allclose(push_field(0.1, f, y), f(y))
