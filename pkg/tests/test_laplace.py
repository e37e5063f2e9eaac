import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab.errors import OutOfDomain
from vortexlab.geometry import Domain, build_mesh
from vortexlab.laplace import (
    ScalarField,
    normal_flux,
    poisson_disk_oracle,
    solve_dirichlet,
    solve_neumann,
    stiffness,
)


@pytest.fixture(scope="module")
def disk_mesh():
    return build_mesh(Domain.disk(), [(0.2, 0.1)], 0.08, 0.02)


def smooth(pts):
    x, y = pts[:, 0], pts[:, 1]
    return np.exp(x) * np.cos(y)  # harmonic


def test_stiffness_rows_sum_to_zero(disk_mesh):
    K = stiffness(disk_mesh)
    assert np.abs(K @ np.ones(disk_mesh.n_vertices)).max() < 1e-12
    assert abs(K - K.T).max() < 1e-14


coef = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(a=coef, b=coef, c=coef)
def test_linear_data_is_reproduced_exactly(disk_mesh, a, b, c):
    m = disk_mesh
    exact = a + b * m.points[:, 0] + c * m.points[:, 1]
    u = solve_dirichlet(m, exact)
    assert np.abs(u.values - exact).max() < 1e-10 * (1 + abs(a) + abs(b) + abs(c))
    assert np.allclose(u.gradients, [b, c], atol=1e-9 * (1 + abs(b) + abs(c)))


def test_discrete_maximum_principle(disk_mesh):
    m = disk_mesh
    bv = np.sin(3 * np.arctan2(*m.points[m.boundary_vertices].T[::-1]))
    u = solve_dirichlet(m, bv)
    assert u.values.max() <= bv.max() + 1e-12
    assert u.values.min() >= bv.min() - 1e-12


def test_second_order_convergence_against_oracle():
    probes = np.array([[0.1, 0.2], [-0.4, 0.3], [0.5, -0.5], [0.0, 0.0]])
    exact = np.array([poisson_disk_oracle(lambda t: np.exp(np.cos(t)) * np.cos(np.sin(t)), q) for q in probes])
    assert np.allclose(exact, smooth(probes), atol=1e-12)
    errs = []
    for h in (0.1, 0.05):
        m = build_mesh(Domain.disk(), [], h, h)
        u = solve_dirichlet(m, smooth(m.points))
        errs.append(np.abs(u(probes) - exact).max())
    assert errs[0] / errs[1] >= 3.5


def test_oracle_mean_value_and_domain():
    f = lambda t: 1 + np.cos(t) + np.sin(2 * t)
    assert poisson_disk_oracle(f, (0, 0)) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(OutOfDomain):
        poisson_disk_oracle(f, (1.0, 0.0))


def test_harmonic_field_has_zero_total_flux(disk_mesh):
    u = solve_dirichlet(disk_mesh, smooth(disk_mesh.points))
    assert abs(normal_flux(u)) < 1e-10


def test_neumann_solution_is_compatible(disk_mesh):
    m = disk_mesh
    K = stiffness(m)
    target = smooth(m.points)
    u = solve_neumann(m, K @ target)
    assert np.allclose(u - u[0], target - target[0], atol=1e-9)


def test_field_is_immutable(disk_mesh):
    f = ScalarField(disk_mesh, np.zeros(disk_mesh.n_vertices))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_recovered_gradient_is_exact_for_linear(disk_mesh):
    m = disk_mesh
    f = ScalarField(m, 2 * m.points[:, 0] - m.points[:, 1])
    pts = np.array([[0.3, 0.3], [-0.6, 0.1]])
    assert np.allclose(f.recovered_gradient_at(pts), [2, -1])
    with pytest.raises(OutOfDomain):
        f(np.array([[1.5, 0.0]]))
