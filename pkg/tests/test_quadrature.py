import numpy as np
import pytest

from vortexlab.geometry import Domain, build_mesh
from vortexlab.quadrature import _children, _gauss_rule, build_current_quadrature, exact_singular_means, singular_kernel

SRC = np.array([[0.3, 0.1], [-0.25, -0.2]])
DEG = np.array([1, -1])


@pytest.fixture(scope="module")
def mesh():
    return build_mesh(Domain.disk(), SRC, 0.08, 0.01)


@pytest.mark.parametrize("p", [1.5, 1.9, 2.0])
def test_weights_sum_to_areas(mesh, p):
    q = build_current_quadrature(mesh, SRC, DEG, p)
    assert np.allclose(q.per_triangle(np.ones(len(q.weights))), mesh.areas, rtol=1e-13)


def test_singular_means_are_exact(mesh):
    q = build_current_quadrature(mesh, SRC, DEG, 1.9)
    for k in range(2):
        approx = q.per_triangle(q.singular[:, k])
        assert np.allclose(approx, exact_singular_means(mesh, SRC, DEG)[:, k], atol=1e-13)


def test_exact_means_match_fine_quadrature_far_away(mesh):
    t = np.argmax(np.linalg.norm(mesh.centroids - SRC[0], axis=1))
    corners = mesh.points[mesh.triangles[t]]
    # degree-5 rule on 256 children of the triangle
    sub = corners[None]
    for _ in range(4):
        sub = _children(sub)
    pts, w = _gauss_rule(sub)
    fine = np.einsum("tq,tqd->d", w, singular_kernel(pts.reshape(-1, 2), SRC, DEG).reshape(*w.shape, 2))
    assert np.allclose(exact_singular_means(mesh, SRC, DEG, tri=[t])[0], fine, rtol=1e-9)


@pytest.mark.parametrize("p", [1.5, 1.9, 1.99])
def test_power_singularity_integral(p):
    # int_{B_R} |y|^{-p} = 2 pi R^{2-p} / (2-p); compare on the disk of radius 1 around the origin
    m = build_mesh(Domain.disk(), [(0.0, 0.0)], 0.06, 0.004)
    q = build_current_quadrature(m, [(0.0, 0.0)], [1], p)
    s = np.linalg.norm(singular_kernel(q.points, [(0.0, 0.0)], [1]), axis=1)
    approx = np.sum(q.weights * s**p)
    # mesh boundary is a polygon inscribed in the circle
    exact = 2 * np.pi / (2 - p)
    assert approx == pytest.approx(exact, rel=5e-3 + 5e-3 / (2 - p) * m.h_far**2)
