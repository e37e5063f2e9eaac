import numpy as np
import pytest

from vortexlab.errors import AmbiguousLift, InvalidDomain
from vortexlab.geometry import (
    BoundaryDatum,
    ComponentPhase,
    Domain,
    build_mesh,
    read_mesh,
    unwrap_phase,
    winding_of_loop,
    write_mesh,
)


@pytest.fixture(scope="module")
def meshes():
    return {
        "disk": build_mesh(Domain.disk(), [(0.3, 0.1)], 0.1, 0.01),
        "annulus": build_mesh(Domain.annulus(0.4), [(0.7, 0.0)], 0.1, 0.01),
        "square": build_mesh(Domain.polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)]), [(0.2, 0.0)], 0.15, 0.02),
    }


@pytest.mark.parametrize("name,chi", [("disk", 1), ("annulus", 0), ("square", 1)])
def test_mesh_topology_and_quality(meshes, name, chi):
    m = meshes[name]
    assert m.euler_characteristic() == chi
    assert m.min_angle() > 25.0
    assert np.all(m.areas > 0)


def test_mesh_area_matches_domain(meshes):
    assert meshes["disk"].areas.sum() == pytest.approx(np.pi, rel=2e-2)
    assert meshes["annulus"].areas.sum() == pytest.approx(np.pi * (1 - 0.16), rel=2e-2)
    assert meshes["square"].areas.sum() == pytest.approx(4.0, rel=1e-6)


def test_mesh_grades_toward_vortex(meshes):
    m = meshes["disk"]
    e = m.edges
    mid = m.points[e].mean(axis=1)
    length = np.linalg.norm(m.points[e[:, 0]] - m.points[e[:, 1]], axis=1)
    near = np.linalg.norm(mid - [0.3, 0.1], axis=1) < 0.02
    far = np.linalg.norm(mid - [0.3, 0.1], axis=1) > 0.5
    assert length[near].max() < 0.3 * length[far].mean()


def test_boundary_edges_leave_interior_on_the_left(meshes):
    m = meshes["disk"]
    e = m.boundary_edges
    a, b = m.points[e[:, 0]], m.points[e[:, 1]]
    # counter-clockwise outer loop: cross(a, b) > 0 about the origin
    assert np.all(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0] > 0)


def test_annulus_has_two_loops(meshes):
    m = meshes["annulus"]
    assert sorted(m.loops) == [0, 1]
    r_in = np.hypot(*m.points[m.loops[1]].T)
    assert np.allclose(r_in, 0.4, atol=1e-9)


def test_mesh_is_deterministic():
    a = build_mesh(Domain.disk(), [(0.1, 0.2)], 0.15, 0.02, seed=3)
    b = build_mesh(Domain.disk(), [(0.1, 0.2)], 0.15, 0.02, seed=3)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.triangles, b.triangles)


def test_mesh_roundtrip(tmp_path, meshes):
    m = meshes["annulus"]
    write_mesh(tmp_path / "m.txt", m)
    r = read_mesh(tmp_path / "m.txt")
    assert np.array_equal(r.points, m.points)
    assert np.array_equal(r.triangles, m.triangles)
    assert np.array_equal(r.boundary_tags, m.boundary_tags)


def test_locate_returns_barycentric(meshes):
    m = meshes["disk"]
    pts = np.array([[0.1, 0.2], [-0.5, 0.3]])
    idx, bary = m.locate(pts)
    assert np.all(idx >= 0)
    rebuilt = np.einsum("ik,ikd->id", bary, m.points[m.triangles[idx]])
    assert np.allclose(rebuilt, pts)
    idx, _ = m.locate(np.array([[2.0, 0.0]]))
    assert idx[0] == -1


def test_sdf_signs():
    d = Domain.annulus(0.5)
    assert d.sdf([[0.75, 0]])[0] == pytest.approx(-0.25)
    assert d.sdf([[0.2, 0]])[0] > 0
    assert d.sdf([[1.5, 0]])[0] > 0


def test_invalid_domains():
    with pytest.raises(InvalidDomain):
        Domain.annulus(1.2)
    with pytest.raises(InvalidDomain):
        Domain.polygon([(0, 0), (1, 1), (1, 0), (0, 1)])  # bow tie
    with pytest.raises(InvalidDomain):
        Domain("ellipse")


def test_polygon_orientation_is_normalized():
    cw = Domain.polygon([(-1, -1), (-1, 1), (1, 1), (1, -1)])
    v = np.asarray(cw.vertices)
    area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    assert area > 0


def test_winding_of_simple_loops():
    t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    assert winding_of_loop(np.exp(3j * t)) == 3
    assert winding_of_loop(np.exp(-2j * t)) == -2
    assert winding_of_loop(np.exp(1j * 0.3 * np.sin(t))) == 0


def test_unwrap_refuses_ambiguous_gap():
    with pytest.raises(AmbiguousLift):
        unwrap_phase(np.array([1.0, -1.0]))


def test_boundary_datum_degree_and_speed():
    g = BoundaryDatum((ComponentPhase(2, sin=(0.0, -0.3)),))
    d = Domain.disk()
    t = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    pts = np.column_stack([np.cos(t), np.sin(t)])
    assert winding_of_loop(g.value(d, 0, pts)) == 2
    tang = np.column_stack([-np.sin(t), np.cos(t)])
    assert np.allclose(g.phase_speed(d, 0, pts, tang), 2 - 0.6 * np.cos(2 * t))
