import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab.errors import IncompatibleDegrees, InvalidConfig, SingularPoint, TransportTooFar
from vortexlab.geometry import BoundaryDatum, Domain
from vortexlab.vortex import (
    VortexConfig,
    build_canonical_map,
    check_compatibility,
    circulation,
    singular_current,
    transport_config,
)

DISK = Domain.disk()


def test_config_validation():
    with pytest.raises(InvalidConfig, match=r"vortex 1 at \(1.2, 0\)"):
        VortexConfig([(0, 0), (1.2, 0)], [1, 1], DISK)
    with pytest.raises(InvalidConfig):
        VortexConfig([(0.1, 0), (0.1, 0)], [1, 1], DISK)
    with pytest.raises(InvalidConfig):
        VortexConfig([(0.1, 0)], [1, 1], DISK)
    with pytest.raises(InvalidConfig):
        VortexConfig(np.zeros((0, 2)), [], DISK)


def test_safe_radius():
    cfg = VortexConfig([(0.4, 0), (-0.4, 0)], [1, 1], DISK)
    assert cfg.min_separation == pytest.approx(0.8)
    assert cfg.boundary_distance == pytest.approx(0.6)
    assert cfg.safe_radius == pytest.approx(0.3)


def test_compatibility():
    cfg = VortexConfig([(0.4, 0), (-0.4, 0)], [1, 1], DISK)
    assert check_compatibility(DISK, BoundaryDatum.from_windings(2), cfg)
    bad = check_compatibility(DISK, BoundaryDatum.from_windings(1), cfg)
    assert not bad and "!=" in str(bad)
    ann = Domain.annulus(0.3)
    one = VortexConfig([(0.65, 0)], [1], ann)
    assert check_compatibility(ann, BoundaryDatum.from_windings(2, 1), one)
    assert not check_compatibility(ann, BoundaryDatum.from_windings(2, 0), one)


def test_incompatible_map_is_refused(single):
    with pytest.raises(IncompatibleDegrees):
        build_canonical_map(DISK, BoundaryDatum.from_windings(3), single.config, single.mesh)


def test_singular_current_refuses_vortex_point(single):
    with pytest.raises(SingularPoint):
        singular_current(single.config, single.config.points[0])
    j = singular_current(single.config, (0.3, 0.2))
    assert np.allclose(j, [-10.0, 0.0])


@pytest.mark.parametrize("name", ["single", "pair", "dipole", "annulus"])
def test_circulation_is_quantized(request, name):
    prob = request.getfixturevalue(name)
    cfg = prob.config
    cur = prob.cmap.current()
    for x, d in zip(cfg.points, cfg.degrees):
        for r in (0.2, 0.5, 0.9):
            assert circulation(cur, x, r * cfg.safe_radius) / (2 * np.pi) == pytest.approx(d, abs=1e-3)


def test_map_has_unit_modulus_and_matches_boundary(single):
    m = single.mesh
    b = m.points[m.boundary_vertices]
    u = single.cmap.evaluate(b)
    assert np.allclose(np.abs(u), 1.0)
    assert np.allclose(u, single.datum.value(DISK, 0, b), atol=1e-10)
    inner = np.array([[0.0, 0.5], [-0.5, -0.2]])
    assert np.allclose(np.abs(single.cmap.evaluate(inner)), 1.0)


def test_annulus_inner_boundary_is_matched(annulus):
    m = annulus.mesh
    loop = m.points[m.loops[1]]
    u = annulus.cmap.evaluate(loop)
    assert np.allclose(u, annulus.datum.value(annulus.domain, 1, loop), atol=1e-10)


shift = st.floats(-0.04, 0.04, allow_nan=False)


@settings(max_examples=8, deadline=None)
@given(dx=shift, dy=shift)
def test_transport_matches_fresh_map(single, dx, dy):
    new = single.config.points + [dx, dy]
    moved = transport_config(single.cmap, new)
    fresh = build_canonical_map(DISK, single.datum, single.config.moved(new), single.mesh)
    pts = np.array([[-0.5, 0.2], [0.1, -0.6], [0.7, 0.4]])
    assert np.allclose(moved.evaluate(pts), fresh.evaluate(pts), atol=1e-10)
    assert np.allclose(moved.current()(pts), fresh.current()(pts), atol=1e-8)


def test_transport_too_far(single):
    with pytest.raises(TransportTooFar):
        transport_config(single.cmap, single.config.points + [0.4, 0.0])


def test_transport_identity_returns_same_map(single):
    assert transport_config(single.cmap, single.config.points) is single.cmap
