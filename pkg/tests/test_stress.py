import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vortexlab.errors import BadRadius
from vortexlab.experiments import relative_gap
from vortexlab.geometry import BoundaryDatum, Domain, build_mesh
from vortexlab.pharmonic import minimize_phase
from vortexlab.renorm import grad_W_phase
from vortexlab.stress import (
    TestField,
    coefficients,
    cutoff,
    cutoff_derivative,
    default_delta,
    delta_independence_check,
    pairing_with_field,
    stress_tensor,
)
from vortexlab.vortex import VortexConfig, build_canonical_map

vec = arrays(np.float64, 2, elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=60)
@given(v=vec, p=st.floats(1.01, 2.0))
def test_trace_identity(v, p):
    S = stress_tensor(p, v)
    assert np.trace(S) == pytest.approx((p - 2) * np.linalg.norm(v) ** p, abs=1e-9 * (1 + np.linalg.norm(v) ** p))
    assert np.allclose(S, S.T)


def test_stress_examples():
    assert np.allclose(stress_tensor(2.0, [1.0, 0.0]), [[1, 0], [0, -1]])
    assert np.allclose(stress_tensor(1.5, [1.0, 0.0]), [[0.5, 0], [0, -1]])
    assert np.allclose(stress_tensor(1.5, [0.0, 0.0]), 0.0)
    batch = stress_tensor(1.9, np.array([[1.0, 0.0], [0.0, 2.0]]))
    assert batch.shape == (2, 2, 2)


def test_cutoff_shape():
    t = np.linspace(0, 3, 301)
    c = cutoff(t)
    assert np.all(c[t <= 1] == 1) and np.all(c[t >= 2] == 0)
    assert np.all(np.diff(c) <= 1e-15)
    fd = np.gradient(c, t)
    assert np.abs(fd - cutoff_derivative(t)).max() < 1e-3


def test_test_field_jacobian_matches_differences():
    X = TestField(np.array([0.1, -0.2]), 0.1, 1)
    y = np.array([[0.24, -0.15]])
    J = X.jacobian(y)[0]
    h = 1e-6
    fd = np.column_stack([(X(y + h * e) - X(y - h * e))[0] / (2 * h) for e in np.eye(2)])
    assert np.allclose(J, fd, atol=1e-6)


def test_p2_coefficients_equal_gradient(single):
    c = coefficients(2.0, single.cmap)
    assert relative_gap(c.c, grad_W_phase(single.cmap)) < 2e-2
    assert c.error_estimate < 1e-3 * (1 + np.linalg.norm(c.c))


def test_symmetric_pair_coefficients_are_opposite(pair):
    c = coefficients(2.0, pair.cmap).pairs
    assert np.allclose(c[0], -c[1], atol=2e-3 * np.linalg.norm(c))
    assert abs(c[0, 1]) < 2e-3 * np.linalg.norm(c)


def test_pairing_is_linear_in_the_field(pair):
    delta = 0.1
    c = coefficients(2.0, pair.cmap, delta).c
    rng = np.random.default_rng(7)
    h = rng.normal(size=4)
    assert pairing_with_field(2.0, pair.cmap, h, delta) == pytest.approx(c @ h, rel=1e-10)


def test_delta_independence_at_p(single):
    sol = minimize_phase(1.95, single.cmap)
    rep = delta_independence_check(1.95, sol, [0.1, 0.15, 0.2], relative=True)
    assert rep["passed"], rep


def test_bad_radius(single, pair):
    with pytest.raises(BadRadius):
        coefficients(2.0, single.cmap, delta=1.0)
    with pytest.raises(BadRadius):
        coefficients(2.0, single.cmap, delta=0.0)
    with pytest.raises(BadRadius):
        pairing_with_field(2.0, pair.cmap, np.ones(4), delta=0.25)


def test_default_delta(pair):
    assert default_delta(pair.config) == pytest.approx(0.15)


def test_no_defect_away_from_vortices():
    # a point where the map is smooth: the pairing is the divergence of a smooth stress, hence zero
    dom = Domain.disk()
    mesh = build_mesh(dom, [(0.3, 0.1), (-0.3, 0.0)], 0.05, 0.005)
    cfg = VortexConfig([(0.3, 0.1)], [1], dom)
    cmap = build_canonical_map(dom, BoundaryDatum.from_windings(1), cfg, mesh)
    probe = VortexConfig([(-0.3, 0.0)], [1], dom)

    # anything with current() and config works as a source
    source = type("Source", (), {"current": lambda self: cmap.current(), "config": probe})()
    c = coefficients(2.0, source, delta=0.05)
    assert np.linalg.norm(c.c) < 2e-2


@pytest.mark.parametrize("p", [2.0, 1.9])
def test_centered_vortex_has_no_defect(centered, p):
    sol = centered.cmap if p == 2.0 else minimize_phase(p, centered.cmap)
    c = coefficients(p, sol)
    # scale: the single off-center coefficient size
    assert np.linalg.norm(c.c) < 1e-3 * 4 * np.pi
