import numpy as np
import pytest

from vortexlab.errors import BadSchedule
from vortexlab.experiments import fd_gradient_green, relative_gap, renorm_study
from vortexlab.renorm import renorm_energy_rho_limit

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def single_study(single):
    return renorm_study(single)


@pytest.fixture(scope="module")
def pair_study(pair):
    return renorm_study(pair)


def test_single_vortex_energy_exact(single, single_study):
    a = single.config.points[0]
    exact = -TWO_PI * np.log(1 - a @ a)
    assert single_study["green"].value == pytest.approx(exact, rel=5e-3)
    assert single_study["rho"].value == pytest.approx(exact, rel=5e-3)


def test_single_vortex_gradient_exact(single, single_study):
    a = single.config.points[0]
    exact = 4 * np.pi * a / (1 - a @ a)
    assert relative_gap(single_study["grad_phase"], exact) < 2e-3
    assert relative_gap(single_study["grad_green"], exact) < 2e-3


def test_pair_energy_and_gradient_exact(pair, pair_study):
    a = 0.4
    exact = -4 * np.pi * np.log(2 * a) - 4 * np.pi * np.log(1 - a**4)
    assert pair_study["green"].value == pytest.approx(exact, rel=5e-3)
    assert pair_study["rho"].value == pytest.approx(exact, rel=5e-3)
    gx = 0.5 * (-4 * np.pi / a + 16 * np.pi * a**3 / (1 - a**4))
    expected = np.array([gx, 0.0, -gx, 0.0])
    assert relative_gap(pair_study["grad_phase"], expected) < 2e-3
    assert relative_gap(pair_study["grad_green"], expected) < 2e-3


def test_green_terms_sum_to_value(single_study, pair_study):
    for s in (single_study, pair_study):
        rep = s["green"]
        assert sum(rep.terms.values()) == pytest.approx(rep.value, abs=1e-12)


def test_annulus_methods_agree(annulus):
    s = renorm_study(annulus)
    assert s["gap"] < 1e-2
    assert relative_gap(s["grad_phase"], s["grad_green"]) < 2e-2


def test_fd_gradient_matches_formulas(single, single_study):
    fd = fd_gradient_green(single)
    assert relative_gap(fd, single_study["grad_green"]) < 1e-2
    assert relative_gap(fd, single_study["grad_phase"]) < 1e-2


def test_reflection_symmetry_kills_transverse_component(single_axis):
    s = renorm_study(single_axis)
    scale = np.linalg.norm(s["grad_phase"])
    assert abs(s["grad_phase"][1]) < 1e-3 * scale
    assert abs(s["grad_green"][1]) < 1e-3 * scale


def test_rho_schedule_is_validated(single):
    with pytest.raises(BadSchedule):
        renorm_energy_rho_limit(single.cmap, [0.01, 0.02])
