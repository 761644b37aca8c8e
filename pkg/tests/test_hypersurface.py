import numpy as np
import pytest

from solitonscope.errors import ExcludedPointError, RankDeficiencyError
from solitonscope.hypersurface import (
    Immersion,
    compatibility_at,
    frame_at,
    induced_metric,
    lie_position_at,
)
from solitonscope.tensor import curvature_at

from conftest import random_rotation

PLANE = Immersion(["u1", "u2", "5"])
SPHERE = Immersion(["2*sin(u1)*cos(u2)", "2*sin(u1)*sin(u2)", "2*cos(u1)"], [(0.2, 2.9), (0, 6.2)])
CONE = Immersion(["u1*cos(u2)", "u1*sin(u2)", "2*u1"])
TORUS = Immersion(["(3 + cos(u1))*cos(u2)", "(3 + cos(u1))*sin(u2)", "sin(u1)"])
HELICOID = Immersion(["u1*cos(u2)", "u1*sin(u2)", "u2"])


def test_plane_frame():
    fr = frame_at(PLANE, [0.3, -0.7])
    assert abs(fr.N[2]) == 1.0 and fr.lam == pytest.approx(5.0 * fr.N[2])
    np.testing.assert_array_equal(fr.kappa, 0)
    assert fr.alpha == 0
    np.testing.assert_allclose(fr.VT, [0.3, -0.7, 0.0])


def test_sphere_frame():
    fr = frame_at(SPHERE, [1.0, 0.5])
    assert abs(fr.lam) == pytest.approx(2.0)
    np.testing.assert_allclose(fr.lam * fr.kappa, -1.0, atol=1e-14)
    assert fr.alpha == pytest.approx(-1.0 / fr.lam)
    np.testing.assert_allclose(fr.VT, 0, atol=1e-15)
    np.testing.assert_allclose(fr.VT + fr.V_perp, fr.V, atol=1e-15)


def test_cone_support_function_vanishes():
    for u in ([0.5, 0.1], [1.2, 2.0], [2.0, 5.0]):
        assert abs(frame_at(CONE, u).lam) < 1e-14


@pytest.mark.parametrize(
    "s, u, want",
    [
        (PLANE, [0.1, 0.2], lambda u: np.eye(2)),
        (SPHERE, [1.0, 0.4], lambda u: np.diag([4.0, 4 * np.sin(u[0]) ** 2])),
        (HELICOID, [0.7, 0.4], lambda u: np.diag([1.0, 1 + u[0] ** 2])),
    ],
)
def test_induced_metric(s, u, want):
    np.testing.assert_allclose(induced_metric(s).at(u), want(u), atol=1e-14)


def test_induced_sphere_scalar_curvature():
    assert curvature_at(induced_metric(SPHERE), [1.0, 0.4]).R_scalar == pytest.approx(0.5, abs=1e-12)


def test_compatibility_residuals():
    c = compatibility_at(PLANE, [0.2, 0.3])
    assert c.gauss_residual == 0 and c.codazzi_residual == 0
    c = compatibility_at(SPHERE, [1.0, 0.3])
    assert c.gauss_residual <= 1e-9 and c.codazzi_residual <= 1e-9
    rng = np.random.default_rng(11)
    coeffs = rng.normal(scale=0.4, size=6)
    graph = Immersion(["u1", "u2", " + ".join(f"({float(c)!r})*{m}" for c, m in zip(coeffs, ["u1^2", "u1*u2", "u2^2", "u1^3", "u1*u2^2", "u2^3"]))])
    for u in rng.uniform(-1, 1, size=(20, 2)):
        c = compatibility_at(graph, u)
        assert c.gauss_residual <= 1e-8 and c.codazzi_residual <= 1e-8


def test_lie_paths():
    lie, via = lie_position_at(PLANE, [0.4, 0.1])
    np.testing.assert_allclose(lie, 2 * np.eye(2))
    np.testing.assert_allclose(via, 2 * np.eye(2))
    lie, via = lie_position_at(SPHERE, [1.0, 0.3])
    np.testing.assert_allclose(lie, 0, atol=1e-14)
    np.testing.assert_allclose(via, 0, atol=1e-14)
    lie, via = lie_position_at(TORUS, [0.3, 0.7])
    np.testing.assert_allclose(lie, via, atol=1e-9)
    g = induced_metric(TORUS).at([0.3, 0.7])
    assert np.max(np.abs(lie - 2 * g)) > 0.1


def test_orientation_swap():
    swapped = Immersion([TORUS.components[0], TORUS.components[1], TORUS.components[2]], chart_vars=("u2", "u1"))
    a = frame_at(TORUS, [0.3, 0.7])
    b = frame_at(swapped, [0.7, 0.3])
    np.testing.assert_allclose(b.N, -a.N, atol=1e-14)
    assert b.lam == pytest.approx(-a.lam)
    np.testing.assert_allclose(np.sort(b.lam * b.kappa), np.sort(a.lam * a.kappa), atol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_rigid_motion_covariance(seed):
    q = random_rotation(seed)
    moved = TORUS.transformed(q)
    a = frame_at(TORUS, [0.3, 0.7])
    b = frame_at(moved, [0.3, 0.7])
    np.testing.assert_allclose(b.N, q @ a.N, atol=1e-13)
    np.testing.assert_allclose(b.kappa, a.kappa, atol=1e-13)
    assert b.lam == pytest.approx(a.lam, abs=1e-13)


def test_rank_deficiency():
    with pytest.raises(RankDeficiencyError):
        frame_at(Immersion(["u1", "u1", "2*u1 + 0*u2"]), [0.1, 0.2])
    with pytest.raises(RankDeficiencyError):
        frame_at(CONE, [0.0, 0.3])


def test_domain_and_exclusion():
    with pytest.raises(ExcludedPointError):
        frame_at(SPHERE, [0.1, 0.0])
    s = Immersion(["u1", "u2", "u1*u2"], exclude="u1 - 0.5")
    with pytest.raises(ExcludedPointError):
        frame_at(s, [0.2, 0.0])
    frame_at(s, [0.7, 0.0])
