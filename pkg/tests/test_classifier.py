import numpy as np
import pytest

from solitonscope import gallery
from solitonscope.classifier import ClassifyConfig, classify, umbilicity_stats
from solitonscope.hypersurface import Immersion
from solitonscope.sampling import grid

from conftest import random_rotation

PTS = grid([(0.3, 2.8, 8), (0.0, 6.0, 8)])


def verdict(s, points=PTS, **kw):
    return classify(s, ClassifyConfig(points=points, **kw))


def test_sphere_center_and_radius():
    inst = gallery.instantiate("sphere", {"r": 2.0, "center": (1.0, 0.0, 0.0)})
    v = verdict(inst.geometry, inst.points())
    assert v.tag == "Hypersphere"
    np.testing.assert_allclose(v.center, [1, 0, 0], atol=1e-6)
    assert v.radius == pytest.approx(2.0, abs=1e-6)
    assert v.parameters().keys() == {"center", "radius"}


def test_plane():
    inst = gallery.instantiate("hyperplane", {"d": 5.0})
    v = verdict(inst.geometry, inst.points())
    assert v.tag == "Hyperplane"
    np.testing.assert_allclose(np.abs(v.normal), [0, 0, 1], atol=1e-12)
    assert v.offset * v.normal[2] == pytest.approx(5.0)


def test_cone_and_plane_through_origin():
    inst = gallery.instantiate("circular_cone", {"c": 2.0})
    v = verdict(inst.geometry, inst.points())
    assert v.tag == "Cone" and not v.notes
    flat = Immersion(["u1", "u2", "0"])
    v = verdict(flat, grid([(-1, 1, 5), (-1, 1, 5)]))
    assert v.tag == "Cone" and "plane through origin" in v.notes[0]


@pytest.mark.parametrize("entry", ["torus", "catenoid", "helicoid", "graph"])
def test_non_solitons(entry):
    inst = gallery.instantiate(entry)
    v = verdict(inst.geometry, inst.points())
    assert v.tag == "NotSoliton"
    assert v.diagnostics["soliton_sup_residual"] > 1e-3


def test_umbilicity_stats():
    sphere = gallery.instantiate("sphere")
    torus = gallery.instantiate("torus")
    plane = gallery.instantiate("hyperplane")
    assert umbilicity_stats(sphere.geometry, sphere.points())[1] <= 1e-10
    assert umbilicity_stats(torus.geometry, torus.points())[1] >= 0.5
    assert umbilicity_stats(plane.geometry, plane.points())[1] == 0


@pytest.mark.parametrize("seed", range(4))
def test_rotation_and_translation_invariance(seed):
    q = random_rotation(seed)
    shift = np.random.default_rng(seed).normal(size=3)
    sphere = gallery.instantiate("sphere")
    base = verdict(sphere.geometry, sphere.points())
    moved = verdict(sphere.geometry.transformed(q, shift), sphere.points())
    assert moved.tag == "Hypersphere"
    np.testing.assert_allclose(moved.center, q @ base.center + shift, atol=1e-6)
    assert moved.radius == pytest.approx(base.radius, abs=1e-6)


@pytest.mark.parametrize("c", [0.25, 4.0])
def test_scaling(c):
    sphere = gallery.instantiate("sphere")
    v = verdict(sphere.geometry.transformed(c * np.eye(3)), sphere.points())
    assert v.tag == "Hypersphere"
    assert v.radius == pytest.approx(2.0 * c, rel=1e-9)
    np.testing.assert_allclose(v.center, [c, 0, 0], atol=1e-6 * c)


def test_tilted_planes():
    tilted = Immersion(["u1", "u2", "0.5*u1 + 0*u2"])
    v = verdict(tilted, grid([(-1, 1, 5), (-1, 1, 5)]))
    assert v.tag == "Cone"
    shifted = Immersion(["u1", "u2", "0.5*u1 + 1"])
    v = verdict(shifted, grid([(-1, 1, 5), (-1, 1, 5)]))
    assert v.tag == "Hyperplane"


def test_config_validation():
    with pytest.raises(ValueError):
        ClassifyConfig(tol_lambda=0.0)
    with pytest.raises(ValueError):
        verdict(Immersion(["u1", "u2", "5"]), points=[])
