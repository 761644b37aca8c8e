import math

import numpy as np
import pytest

from solitonscope import gallery
from solitonscope.errors import ConfigError, NotApplicableError
from solitonscope.hypersurface import Immersion
from solitonscope.sampling import grid
from solitonscope.soliton import (
    SolitonProblem,
    check_concurrent,
    check_conformal,
    check_flavored,
    check_minimal_phi1,
    identity_ensays,
    identity_f1,
    identity_potential,
    identity_s3,
)
from solitonscope.tensor import MetricField

PTS2 = grid([(0.3, 1.2, 4), (0.2, 2.5, 4)])
PLANE = Immersion(["u1", "u2", "5"])
SPHERE = Immersion(["2*sin(u1)*cos(u2)", "2*sin(u1)*sin(u2)", "2*cos(u1)"])
TORUS = Immersion(["(3 + cos(u1))*cos(u2)", "(3 + cos(u1))*sin(u2)", "sin(u1)"])
FLAT3 = MetricField.euclidean(3)
PTS3 = grid([(-1, 1, 3)] * 3)


class TestConformal:
    def test_plane(self):
        rep = check_conformal(SolitonProblem(PLANE, points=PTS2))
        np.testing.assert_allclose(rep.phi, 1.0)
        assert rep.sup_residual == 0 and rep.is_soliton

    def test_origin_sphere_is_trivial(self):
        rep = check_conformal(SolitonProblem(SPHERE, points=PTS2))
        np.testing.assert_allclose(rep.phi, 0.0, atol=1e-14)
        assert rep.sup_residual < 1e-14 and rep.is_soliton

    def test_torus(self):
        rep = check_conformal(SolitonProblem(TORUS, points=PTS2))
        assert rep.sup_residual > 0.1 and rep.verdict == "NotSoliton"

    @pytest.mark.parametrize("c", [0.5, 3.0])
    def test_scaling_preserves_verdict(self, c):
        for s in (PLANE, SPHERE, TORUS):
            base = check_conformal(SolitonProblem(s, points=PTS2))
            scaled = check_conformal(SolitonProblem(s.transformed(c * np.eye(3)), points=PTS2))
            assert scaled.verdict == base.verdict
            np.testing.assert_allclose(scaled.phi, base.phi, atol=1e-12)

    def test_gradient_matches_vector_field(self):
        f = "u1^2 + u1*u2 + 0.5*u3^2"
        grad = ["2*u1 + u2", "u1", "u3"]
        a = check_flavored(SolitonProblem(FLAT3, "gradient_conformal", PTS3, potential=f))
        b = check_conformal(SolitonProblem(FLAT3, "conformal", PTS3, vector_field=grad))
        np.testing.assert_allclose(a.residual, b.residual, atol=1e-10)
        np.testing.assert_allclose(a.phi, b.phi, atol=1e-10)

    def test_almost_yamabe_verdict_equals_conformal(self):
        for s in (PLANE, SPHERE, TORUS):
            a = check_flavored(SolitonProblem(s, "almost_yamabe", PTS2))
            b = check_conformal(SolitonProblem(s, points=PTS2))
            assert a.verdict == b.verdict
            np.testing.assert_allclose(a.rho, a.columns["R"] - a.phi)


class TestFlavors:
    def test_flat_gradient_conformal(self):
        rep = check_flavored(SolitonProblem(FLAT3, "gradient_conformal", PTS3, potential="0.5*(u1^2+u2^2+u3^2)"))
        np.testing.assert_allclose(rep.phi, 1.0)
        assert rep.sup_residual == 0

    def test_round_s3_is_yamabe(self):
        inst = gallery.instantiate("round_s3")
        rep = check_flavored(SolitonProblem(inst.geometry, "yamabe", inst.points(), vector_field=inst.vector_field))
        assert rep.is_soliton and rep.rho == pytest.approx(6.0)

    def test_round_s3_k_yamabe(self):
        inst = gallery.instantiate("round_s3")
        for k, sigma in ((1, 1.5), (2, 0.75), (3, 0.125)):
            rep = check_flavored(SolitonProblem(inst.geometry, "k_yamabe", inst.points(), k=k, potential="0"))
            assert rep.is_soliton
            assert rep.rho == pytest.approx(sigma)

    def test_rn_log_potential_against_direct_formula(self):
        inst = gallery.instantiate("rn_log_potential", {"m": 1.0, "beta": 1.0, "n": 3})
        rep = check_flavored(
            SolitonProblem(inst.geometry, "h_almost", inst.points(), potential=inst.potential, h_function=inst.h_function)
        )
        want = []
        for x in rep.points:
            s = x @ x + 1.0
            hess = -(2 * np.eye(3) / s - 4 * np.outer(x, x) / s**2)
            phi = np.trace(hess) / 3
            want.append(abs(-1.0 / s) * np.max(np.abs(hess - phi * np.eye(3))))
        np.testing.assert_allclose(rep.residual, want, atol=1e-14)
        assert rep.verdict == "NotSoliton"
        assert rep.sup_residual == pytest.approx(0.3413, abs=1e-4)

    def test_h_almost_rejects_vanishing_or_sign_changing_h(self):
        for h in ("0*u1", "u1"):
            with pytest.raises(NotApplicableError):
                check_flavored(SolitonProblem(FLAT3, "h_almost", PTS3, potential="u1^2", h_function=h))

    def test_hessian_example_conventions(self):
        flat = gallery.instantiate("hessian_r2_flat")
        lc = gallery.instantiate("hessian_r2_lc")
        a = check_flavored(SolitonProblem(flat.geometry, "gradient_conformal", flat.points(), potential=flat.potential, flat_hessian=True))
        b = check_flavored(SolitonProblem(lc.geometry, "gradient_conformal", lc.points(), potential=lc.potential))
        assert a.is_soliton and np.allclose(a.phi, 1.0)
        assert not b.is_soliton

    def test_configuration_errors(self):
        with pytest.raises(ConfigError):
            SolitonProblem(FLAT3, "ricci")
        with pytest.raises(ConfigError):
            SolitonProblem(FLAT3, "k_yamabe", PTS3, k=4, potential="u1")
        with pytest.raises(ConfigError):
            SolitonProblem(MetricField.euclidean(2), "k_yamabe", PTS2, potential="u1")
        with pytest.raises(ConfigError):
            SolitonProblem(FLAT3, "conformal", PTS3)


class TestIdentities:
    def test_concurrent(self):
        flat2 = MetricField.euclidean(2)
        assert check_concurrent(flat2, ["u1", "u2"], PTS2).sup_defect == 0
        assert check_concurrent(flat2, ["2*u1", "2*u2"], PTS2).sup_defect == 1.0
        polar = MetricField.from_exprs([["1"], ["0", "u1^2"]])
        assert check_concurrent(polar, ["u1", "0"], PTS2).sup_defect <= 1e-10

    def test_f1_examples(self):
        rep = identity_f1(FLAT3, "0.5*(u1^2+u2^2+u3^2)", PTS3)
        assert rep.sup_defect == 0 and rep.passed
        s2 = MetricField.from_exprs([["1"], ["0", "sin(u1)^2"]])
        rep = identity_f1(s2, "3", PTS2)
        assert rep.sup_defect == 0
        np.testing.assert_array_equal(rep.aux["phi"], 0)

    def test_f1_precondition(self):
        with pytest.raises(NotApplicableError, match="not applicable"):
            identity_f1(FLAT3, "u1^3", PTS3)

    def test_ensays(self):
        rep = identity_ensays(PLANE, PTS2)
        assert rep.sup_defect == 0 and rep.passed
        rep = identity_ensays(SPHERE, PTS2)
        assert rep.sup_defect < 1e-14
        np.testing.assert_allclose(rep.aux["phi"] - 1, -1.0, atol=1e-14)
        rep = identity_ensays(TORUS, PTS2)
        assert not rep.passed
        assert np.max(rep.aux["e2_defect"]) < 1e-12

    def test_ensays_agrees_with_conformal_check(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a, b, c = map(float, rng.normal(scale=0.3, size=3))
            s = Immersion(["u1", "u2", f"{a!r}*u1^2 + {b!r}*u1*u2 + {c!r}*u2^2"]) if rng.random() < 0.7 else \
                Immersion([f"{1 + a * a!r}*sin(u1)*cos(u2)", f"{1 + a * a!r}*sin(u1)*sin(u2)", f"{1 + a * a!r}*cos(u1)"])
            conf = check_conformal(SolitonProblem(s, points=PTS2, tol_soliton=1e-8))
            ens = identity_ensays(s, PTS2, tol_soliton=1e-8)
            assert conf.is_soliton == ens.passed

    def test_minimal(self):
        cat = Immersion(["cosh(u1)*cos(u2)", "cosh(u1)*sin(u2)", "u1"])
        rep = check_minimal_phi1(cat, PTS2)
        assert np.max(np.abs(rep.aux["alpha"])) <= 1e-10 and rep.sup_defect <= 1e-9
        flat = Immersion(["u1", "u2", "0"])
        assert check_minimal_phi1(flat, PTS2).sup_defect == 0
        with pytest.raises(NotApplicableError):
            check_minimal_phi1(SPHERE, PTS2)

    def test_s3_and_potential(self):
        for s in (PLANE, SPHERE, TORUS):
            assert identity_s3(s, PTS2).passed
            assert identity_potential(s, PTS2).passed


def test_warped_product_rho_is_reported():
    inst = gallery.instantiate("warped_cosh_cylinder")
    rep = check_flavored(SolitonProblem(inst.geometry, "almost_yamabe", inst.points(), potential=inst.potential))
    assert rep.is_soliton
    sinh_t = np.array([math.sinh(p[0]) for p in rep.points])
    np.testing.assert_allclose(rep.phi, sinh_t, atol=1e-13)
    np.testing.assert_allclose(rep.rho, rep.columns["R"] - sinh_t, atol=1e-12)
