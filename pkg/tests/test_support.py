"""Sampling, configuration, report rendering, gallery and raw jet arithmetic."""

import json
import math

import numpy as np
import pytest

from solitonscope import gallery
from solitonscope import jet as J
from solitonscope.config import load_config
from solitonscope.errors import ConfigError, DomainError, ExcludedPointError, NumericalFailure, RankDeficiencyError
from solitonscope.report import fmt_float, to_csv, to_json
from solitonscope.sampling import evaluate_points, grid


class TestSampling:
    def test_grid_order(self):
        pts = grid([(0, 1, 2), (10, 12, 3)])
        assert pts.tolist() == [[0, 10], [0, 11], [0, 12], [1, 10], [1, 11], [1, 12]]

    def test_drop_budget(self):
        def fn(p):
            if p[0] < 0.15:
                raise RankDeficiencyError("boom")
            return p[0]

        pts = grid([(0, 1, 11)])
        kept, vals, dropped = evaluate_points(fn, pts)
        assert len(kept) == 9 and len(dropped) == 2 and vals == list(kept[:, 0])
        with pytest.raises(NumericalFailure, match="budget"):
            evaluate_points(fn, pts, budget=0.1)

    def test_excluded_points_do_not_count(self):
        def fn(p):
            if p[0] < 0.5:
                raise ExcludedPointError("outside")
            return 1.0

        kept, _, dropped = evaluate_points(fn, grid([(0, 1, 11)]))
        assert len(kept) == 6 and all(d.excluded for d in dropped)

    def test_threads_preserve_order(self):
        pts = grid([(0, 1, 50)])
        serial = evaluate_points(lambda p: p[0] ** 2, pts, threads=1)[1]
        assert evaluate_points(lambda p: p[0] ** 2, pts, threads=4)[1] == serial

    def test_other_errors_propagate(self):
        with pytest.raises(ZeroDivisionError):
            evaluate_points(lambda p: 1 / 0, grid([(0, 1, 3)]))


class TestConfig:
    DOC = {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["u1", "u2", "5"],
        "domain": [{"min": -1, "max": 1, "samples": 11}] * 2,
    }

    def test_defaults(self):
        cfg = load_config(self.DOC)
        assert cfg.flavor == "conformal" and cfg.jet_order == 4 and cfg.tolerances["soliton"] == 1e-7
        assert len(cfg.points()) == 121
        assert cfg.config_hash() == load_config(json.dumps(self.DOC)).config_hash()

    def test_metric_with_hypersurface(self):
        with pytest.raises(ConfigError, match="'metric'.*mode=hypersurface"):
            load_config(dict(self.DOC, metric=[["1"], ["0", "1"]]))

    def test_samples_minimum(self):
        with pytest.raises(ConfigError, match="samples"):
            load_config(dict(self.DOC, domain=[{"min": -1, "max": 1, "samples": 1}] * 2))

    def test_flat_metric_rows(self):
        cfg = load_config({
            "mode": "intrinsic", "dimension": 2, "metric": ["1", "0", "u1^2"],
            "vector_field": ["u1", "0"], "domain": [{"min": 1, "max": 2, "samples": 2}] * 2,
        })
        assert cfg.metric_rows() == [["1"], ["0", "u1^2"]]

    @pytest.mark.parametrize(
        "change",
        [
            {"immersion": ["u1", "5"]},
            {"dimension": 3},
            {"domain": [{"min": 1, "max": 1, "samples": 3}] * 2},
            {"domain": [{"min": 0, "max": 1, "samples": 2000}] * 2},
            {"bogus": 1},
            {"tolerances": {"soliton": -1}},
        ],
    )
    def test_rejections(self, change):
        with pytest.raises(ConfigError):
            load_config(dict(self.DOC, **change))

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config("{not json")


class TestReport:
    def test_float_format(self):
        assert fmt_float(0.1) == "1.0000000000000001e-01"
        assert fmt_float(float("nan")) is None
        assert float(fmt_float(math.pi)) == math.pi

    def test_json_is_stable(self):
        rep = {"b": np.float64(1.5), "a": [np.arange(2), {"x": None, "y": True}], "c": float("inf")}
        text = to_json(rep)
        assert text == to_json(rep)
        assert json.loads(text) == {"b": 1.5, "a": [[0, 1], {"x": None, "y": True}], "c": None}
        assert list(json.loads(text)) == ["b", "a", "c"]

    def test_csv(self):
        text = to_csv({"columns": ["u1", "v"], "rows": [[0.5, 1], [1.0, None]]},
                      [{"point": [2.0], "reason": "excluded"}])
        assert text.splitlines() == [
            "u1,v",
            "5.0000000000000000e-01,1",
            "1.0000000000000000e+00,",
            "# dropped (2.0000000000000000e+00): excluded",
        ]


class TestGallery:
    def test_listing(self):
        entries = {e[0]: e for e in gallery.list_entries()}
        assert entries["sphere"][3] == "Hypersphere"
        assert entries["torus"][3] == "NotSoliton"
        assert gallery.get("warped_cosh_cylinder").expected["hess"] == "sinh(u1)*g"
        for name in ("hyperplane", "circular_cone", "catenoid", "helicoid", "graph", "rn_log_potential",
                     "hessian_r2_flat", "hessian_r2_lc", "polar_flat"):
            assert name in entries

    def test_sphere_instance(self):
        inst = gallery.instantiate("sphere", r=2, center=(1, 0, 0))
        u = (1.0, 0.5)
        want = [1 + 2 * math.sin(u[0]) * math.cos(u[1]), 2 * math.sin(u[0]) * math.sin(u[1]), 2 * math.cos(u[0])]
        np.testing.assert_allclose(inst.geometry.position(u), want)
        assert inst.geometry.domain[0] == pytest.approx((0.2, math.pi - 0.2))

    def test_rn_log_instance(self):
        inst = gallery.instantiate("rn_log_potential", m=1, beta=1, n=3)
        b = {"u1": 0.1, "u2": 0.2, "u3": 0.3, **inst.config.parameters}
        from solitonscope.expr import evaluate, parse

        s = 0.14 + 1
        assert evaluate(parse(inst.potential), b) == pytest.approx(-math.log(s))
        assert evaluate(parse(inst.h_function), b) == pytest.approx(-1 / s)

    def test_cone_instance(self):
        inst = gallery.instantiate("circular_cone", c=2)
        np.testing.assert_allclose(inst.geometry.position((1.5, 0.0)), [1.5, 0, 3.0])
        assert inst.geometry.domain[0] == (0.5, 2.0)

    @pytest.mark.parametrize("bad", [{"r": 0}, {"nope": 1}])
    def test_parameter_checks(self, bad):
        with pytest.raises(ConfigError):
            gallery.instantiate("sphere", bad)


class TestJetArithmetic:
    SPACE = J.jet_space(2, 4)

    def _var(self, x, i):
        return J.Jet.variable(x, i, self.SPACE)

    def test_inverse_and_determinant(self):
        x, y = self._var(0.3, 0), self._var(-0.2, 1)
        m = J.Jet.stack([J.Jet.stack([2 + x * x, x * y]), J.Jet.stack([x * y, 3 + J.sin(y)])])
        inv = J.inv(m)
        prod = J.einsum("ij,jk->ik", m, inv)
        np.testing.assert_allclose(prod.data[..., 0], np.eye(2), atol=1e-14)
        np.testing.assert_allclose(prod.data[..., 1:], 0, atol=1e-13)
        d = J.det(m)
        want = (2 + x * x) * (3 + J.sin(y)) - (x * y) * (x * y)
        np.testing.assert_allclose(d.data, want.data, atol=1e-14)

    def test_chain_rule_composition(self):
        x = self._var(0.4, 0)
        a = J.exp(J.log(J.cosh(x)))
        np.testing.assert_allclose(a.data, J.cosh(x).data, rtol=1e-13)

    def test_diff_lowers_order(self):
        x, y = self._var(0.4, 0), self._var(0.1, 1)
        f = x**3 * y
        d = f.diff(0)
        assert d.order == 3
        assert d.partial((1, 1)) == pytest.approx(6 * 0.4)

    def test_sqrt_domain(self):
        with pytest.raises(DomainError):
            J.sqrt(self._var(0.0, 0) * 0.0 - 1.0)
