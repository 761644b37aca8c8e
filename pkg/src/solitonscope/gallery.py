"""Built-in example families with expected outcomes.

Each entry renders to a run configuration (plain JSON-compatible dict), so the
CLI and the library build problems through the same path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .config import RunConfig, validate
from .errors import ConfigError

TWO_PI_OPEN = 6.2  # stops short of 2*pi so the angular grid has no duplicate column


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    constraint: str = ""


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    kind: str  # "immersion" | "intrinsic"
    params: tuple
    build: Callable[[dict], dict] = field(repr=False)
    expected: dict = field(default_factory=dict)
    check: Callable[[dict], str | None] = field(default=lambda p: None, repr=False)
    summary: str = ""

    @property
    def expected_tag(self):
        return self.expected.get("tag") or self.expected.get("verdict")

    def resolve(self, overrides=None):
        values = {p.name: p.default for p in self.params}
        for k, v in (overrides or {}).items():
            if k not in values:
                raise ConfigError(f"gallery:{self.id} has no parameter {k!r}")
            values[k] = v
        problem = self.check(values)
        if problem:
            raise ConfigError(f"gallery:{self.id}: {problem}")
        return values

    def config(self, overrides=None) -> dict:
        return self.build(self.resolve(overrides))


def _dom(lo, hi, k):
    return {"min": float(lo), "max": float(hi), "samples": int(k)}


def _flat_metric(n):
    return [["1" if i == j else "0" for j in range(i + 1)] for i in range(n)]


def _hyperplane(p):
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["u1", "u2", "d"],
        "parameters": {"d": p["d"]},
        "domain": [_dom(-1, 1, 10), _dom(-1, 1, 10)],
    }


def _sphere(p):
    cx, cy, cz = p["center"]
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["cx + r*sin(u1)*cos(u2)", "cy + r*sin(u1)*sin(u2)", "cz + r*cos(u1)"],
        "parameters": {"r": p["r"], "cx": cx, "cy": cy, "cz": cz},
        "domain": [_dom(0.2, math.pi - 0.2, 10), _dom(0.0, TWO_PI_OPEN, 20)],
    }


def _cone(p):
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["u1*cos(u2)", "u1*sin(u2)", "c*u1"],
        "parameters": {"c": p["c"]},
        "domain": [_dom(0.5, 2.0, 10), _dom(0.0, TWO_PI_OPEN, 10)],
    }


def _torus(p):
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["(R + r*cos(u1))*cos(u2)", "(R + r*cos(u1))*sin(u2)", "r*sin(u1)"],
        "parameters": {"R": p["R"], "r": p["r"]},
        "domain": [_dom(0.0, TWO_PI_OPEN, 10), _dom(0.0, TWO_PI_OPEN, 10)],
    }


def _catenoid(p):
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["a*cosh(u1/a)*cos(u2)", "a*cosh(u1/a)*sin(u2)", "u1"],
        "parameters": {"a": p["a"]},
        "domain": [_dom(-1.0, 1.0, 10), _dom(0.0, TWO_PI_OPEN, 10)],
    }


def _helicoid(p):
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["u1*cos(u2)", "u1*sin(u2)", "a*u2"],
        "parameters": {"a": p["a"]},
        "domain": [_dom(-1.0, 1.0, 10), _dom(0.0, TWO_PI_OPEN, 10)],
    }


GRAPH_MONOMIALS = ("1", "u1", "u2", "u1^2", "u1*u2", "u2^2", "u1^3", "u1^2*u2", "u1*u2^2", "u2^3")


def _graph(p):
    coeffs = list(p["coefficients"])
    terms = [f"c{i}*{m}" if m != "1" else f"c{i}" for i, m in enumerate(GRAPH_MONOMIALS[: len(coeffs)])]
    return {
        "mode": "hypersurface",
        "dimension": 2,
        "immersion": ["u1", "u2", " + ".join(terms)],
        "parameters": {f"c{i}": float(c) for i, c in enumerate(coeffs)},
        "domain": [_dom(-1.0, 1.0, 10), _dom(-1.0, 1.0, 10)],
    }


def _sphere_block(angles):
    """Round-sphere metric diagonal in the given angle names."""
    diag = []
    prefix = []
    for a in angles:
        diag.append("*".join(prefix) if prefix else "1")
        prefix.append(f"sin({a})^2")
    return diag


def _warped(p):
    n = int(p["n"])
    chart = [f"u{i + 1}" for i in range(n + 1)]
    sphere = _sphere_block(chart[1:])
    rows = []
    for i in range(n + 1):
        row = ["0"] * (i + 1)
        row[i] = "1" if i == 0 else (f"cosh(u1)^2*{sphere[i - 1]}" if sphere[i - 1] != "1" else "cosh(u1)^2")
        rows.append(row)
    domain = [_dom(-1.0, 1.0, 5)] + [_dom(0.4, math.pi - 0.4, 4) for _ in range(n - 1)] + [_dom(0.0, TWO_PI_OPEN, 4)]
    return {
        "mode": "intrinsic",
        "dimension": n + 1,
        "metric": rows,
        "potential": "sinh(u1)",
        "soliton": {"flavor": "gradient_conformal"},
        "domain": domain,
    }


def _rn_log(p):
    n = int(p["n"])
    sq = " + ".join(f"u{i + 1}^2" for i in range(n))
    return {
        "mode": "intrinsic",
        "dimension": n,
        "metric": _flat_metric(n),
        "potential": f"-m*log({sq} + beta)",
        "h_function": f"-m/({sq} + beta)",
        "parameters": {"m": p["m"], "beta": p["beta"]},
        "soliton": {"flavor": "h_almost"},
        "domain": [_dom(-1.0, 1.0, 5) for _ in range(n)],
    }


_HESSIAN_F = "log(exp(u1) + exp(u2) + 1)"
_HESSIAN_METRIC = [
    ["exp(u1)*(exp(u2) + 1)/(exp(u1) + exp(u2) + 1)^2"],
    ["-exp(u1 + u2)/(exp(u1) + exp(u2) + 1)^2", "exp(u2)*(exp(u1) + 1)/(exp(u1) + exp(u2) + 1)^2"],
]


def _hessian(flat):
    def build(p):
        return {
            "mode": "intrinsic",
            "dimension": 2,
            "metric": _HESSIAN_METRIC,
            "potential": _HESSIAN_F,
            "flat_hessian": flat,
            "soliton": {"flavor": "gradient_conformal"},
            "domain": [_dom(-1.0, 1.0, 10), _dom(-1.0, 1.0, 10)],
        }

    return build


def _polar(p):
    return {
        "mode": "intrinsic",
        "dimension": 2,
        "metric": [["1"], ["0", "u1^2"]],
        "vector_field": ["u1", "0"],
        "soliton": {"flavor": "conformal"},
        "domain": [_dom(0.5, 2.0, 10), _dom(0.0, TWO_PI_OPEN, 10)],
    }


def _flat_quadratic(p):
    n = int(p["n"])
    return {
        "mode": "intrinsic",
        "dimension": n,
        "metric": _flat_metric(n),
        "potential": "0.5*(" + " + ".join(f"u{i + 1}^2" for i in range(n)) + ")",
        "vector_field": [f"u{i + 1}" for i in range(n)],
        "soliton": {"flavor": "gradient_conformal"},
        "domain": [_dom(-1.0, 1.0, 5) for _ in range(n)],
    }


def _round_s3(p):
    return {
        "mode": "intrinsic",
        "dimension": 3,
        "metric": [["r^2"], ["0", "r^2*sin(u1)^2"], ["0", "0", "r^2*sin(u1)^2*sin(u2)^2"]],
        "vector_field": ["0", "0", "0"],
        "parameters": {"r": p["r"]},
        "soliton": {"flavor": "yamabe"},
        "domain": [_dom(0.4, math.pi - 0.4, 5), _dom(0.4, math.pi - 0.4, 5), _dom(0.0, TWO_PI_OPEN, 5)],
    }


def _hyperbolic(p):
    return {
        "mode": "intrinsic",
        "dimension": 2,
        "metric": [["1/u2^2"], ["0", "1/u2^2"]],
        "vector_field": ["1", "0"],
        "soliton": {"flavor": "yamabe"},
        "domain": [_dom(-1.0, 1.0, 10), _dom(0.5, 2.0, 10)],
    }


def _positive(*names):
    def check(p):
        for n in names:
            if not p[n] > 0:
                return f"parameter {n} must be positive"
        return None

    return check


def _torus_check(p):
    if not p["R"] > p["r"] > 0:
        return "torus needs R > r > 0"
    return None


def _dim_check(lo):
    def check(p):
        if int(p["n"]) != p["n"] or p["n"] < lo:
            return f"n must be an integer >= {lo}"
        return None

    return check


def _rn_check(p):
    if not p["beta"] > 0:
        return "beta must be positive"
    if p["m"] == 0:
        return "m must be nonzero"
    return _dim_check(2)(p)


def _graph_check(p):
    c = p["coefficients"]
    if not 1 <= len(c) <= len(GRAPH_MONOMIALS):
        return f"graph takes 1..{len(GRAPH_MONOMIALS)} coefficients"
    return None


ENTRIES = (
    GalleryEntry(
        "hyperplane", "immersion", (Param("d", 5.0),), _hyperplane,
        {"tag": "Hyperplane", "verdict": "Soliton", "phi": 1.0},
        summary="plane x3 = d",
    ),
    GalleryEntry(
        "sphere", "immersion", (Param("r", 2.0, "r > 0"), Param("center", (1.0, 0.0, 0.0))), _sphere,
        {"tag": "Hypersphere", "verdict": "Soliton"},
        _positive("r"),
        summary="round sphere, polar caps excluded",
    ),
    GalleryEntry(
        "circular_cone", "immersion", (Param("c", 2.0, "c != 0"),), _cone,
        {"tag": "Cone", "verdict": "Soliton", "phi": 1.0},
        summary="cone x3 = c * sqrt(x1^2 + x2^2), u1 in [0.5, 2]",
    ),
    GalleryEntry(
        "torus", "immersion", (Param("R", 3.0, "R > r"), Param("r", 1.0, "r > 0")), _torus,
        {"tag": "NotSoliton", "verdict": "NotSoliton"},
        _torus_check,
        summary="torus of revolution",
    ),
    GalleryEntry(
        "catenoid", "immersion", (Param("a", 1.0, "a > 0"),), _catenoid,
        {"tag": "NotSoliton", "verdict": "NotSoliton", "minimal": True},
        _positive("a"),
        summary="minimal catenoid",
    ),
    GalleryEntry(
        "helicoid", "immersion", (Param("a", 1.0, "a > 0"),), _helicoid,
        {"tag": "NotSoliton", "verdict": "NotSoliton", "minimal": True},
        _positive("a"),
        summary="minimal helicoid",
    ),
    GalleryEntry(
        "graph", "immersion",
        (Param("coefficients", (0.0, 0.0, 0.0, 0.5, 0.2, -0.3, 0.1, 0.0, 0.05, 0.0)),),
        _graph,
        {"tag": "NotSoliton", "verdict": "NotSoliton"},
        _graph_check,
        summary="graph of a bivariate cubic polynomial",
    ),
    GalleryEntry(
        "warped_cosh_cylinder", "intrinsic", (Param("n", 2, "integer >= 2"),), _warped,
        {"verdict": "Soliton", "flavor": "gradient_conformal", "identities": ["f1"], "hess": "sinh(u1)*g"},
        _dim_check(2),
        summary="R x_cosh S^n with f = sinh t",
    ),
    GalleryEntry(
        "rn_log_potential", "intrinsic",
        (Param("m", 1.0, "m != 0"), Param("beta", 1.0, "beta > 0"), Param("n", 3, "integer >= 2")),
        _rn_log,
        # frozen from the brute-force residual: hess f has a radial anisotropic part
        {"verdict": "NotSoliton", "flavor": "h_almost"},
        _rn_check,
        summary="flat R^n, f = -m log(|x|^2 + beta), h = -m/(|x|^2 + beta)",
    ),
    GalleryEntry(
        "hessian_r2_flat", "intrinsic", (), _hessian(True),
        {"verdict": "Soliton", "flavor": "gradient_conformal", "phi": 1.0},
        summary="g = D^2 f on R^2, f = log(e^x + e^y + 1); flat-connection Hessian",
    ),
    GalleryEntry(
        "hessian_r2_lc", "intrinsic", (), _hessian(False),
        {"verdict": "NotSoliton", "flavor": "gradient_conformal"},
        summary="same metric and f; Levi-Civita Hessian",
    ),
    GalleryEntry(
        "polar_flat", "intrinsic", (), _polar,
        {"verdict": "Soliton", "flavor": "conformal", "phi": 1.0, "identities": ["concurrent"]},
        summary="flat plane in polar coordinates with the position field",
    ),
    GalleryEntry(
        "flat_quadratic", "intrinsic", (Param("n", 3, "integer >= 2"),), _flat_quadratic,
        {"verdict": "Soliton", "flavor": "gradient_conformal", "phi": 1.0, "identities": ["f1", "concurrent"]},
        _dim_check(2),
        summary="flat R^n with f = |u|^2/2 and the position field",
    ),
    GalleryEntry(
        "round_s3", "intrinsic", (Param("r", 1.0, "r > 0"),), _round_s3,
        {"verdict": "Soliton", "flavor": "yamabe", "R": 6.0},
        _positive("r"),
        summary="round 3-sphere, trivial Yamabe soliton",
    ),
    GalleryEntry(
        "hyperbolic_plane", "intrinsic", (), _hyperbolic,
        {"verdict": "Soliton", "flavor": "yamabe", "R": -2.0},
        summary="upper half-plane with a Killing field",
    ),
)

_BY_ID = {e.id: e for e in ENTRIES}


def list_entries():
    """``[(id, kind, parameter schema, expected tag), ...]`` in registry order."""
    return [
        (e.id, e.kind, [(p.name, p.default, p.constraint) for p in e.params], e.expected_tag)
        for e in ENTRIES
    ]


def get(entry_id: str) -> GalleryEntry:
    if entry_id.startswith("gallery:"):
        entry_id = entry_id[len("gallery:"):]
    try:
        return _BY_ID[entry_id]
    except KeyError:
        raise ConfigError(f"unknown gallery entry {entry_id!r}") from None


def _normalize(params):
    params = dict(params or {})
    if "center" in params:
        params["center"] = tuple(float(x) for x in params["center"])
    if "coefficients" in params:
        params["coefficients"] = tuple(float(x) for x in params["coefficients"])
    return params


def config(entry_id: str, params=None) -> RunConfig:
    entry = get(entry_id)
    return validate(entry.config(_normalize(params)))


@dataclass
class Instance:
    entry: GalleryEntry
    config: RunConfig
    geometry: object

    @property
    def potential(self):
        return self.config.potential

    @property
    def vector_field(self):
        return self.config.vector_field

    @property
    def h_function(self):
        return self.config.h_function

    def points(self):
        return self.config.points()


def instantiate(entry_id: str, params=None, **kwargs) -> Instance:
    """Build the geometry of a gallery entry; keyword arguments override parameters."""
    merged = {**(params or {}), **kwargs}
    cfg = config(entry_id, merged)
    return Instance(get(entry_id), cfg, cfg.build_geometry())
