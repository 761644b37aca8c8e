"""Soliton conditions and identity checks on sampled points.

Every flavor is a tensor equation of the form ``(scalar) g = T`` where ``T``
is either ``1/2 L_v g`` or the Hessian of a potential.  The conformal factor
is recovered pointwise by trace projection ``phi = tr_g(T) / n``, which is the
least-squares multiple of ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tensor as T
from .errors import ConfigError, NotApplicableError
from .expr import Expr, eval_jet, parse
from .hypersurface import Immersion, extrinsic_jets, induced_metric, lie_position_at
from .linalg import whitened_eigvalsh
from .sampling import evaluate_points

FLAVORS = ("conformal", "yamabe", "almost_yamabe", "k_yamabe", "h_almost", "gradient_conformal")

TOL_SOLITON = 1e-7
TOL_MINIMAL = 1e-8
TOL_S3 = 1e-8
TOL_POTENTIAL = 1e-9
TOL_CONCURRENT = 1e-9
TOL_F1 = 1e-6


def _expr(e):
    if e is None or isinstance(e, Expr):
        return e
    return parse(e)


@dataclass
class SolitonProblem:
    """Geometry plus the data a flavor needs.

    ``geometry`` is an :class:`Immersion` (soliton field ``V^T`` implied unless
    ``potential`` or ``vector_field`` is given) or a :class:`MetricField`.
    """

    geometry: Immersion | T.MetricField
    flavor: str = "conformal"
    points: Sequence = ()
    k: int = 1
    potential: Expr | None = None
    vector_field: Sequence | None = None
    h_function: Expr | None = None
    flat_hessian: bool = False
    tol_soliton: float = TOL_SOLITON
    threads: int | None = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ConfigError(f"unknown soliton flavor {self.flavor!r}")
        self.potential = _expr(self.potential)
        self.h_function = _expr(self.h_function)
        if self.vector_field is not None:
            self.vector_field = [_expr(c) for c in self.vector_field]
        n = self.dim
        if self.flavor in ("k_yamabe", "gradient_conformal") and self.potential is None:
            raise ConfigError(f"flavor {self.flavor} needs a potential f")
        if self.flavor == "k_yamabe":
            if n < 3:
                raise ConfigError("k_yamabe needs dimension >= 3 (Schouten tensor undefined for n = 2)")
            if not 1 <= self.k <= n:
                raise ConfigError(f"k must lie in [1, {n}], got {self.k}")
        if self.flavor == "h_almost" and self.h_function is None:
            raise ConfigError("flavor h_almost needs an h function")
        if self.is_intrinsic and self.potential is None and self.vector_field is None:
            raise ConfigError("an intrinsic problem needs a vector field or a potential")

    @property
    def is_intrinsic(self):
        return isinstance(self.geometry, T.MetricField)

    @property
    def dim(self):
        return self.geometry.dim

    @property
    def metric(self):
        if self.is_intrinsic:
            return self.geometry
        return induced_metric(self.geometry)


@dataclass
class SolitonReport:
    flavor: str
    points: np.ndarray
    phi: np.ndarray
    residual: np.ndarray
    sup_residual: float
    tolerance: float
    verdict: str
    rho: float | np.ndarray | None = None
    columns: dict = field(default_factory=dict)
    dropped: list = field(default_factory=list)

    @property
    def is_soliton(self):
        return self.verdict == "Soliton"


@dataclass
class IdentityReport:
    identity: str
    points: np.ndarray
    defects: np.ndarray
    sup_defect: float
    tolerance: float
    passed: bool
    aux: dict = field(default_factory=dict)
    dropped: list = field(default_factory=list)


def _gnorm(g):
    return float(np.max(np.abs(g)))


# pointwise kernels -------------------------------------------------------------


def _tensor_kernel(prob: SolitonProblem, need_curvature: bool):
    """Returns ``p -> dict`` with ``g``, ``T`` and whatever the flavor needs."""
    geom = prob.geometry
    metric = prob.metric
    n = prob.dim

    def kernel(p):
        out = {}
        d = None
        if not prob.is_intrinsic:
            geom.check_point(p)
            d = extrinsic_jets(geom, p, 2)
            kappa = whitened_eigvalsh(d["h"].value, d["g"].value)
            out["lambda"] = float(d["lam"].value)
            out["alpha"] = float(np.mean(kappa))
            out["kappa_min"] = float(kappa[0])
            out["kappa_max"] = float(kappa[-1])
        if prob.potential is not None:
            sf = T.scalar_field_at(metric, prob.potential, p, flat=prob.flat_hessian)
            out["T"] = sf.hess
            out["g"] = metric.at(p)
        elif prob.vector_field is not None:
            vf = T.vector_field_at(metric, prob.vector_field, p)
            out["T"] = 0.5 * vf.lie_g
            out["g"] = metric.at(p)
        else:
            out["T"] = 0.5 * T.lie_derivative(d["g"], d["vt"]).value
            out["g"] = d["g"].value
        g = out["g"]
        T.check_positive_definite(g)
        out["phi"] = float(np.sum(np.linalg.inv(g) * out["T"])) / n
        if need_curvature:
            cp = T.curvature_at(metric, p)
            out["R"] = cp.R_scalar
            if prob.flavor == "k_yamabe":
                out["sigma_k"] = float(cp.sigma[prob.k - 1])
        if prob.h_function is not None:
            ctx = metric.context(p, 0)
            out["h"] = float(eval_jet(prob.h_function, ctx).value)
        return out

    return kernel


def _evaluate(prob, need_curvature):
    if len(prob.points) == 0:
        raise ValueError("empty sample plan")
    return evaluate_points(_tensor_kernel(prob, need_curvature), prob.points, prob.threads)


def _columns(rows, keys):
    return {k: np.array([r[k] for r in rows]) for k in keys if rows and k in rows[0]}


def _report(prob, pts, rows, dropped, residual, rho=None, extra=()):
    sup = float(np.max(residual))
    cols = _columns(rows, ("lambda", "alpha", "kappa_min", "kappa_max", "R", "sigma_k", "h") + tuple(extra))
    return SolitonReport(
        flavor=prob.flavor,
        points=pts,
        phi=np.array([r["phi"] for r in rows]),
        residual=np.asarray(residual, dtype=float),
        sup_residual=sup,
        tolerance=prob.tol_soliton,
        verdict="Soliton" if sup <= prob.tol_soliton else "NotSoliton",
        rho=rho,
        columns=cols,
        dropped=dropped,
    )


def _conformal_residuals(rows):
    return np.array([_gnorm(r["T"] - r["phi"] * r["g"]) / _gnorm(r["g"]) for r in rows])


def check_conformal(prob: SolitonProblem) -> SolitonReport:
    """``phi g = 1/2 L_v g`` with ``phi`` fitted by trace projection."""
    pts, rows, dropped = _evaluate(prob, need_curvature=False)
    return _report(prob, pts, rows, dropped, _conformal_residuals(rows))


def check_flavored(prob: SolitonProblem) -> SolitonReport:
    flavor = prob.flavor
    if flavor in ("conformal", "gradient_conformal"):
        return check_conformal(prob)
    n = prob.dim
    pts, rows, dropped = _evaluate(prob, need_curvature=True)
    if flavor == "almost_yamabe":
        rho = np.array([r["R"] - r["phi"] for r in rows])
        return _report(prob, pts, rows, dropped, _conformal_residuals(rows), rho=rho)
    if flavor == "yamabe":
        rho = float(np.mean([r["R"] - r["phi"] for r in rows]))
        res = [_gnorm((r["R"] - rho) * r["g"] - r["T"]) / _gnorm(r["g"]) for r in rows]
        return _report(prob, pts, rows, dropped, res, rho=rho)
    if flavor == "k_yamabe":
        c = 2.0 * (n - 1)
        rho = float(np.mean([r["sigma_k"] - r["phi"] / c for r in rows]))
        res = [_gnorm(c * (r["sigma_k"] - rho) * r["g"] - r["T"]) / _gnorm(r["g"]) for r in rows]
        return _report(prob, pts, rows, dropped, res, rho=rho)
    if flavor == "h_almost":
        hs = np.array([r["h"] for r in rows])
        if np.any(hs == 0):
            raise NotApplicableError("h vanishes at a sample point")
        if np.any(hs > 0) and np.any(hs < 0):
            raise NotApplicableError("h changes sign over the sample plan (needs h > 0 or h < 0)")
        # rho is a function here, fitted pointwise from the trace
        rho = np.array([r["R"] - r["h"] * r["phi"] for r in rows])
        res = [
            _gnorm((r["R"] - rho_p) * r["g"] - r["h"] * r["T"]) / _gnorm(r["g"])
            for r, rho_p in zip(rows, rho)
        ]
        return _report(prob, pts, rows, dropped, res, rho=rho)
    raise ConfigError(f"unknown soliton flavor {flavor!r}")


# identities --------------------------------------------------------------------


def _identity(name, pts, defects, tol, dropped, aux=None):
    defects = np.asarray(defects, dtype=float)
    sup = float(np.max(defects))
    return IdentityReport(name, pts, defects, sup, tol, bool(sup <= tol), aux or {}, dropped)


def check_concurrent(m: T.MetricField, v, points, tol=TOL_CONCURRENT, threads=None) -> IdentityReport:
    """Defect of ``nabla_X v = X``: ``sup |(nabla v)^i_j - delta^i_j|``."""
    v = [_expr(c) for c in v]
    eye = np.eye(m.dim)

    def kernel(p):
        vf = T.vector_field_at(m, v, p)
        return float(np.max(np.abs(vf.nabla - eye))), float(np.trace(vf.nabla)) / m.dim

    pts, rows, dropped = evaluate_points(kernel, points, threads)
    defects = [r[0] for r in rows]
    return _identity("concurrent", pts, defects, tol, dropped, {"phi": np.array([r[1] for r in rows])})


def f1_defect_at(m: T.MetricField, f, p):
    """Defect of ``(n-1) lap(phi) + 1/2 <grad R, grad f> + R phi = 0`` with ``phi = lap(f)/n``.

    ``phi`` and ``R`` are carried as order-2 jets through the whole pipeline so
    their derivatives are exact.
    """
    n = m.dim
    g = m.jets(p, 4)
    ginv, gamma = T.connection(g)
    R = T.scalar_curvature(ginv, T.ricci(T.riemann(gamma)))
    fj = eval_jet(f, m.context(p, 4))
    phi = T.laplacian(ginv, gamma, fj) / n
    lap_phi = float(T.laplacian(ginv, gamma, phi).value)
    dR = R.gradient().value
    df = fj.gradient().value
    gi = ginv.value
    r0, phi0 = float(R.value), float(phi.value)
    total = (n - 1) * lap_phi + 0.5 * dR @ gi @ df + r0 * phi0
    return abs(total) / (1.0 + abs(r0) * abs(phi0)), phi0, r0


def identity_f1(
    m: T.MetricField, f, points, tol=TOL_F1, tol_soliton=TOL_SOLITON, threads=None
) -> IdentityReport:
    f = _expr(f)
    pre = check_conformal(SolitonProblem(m, "gradient_conformal", points, potential=f, tol_soliton=tol_soliton, threads=threads))
    if not pre.is_soliton:
        raise NotApplicableError(
            f"f1 identity not applicable: hess f is not conformal to g (sup residual {pre.sup_residual:.3e})"
        )
    pts, rows, dropped = evaluate_points(lambda p: f1_defect_at(m, f, p), points, threads)
    aux = {"phi": np.array([r[1] for r in rows]), "R": np.array([r[2] for r in rows])}
    return _identity("f1", pts, [r[0] for r in rows], tol, dropped, aux)


def _ensays_kernel(s):
    def kernel(p):
        s.check_point(p)
        d = extrinsic_jets(s, p, 2)
        g, h = d["g"].value, d["h"].value
        lam = float(d["lam"].value)
        half_lie = 0.5 * T.lie_derivative(d["g"], d["vt"]).value
        phi = float(np.sum(np.linalg.inv(g) * half_lie)) / s.dim
        kappa = whitened_eigvalsh(h, g)
        alpha = float(np.mean(kappa))
        defect = _gnorm((phi - 1.0) * g - lam * h)
        e1 = float(np.max(np.abs(lam * kappa - (phi - 1.0))))
        e2 = abs(phi - 1.0 - lam * alpha)
        return defect, e1, e2, phi, alpha, _gnorm(g)

    return kernel


def identity_ensays(s: Immersion, points, tol_soliton=TOL_SOLITON, threads=None) -> IdentityReport:
    """``(phi - 1) g = lambda h`` with the trace-fitted ``phi``.

    Passing is judged like the conformal check (defect relative to ``|g|``),
    because the identity is equivalent to the soliton equation for ``V^T``.
    """
    pts, rows, dropped = evaluate_points(_ensays_kernel(s), points, threads)
    rel = np.array([r[0] / r[5] for r in rows])
    aux = {
        "e1_defect": np.array([r[1] for r in rows]),
        "e2_defect": np.array([r[2] for r in rows]),
        "phi": np.array([r[3] for r in rows]),
        "alpha": np.array([r[4] for r in rows]),
        "relative_defect": rel,
    }
    rep = _identity("ensays", pts, [r[0] for r in rows], tol_soliton, dropped, aux)
    rep.passed = bool(np.max(rel) <= tol_soliton)
    return rep


def check_minimal_phi1(s: Immersion, points, tol_minimal=TOL_MINIMAL, tol=TOL_MINIMAL, threads=None) -> IdentityReport:
    """On a minimal immersion the trace-fitted ``phi`` equals 1."""
    pts, rows, dropped = evaluate_points(_ensays_kernel(s), points, threads)
    alpha = np.array([r[4] for r in rows])
    if np.max(np.abs(alpha)) > tol_minimal:
        raise NotApplicableError(f"immersion is not minimal (max |alpha| = {np.max(np.abs(alpha)):.3e})")
    phi = np.array([r[3] for r in rows])
    return _identity("minimal_phi1", pts, np.abs(phi - 1.0), tol, dropped, {"phi": phi, "alpha": alpha})


def identity_s3(s: Immersion, points, tol=TOL_S3, threads=None) -> IdentityReport:
    """Coordinate Lie derivative of ``V^T`` against ``2g + 2 lambda h``."""
    def kernel(p):
        lie, via = lie_position_at(s, p)
        return float(np.max(np.abs(lie - via)) / max(1.0, _gnorm(via)))

    pts, rows, dropped = evaluate_points(kernel, points, threads)
    return _identity("s3", pts, rows, tol, dropped)


def position_potential(s: Immersion) -> Expr:
    """``1/2 |F|^2`` as an expression."""
    total = None
    for c in s.components:
        sq = c**2
        total = sq if total is None else total + sq
    return 0.5 * total


def identity_potential(s: Immersion, points, tol=TOL_POTENTIAL, threads=None) -> IdentityReport:
    """``V^T = grad(1/2 |F|^2)`` with the gradient taken in the induced metric."""
    m = induced_metric(s)
    f = position_potential(s)

    def kernel(p):
        s.check_point(p)
        vt = extrinsic_jets(s, p, 2)["vt"].value
        grad = T.scalar_field_at(m, f, p).grad
        return float(np.max(np.abs(vt - grad)))

    pts, rows, dropped = evaluate_points(kernel, points, threads)
    return _identity("potential", pts, rows, tol, dropped)
