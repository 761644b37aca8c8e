"""Intrinsic Riemannian calculus at sample points.

Conventions (index order in arrays follows the symbols):

* ``Gamma[k, i, j]`` is the Christoffel symbol with upper index ``k``.
* ``Rm[l, i, j, k]`` is ``R^l_{ijk}``, the components of
  ``R(d_i, d_j) d_k = nabla_i nabla_j d_k - nabla_j nabla_i d_k``.
* ``Rm_low[i, j, k, l] = g_{km} R^m_{ijl}``, so that on a round sphere of
  curvature ``K`` it equals ``K (g_ik g_jl - g_il g_jk)``.
* ``Ric[j, k] = R^i_{ijk}``; the round sphere has positive scalar curvature.

Every computation is written against :class:`~solitonscope.jet.Jet` arrays, so
the same code yields values (order-0 part) or exact derivatives of curvature
quantities when fed higher-order jets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import jet as J
from .expr import EvalContext, eval_jet, parse
from .linalg import cholesky, elementary_symmetric, whitened_eigvalsh


def chart_names(n):
    return tuple(f"u{i + 1}" for i in range(n))


def _as_expr(e):
    return parse(e) if isinstance(e, str) else e


class MetricField:
    """A Riemannian metric on a chart ``u1..un``.

    Either built from component expressions (:meth:`from_exprs`) or from a
    ``provider(point, order) -> Jet`` callable returning the ``n x n`` metric jet.
    """

    def __init__(self, dim, provider, chart_vars=None, params=None, components=None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.chart_vars = tuple(chart_vars or chart_names(dim))
        self.params = dict(params or {})
        self.components = components
        self._provider = provider

    @classmethod
    def from_exprs(cls, rows, chart_vars=None, params=None):
        """``rows`` is lower-triangular: ``rows[i][j]`` for ``j <= i`` (mirrored)."""
        n = len(rows)
        comps = [[None] * n for _ in range(n)]
        for i, row in enumerate(rows):
            if len(row) != i + 1:
                raise ValueError(f"metric row {i} needs {i + 1} entries, got {len(row)}")
            for j, e in enumerate(row):
                comps[i][j] = comps[j][i] = _as_expr(e)
        chart_vars = tuple(chart_vars or chart_names(n))
        params = dict(params or {})

        def provider(point, order):
            ctx = context(chart_vars, params, point, order)
            cache = {}
            out = []
            for i in range(n):
                for j in range(n):
                    key = (min(i, j), max(i, j))
                    if key not in cache:
                        cache[key] = eval_jet(comps[i][j], ctx)
                    out.append(cache[key])
            stacked = J.Jet.stack(out)
            return J.Jet(stacked.space, stacked.data.reshape(n, n, -1))

        return cls(n, provider, chart_vars, params, comps)

    @classmethod
    def euclidean(cls, n):
        rows = [["1" if i == j else "0" for j in range(i + 1)] for i in range(n)]
        return cls.from_exprs(rows)

    def jets(self, point, order):
        return self._provider(np.asarray(point, dtype=float), order)

    def at(self, point):
        return self.jets(point, 0).value

    def context(self, point, order):
        return context(self.chart_vars, self.params, point, order)


def context(chart_vars, params, point, order):
    point = np.asarray(point, dtype=float)
    if point.shape != (len(chart_vars),):
        raise ValueError(f"point must have {len(chart_vars)} coordinates, got {point.shape}")
    bindings = dict(params)
    bindings.update(zip(chart_vars, map(float, point)))
    return EvalContext(bindings, chart_vars, order)


# jet-level building blocks ---------------------------------------------------


def check_positive_definite(g):
    cholesky(g)


def connection(g):
    """``(g_inv, Gamma)`` jets from a metric jet of order ``K`` (both order ``K-1``)."""
    check_positive_definite(g.value)
    ginv = J.inv(g)
    dg = g.gradient()  # dg[i, j, l] = d_l g_ij
    bracket = J.einsum("jli->ijl", dg) + J.einsum("ilj->ijl", dg) - dg
    gamma = 0.5 * J.einsum("kl,ijl->kij", ginv, bracket)
    return ginv, gamma


def riemann(gamma):
    """``R^l_{ijk}`` from a Christoffel jet (one order lower)."""
    dG = gamma.gradient()  # dG[l, j, k, i] = d_i Gamma^l_jk
    return (
        J.einsum("ljki->lijk", dG)
        - J.einsum("likj->lijk", dG)
        + J.einsum("lim,mjk->lijk", gamma, gamma)
        - J.einsum("ljm,mik->lijk", gamma, gamma)
    )


def ricci(rm):
    return J.einsum("iijk->jk", rm)


def scalar_curvature(ginv, ric):
    return J.einsum("jk,jk->", ginv, ric)


def lower_riemann(g, rm):
    return J.einsum("km,mijl->ijkl", g, rm)


def hessian(gamma, fj, flat=False):
    """Covariant Hessian jet; ``flat=True`` drops the connection term."""
    ddf = fj.gradient().gradient()
    if flat:
        return ddf
    return ddf - J.einsum("kij,k->ij", gamma, fj.gradient())


def laplacian(ginv, gamma, fj):
    return J.einsum("ij,ij->", ginv, hessian(gamma, fj))


def covariant_derivative(gamma, vj):
    """``(nabla v)^i_j = d_j v^i + Gamma^i_{jk} v^k``."""
    return vj.gradient() + J.einsum("ijk,k->ij", gamma, vj)


def lie_derivative(g, vj):
    """Coordinate formula ``v^k d_k g_ij + g_kj d_i v^k + g_ik d_j v^k``."""
    dg = g.gradient()
    dv = vj.gradient()  # dv[k, i] = d_i v^k
    return J.einsum("k,ijk->ij", vj, dg) + J.einsum("kj,ki->ij", g, dv) + J.einsum("ik,kj->ij", g, dv)


# point-level records -----------------------------------------------------------


@dataclass(frozen=True)
class CurvaturePoint:
    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    Gamma: np.ndarray
    Rm: np.ndarray
    Rm_low: np.ndarray
    Ric: np.ndarray
    R_scalar: float
    Schouten: np.ndarray | None = None
    sigma: np.ndarray | None = None
    schouten_eigs: np.ndarray | None = None

    def require_schouten(self):
        if self.Schouten is None:
            raise ValueError("Schouten tensor and sigma_k are undefined in dimension 2")
        return self.Schouten


def schouten(g, ric, r_scalar):
    n = g.shape[0]
    if n < 3:
        raise ValueError("Schouten tensor is undefined for n < 3")
    return (ric - r_scalar / (2.0 * (n - 1)) * g) / (n - 2)


def curvature_at(m: MetricField, p) -> CurvaturePoint:
    g = m.jets(p, 2)
    ginv, gamma = connection(g)
    rm = riemann(gamma)
    ric = ricci(rm)
    r = scalar_curvature(ginv, ric)
    g0 = g.value
    ric0 = ric.value
    r0 = float(r.value)
    A = sigma = eigs = None
    if m.dim >= 3:
        A = schouten(g0, ric0, r0)
        eigs = whitened_eigvalsh(A, g0)
        sigma = elementary_symmetric(eigs)
    return CurvaturePoint(
        point=np.asarray(p, dtype=float),
        g=g0,
        g_inv=ginv.value,
        Gamma=gamma.value,
        Rm=rm.value,
        Rm_low=lower_riemann(g, rm).value,
        Ric=ric0,
        R_scalar=r0,
        Schouten=A,
        sigma=sigma,
        schouten_eigs=eigs,
    )


@dataclass(frozen=True)
class ScalarFieldData:
    point: np.ndarray
    value: float
    grad: np.ndarray
    hess: np.ndarray
    laplacian: float


def scalar_field_at(m: MetricField, f, p, flat=False) -> ScalarFieldData:
    """Gradient, Hessian and Laplacian of ``f``.

    ``flat=True`` uses the coordinate (flat-connection) Hessian instead of the
    Levi-Civita one; this is the convention of Hessian manifolds.
    """
    f = _as_expr(f)
    g = m.jets(p, 1)
    ginv, gamma = connection(g)
    fj = eval_jet(f, m.context(p, 2))
    hess = hessian(gamma, fj, flat=flat).value
    df = fj.gradient().value
    gi = ginv.value
    return ScalarFieldData(
        point=np.asarray(p, dtype=float),
        value=float(fj.value),
        grad=gi @ df,
        hess=hess,
        laplacian=float(np.sum(gi * hess)),
    )


@dataclass(frozen=True)
class VectorFieldData:
    point: np.ndarray
    value: np.ndarray
    nabla: np.ndarray
    lie_g: np.ndarray


def vector_field_jet(m: MetricField, v: Sequence, p, order):
    if len(v) != m.dim:
        raise ValueError(f"vector field needs {m.dim} components, got {len(v)}")
    ctx = m.context(p, order)
    return J.Jet.stack([eval_jet(_as_expr(c), ctx) for c in v])


def vector_field_at(m: MetricField, v: Sequence, p) -> VectorFieldData:
    vj = vector_field_jet(m, v, p, 1)
    g = m.jets(p, 1)
    _, gamma = connection(g)
    return VectorFieldData(
        point=np.asarray(p, dtype=float),
        value=vj.value,
        nabla=covariant_derivative(gamma, vj).value,
        lie_g=lie_derivative(g, vj).value,
    )
