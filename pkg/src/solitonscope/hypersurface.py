"""Extrinsic geometry of hypersurfaces ``F: U -> R^{n+1}``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as J
from . import tensor as T
from .errors import ExcludedPointError, RankDeficiencyError
from .expr import Expr, Num, eval_jet, evaluate, parse
from .linalg import whitened_eigvalsh

RANK_RTOL = 1e-10


class Immersion:
    """``n+1`` component expressions in the chart variables ``u1..un``.

    ``domain`` holds one ``(min, max)`` box per chart variable.  Points where the
    optional ``exclude`` expression is ``<= 0`` are skipped.
    """

    def __init__(self, components, domain=None, exclude=None, params=None, chart_vars=None):
        comps = tuple(parse(c) if isinstance(c, str) else c for c in components)
        if len(comps) < 2:
            raise ValueError("an immersion needs at least two components")
        self.components = comps
        self.dim = len(comps) - 1
        self.chart_vars = tuple(chart_vars or T.chart_names(self.dim))
        self.domain = tuple(tuple(map(float, b)) for b in domain) if domain else None
        if self.domain is not None and len(self.domain) != self.dim:
            raise ValueError(f"domain needs {self.dim} boxes, got {len(self.domain)}")
        self.exclude = parse(exclude) if isinstance(exclude, str) else exclude
        self.params = dict(params or {})

    def __repr__(self):
        return f"Immersion({', '.join(map(str, self.components))})"

    def context(self, u, order):
        return T.context(self.chart_vars, self.params, u, order)

    def position(self, u):
        b = dict(self.params)
        b.update(zip(self.chart_vars, map(float, u)))
        return np.array([evaluate(c, b) for c in self.components])

    def check_point(self, u):
        u = np.asarray(u, dtype=float)
        if self.domain is not None:
            for x, (lo, hi) in zip(u, self.domain):
                slack = 1e-12 * max(1.0, abs(lo), abs(hi))
                if not lo - slack <= x <= hi + slack:
                    raise ExcludedPointError(f"point {u.tolist()} outside the chart domain")
        if self.exclude is not None:
            b = dict(self.params)
            b.update(zip(self.chart_vars, map(float, u)))
            if evaluate(self.exclude, b) <= 0:
                raise ExcludedPointError(f"point {u.tolist()} excluded by {self.exclude}")

    def jets(self, u, order):
        ctx = self.context(u, order)
        return J.Jet.stack([eval_jet(c, ctx) for c in self.components])

    def transformed(self, matrix, shift=None):
        """Immersion of ``matrix @ F + shift`` (ambient rigid motion or scaling)."""
        matrix = np.asarray(matrix, dtype=float)
        shift = np.zeros(self.dim + 1) if shift is None else np.asarray(shift, dtype=float)
        comps = []
        for a in range(self.dim + 1):
            e = None
            for b, c in enumerate(self.components):
                if matrix[a, b] == 0.0:
                    continue
                term = c if matrix[a, b] == 1.0 else matrix[a, b] * c
                e = term if e is None else e + term
            if shift[a] != 0.0:
                e = shift[a] if e is None else e + float(shift[a])
            comps.append(e if isinstance(e, Expr) else Num(float(e or 0.0)))
        return Immersion(comps, self.domain, self.exclude, self.params, self.chart_vars)


def extrinsic_jets(s: Immersion, u, order):
    """Jets of the extrinsic quantities; ``order`` is the order of ``F``.

    Returned orders: ``g``, ``N``, ``lam``, ``vt`` at ``order-1``; ``h`` at ``order-2``.
    """
    if order < 2:
        raise ValueError("extrinsic data needs immersion jets of order >= 2")
    F = s.jets(u, order)
    n = s.dim
    tang = J.einsum("ai->ia", F.gradient())  # tang[i, a] = d_i F^a
    g = J.einsum("ia,ja->ij", tang, tang)
    cols = []
    for a in range(n + 1):
        keep = [b for b in range(n + 1) if b != a]
        minor = J.Jet(tang.space, tang.data[:, keep])
        d = J.det(minor)
        cols.append(-d if a % 2 else d)
    cross = J.Jet.stack(cols)
    norm2 = J.einsum("a,a->", cross, cross)
    tnorm = np.prod(np.linalg.norm(tang.value, axis=1))
    if not np.sqrt(norm2.value) >= RANK_RTOL * tnorm or tnorm == 0.0:
        raise RankDeficiencyError(f"differential has rank < {n} at {np.asarray(u).tolist()}")
    N = cross * J.reciprocal(J.sqrt(norm2))
    h = J.einsum("iaj,a->ij", tang.gradient(), N)
    lam = J.einsum("a,a->", N, F)
    ginv = J.inv(g)
    vt = J.einsum("ij,ja,a->i", ginv, tang, F)
    return {"F": F, "tangents": tang, "g": g, "g_inv": ginv, "N": N, "h": h, "lam": lam, "vt": vt}


@dataclass(frozen=True)
class ExtrinsicFrame:
    point: np.ndarray
    V: np.ndarray
    tangents: np.ndarray
    g: np.ndarray
    N: np.ndarray
    h: np.ndarray
    shape_operator: np.ndarray
    kappa: np.ndarray
    alpha: float
    lam: float
    VT: np.ndarray
    VT_chart: np.ndarray
    V_perp: np.ndarray


def _frame_from(u, d):
    g = d["g"].value
    h = d["h"].value
    N = d["N"].value
    V = d["F"].value
    lam = float(d["lam"].value)
    kappa = whitened_eigvalsh(h, g)
    vt_chart = d["vt"].value
    return ExtrinsicFrame(
        point=np.asarray(u, dtype=float),
        V=V,
        tangents=d["tangents"].value,
        g=g,
        N=N,
        h=h,
        shape_operator=d["g_inv"].value @ h,
        kappa=kappa,
        alpha=float(np.mean(kappa)),
        lam=lam,
        VT=V - lam * N,
        VT_chart=vt_chart,
        V_perp=lam * N,
    )


def frame_at(s: Immersion, u) -> ExtrinsicFrame:
    s.check_point(u)
    return _frame_from(u, extrinsic_jets(s, u, 2))


def induced_metric(s: Immersion) -> T.MetricField:
    """Metric ``g_ij = <d_i F, d_j F>`` as a jet-backed :class:`MetricField`."""

    def provider(u, order):
        F = s.jets(u, order + 1)
        tang = J.einsum("ai->ia", F.gradient())
        return J.einsum("ia,ja->ij", tang, tang)

    return T.MetricField(s.dim, provider, s.chart_vars, s.params)


@dataclass(frozen=True)
class CompatibilityResidual:
    gauss_residual: float
    codazzi_residual: float


def compatibility_at(s: Immersion, u) -> CompatibilityResidual:
    s.check_point(u)
    d = extrinsic_jets(s, u, 3)
    g = d["g"]
    _, gamma = T.connection(g)
    rm_low = T.lower_riemann(g, T.riemann(gamma)).value
    h = d["h"]
    h0 = h.value
    gauss = np.einsum("ik,jl->ijkl", h0, h0) - np.einsum("il,jk->ijkl", h0, h0)
    G = gamma.value
    dh = h.gradient().value  # dh[j, k, i] = d_i h_jk
    cod = (
        np.einsum("jki->ijk", dh)
        - np.einsum("mij,mk->ijk", G, h0)
        - np.einsum("mik,jm->ijk", G, h0)
    )
    scale = 1.0 + max(np.max(np.abs(rm_low)), np.max(np.abs(h0)) ** 2)
    return CompatibilityResidual(
        gauss_residual=float(np.max(np.abs(rm_low - gauss)) / scale),
        codazzi_residual=float(np.max(np.abs(cod - cod.transpose(1, 0, 2))) / scale),
    )


def lie_position_at(s: Immersion, u):
    """``(L_{V^T} g, 2g + 2 lambda h)`` computed along independent paths."""
    s.check_point(u)
    d = extrinsic_jets(s, u, 2)
    lie = T.lie_derivative(d["g"], d["vt"]).value
    via_s3 = 2.0 * d["g"].value + 2.0 * float(d["lam"].value) * d["h"].value
    return lie, via_s3
