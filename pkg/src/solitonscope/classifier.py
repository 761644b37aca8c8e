"""Hyperplane / cone / hypersphere decision procedure for soliton hypersurfaces.

Only orientation-invariant combinations drive the branches: ``|lambda|``,
``lambda * kappa_i`` and the center estimate ``F + N / alpha`` (``alpha`` and
``N`` come from the same frame, so a flipped normal flips both).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hypersurface import Immersion, frame_at
from .sampling import evaluate_points
from .soliton import SolitonProblem, TOL_SOLITON, check_conformal

TAGS = ("Hyperplane", "Cone", "Hypersphere", "NotSoliton", "Undetermined")


@dataclass
class ClassifyConfig:
    tol_soliton: float = TOL_SOLITON
    tol_lambda: float = 1e-7
    tol_alpha: float = 1e-8
    tol_umbilic: float = 1e-7
    tol_consistency: float = 1e-6
    points: object = ()
    threads: int | None = None

    def __post_init__(self):
        for name in ("tol_soliton", "tol_lambda", "tol_alpha", "tol_umbilic", "tol_consistency"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ClassificationVerdict:
    tag: str
    normal: np.ndarray | None = None
    offset: float | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    diagnostics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    points: np.ndarray | None = None
    table: dict = field(default_factory=dict)
    dropped: list = field(default_factory=list)

    def parameters(self):
        if self.tag == "Hyperplane":
            return {"normal": self.normal, "offset": self.offset}
        if self.tag == "Hypersphere":
            return {"center": self.center, "radius": self.radius}
        return {}


def umbilicity_stats(s: Immersion, points, threads=None):
    """Per-point ``(kappa_max - kappa_min) / (1 + |alpha|)`` and its maximum."""

    def kernel(p):
        fr = frame_at(s, p)
        return (fr.kappa[-1] - fr.kappa[0]) / (1.0 + abs(fr.alpha))

    _, spread, _ = evaluate_points(kernel, points, threads)
    spread = np.array(spread)
    return spread, float(np.max(spread))


def classify(s: Immersion, cfg: ClassifyConfig) -> ClassificationVerdict:
    if len(cfg.points) == 0:
        raise ValueError("empty sample plan")
    report = check_conformal(
        SolitonProblem(s, "conformal", cfg.points, tol_soliton=cfg.tol_soliton, threads=cfg.threads)
    )
    pts, frames, dropped = evaluate_points(lambda p: frame_at(s, p), report.points, cfg.threads)
    dropped = list(report.dropped) + list(dropped)

    lam = np.array([f.lam for f in frames])
    alpha = np.array([f.alpha for f in frames])
    spread = np.array([(f.kappa[-1] - f.kappa[0]) / (1.0 + abs(f.alpha)) for f in frames])
    scale = max(float(np.max([np.linalg.norm(f.V) for f in frames])), np.finfo(float).tiny)
    diag = {
        "soliton_sup_residual": report.sup_residual,
        "max_abs_lambda": float(np.max(np.abs(lam))),
        "min_abs_lambda": float(np.min(np.abs(lam))),
        "umbilicity_spread": float(np.max(spread)),
        "alpha_mean": float(np.mean(alpha)),
        "alpha_std": float(np.std(alpha)),
        "center_std": None,
        "normal_std": None,
        "scale": scale,
        "samples": int(len(frames)),
        "dropped": int(sum(1 for d in dropped if not d.excluded)),
        "excluded": int(sum(1 for d in dropped if d.excluded)),
    }
    table = {
        "lambda": lam,
        "alpha": alpha,
        "kappa_min": np.array([f.kappa[0] for f in frames]),
        "kappa_max": np.array([f.kappa[-1] for f in frames]),
        "phi": report.phi,
        "residual": report.residual,
    }
    out = ClassificationVerdict("Undetermined", diagnostics=diag, points=pts, table=table, dropped=dropped)

    if not report.is_soliton:
        out.tag = "NotSoliton"
        out.notes.append("conformal soliton residual above tolerance")
        return out

    small = np.abs(lam) <= cfg.tol_lambda * scale
    if np.all(small):
        out.tag = "Cone"
        if np.max(np.abs(alpha)) * scale <= cfg.tol_alpha:
            out.notes.append("plane through origin (a conic hypersurface)")
        return out
    if np.any(small):
        out.notes.append(
            f"mixed support function: {int(np.sum(small))} of {len(lam)} samples have lambda ~ 0; not resolved"
        )
        return out

    if diag["umbilicity_spread"] > cfg.tol_umbilic:
        out.notes.append("lambda != 0 but the samples are not totally umbilical")
        return out

    if np.mean(np.abs(alpha)) * scale <= cfg.tol_alpha:
        ref = frames[0].N
        signs = np.array([1.0 if f.N @ ref >= 0 else -1.0 for f in frames])
        normals = np.array([sg * f.N for sg, f in zip(signs, frames)])
        offsets = signs * lam
        normal = normals.mean(axis=0)
        normal /= np.linalg.norm(normal)
        normal_std = float(np.max(np.std(normals, axis=0)))
        offset_std = float(np.std(offsets))
        diag["normal_std"] = normal_std
        diag["offset_std"] = offset_std
        if normal_std > cfg.tol_consistency or offset_std > cfg.tol_consistency * max(1.0, abs(np.mean(offsets))):
            out.notes.append("hyperplane estimates are not consistent across samples")
            return out
        out.tag = "Hyperplane"
        out.normal = normal
        out.offset = float(np.mean(offsets))
        return out

    centers = np.array([f.V + f.N / f.alpha for f in frames])
    radius = 1.0 / float(np.mean(np.abs(alpha)))
    center_std = float(np.max(np.std(centers, axis=0)))
    diag["center_std"] = center_std
    if center_std > cfg.tol_consistency * radius:
        out.notes.append("center estimates are not consistent across samples")
        return out
    out.tag = "Hypersphere"
    out.center = centers.mean(axis=0)
    out.radius = radius
    return out
