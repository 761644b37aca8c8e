"""Sample plans and fault-tolerant evaluation over points."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ExcludedPointError, GeometryError, NumericalFailure

DROP_BUDGET = 0.2


def grid(boxes):
    """Regular grid over ``[(min, max, samples), ...]``; first variable varies slowest."""
    axes = [np.linspace(lo, hi, int(k)) for lo, hi, k in boxes]
    return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes))


def default_threads():
    try:
        return max(1, int(os.environ.get("SOLITONSCOPE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Dropped:
    point: tuple
    reason: str
    excluded: bool = False


def evaluate_points(fn, points, threads=None, budget=DROP_BUDGET):
    """Apply ``fn`` to each point, keeping input order.

    Returns ``(kept_points, results, dropped)``.  Points raising a geometry or
    evaluation error are dropped; excluded points are recorded but do not count
    against ``budget``.  Raises :class:`NumericalFailure` when more than
    ``budget`` of the evaluated points fail, or when nothing survives.
    """
    points = [np.asarray(p, dtype=float) for p in points]
    if not points:
        raise ValueError("empty sample plan")

    def run(p):
        try:
            return True, fn(p)
        except ExcludedPointError as exc:
            return False, Dropped(tuple(p.tolist()), str(exc), excluded=True)
        except (GeometryError, EvalError) as exc:
            return False, Dropped(tuple(p.tolist()), f"{type(exc).__name__}: {exc}")

    threads = default_threads() if threads is None else max(1, int(threads))
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, points))
    else:
        outcomes = [run(p) for p in points]

    kept, results, dropped = [], [], []
    for p, (ok, val) in zip(points, outcomes):
        if ok:
            kept.append(p)
            results.append(val)
        else:
            dropped.append(val)
    failed = sum(1 for d in dropped if not d.excluded)
    evaluated = len(points) - (len(dropped) - failed)
    if evaluated and failed > budget * evaluated:
        first = next(d for d in dropped if not d.excluded)
        raise NumericalFailure(
            f"{failed} of {evaluated} sample points failed (budget {budget:.0%}); first: {first.reason}"
        )
    if not kept:
        raise NumericalFailure("no sample point could be evaluated")
    return np.array(kept), results, dropped
