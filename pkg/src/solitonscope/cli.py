"""Command-line front end.

Exit codes: 0 success, 1 verification failed (or ``--expect`` unmet),
2 configuration/input error, 3 numerical failure.
"""

from __future__ import annotations

import ast
import itertools
import os
import sys
import time

import click
import numpy as np

from . import __version__, gallery
from .classifier import ClassifyConfig, classify
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    EvalError,
    ExprSyntaxError,
    GeometryError,
    NotApplicableError,
    NumericalFailure,
    SolitonscopeError,
)
from .hypersurface import induced_metric
from .report import to_csv, to_json, to_text
from .soliton import (
    SolitonProblem,
    check_concurrent,
    check_flavored,
    check_minimal_phi1,
    identity_ensays,
    identity_f1,
    identity_potential,
    identity_s3,
)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
COMMANDS = ("verify", "identities", "classify", "sweep", "gallery")
EXPECT = ("soliton", "not-soliton", "hyperplane", "cone", "hypersphere")

# jet order each command needs from the immersion / metric expressions
REQUIRED_ORDER = {"verify": 2, "classify": 2, "sweep": 2, "identities": 2, "f1": 4}


def _dropped(dropped):
    return [{"point": list(d.point), "reason": d.reason, "excluded": d.excluded} for d in dropped]


def _problem(cfg: RunConfig, threads, points=None, geometry=None):
    return SolitonProblem(
        geometry if geometry is not None else cfg.build_geometry(),
        cfg.flavor,
        cfg.points() if points is None else points,
        k=cfg.k,
        potential=cfg.potential,
        vector_field=cfg.vector_field,
        h_function=cfg.h_function,
        flat_hessian=cfg.flat_hessian,
        tol_soliton=cfg.tolerances["soliton"],
        threads=threads,
    )


def _verify_table(cfg, rep):
    cols = list(cfg.chart_vars)
    data = [rep.points[:, i] for i in range(cfg.dimension)]
    if cfg.mode == "hypersurface":
        for key in ("lambda", "alpha", "kappa_min", "kappa_max"):
            cols.append(key)
            data.append(rep.columns[key])
    cols += ["phi", "residual"]
    data += [rep.phi, rep.residual]
    for key in ("R", "sigma_k", "h"):
        if key in rep.columns:
            cols.append(key)
            data.append(rep.columns[key])
    if isinstance(rep.rho, np.ndarray):
        cols.append("rho")
        data.append(rep.rho)
    rows = [list(r) for r in zip(*data)] if data else []
    return {"columns": cols, "rows": rows}


def _cmd_verify(cfg, threads):
    rep = check_flavored(_problem(cfg, threads))
    result = {
        "flavor": rep.flavor,
        "verdict": rep.verdict,
        "sup_residual": rep.sup_residual,
        "tolerance": rep.tolerance,
        "samples": int(len(rep.points)),
    }
    if cfg.flavor == "k_yamabe":
        result["k"] = cfg.k
    if isinstance(rep.rho, float):
        result["rho"] = rep.rho
    return result, _verify_table(cfg, rep), rep.dropped


def _cmd_identities(cfg, threads):
    geom = cfg.build_geometry()
    pts = cfg.points()
    tol = cfg.tolerances
    reports, skipped = [], []

    def attempt(name, fn):
        try:
            reports.append(fn())
        except NotApplicableError as exc:
            skipped.append({"identity": name, "reason": str(exc)})

    if cfg.mode == "hypersurface":
        attempt("s3", lambda: identity_s3(geom, pts, tol["s3"], threads))
        attempt("ensays", lambda: identity_ensays(geom, pts, tol["soliton"], threads))
        attempt("potential", lambda: identity_potential(geom, pts, tol["potential"], threads))
        attempt("minimal_phi1", lambda: check_minimal_phi1(geom, pts, tol["minimal"], tol["minimal"], threads))
        metric = induced_metric(geom)
    else:
        metric = geom
    if cfg.potential is not None:
        if cfg.jet_order < REQUIRED_ORDER["f1"]:
            skipped.append({"identity": "f1", "reason": f"needs jet order >= {REQUIRED_ORDER['f1']}"})
        else:
            attempt(
                "f1",
                lambda: identity_f1(metric, cfg.potential, pts, tol["f1"], tol["soliton"], threads),
            )
    if cfg.vector_field is not None:
        attempt("concurrent", lambda: check_concurrent(metric, cfg.vector_field, pts, tol["concurrent"], threads))

    result = {
        "identities": [
            {
                "identity": r.identity,
                "passed": r.passed,
                "sup_defect": r.sup_defect,
                "tolerance": r.tolerance,
                "samples": int(len(r.points)),
                **{f"max_{k}": float(np.max(np.abs(v))) for k, v in r.aux.items()},
            }
            for r in reports
        ],
        "skipped": skipped,
        "all_passed": all(r.passed for r in reports),
    }
    # one row per surviving point of the first report, defects joined by point
    cols = list(cfg.chart_vars) + [f"{r.identity}_defect" for r in reports]
    rows = []
    dropped = []
    if reports:
        base = reports[0].points
        lookups = [{tuple(p): d for p, d in zip(r.points.tolist(), r.defects)} for r in reports]
        for p in base.tolist():
            rows.append(list(p) + [lk.get(tuple(p)) for lk in lookups])
        dropped = reports[0].dropped
    return result, {"columns": cols, "rows": rows}, dropped


def _cmd_classify(cfg, threads):
    if cfg.mode != "hypersurface":
        raise ConfigError("classify needs mode=hypersurface")
    tol = cfg.tolerances
    verdict = classify(
        cfg.build_geometry(),
        ClassifyConfig(
            tol_soliton=tol["soliton"],
            tol_lambda=tol["lambda"],
            tol_alpha=tol["alpha"],
            tol_umbilic=tol["umbilic"],
            tol_consistency=tol["consistency"],
            points=cfg.points(),
            threads=threads,
        ),
    )
    result = {"tag": verdict.tag, **verdict.parameters(), "diagnostics": verdict.diagnostics, "notes": verdict.notes}
    cols = list(cfg.chart_vars) + ["lambda", "alpha", "kappa_min", "kappa_max", "phi", "residual"]
    data = [verdict.points[:, i] for i in range(cfg.dimension)] + [verdict.table[c] for c in cols[cfg.dimension:]]
    return result, {"columns": cols, "rows": [list(r) for r in zip(*data)]}, verdict.dropped


def _cmd_sweep(cfg, threads):
    if not cfg.sweep:
        raise ConfigError("sweep needs a 'sweep' parameter grid in the config")
    names = [s["name"] for s in cfg.sweep]
    axes = [np.linspace(s["min"], s["max"], s["steps"]) for s in cfg.sweep]
    points = cfg.points()
    cells = []
    for idx, values in enumerate(itertools.product(*axes)):
        sub = cfg.with_parameters(dict(zip(names, map(float, values))))
        try:
            rep = check_flavored(_problem(sub, threads, points=points))
            cells.append((rep.sup_residual, idx, list(map(float, values)), rep.verdict, None))
        except (NumericalFailure, NotApplicableError) as exc:
            cells.append((float("inf"), idx, list(map(float, values)), "Failed", str(exc)))
    cells.sort(key=lambda c: (c[0], c[1]))
    rows = [vals + [res if np.isfinite(res) else None, verdict] for res, _, vals, verdict, _ in cells]
    best = cells[0]
    result = {
        "flavor": cfg.flavor,
        "parameters": names,
        "cells": len(cells),
        "solitons": sum(1 for c in cells if c[3] == "Soliton"),
        "best": {"values": best[2], "sup_residual": best[0] if np.isfinite(best[0]) else None, "verdict": best[3]},
        "failures": [{"values": c[2], "reason": c[4]} for c in cells if c[4]],
    }
    return result, {"columns": names + ["sup_residual", "verdict"], "rows": rows}, []


def _cmd_gallery(cfg):
    listing = [
        {"id": i, "kind": k, "parameters": [{"name": n, "default": d, "constraint": c} for n, d, c in params], "expected": tag}
        for i, k, params, tag in gallery.list_entries()
    ]
    if cfg is None:
        return {"entries": listing}, None, []
    return {"config": cfg.raw}, None, []


def _expect_met(command, expect, result):
    if command == "verify":
        verdict = result["verdict"]
        return {"soliton": "Soliton", "not-soliton": "NotSoliton"}.get(expect) == verdict
    if command == "classify":
        return {"hyperplane": "Hyperplane", "cone": "Cone", "hypersphere": "Hypersphere", "not-soliton": "NotSoliton"}.get(expect) == result["tag"]
    if command == "sweep":
        if expect == "soliton":
            return result["solitons"] == result["cells"]
        if expect == "not-soliton":
            return result["solitons"] == 0
    raise ConfigError(f"--expect {expect} is not meaningful for command {command}")


def run(command, cfg: RunConfig | None, expect=None, threads=None, timing=False):
    """Execute ``command``; returns ``(report dict, exit code)``.

    Raises :class:`SolitonscopeError` subclasses for config/numerical failures;
    :func:`exit_code_for` maps them to exit codes.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    if expect is not None and expect not in EXPECT:
        raise ConfigError(f"unknown --expect value {expect!r}")
    if cfg is None and command != "gallery":
        raise ConfigError(f"command {command} needs --config")
    if cfg is not None and command in REQUIRED_ORDER and cfg.jet_order < REQUIRED_ORDER[command]:
        raise ConfigError(f"command {command} needs jet order >= {REQUIRED_ORDER[command]}, got {cfg.jet_order}")
    start = time.perf_counter()
    if command == "verify":
        result, table, dropped = _cmd_verify(cfg, threads)
    elif command == "identities":
        result, table, dropped = _cmd_identities(cfg, threads)
    elif command == "classify":
        result, table, dropped = _cmd_classify(cfg, threads)
    elif command == "sweep":
        result, table, dropped = _cmd_sweep(cfg, threads)
    else:
        result, table, dropped = _cmd_gallery(cfg)

    report = {
        "tool": "solitonscope",
        "version": __version__,
        "command": command,
        "config_hash": cfg.config_hash() if cfg is not None else "-" * 64,
        "result": result,
    }
    if table is not None:
        report["table"] = table
    report["dropped"] = _dropped(dropped)
    if timing:
        report["wall_clock_s"] = time.perf_counter() - start

    code = EXIT_OK
    if expect is not None:
        code = EXIT_OK if _expect_met(command, expect, result) else EXIT_FAILED
    elif command == "verify" and result["verdict"] != "Soliton":
        code = EXIT_FAILED
    elif command == "identities" and not result["all_passed"]:
        code = EXIT_FAILED
    return report, code


def exit_code_for(exc):
    if isinstance(exc, (ConfigError, ExprSyntaxError, NotApplicableError, EvalError)):
        return EXIT_CONFIG
    if isinstance(exc, (NumericalFailure, GeometryError)):
        return EXIT_NUMERICAL
    return EXIT_NUMERICAL


def render(report, fmt):
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        if "table" not in report:
            raise ConfigError(f"command {report['command']} has no tabular output; use json or text")
        return to_csv(report["table"], report["dropped"])
    return to_text(report)


def parse_gallery_ref(ref, params=()):
    """``gallery:<id>`` or ``gallery:<id>(k=v, ...)`` plus ``--param k=v`` overrides."""
    body = ref[len("gallery:"):]
    values = {}
    if "(" in body:
        if not body.endswith(")"):
            raise ConfigError(f"malformed gallery reference {ref!r}")
        name, inner = body.split("(", 1)
        try:
            call = ast.parse(f"f({inner[:-1]})", mode="eval").body
            values = {kw.arg: ast.literal_eval(kw.value) for kw in call.keywords}
        except (SyntaxError, ValueError) as exc:
            raise ConfigError(f"malformed gallery parameters in {ref!r}: {exc}") from None
        body = name
    for item in params:
        if "=" not in item:
            raise ConfigError(f"--param needs name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            values[k.strip()] = ast.literal_eval(v.strip())
        except (SyntaxError, ValueError):
            raise ConfigError(f"--param {k}: cannot parse value {v!r}") from None
    return gallery.config(body.strip(), values)


def _threads(value):
    if value is not None:
        return max(1, value)
    env = os.environ.get("SOLITONSCOPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SOLITONSCOPE_THREADS must be an integer, got {env!r}") from None
    return 1


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_ref", help="Config JSON path, '-' for stdin, or gallery:<id>[(k=v,...)].")
@click.option("--command", "command", type=click.Choice(COMMANDS), default="verify", show_default=True)
@click.option("--expect", type=click.Choice(EXPECT), default=None, help="Exit 1 unless this outcome is observed.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--jet-order", type=click.IntRange(0, 6), default=None, help="Maximum jet order (default 4).")
@click.option("--threads", type=click.IntRange(1), default=None, help="Worker threads (env SOLITONSCOPE_THREADS).")
@click.option("--param", "params", multiple=True, help="Gallery parameter override name=value (repeatable).")
@click.option("--timing", is_flag=True, help="Include wall-clock time in the report.")
@click.version_option(__version__)
def main(config_ref, command, expect, fmt, out_path, jet_order, threads, params, timing):
    """Verify conformal/Yamabe soliton equations and classify soliton hypersurfaces."""
    try:
        cfg = None
        if config_ref:
            if config_ref.startswith("gallery:"):
                cfg = parse_gallery_ref(config_ref, params)
            elif config_ref == "-":
                cfg = load_config(sys.stdin)
            else:
                cfg = load_config(config_ref)
        elif params:
            raise ConfigError("--param only applies to gallery:<id> configs")
        if cfg is not None and jet_order is not None:
            cfg.jet_order = jet_order
        fmt = fmt or (cfg.output_format if cfg is not None else "text")
        out_path = out_path or (cfg.output_path if cfg is not None else None)
        report, code = run(command, cfg, expect, _threads(threads), timing)
        text = render(report, fmt)
    except SolitonscopeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exit_code_for(exc))
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    sys.exit(code)


if __name__ == "__main__":
    main()
