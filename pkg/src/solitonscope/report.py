"""Byte-stable JSON, CSV and text rendering of run reports.

Floats are always written in 17-significant-digit scientific notation so that
identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def fmt_float(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None
    return format(x, ".16e")


def _plain(obj):
    """Convert numpy containers and scalars to plain Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[")
            for i, v in enumerate(obj):
                _emit(v, out, indent, level + 1)
                if i < len(obj) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        s = fmt_float(obj)
        out.append("null" if s is None else s)
    else:
        out.append(json.dumps(str(obj)))


def to_json(report: dict, indent=2) -> str:
    out = []
    _emit(_plain(report), out, indent, 0)
    out.append("\n")
    return "".join(out)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = fmt_float(v)
        return "nan" if s is None else s
    return str(v)


def to_csv(table: dict, dropped=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["columns"])
    for row in table["rows"]:
        w.writerow([_cell(v) for v in row])
    for d in dropped:
        buf.write(f"# dropped {_cell_point(d['point'])}: {d['reason']}\n")
    return buf.getvalue()


def _cell_point(p):
    return "(" + ", ".join(_cell(float(x)) for x in p) + ")"


def _short(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, list):
        return "[" + ", ".join(_short(v) for v in x) + "]"
    return str(x)


def to_text(report: dict) -> str:
    lines = [f"solitonscope {report['version']}  command={report['command']}  config={report['config_hash'][:12]}"]
    result = _plain(report.get("result", {}))

    def walk(obj, prefix):
        if isinstance(obj, dict):
            for k, v in obj.items():
                if isinstance(v, dict) or (isinstance(v, list) and v and isinstance(v[0], dict)):
                    lines.append(f"{prefix}{k}:")
                    walk(v, prefix + "  ")
                else:
                    lines.append(f"{prefix}{k}: {_short(v)}")
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                lines.append(f"{prefix}- [{i}]")
                walk(v, prefix + "    ")

    walk(result, "  ")
    table = report.get("table")
    if table:
        lines.append(f"  table: {len(table['rows'])} rows x {len(table['columns'])} columns ({', '.join(table['columns'])})")
    dropped = report.get("dropped") or []
    if dropped:
        lines.append(f"  dropped points: {len(dropped)}")
        for d in dropped[:10]:
            lines.append(f"    {_cell_point(d['point'])}: {d['reason']}")
    if "wall_clock_s" in report:
        lines.append(f"  wall clock: {report['wall_clock_s']:.3f} s")
    return "\n".join(lines) + "\n"
