"""Run configuration: JSON schema, validation and construction of problems."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import jsonschema

from .errors import ConfigError, ExprSyntaxError
from .expr import MAX_JET_ORDER, free_vars, parse
from .hypersurface import Immersion
from .sampling import grid
from .soliton import FLAVORS
from .tensor import MetricField, chart_names

MAX_SAMPLES = 10**6

_EXPR = {"type": "string", "minLength": 1}
_NUM = {"type": "number"}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "dimension", "domain"],
    "properties": {
        "mode": {"enum": ["hypersurface", "intrinsic"]},
        "dimension": {"type": "integer", "minimum": 1, "maximum": 8},
        "immersion": {"type": "array", "items": _EXPR, "minItems": 2},
        "metric": {
            "type": "array",
            "minItems": 1,
            "items": {"anyOf": [_EXPR, {"type": "array", "items": _EXPR, "minItems": 1}]},
        },
        "potential": _EXPR,
        "vector_field": {"type": "array", "items": _EXPR, "minItems": 1},
        "h_function": _EXPR,
        "flat_hessian": {"type": "boolean"},
        "soliton": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "flavor": {"enum": list(FLAVORS)},
                "k": {"type": "integer", "minimum": 1},
            },
        },
        "domain": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["min", "max", "samples"],
                "properties": {"min": _NUM, "max": _NUM, "samples": {"type": "integer", "minimum": 2}},
            },
        },
        "exclude": _EXPR,
        "parameters": {"type": "object", "additionalProperties": _NUM},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                name: {"type": "number", "exclusiveMinimum": 0}
                for name in (
                    "soliton", "lambda", "alpha", "umbilic", "consistency",
                    "minimal", "s3", "potential", "concurrent", "f1",
                )
            },
        },
        "seed": {"type": "integer"},
        "jet_order": {"type": "integer", "minimum": 0, "maximum": MAX_JET_ORDER},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"format": {"enum": ["text", "json", "csv"]}, "path": {"type": "string"}},
        },
        "sweep": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "min", "max", "steps"],
                "properties": {
                    "name": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"},
                    "min": _NUM,
                    "max": _NUM,
                    "steps": {"type": "integer", "minimum": 1},
                },
            },
        },
        "expect": {"type": "object"},
    },
}

DEFAULT_TOLERANCES = {
    "soliton": 1e-7,
    "lambda": 1e-7,
    "alpha": 1e-8,
    "umbilic": 1e-7,
    "consistency": 1e-6,
    "minimal": 1e-8,
    "s3": 1e-8,
    "potential": 1e-9,
    "concurrent": 1e-9,
    "f1": 1e-6,
}


def _path(err):
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


@dataclass
class RunConfig:
    mode: str
    dimension: int
    domain: list
    immersion: list | None = None
    metric: list | None = None
    potential: str | None = None
    vector_field: list | None = None
    h_function: str | None = None
    flat_hessian: bool = False
    flavor: str = "conformal"
    k: int = 1
    exclude: str | None = None
    parameters: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    jet_order: int = 4
    output_format: str = "text"
    output_path: str | None = None
    sweep: list | None = None
    expect: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def chart_vars(self):
        return chart_names(self.dimension)

    def canonical_json(self):
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def points(self):
        return grid([(d["min"], d["max"], d["samples"]) for d in self.domain])

    def with_parameters(self, values):
        cfg = copy.copy(self)
        cfg.parameters = {**self.parameters, **values}
        return cfg

    def metric_rows(self):
        if self.metric is None:
            return None
        if all(isinstance(r, list) for r in self.metric):
            return self.metric
        flat = list(self.metric)
        rows, i = [], 0
        for r in range(self.dimension):
            rows.append(flat[i : i + r + 1])
            i += r + 1
        return rows

    def build_geometry(self):
        if self.mode == "hypersurface":
            return Immersion(
                self.immersion,
                [(d["min"], d["max"]) for d in self.domain],
                self.exclude,
                self.parameters,
                self.chart_vars,
            )
        return MetricField.from_exprs(self.metric_rows(), self.chart_vars, self.parameters)


def _fail(msg):
    raise ConfigError(msg)


def validate(doc: dict) -> RunConfig:
    """Schema check, cross-field checks and eager expression parsing."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"schema violation at {_path(err)}: {err.message}") from None
    mode = doc["mode"]
    n = doc["dimension"]
    if mode == "hypersurface":
        if "metric" in doc:
            _fail("field 'metric' is not allowed with mode=hypersurface (use 'immersion')")
        if "immersion" not in doc:
            _fail("mode=hypersurface requires field 'immersion'")
        if len(doc["immersion"]) != n + 1:
            _fail(f"immersion: expected {n + 1} components for dimension {n}, got {len(doc['immersion'])}")
    else:
        if "immersion" in doc:
            _fail("field 'immersion' is not allowed with mode=intrinsic (use 'metric')")
        if "metric" not in doc:
            _fail("mode=intrinsic requires field 'metric'")
    if len(doc["domain"]) != n:
        _fail(f"domain: expected {n} entries, got {len(doc['domain'])}")
    total = 1
    for i, d in enumerate(doc["domain"]):
        if not d["max"] > d["min"]:
            _fail(f"domain/{i}: max must exceed min")
        total *= d["samples"]
    if total > MAX_SAMPLES:
        _fail(f"domain: {total} samples exceeds the limit of {MAX_SAMPLES}")
    if "vector_field" in doc and len(doc["vector_field"]) != n:
        _fail(f"vector_field: expected {n} components, got {len(doc['vector_field'])}")

    soliton = doc.get("soliton", {})
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(doc.get("tolerances", {}))
    output = doc.get("output", {})
    cfg = RunConfig(
        mode=mode,
        dimension=n,
        domain=[dict(d) for d in doc["domain"]],
        immersion=doc.get("immersion"),
        metric=doc.get("metric"),
        potential=doc.get("potential"),
        vector_field=doc.get("vector_field"),
        h_function=doc.get("h_function"),
        flat_hessian=doc.get("flat_hessian", False),
        flavor=soliton.get("flavor", "conformal"),
        k=soliton.get("k", 1),
        exclude=doc.get("exclude"),
        parameters=dict(doc.get("parameters", {})),
        tolerances=tolerances,
        seed=doc.get("seed", 0),
        jet_order=doc.get("jet_order", 4),
        output_format=output.get("format", "text"),
        output_path=output.get("path"),
        sweep=doc.get("sweep"),
        expect=doc.get("expect", {}),
        raw=copy.deepcopy(doc),
    )
    if cfg.metric is not None:
        rows = cfg.metric_rows()
        if len(rows) != n or any(len(r) != i + 1 for i, r in enumerate(rows)):
            _fail(f"metric: expected lower-triangular rows of lengths 1..{n}")

    allowed = set(cfg.chart_vars) | set(cfg.parameters) | {s["name"] for s in cfg.sweep or []}
    for where, text in _expressions(cfg):
        try:
            e = parse(text)
        except ExprSyntaxError as exc:
            raise ConfigError(f"{where}: syntax error in {text!r}: {exc}") from None
        unknown = [v for v in free_vars(e) if v not in allowed]
        if unknown:
            _fail(f"{where}: unknown identifier {unknown[0]!r} in {text!r}")
    return cfg


def _expressions(cfg):
    if cfg.immersion:
        for i, t in enumerate(cfg.immersion):
            yield f"immersion/{i}", t
    if cfg.metric:
        for i, row in enumerate(cfg.metric_rows()):
            for j, t in enumerate(row):
                yield f"metric/{i}/{j}", t
    for name in ("potential", "h_function", "exclude"):
        if getattr(cfg, name):
            yield name, getattr(cfg, name)
    for i, t in enumerate(cfg.vector_field or []):
        yield f"vector_field/{i}", t


def load_config(source) -> RunConfig:
    """Load from a path, a file object, a JSON string or an already-parsed dict."""
    if isinstance(source, dict):
        return validate(source)
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = None
        s = str(source)
        if s.lstrip().startswith("{"):
            text = s
        else:
            try:
                with open(s, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {s!r}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return validate(doc)
