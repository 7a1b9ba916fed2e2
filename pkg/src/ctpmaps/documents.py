"""JSON map documents: schema validation, parsing and canonical output.

A document stores a rational map by its ascending coefficient lists and a
marked set, each complex number written as an explicit ``[re, im]`` pair.
``dumps`` is canonical, so loading and re-dumping a bundled file reproduces
it byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import jsonschema

from .algebra import INF, RationalMap, as_point, is_inf
from .errors import InputError, SchemaError
from .tolerance import DEFAULT, ToleranceProfile

_PAIR = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}

_TOLERANCE_KEYS = {
    "root_residual": {"type": "number", "exclusiveMinimum": 0},
    "cluster": {"type": "number", "exclusiveMinimum": 0},
    "path_tracking": {"type": "number", "exclusiveMinimum": 0},
    "clearance": {"type": "number", "exclusiveMinimum": 0},
    "membership": {"type": "number", "exclusiveMinimum": 0},
    "terminal_stop": {"type": "number", "exclusiveMinimum": 0},
    "coefficient": {"type": "number", "exclusiveMinimum": 0},
    "max_degree": {"type": "integer", "minimum": 1},
    "group_order_bound": {"type": "integer", "minimum": 1},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "MapDocument",
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "numerator", "denominator", "marked_points"],
    "properties": {
        "name": {"type": "string"},
        "numerator": {"type": "array", "items": _PAIR, "minItems": 1},
        "denominator": {"type": "array", "items": _PAIR, "minItems": 1},
        "marked_points": {
            "type": "array",
            "items": {"oneOf": [_PAIR, {"const": "inf"}]},
        },
        "base_point": {"oneOf": [_PAIR, {"type": "null"}]},
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "orientation": {"enum": ["ccw", "cw"]},
                "tolerances": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": _TOLERANCE_KEYS,
                },
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass
class MapDocument:
    name: str
    numerator: list[complex]
    denominator: list[complex]
    marked_points: list[complex]
    base_point: complex | None = None
    orientation: str | None = None
    tolerances: dict = field(default_factory=dict)

    def rational_map(self) -> RationalMap:
        return RationalMap(self.numerator, self.denominator, name=self.name)

    def tolerance_profile(self, base: ToleranceProfile = DEFAULT) -> ToleranceProfile:
        return base.override(**self.tolerances)

    def to_json(self) -> dict:
        out: dict = {
            "name": self.name,
            "numerator": [_pair(c) for c in self.numerator],
            "denominator": [_pair(c) for c in self.denominator],
            "marked_points": ["inf" if is_inf(z) else _pair(z) for z in self.marked_points],
        }
        if self.base_point is not None:
            out["base_point"] = _pair(self.base_point)
        options: dict = {}
        if self.orientation is not None:
            options["orientation"] = self.orientation
        if self.tolerances:
            options["tolerances"] = dict(self.tolerances)
        if options:
            out["options"] = options
        return out


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def _clean(x: float) -> float:
    # avoid "-0.0" in output
    return 0.0 if x == 0 else float(x)


def _location(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def validate(raw) -> None:
    """Raise SchemaError naming the first offending position."""
    errors = sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise SchemaError(f"{_location(err)}: {err.message}", path=_location(err))


def from_json(raw) -> MapDocument:
    validate(raw)
    for key in ("numerator", "denominator"):
        for i, (re, im) in enumerate(raw[key]):
            if not (math.isfinite(re) and math.isfinite(im)):
                raise SchemaError(f"$.{key}[{i}]: coefficient must be finite", path=f"$.{key}[{i}]")
    options = raw.get("options", {})
    base = raw.get("base_point")
    doc = MapDocument(
        name=raw["name"],
        numerator=[complex(re, im) for re, im in raw["numerator"]],
        denominator=[complex(re, im) for re, im in raw["denominator"]],
        marked_points=[INF if p == "inf" else complex(*p) for p in raw["marked_points"]],
        base_point=None if base is None else complex(*base),
        orientation=options.get("orientation"),
        tolerances=dict(options.get("tolerances", {})),
    )
    if all(c == 0 for c in doc.denominator):
        raise SchemaError("$.denominator: zero polynomial", path="$.denominator")
    return doc


def loads(text: str) -> MapDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", path=None) from exc
    return from_json(raw)


def load(path: str | Path) -> MapDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text)


def dumps(doc: MapDocument) -> str:
    """Canonical text: two-space indent with each pair on one line."""
    data = doc.to_json()
    lines = ["{"]
    items = list(data.items())
    for n, (key, value) in enumerate(items):
        comma = "," if n < len(items) - 1 else ""
        if isinstance(value, list) and value and all(isinstance(v, (list, str)) for v in value):
            lines.append(f"  {json.dumps(key)}: [")
            for m, v in enumerate(value):
                tail = "," if m < len(value) - 1 else ""
                lines.append(f"    {json.dumps(v)}{tail}")
            lines.append(f"  ]{comma}")
        else:
            body = json.dumps(value, sort_keys=True)
            lines.append(f"  {json.dumps(key)}: {body}{comma}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump(doc: MapDocument, path: str | Path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def from_map(f: RationalMap, marked: Iterable, name: str | None = None, **kwargs) -> MapDocument:
    return MapDocument(
        name=name if name is not None else f.name,
        numerator=[complex(c) for c in f.num.coeffs],
        denominator=[complex(c) for c in f.den.coeffs],
        marked_points=[as_point(z) for z in marked],
        **kwargs,
    )


BUNDLED = ("s", "r", "notctp", "z3", "mcmullen")


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise InputError(f"no bundled document {name!r}; choose from {', '.join(BUNDLED)}")
    return Path(str(resources.files("ctpmaps") / "data" / f"{name}.json"))


def load_bundled(name: str) -> MapDocument:
    return load(bundled_path(name))
