"""Tuning/testing command generation and parameter grid expansion."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str  # int | float | string | choice | flag
    default: object = None
    min: float | None = None
    max: float | None = None
    choices: tuple = ()

    def to_doc(self) -> dict:
        doc = {"name": self.name, "type": self.type, "default": self.default}
        if self.min is not None:
            doc["min"] = self.min
        if self.max is not None:
            doc["max"] = self.max
        if self.choices:
            doc["choices"] = list(self.choices)
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "ParamSpec":
        return ParamSpec(doc["name"], doc["type"], doc.get("default"),
                         doc.get("min"), doc.get("max"),
                         tuple(doc.get("choices") or ()))


@dataclass(frozen=True)
class CommandRequest:
    model: str
    dataset: str
    tokenizer: str
    values: dict = field(default_factory=dict)
    mode: str = "train"


@dataclass(frozen=True)
class SearchSpace:
    base: CommandRequest
    axes: tuple[tuple[str, tuple], ...]  # (param name, values) in declared order


def validate_values(schema: list[ParamSpec], values: dict) -> list[dict]:
    """Type/bounds/choices violations, as data."""
    by_name = {s.name: s for s in schema}
    out = []
    for name, value in values.items():
        spec = by_name.get(name)
        if spec is None:
            out.append({"param": name, "code": "unknown-name",
                        "message": f"unknown parameter {name!r}"})
            continue
        if spec.type == "int":
            if not isinstance(value, int) or isinstance(value, bool):
                out.append({"param": name, "code": "type",
                            "message": f"{name} must be an int"})
                continue
        elif spec.type == "float":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                out.append({"param": name, "code": "type",
                            "message": f"{name} must be a number"})
                continue
        elif spec.type == "string":
            if not isinstance(value, str):
                out.append({"param": name, "code": "type",
                            "message": f"{name} must be a string"})
                continue
        elif spec.type == "choice":
            if value not in spec.choices:
                out.append({"param": name, "code": "choices",
                            "message": f"{name} must be one of "
                                       f"{', '.join(map(str, spec.choices))}"})
                continue
        elif spec.type == "flag":
            if not isinstance(value, bool):
                out.append({"param": name, "code": "type",
                            "message": f"{name} must be a boolean"})
                continue
        if spec.type in ("int", "float"):
            if spec.min is not None and value < spec.min:
                out.append({"param": name, "code": "bounds",
                            "message": f"{name} must be >= {spec.min}"})
            elif spec.max is not None and value > spec.max:
                out.append({"param": name, "code": "bounds",
                            "message": f"{name} must be <= {spec.max}"})
    return out


def _fmt_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return str(value)


def render_command(req: CommandRequest, schema: list[ParamSpec]) -> str:
    """Deterministic one-line command; only explicitly provided values are
    emitted, in schema declaration order."""
    violations = validate_values(schema, req.values)
    if violations:
        raise ValidationError(
            "invalid-values", "; ".join(v["message"] for v in violations))
    if req.mode not in ("train", "test"):
        raise ValidationError("invalid-mode", f"mode must be train or test, got {req.mode!r}")
    parts = ["darkit", req.mode, req.model,
             "--dataset", req.dataset, "--tokenizer", req.tokenizer]
    for spec in schema:
        if spec.name not in req.values:
            continue
        value = req.values[spec.name]
        if spec.type == "flag":
            if value:
                parts.append(f"--{spec.name}")
        else:
            parts.append(f"--{spec.name}")
            parts.append(_fmt_value(value))
    return " ".join(parts)


def expand_grid(space: SearchSpace, schema: list[ParamSpec]) -> list[str]:
    """Cartesian product in odometer order (rightmost axis varies fastest)."""
    names = [name for name, _ in space.axes]
    if len(set(names)) != len(names):
        raise ValidationError("invalid-axes", "axis names must be unique")
    for name, values in space.axes:
        if not values:
            raise ValidationError("invalid-axes", f"axis {name!r} is empty")
        for v in values:
            bad = validate_values(schema, {name: v})
            if bad:
                raise ValidationError("invalid-axes", bad[0]["message"])
    commands = []
    for combo in itertools.product(*(values for _, values in space.axes)):
        values = dict(space.base.values)
        values.update(dict(zip(names, combo)))
        req = CommandRequest(space.base.model, space.base.dataset,
                             space.base.tokenizer, values, space.base.mode)
        commands.append(render_command(req, schema))
    return commands
