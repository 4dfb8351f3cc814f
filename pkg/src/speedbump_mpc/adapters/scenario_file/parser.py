import re
from collections.abc import Callable
from dataclasses import MISSING, dataclass, fields
from pathlib import Path
from typing import Any

from speedbump_mpc.adapters.scenario_file.exceptions import (
    DuplicateKeyError,
    InvalidValueError,
    MissingKeyError,
    ScenarioSyntaxError,
    UnknownKeyError,
)
from speedbump_mpc.domain.scenario import (
    WEIGHT_NAMES,
    InvalidScenarioError,
    Limits,
    Scenario,
    Weights,
    validate,
)
from speedbump_mpc.utils.formatting import format_round_trip

_KEY_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class _KeySpec:
    name: str
    kind: type
    required: bool


def _schema() -> list[_KeySpec]:
    """Every file key in serialisation order.

    Scenario fields come in declaration order, with the weights and limits flattened
    in place of their nested fields.
    """
    optional_scenario_fields = {
        field.name
        for field in fields(Scenario)
        if field.default is not MISSING or field.default_factory is not MISSING
    }
    specs = []
    for field in fields(Scenario):
        if field.name == "weights":
            specs += [_KeySpec(name, float, True) for name in WEIGHT_NAMES]
        elif field.name == "limits":
            specs += [_KeySpec(limit.name, float, False) for limit in fields(Limits)]
        else:
            kind = field.type if field.type in (int, bool) else float
            required = field.name not in optional_scenario_fields
            specs.append(_KeySpec(field.name, kind, required and field.name != "y_ref"))
    return specs


SCHEMA = _schema()
_SPECS = {spec.name: spec for spec in SCHEMA}


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(text)


_CONVERTERS: dict[type, tuple[Callable[[str], Any], str]] = {
    int: (int, "an integer"),
    float: (float, "a number"),
    bool: (_parse_bool, "true or false"),
}


class ScenarioFileParser:
    """Reads the flat `key = value` scenario format. Does not validate the result."""

    def parse(self, text: str) -> Scenario:
        values = self._read_values(text)
        for spec in SCHEMA:
            if spec.required and spec.name not in values:
                raise MissingKeyError(spec.name)
        values.setdefault("y_ref", values["y0"])
        weights = Weights(**{name: values.pop(name) for name in WEIGHT_NAMES})
        limits = Limits(
            **{
                limit.name: values.pop(limit.name)
                for limit in fields(Limits)
                if limit.name in values
            }
        )
        return Scenario(weights=weights, limits=limits, **values)

    def _read_values(self, text: str) -> dict[str, Any]:
        values: dict[str, Any] = {}
        for line_number, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            key, separator, value = (part.strip() for part in line.partition("="))
            if not separator or not value or not _KEY_PATTERN.fullmatch(key):
                raise ScenarioSyntaxError(
                    f"expected 'key = value', got {raw_line.strip()!r}", line_number
                )
            spec = _SPECS.get(key)
            if spec is None:
                raise UnknownKeyError(key, line_number)
            if key in values:
                raise DuplicateKeyError(key, line_number)
            convert, expected = _CONVERTERS[spec.kind]
            try:
                values[key] = convert(value)
            except ValueError as err:
                raise InvalidValueError(key, value, expected, line_number) from err
        return values


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format_round_trip(float(value))


def serialize_scenario(scenario: Scenario) -> str:
    limits = scenario.limits
    flat: dict[str, Any] = {
        **{field.name: getattr(scenario, field.name) for field in fields(Scenario)},
        **scenario.weights.as_dict(),
        **{field.name: getattr(limits, field.name) for field in fields(Limits)},
    }
    lines = (f"{spec.name} = {_format_value(flat[spec.name])}\n" for spec in SCHEMA)
    return "".join(lines)


def parse_scenario(config_text: str) -> Scenario:
    """Parses and validates; raises InvalidScenarioError listing every violation."""
    scenario = ScenarioFileParser().parse(config_text)
    violations = validate(scenario)
    if violations:
        raise InvalidScenarioError(violations)
    return scenario


def read_scenario_text(path: Path) -> str:
    return path.read_text(encoding="utf-8")
