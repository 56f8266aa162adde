""" SPDX-License-Identifier: MIT-0 """

import re

from typing import Any, Dict, Iterable, Optional, Tuple
from aws_lambda_powertools import Logger

import constants
from components.experiments import Scenario

# Global parameters
logger = Logger(service=constants.WORKLOAD_NAME)

# Expected value type of every accepted key
SCHEMA = {
    "scenario": {"name": "str", "engine": "str", "steady_engine": "str", "lock_zeta_phase": "bool",
                 "output": "str"},
    "model": {"omega_b1": "float", "omega_b2": "float", "g1": "float", "g2": "float", "eps_p": "complex",
              "eps_d": "complex", "Delta": "float", "Delta_p": "float", "gamma_a": "float",
              "gamma_b1": "float", "gamma_b2": "float", "nbar_b1": "float", "nbar_b2": "float"},
    "transfer": {"g_t": "float", "gamma_t": "float", "eps_p2": "complex", "Delta_t": "float", "tau": "float"},
    "sweep": {"axis": "str", "values": "float_list", "frequency_hz": "float"},
    "solver": {"cutoffs": "int_list", "t_max": "float", "t_ss": "float", "n_times": "int", "rtol": "float"},
    "grid": {"extent": "float", "points": "int", "x_outcome": "float"},
}
REQUIRED = {
    "model": ("omega_b2", "g1", "g2", "eps_p", "eps_d", "Delta", "Delta_p", "gamma_a", "gamma_b1", "gamma_b2"),
    "transfer": ("g_t", "gamma_t", "eps_p2", "Delta_t", "tau"),
}

_INT = re.compile(r"[+-]?\d+$")
_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_FLOAT = re.compile(rf"[+-]?{_NUMBER}$|[+-]?(?:inf|nan)$")
_COMPLEX = re.compile(rf"(?P<re>[+-]?{_NUMBER})?(?P<im>[+-](?:{_NUMBER})?|(?:{_NUMBER}))i$")
_WORD = re.compile(r"[A-Za-z_][\w./-]*$")
_KEY = re.compile(r"[A-Za-z_]\w*$")


class ConfigError(ValueError):
    """Invalid scenario text; line and column are 1-based and None for command-line overrides."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        location = ""
        if line is not None:
            location = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column


def _scalar(text: str, line, column):
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if _INT.match(text):
        return int(text)
    if _FLOAT.match(text):
        return float(text)
    match = _COMPLEX.match(text)
    if match:
        imag = match.group("im")
        imag = float(imag + "1") if imag in ("+", "-") else float(imag)
        return complex(float(match.group("re") or 0.0), imag)
    if _WORD.match(text):
        return text
    raise ConfigError(f"cannot parse value {text!r}", line, column)


def parse_value(text: str, line: Optional[int] = None, column: Optional[int] = None):
    """Untyped value: integer, float, complex a+bi, bool, string or a flat list [v1, v2]."""
    text = text.strip()
    if not text:
        raise ConfigError("missing value", line, column)
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError("unterminated list", line, column)
        inner = text[1:-1].strip()
        if not inner:
            return []
        items = []
        offset = column + 1 if column is not None else None
        for part in inner.split(","):
            if not part.strip():
                raise ConfigError("empty list element", line, offset)
            items.append(_scalar(part.strip(), line, offset))
            if offset is not None:
                offset += len(part) + 1
        return items
    return _scalar(text, line, column)


def _coerce(value, kind: str, where: str, line, column):
    def fail():
        raise ConfigError(f"{where} expects {kind.replace('_', ' ')}, got {value!r}", line, column)

    if kind == "str":
        if not isinstance(value, str):
            fail()
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            fail()
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            fail()
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail()
        return float(value)
    if kind == "complex":
        if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
            fail()
        return complex(value)
    if kind.endswith("_list"):
        if not isinstance(value, list):
            fail()
        return [_coerce(v, kind[:-5], where, line, column) for v in value]
    raise ValueError(f"Unknown schema type {kind}")


def _strip_comment(raw: str) -> str:
    quoted = False
    for i, char in enumerate(raw):
        if char == '"':
            quoted = not quoted
        elif char == "#" and not quoted:
            return raw[:i]
    return raw


def _resolve_override(key: str) -> Tuple[str, str]:
    if "." in key:
        section, name = key.split(".", 1)
        if section not in SCHEMA or name not in SCHEMA[section]:
            raise ConfigError(f"unknown override key {key!r}")
        return section, name
    owners = [section for section, keys in SCHEMA.items() if key in keys]
    if not owners:
        raise ConfigError(f"unknown override key {key!r}")
    if len(owners) > 1:
        raise ConfigError(f"override key {key!r} is ambiguous; use one of "
                          f"{', '.join(f'{s}.{key}' for s in owners)}")
    return owners[0], key


def parse_config(text: str, overrides: Iterable[str] = (), name: Optional[str] = None) -> Scenario:
    """Parses an INI-style scenario, applies section.key=value overrides and validates the result."""
    sections: Dict[str, Dict[str, Any]] = {}
    origins: Dict[Tuple[str, str], Tuple[Optional[int], Optional[int]]] = {}
    section_lines: Dict[str, int] = {}
    current = None

    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw).rstrip()
        if not stripped.strip():
            continue
        indent = len(stripped) - len(stripped.lstrip())
        body = stripped.strip()
        if body.startswith("["):
            if not body.endswith("]"):
                raise ConfigError("unterminated section header", number, indent + 1)
            current = body[1:-1].strip()
            if current not in SCHEMA:
                raise ConfigError(f"unknown section [{current}]", number, indent + 2)
            if current in section_lines:
                raise ConfigError(f"duplicate section [{current}] (lines {section_lines[current]} and {number})",
                                  number, indent + 1)
            section_lines[current] = number
            sections[current] = {}
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", number, indent + 1)
        if current is None:
            raise ConfigError("key outside of any [section]", number, indent + 1)
        key_text, value_text = body.split("=", 1)
        key = key_text.strip()
        if not _KEY.match(key):
            raise ConfigError(f"invalid key {key!r}", number, indent + 1)
        if key not in SCHEMA[current]:
            raise ConfigError(f"unknown key {key!r} in [{current}]", number, indent + 1)
        if key in sections[current]:
            first = origins[(current, key)][0]
            raise ConfigError(f"duplicate key {key!r} in [{current}] (lines {first} and {number})",
                              number, indent + 1)
        column = indent + len(key_text) + 2 + (len(value_text) - len(value_text.lstrip()))
        value = parse_value(value_text, number, column)
        sections[current][key] = _coerce(value, SCHEMA[current][key], f"{current}.{key}", number, column)
        origins[(current, key)] = (number, column)

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must have the form section.key=value")
        key, value_text = item.split("=", 1)
        section, key = _resolve_override(key.strip())
        value = parse_value(value_text)
        sections.setdefault(section, {})[key] = _coerce(value, SCHEMA[section][key], f"{section}.{key}", None, None)
        origins[(section, key)] = (None, None)
        logger.debug(f"Override {section}.{key} = {value!r}")

    for section, keys in REQUIRED.items():
        if section == "transfer" and section not in sections:
            continue
        for key in keys:
            if key not in sections.get(section, {}):
                raise ConfigError(f"missing required key {section}.{key}", section_lines.get(section))

    scenario_section = sections.setdefault("scenario", {})
    if "name" not in scenario_section:
        if name is None:
            raise ConfigError("missing required key scenario.name")
        scenario_section["name"] = name

    try:
        return Scenario.from_dict(sections)
    except (TypeError, ValueError) as e:
        message = str(e)
        for (section, key), (line, column) in origins.items():
            if re.search(rf"\b{re.escape(key)}\b", message):
                raise ConfigError(f"{section}.{key}: {message}", line, column) from e
        raise ConfigError(message) from e
