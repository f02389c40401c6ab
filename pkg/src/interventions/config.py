"""Experiment configuration: INI file plus command-line overrides.

File layout::

    [run]
    experiment = classical-intervention
    seed = 7

    [classical-intervention]
    sharpness = 5
    mc_trials = 100000

Precedence is command-line flags > file > schema defaults.  Unknown
sections, unknown keys and unparsable values are rejected with the file
line that caused them.
"""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError

OUT_ENV = "INTERVENTIONS_OUT"
DEFAULT_OUT = "interventions-out"


@dataclass(frozen=True)
class Param:
    kind: Callable[[str], Any]
    default: Any
    help: str = ""


def float_list(text: str) -> tuple[float, ...]:
    items = [s for s in re.split(r"[,\s]+", text.strip()) if s]
    if not items:
        raise ValueError("empty list")
    return tuple(float(s) for s in items)


def int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in float_list(text))


def boolean(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int
    output_dir: Path


def _line_of(lines: list[str], section: str, key: str | None) -> int:
    in_section = False
    for i, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("["):
            if key is None and s == f"[{section}]":
                return i
            in_section = s == f"[{section}]"
        elif in_section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return i
    return 0


def _coerce(schema: dict[str, Param], key: str, raw: str, where: str) -> Any:
    if key not in schema:
        raise ConfigError(f"{where}: unknown parameter {key!r} (known: {', '.join(sorted(schema))})")
    try:
        return schema[key].kind(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value {raw!r} for {key!r}: {exc}") from None


def read_file(path: Path, experiments: dict[str, dict[str, Param]]) -> tuple[str | None, int | None, dict]:
    """Parse a config file into (experiment, seed, {section: {key: value}})."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    lines = text.splitlines()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    experiment, seed, values = None, None, {}
    for section in parser.sections():
        if section == "run":
            for key, raw in parser.items(section):
                where = f"{path}:{_line_of(lines, section, key)}"
                if key == "experiment":
                    experiment = raw.strip()
                elif key == "seed":
                    try:
                        seed = int(raw)
                    except ValueError:
                        raise ConfigError(f"{where}: seed must be an integer, got {raw!r}") from None
                else:
                    raise ConfigError(f"{where}: unknown key {key!r} in [run] (known: experiment, seed)")
        elif section in experiments:
            schema = experiments[section]
            values[section] = {
                key: _coerce(schema, key, raw, f"{path}:{_line_of(lines, section, key)}")
                for key, raw in parser.items(section)
            }
        else:
            where = f"{path}:{_line_of(lines, section, None)}"
            raise ConfigError(f"{where}: unknown section [{section}]")
    return experiment, seed, values


def resolve(
    experiment: str | None,
    experiments: dict[str, dict[str, Param]],
    config_file: Path | None = None,
    seed: int | None = None,
    out: Path | None = None,
    overrides: list[str] = (),
) -> ExperimentConfig:
    file_exp, file_seed, file_values = (None, None, {})
    if config_file is not None:
        file_exp, file_seed, file_values = read_file(config_file, experiments)
    name = experiment or file_exp
    if name is None:
        raise ConfigError("no experiment given on the command line or in [run]")
    if name not in experiments:
        raise ConfigError(f"unknown experiment {name!r} (known: {', '.join(experiments)})")
    if experiment and file_exp and experiment != file_exp:
        raise ConfigError(f"config file is for {file_exp!r} but {experiment!r} was requested")

    schema = experiments[name]
    params = {k: p.default for k, p in schema.items()}
    params.update(file_values.get(name, {}))
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--param {item!r}: expected key=value")
        params[key.strip()] = _coerce(schema, key.strip(), raw.strip(), f"--param {item}")

    if seed is None:
        seed = file_seed if file_seed is not None else 0
    if out is None:
        out = Path(os.environ.get(OUT_ENV, DEFAULT_OUT)) / name
    return ExperimentConfig(name, params, seed, Path(out))
