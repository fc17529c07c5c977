"""Flat ``key = value`` run configuration files.

One setting per line, ``#`` starts a comment. Keys are case-insensitive.
Example::

    # reference interferometer
    eta_a = 0.42
    eta_b = 0.29
    eta_m = 0.9878
    p = 0.001, 0.01, 0.1
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .hom import REFERENCE_SETUP, SetupParams
from .source import DEFAULT_TAIL_TOLERANCE, TruncationConfig

_SECTION = "run"


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> dict[str, str]:
    parser = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return dict(parser[_SECTION])


def parse_float_list(text: str) -> list[float]:
    return [float(item) for item in text.replace(",", " ").split()]


@dataclass
class RunConfig:
    setup: SetupParams = REFERENCE_SETUP
    p_grid: list[float] = field(default_factory=list)
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    output_path: str | None = None
    format: str = "csv"
    extra: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "RunConfig":
        values = dict(values)
        try:
            setup_kw = {
                name: float(values.pop(name, getattr(REFERENCE_SETUP, name)))
                for name in ("eta_a", "eta_b", "eta_m", "eta_d1", "eta_d2")
            }
            setup = SetupParams(**setup_kw)
            p_grid = parse_float_list(values.pop("p")) if "p" in values else []
            n_max = values.pop("n_max", None)
            trunc = TruncationConfig(
                n_max=int(n_max) if n_max not in (None, "") else None,
                tail_tolerance=float(values.pop("tail_tolerance", DEFAULT_TAIL_TOLERANCE)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        fmt = values.pop("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {fmt!r}")
        return cls(
            setup=setup,
            p_grid=p_grid,
            truncation=trunc,
            output_path=values.pop("output", None),
            format=fmt,
            extra=values,
        )
