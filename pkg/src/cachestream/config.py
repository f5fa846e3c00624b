"""Simulation and solver parameters.

A :class:`SimConfig` is immutable once built. Values given in dB are kept as
given and converted to linear ratios once, in ``__post_init__``; every other
module reads the linear attributes (``psi``, ``upsilon``).

Config files are INI style (``key = value`` under ``[section]`` headers).
Section names are only for readability, keys are global. Lists are written
``[a, b, c]`` and any numeric entry may be a fraction such as ``4/7``.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence


class ConfigError(ValueError):
    """Raised when a config document is malformed or violates an invariant."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


# Caching-probability presets for the three placement cases.
CACHING_CASES = {
    1: (4 / 7, 2 / 7, 1 / 7),
    2: (1 / 3, 1 / 3, 1 / 3),
    3: (1 / 7, 2 / 7, 4 / 7),
}


@dataclass(frozen=True)
class SimConfig:
    """All parameters of a run. Units: meters, seconds, bits, Hz."""

    L: int = 3
    lam: float = 0.4  # nodes per m^2
    p: tuple[float, ...] = CACHING_CASES[1]
    T: int = 5
    R_user: float = 50.0
    psi_db: float = 20.0
    upsilon_db: float = 5.0
    eta_min: float = 0.99
    c: int = 1
    W: float = 1e6
    t_c: float = 5e-3
    # chunk playback time in the gamma_min definition; N[0]/(t0*W) = 1.498
    t0: float = 10_000 / (1.498 * 1e6)
    A_end: float = 1e4
    mu: float = 1.0
    Q_tilde: int = 100
    B_max: int | str = 52_000  # bits, or "auto"
    V: float = 0.015
    N: tuple[int, ...] = (10_000, 20_000, 40_000)
    P: tuple[float, ...] = (34.0, 36.64, 39.11)
    K: int = 50
    seed: int = 0
    mobility: str = "resample"
    stall_quality_accounting: bool = True
    b_unit: int = 1000  # DP grid step in bits
    bmax_eps: float = 1e-6  # tail target when B_max is "auto"

    psi: float = field(init=False, repr=False, compare=False)
    upsilon: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("p", "N", "P"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        _validate(self)
        object.__setattr__(self, "psi", db_to_linear(self.psi_db))
        object.__setattr__(self, "upsilon", db_to_linear(self.upsilon_db))

    @property
    def P_bar(self) -> float:
        return max(self.P)

    @property
    def auto_bmax(self) -> bool:
        return self.B_max == "auto"

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


def _validate(cfg: SimConfig) -> None:
    # One check per invariant; the first failure is reported.
    def fail(msg):
        raise ConfigError(msg)

    if not isinstance(cfg.L, int) or cfg.L < 1:
        fail("L must be a positive integer")
    if len(cfg.p) != cfg.L:
        fail("p must have length L")
    if any(not 0.0 <= x <= 1.0 for x in cfg.p):
        fail("p entries must lie in [0, 1]")
    if sum(cfg.p) > 1.0 + 1e-12:
        fail("p must sum to at most 1")
    if len(cfg.N) != cfg.L:
        fail("N must have length L")
    if len(cfg.P) != cfg.L:
        fail("P must have length L")
    if any(n <= 0 for n in cfg.N):
        fail("N entries must be positive")
    if any(b <= a for a, b in zip(cfg.N, cfg.N[1:])):
        fail("N not strictly increasing")
    if any(b <= a for a, b in zip(cfg.P, cfg.P[1:])):
        fail("P not strictly increasing")
    if cfg.lam < 0:
        fail("lambda must be nonnegative")
    if cfg.V < 0:
        fail("V must be nonnegative")
    if not isinstance(cfg.c, int) or cfg.c < 1:
        fail("c must be a positive integer")
    if not isinstance(cfg.Q_tilde, int) or cfg.Q_tilde < cfg.c:
        fail("Q_tilde must be an integer >= c")
    if not isinstance(cfg.T, int) or cfg.T < 1:
        fail("T must be a positive integer")
    if not isinstance(cfg.K, int) or cfg.K < 1:
        fail("K must be a positive integer")
    if not 0.0 < cfg.eta_min < 1.0:
        fail("eta_min must lie in (0, 1)")
    if cfg.R_user <= 0:
        fail("R_user must be positive")
    if cfg.W <= 0 or cfg.t_c <= 0 or cfg.t0 <= 0:
        fail("W, t_c and t0 must be positive")
    if cfg.A_end <= 0 or cfg.mu <= 0:
        fail("A_end and mu must be positive")
    if not isinstance(cfg.b_unit, int) or cfg.b_unit < 1:
        fail("b_unit must be a positive integer")
    if not 0.0 < cfg.bmax_eps < 1.0:
        fail("bmax_eps must lie in (0, 1)")
    if cfg.mobility != "resample":
        fail("mobility must be 'resample'")
    if cfg.B_max != "auto":
        if isinstance(cfg.B_max, bool) or not isinstance(cfg.B_max, int) or cfg.B_max < 0:
            fail("B_max must be a nonnegative integer or 'auto'")
        if cfg.N[0] > cfg.B_max:
            fail("N[0] must not exceed B_max")


# --------------------------------------------------------------------------
# Text round trip

# file key -> (attribute, kind)
_KEYS = {
    "L": ("L", "int"),
    "lambda": ("lam", "float"),
    "p": ("p", "floats"),
    "T": ("T", "int"),
    "R_user": ("R_user", "float"),
    "psi_db": ("psi_db", "float"),
    "upsilon_db": ("upsilon_db", "float"),
    "eta_min": ("eta_min", "float"),
    "c": ("c", "int"),
    "W": ("W", "float"),
    "t_c": ("t_c", "float"),
    "t0": ("t0", "float"),
    "A_end": ("A_end", "float"),
    "mu": ("mu", "float"),
    "Q_tilde": ("Q_tilde", "int"),
    "B_max": ("B_max", "bmax"),
    "V": ("V", "float"),
    "N": ("N", "ints"),
    "P": ("P", "floats"),
    "K": ("K", "int"),
    "seed": ("seed", "int"),
    "mobility": ("mobility", "str"),
    "stall_quality_accounting": ("stall_quality_accounting", "bool"),
    "b_unit": ("b_unit", "int"),
    "bmax_eps": ("bmax_eps", "float"),
}

_SECTIONS = {
    "network": ["L", "lambda", "p", "R_user", "mobility"],
    "channel": ["psi_db", "upsilon_db", "W", "t_c", "B_max", "b_unit", "bmax_eps"],
    "admission": ["eta_min", "t0"],
    "queue": ["c", "Q_tilde", "A_end", "mu"],
    "video": ["N", "P"],
    "policy": ["V", "T"],
    "run": ["K", "seed", "stall_quality_accounting"],
}


def _number(text: str) -> Fraction:
    return Fraction(text.strip())


def _parse_value(key: str, kind: str, text: str) -> Any:
    text = text.strip()
    try:
        if kind == "int":
            value = _number(text)
            if value.denominator != 1:
                raise ValueError
            return int(value)
        if kind == "float":
            return float(_number(text))
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == "str":
            return text
        if kind == "bmax":
            return "auto" if text.lower() == "auto" else _parse_value(key, "int", text)
        if kind in ("ints", "floats"):
            if not (text.startswith("[") and text.endswith("]")):
                raise ValueError
            items = [s for s in text[1:-1].split(",") if s.strip()]
            sub = "int" if kind == "ints" else "float"
            return tuple(_parse_value(key, sub, s) for s in items)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse {key} = {text!r}") from None
    raise AssertionError(kind)


def config_from_mapping(values: Mapping[str, str], base: SimConfig | None = None) -> SimConfig:
    """Build a config from raw ``key -> text`` pairs layered over ``base``."""
    changes = {}
    for key, text in values.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        attr, kind = _KEYS[key]
        changes[attr] = _parse_value(key, kind, text)
    base = base or SimConfig()
    return dataclasses.replace(base, **changes)


def load_config(source: str | Path, overrides: Mapping[str, str] | None = None) -> SimConfig:
    """Parse an INI document (text or path) into a validated config.

    Keys missing from the document take their default values. ``overrides``
    (typically from the command line) win over file values.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and "=" not in source):
        text = Path(source).read_text()
    else:
        text = source
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values: dict[str, str] = {}
    for section in parser.sections():
        for key, text_value in parser.items(section):
            if key in values:
                raise ConfigError(f"duplicate key {key!r}")
            values[key] = text_value
    if overrides:
        values.update(overrides)
    return config_from_mapping(values)


def _format(kind: str, value: Any) -> str:
    if kind in ("ints", "floats"):
        return "[" + ", ".join(_format(kind[:-1], v) for v in value) + "]"
    if kind == "float":
        return repr(float(value))
    if kind == "bool":
        return "true" if value else "false"
    return str(value)


def dump_config(cfg: SimConfig) -> str:
    """Serialize to INI text; ``load_config(dump_config(c)) == c``."""
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            attr, kind = _KEYS[key]
            lines.append(f"{key} = {_format(kind, getattr(cfg, attr))}")
        lines.append("")
    return "\n".join(lines)


def with_caching_case(cfg: SimConfig, case: int) -> SimConfig:
    if case not in CACHING_CASES:
        raise ConfigError(f"caching case must be one of {sorted(CACHING_CASES)}")
    if cfg.L != 3:
        raise ConfigError("caching cases are defined for L = 3")
    return cfg.replace(p=CACHING_CASES[case])


def parse_overrides(pairs: Sequence[str]) -> dict[str, str]:
    """Turn ``["V=0.02", "lambda=0.3"]`` into a key/text mapping."""
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"override must be key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out
