"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` are comments.  Lists are comma separated; probe
counts are written ``tag:count,tag:count``.  Unknown keys, malformed values
and out-of-range parameters raise ConfigurationError naming the field.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigurationError

KINDS = ("apply", "kernel", "normest-sweep", "ce2", "weights", "bmo", "stationary", "wave", "commutator",
         "substitution")
SUBCOMMAND_KIND = {k: k for k in KINDS} | {"sweep": "normest-sweep"}

CHOICES = {
    "symbol": ("bessel_power", "x_modulated"),
    "modulation": ("step", "sawtooth"),
    "phase": ("linear", "wave", "shifted", "scaling", "sine", "rough_wave", "quadratic"),
    "time_rule": ("step", "sawtooth", "constant"),
    "weight": ("none", "power", "truncated", "log", "constant"),
    "kernel_symbol": ("chi0_abs", "chi0_abs_phase", "chi0_only"),
    "maps": ("dilation", "sine", "identity"),
}


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _words(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _counts(text: str) -> tuple:
    out = []
    for item in _words(text):
        tag, _, k = item.partition(":")
        out.append((tag.strip(), int(k)))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    """All experiment inputs.  Every field has a default, so an empty file is valid."""

    kind: str = "apply"
    # grid
    n: int = 1
    N: int = 256
    L: float = 8.0
    seed: int = 0
    # amplitude and phase
    symbol: str = "bessel_power"
    modulation: str = "step"
    m: float = 0.0
    rho: float = 1.0
    delta: float = 0.0
    phase: str = "linear"
    t: float = 1.0
    scale: float = 2.0
    eps: float = 0.25
    time_rule: str = "step"
    oversample: int = 1
    # weights and exponents
    weight: str = "none"
    alpha: float = -0.5
    b: float = 0.9
    mu: float = 0.75
    p: float = 2.0
    q: float = 2.0
    s: float = 0.0
    kmin: int = -8
    kmax: int = 3
    # sweeps
    m_list: tuple = (-0.659, 0.091)
    N_list: tuple = (32, 48, 64)
    lam_list: tuple = (8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0)
    probes: tuple = (("gaussian_bumps", 6), ("annular_random", 2))
    k: int = 1
    loss_eps: float = 0.1
    kernel_symbol: str = "chi0_abs"
    maps: tuple = ("dilation", "sine", "identity")
    dense: bool = False

    def __post_init__(self):
        self._coerce()
        self.validate()

    def _coerce(self) -> None:
        casts = {"int": int, "float": float, "str": str, "bool": bool}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            try:
                if f.name in ("N_list",):
                    v = tuple(int(x) for x in v)
                elif f.name in ("m_list", "lam_list"):
                    v = tuple(float(x) for x in v)
                elif f.name == "probes":
                    v = tuple((str(a), int(c)) for a, c in (dict(v).items() if isinstance(v, Mapping) else v))
                elif f.name == "maps":
                    v = tuple(str(x) for x in v)
                elif f.type in casts and not (f.type == "float" and isinstance(v, bool)):
                    if f.type == "int" and isinstance(v, float) and not v.is_integer():
                        raise ValueError("not an integer")
                    v = casts[f.type](v)
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"{f.name}: invalid value {v!r} ({exc})") from None
            object.__setattr__(self, f.name, v)

    def validate(self) -> None:
        def bad(name, why):
            raise ConfigurationError(f"{name}: {why} (got {getattr(self, name)!r})")

        if self.kind not in KINDS:
            raise ConfigurationError(f"kind: unknown experiment {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        for name, allowed in CHOICES.items():
            v = getattr(self, name)
            vals = v if isinstance(v, tuple) else (v,)
            for x in vals:
                if x not in allowed:
                    raise ConfigurationError(f"{name}: {x!r} is not one of {', '.join(allowed)}")
        if self.n not in (1, 2, 3):
            bad("n", "dimension must be 1, 2 or 3")
        if self.N < 4:
            bad("N", "need at least 4 points per axis")
        if self.L <= 0:
            bad("L", "half-width must be positive")
        if not 0 <= self.rho <= 1:
            bad("rho", "must lie in [0, 1]")
        if not 0 <= self.delta <= 1:
            bad("delta", "must lie in [0, 1]")
        if self.oversample < 1:
            bad("oversample", "must be >= 1")
        if self.p < 1:
            bad("p", "must be >= 1")
        if self.q < 1:
            bad("q", "must be >= 1")
        if self.b < 0:
            bad("b", "must be >= 0")
        if self.k < 1:
            bad("k", "must be >= 1")
        if self.kmin > self.kmax:
            bad("kmin", "must not exceed kmax")
        if any(N < 4 for N in self.N_list):
            bad("N_list", "every N must be >= 4")
        if any(c < 0 for _, c in self.probes):
            bad("probes", "counts must be >= 0")

    # ------------------------------------------------------------------ text form

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_render(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _render(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(f"{x[0]}:{x[1]}" if isinstance(x, tuple) else _render(x) for x in v)
    return str(v)


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_PARSERS = {"N_list": _ints, "m_list": _floats, "lam_list": _floats, "probes": _counts, "maps": _words,
            "dense": _bool}


def _convert(name: str, text: str):
    f = _FIELD_TYPES.get(name)
    if f is None:
        raise ConfigurationError(f"{name}: unknown key")
    try:
        if name in _PARSERS:
            return _PARSERS[name](text)
        if f.type in ("int", int):
            return int(text)
        if f.type in ("float", float):
            return float(text)
        return text.strip()
    except ValueError as exc:
        raise ConfigurationError(f"{name}: cannot parse {text!r} ({exc})") from None


def parse_text(text: str) -> dict:
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"line {no}: expected 'key = value'")
        key = key.strip()
        if key in out:
            raise ConfigurationError(f"{key}: given twice")
        out[key] = _convert(key, value.strip())
    return out


def from_mapping(values: Mapping[str, Any], base: ExperimentConfig | None = None) -> ExperimentConfig:
    base = base or ExperimentConfig()
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigurationError(f"{sorted(unknown)[0]}: unknown key")
    return dataclasses.replace(base, **dict(values))


def load(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path} ({exc.strerror})") from None
    return from_mapping(parse_text(text))


def parse_overrides(items) -> dict:
    """``key=value`` strings from the command line."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"override {item!r}: expected key=value")
        out[key.strip()] = _convert(key.strip(), value.strip())
    return out


__all__ = ["CHOICES", "ExperimentConfig", "KINDS", "SUBCOMMAND_KIND", "from_mapping", "load", "parse_overrides",
           "parse_text"]
