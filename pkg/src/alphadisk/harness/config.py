"""Line-oriented configuration files.

Format: UTF-8 text, sections in square brackets ([plane], [exterior],
[picard], [converge]), entries `key = value`, '#' starts a comment, blank
lines ignored.  Numbers are decimal with scientific notation allowed.
Parse errors carry line numbers; missing required keys name the key.
"""

from __future__ import annotations

from pathlib import Path

from .. import initial_data
from ..exterior_solver import ExteriorSimConfig, PicardConfig
from ..plane_solver import PlaneSimConfig


class ConfigError(Exception):
    """Malformed configuration or missing required key."""


_MISSING = object()


class Section(dict):
    """One config section with typed, error-reporting accessors."""

    def __init__(self, name, entries=()):
        super().__init__(entries)
        self.name = name

    def _fetch(self, key, default):
        if key in self:
            return self[key]
        if default is _MISSING:
            raise ConfigError(f"[{self.name}] missing required key '{key}'")
        return default

    def get_str(self, key, default=_MISSING) -> str:
        v = self._fetch(key, default)
        return v if isinstance(v, str) else v

    def get_float(self, key, default=_MISSING) -> float:
        v = self._fetch(key, default)
        if isinstance(v, str):
            try:
                return float(v)
            except ValueError:
                raise ConfigError(
                    f"[{self.name}] key '{key}': not a number: {v!r}"
                ) from None
        return float(v)

    def get_int(self, key, default=_MISSING) -> int:
        v = self.get_float(key, default)
        if v != int(v):
            raise ConfigError(f"[{self.name}] key '{key}': expected an integer")
        return int(v)

    def get_floats(self, key, default=_MISSING) -> list:
        v = self._fetch(key, default)
        if not isinstance(v, str):
            return list(v)
        parts = v.replace(",", " ").split()
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise ConfigError(
                f"[{self.name}] key '{key}': not a number list: {v!r}"
            ) from None


def parse_config(path) -> dict:
    """Parse a config file into {section_name: Section}."""
    text = Path(path).read_text(encoding="utf-8")
    sections: dict[str, Section] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            current = sections.setdefault(name, Section(name))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: entry before any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        current[key] = value
    return sections


def _profile_from(section: Section):
    kind = section.get_str("q0", "bump")
    if kind == "bump":
        center = section.get_floats("q0_center", [1.0, 0.0])
        return initial_data.OffsetBump(
            center=tuple(center),
            radius=section.get_float("q0_radius", 0.4),
            amplitude=section.get_float("q0_amplitude", 1.0),
        )
    if kind == "ring":
        return initial_data.RadialRing(
            r0=section.get_float("q0_r0", 1.0),
            width=section.get_float("q0_width", 0.5),
            amplitude=section.get_float("q0_amplitude", 1.0),
        )
    if kind in ("zero", "none"):
        return initial_data.ZeroField()
    raise ConfigError(f"[{section.name}] unknown q0 kind {kind!r}")


def plane_config(section: Section) -> PlaneSimConfig:
    dt = section.get_float("dt", -1.0)
    return PlaneSimConfig(
        alpha=section.get_float("alpha"),
        gamma=section.get_float("gamma"),
        q0=_profile_from(section),
        h=section.get_float("h", 0.02),
        dt=None if dt <= 0 else dt,
        t_end=section.get_float("t_end"),
        snapshot_stride=section.get_int("snapshot_stride", 10),
    )


def exterior_config(section: Section, eps=None, picard=None) -> ExteriorSimConfig:
    return ExteriorSimConfig(
        alpha=section.get_float("alpha"),
        gamma=section.get_float("gamma"),
        eps=section.get_float("eps") if eps is None else float(eps),
        q0=_profile_from(section),
        r_max=section.get_float("r_max", 4.0),
        n_r=section.get_int("n_r", 192),
        n_theta=section.get_int("n_theta", 128),
        grading=section.get_float("grading", 2.0),
        n_modes=section.get_int("n_modes", 24),
        dt=section.get_float("dt", 0.01),
        t_end=section.get_float("t_end"),
        snapshot_stride=section.get_int("snapshot_stride", 10),
        picard=picard,
    )


def picard_config(section: Section) -> PicardConfig:
    return PicardConfig(
        t0=section.get_float("t0", 0.25),
        n_iters=section.get_int("n_iters", 6),
    )


def require_section(sections: dict, name: str) -> Section:
    if name not in sections:
        raise ConfigError(f"missing required section [{name}]")
    return sections[name]
