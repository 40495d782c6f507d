"""Named initial vorticity profiles shared by the plane and exterior solvers.

The default is a smooth compactly supported bump centered away from the
origin, q0(x) = A*cos^2(pi*|x - c|/(2*rho)) for |x - c| < rho.  A radial
ring profile is available for equilibrium tests, since any purely radial
vorticity is transported along circles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OffsetBump:
    """cos^2 bump of radius `radius` centered at `center`."""

    center: tuple = (1.0, 0.0)
    radius: float = 0.4
    amplitude: float = 1.0

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        d = np.sqrt(
            (pts[..., 0] - self.center[0]) ** 2 + (pts[..., 1] - self.center[1]) ** 2
        )
        out = np.zeros_like(d)
        inside = d < self.radius
        out[inside] = self.amplitude * np.cos(
            np.pi * d[inside] / (2.0 * self.radius)
        ) ** 2
        return out

    def support_bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cx + r, cy - r, cy + r)

    def support_radius(self) -> float:
        return float(np.hypot(*self.center) + self.radius)


@dataclass(frozen=True)
class RadialRing:
    """cos^2 annulus in radius, centered at radius r0 with full width `width`."""

    r0: float = 1.0
    width: float = 0.5
    amplitude: float = 1.0

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        r = np.sqrt(pts[..., 0] ** 2 + pts[..., 1] ** 2)
        out = np.zeros_like(r)
        inside = np.abs(r - self.r0) < 0.5 * self.width
        out[inside] = self.amplitude * np.cos(
            np.pi * (r[inside] - self.r0) / self.width
        ) ** 2
        return out

    def support_bbox(self):
        r = self.r0 + 0.5 * self.width
        return (-r, r, -r, r)

    def support_radius(self) -> float:
        return self.r0 + 0.5 * self.width


@dataclass(frozen=True)
class ZeroField:
    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        return np.zeros(pts.shape[:-1])

    def support_bbox(self):
        return (0.0, 0.0, 0.0, 0.0)

    def support_radius(self) -> float:
        return 0.0


def make_profile(name: str, **kw):
    name = name.lower()
    if name == "bump":
        return OffsetBump(
            center=tuple(kw.get("center", (1.0, 0.0))),
            radius=float(kw.get("radius", 0.4)),
            amplitude=float(kw.get("amplitude", 1.0)),
        )
    if name == "ring":
        return RadialRing(
            r0=float(kw.get("r0", 1.0)),
            width=float(kw.get("width", 0.5)),
            amplitude=float(kw.get("amplitude", 1.0)),
        )
    if name in ("zero", "none"):
        return ZeroField()
    raise ValueError(f"unknown initial profile {name!r}")


def profile_from_config(flat: dict):
    """Rebuild a profile from the flat echo written by profile_config."""
    name = str(flat.get("q0", "zero"))
    if name == "bump":
        center = tuple(float(v) for v in str(flat["q0_center"]).split())
        return OffsetBump(center=center, radius=float(flat["q0_radius"]),
                          amplitude=float(flat["q0_amplitude"]))
    if name == "ring":
        return RadialRing(r0=float(flat["q0_r0"]), width=float(flat["q0_width"]),
                          amplitude=float(flat["q0_amplitude"]))
    if name in ("zero", "none"):
        return ZeroField()
    raise ValueError(f"unknown initial profile {name!r}")


def profile_config(profile) -> dict:
    """Flat key/value echo of a profile, for run records and config files."""
    if isinstance(profile, OffsetBump):
        return {
            "q0": "bump",
            "q0_center": f"{profile.center[0]} {profile.center[1]}",
            "q0_radius": profile.radius,
            "q0_amplitude": profile.amplitude,
        }
    if isinstance(profile, RadialRing):
        return {
            "q0": "ring",
            "q0_r0": profile.r0,
            "q0_width": profile.width,
            "q0_amplitude": profile.amplitude,
        }
    if isinstance(profile, ZeroField):
        return {"q0": "zero"}
    # ad-hoc profiles (tests, experiments) echo their type name only
    return {"q0": f"custom:{type(profile).__name__}"}
