"""Validated configuration with unit-aware parsing.

Config files are flat ``key = value`` text, one setting per line, ``#``
comments allowed. Values carry an optional unit suffix (``300 W``,
``30 um``, ``350 G/cm``); bare numbers are interpreted as base SI.
Unknown keys are an error so typos cannot pass silently.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping

from .constants import CHROMIUM_52, H_PLANCK, K_B, MU_0, MU_B, Species


class ConfigError(ValueError):
    """Invalid, inconsistent or missing configuration entry."""


# Unit factors by dimension. Temperatures double as energies for the trap
# depth (converted via k_B at parse time).
_UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6},
    "gradient": {"T/m": 1.0, "G/cm": 1e-2},
    "power": {"W": 1.0, "mW": 1e-3, "kW": 1e3},
    "current": {"A": 1.0, "mA": 1e-3},
    "velocity": {"m/s": 1.0, "mm/s": 1e-3},
    "flux": {"/s": 1.0, "1/s": 1.0, "atoms/s": 1.0},
    "energy": {"J": 1.0, "K": K_B, "mK": K_B * 1e-3, "uK": K_B * 1e-6, "µK": K_B * 1e-6},
}

# key -> (dimension, required)
_SCHEMA = {
    "guide.gradient": ("gradient", False),
    "guide.bar_current": ("current", False),
    "guide.bar_spacing": ("length", False),
    "odt.power": ("power", True),
    "odt.waist": ("length", True),
    "odt.wavelength": ("length", True),
    "odt.depth": ("energy", True),
    "loop.radius": ("length", True),
    "loop.current": ("current", False),
    "beam.v_b": ("velocity", True),
    "beam.T_r": ("temperature", True),
    "beam.T_z": ("temperature", True),
    "beam.flux": ("flux", False),
    "beam.z_start": ("length", False),
}

_KEY_NAMES = {
    "odt.waist": "waist",
    "odt.power": "power",
    "odt.wavelength": "wavelength",
    "odt.depth": "depth",
    "loop.radius": "radius",
}


def parse_quantity(value, dimension: str, key: str) -> float:
    """Parse ``value`` (number or 'number unit' string) into base SI."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    parts = text.split(None, 1)
    try:
        number = float(parts[0])
    except (ValueError, IndexError):
        raise ConfigError(f"{key}: cannot parse value {text!r}") from None
    if len(parts) == 1:
        return number
    unit = parts[1].strip()
    table = _UNITS[dimension]
    if unit not in table:
        raise ConfigError(
            f"{key}: unknown unit {unit!r} (expected one of {sorted(table)})"
        )
    return number * table[unit]


def kappa_from_depth(depth: float, P0: float, w0: float) -> float:
    """ODT coupling constant from trap depth: kappa = -depth*w0^2/(P0*h).

    The sign is negative so that the on-axis focal potential equals -depth
    (attractive trap).
    """
    if depth <= 0:
        raise ConfigError("depth must be positive")
    if P0 <= 0:
        raise ConfigError("power must be positive")
    if w0 <= 0:
        raise ConfigError("waist must be positive")
    return -depth * w0 ** 2 / (P0 * H_PLANCK)


@dataclass(frozen=True)
class GuideConfig:
    gradient: float                 # |grad|B|| of the 2D quadrupole, T/m
    bar_current: float | None = None
    bar_spacing: float | None = None


@dataclass(frozen=True)
class ODTConfig:
    power: float       # W
    waist: float       # m
    wavelength: float  # m
    depth: float       # J, |U_d(0)|

    @property
    def rayleigh(self) -> float:
        return math.pi * self.waist ** 2 / self.wavelength

    @property
    def kappa(self) -> float:
        return kappa_from_depth(self.depth, self.power, self.waist)


@dataclass(frozen=True)
class LoopConfig:
    radius: float          # m
    current: float         # A


@dataclass(frozen=True)
class BeamConfig:
    v_b: float             # m/s
    T_r: float             # K
    T_z: float             # K
    flux: float | None = None   # atoms/s, optional (rate reporting only)
    z_start: float = -0.05      # m


@dataclass(frozen=True)
class Configuration:
    """Fully resolved, immutable simulation configuration."""

    guide: GuideConfig
    odt: ODTConfig
    loop: LoopConfig
    beam: BeamConfig
    species: Species = CHROMIUM_52

    @property
    def mu_max(self) -> float:
        """Stretched-state magnetic moment mu_B*gJ*mJ_max, J/T."""
        return MU_B * self.species.gJ * self.species.mJ_max

    @property
    def beta(self) -> float:
        """Radial length scale of the thermal beam profile, m."""
        return K_B * self.beam.T_r / (self.mu_max * self.guide.gradient)

    def to_dict(self) -> dict:
        d = {
            "guide.gradient": self.guide.gradient,
            "odt.power": self.odt.power,
            "odt.waist": self.odt.waist,
            "odt.wavelength": self.odt.wavelength,
            "odt.depth": self.odt.depth,
            "loop.radius": self.loop.radius,
            "loop.current": self.loop.current,
            "beam.v_b": self.beam.v_b,
            "beam.T_r": self.beam.T_r,
            "beam.T_z": self.beam.T_z,
            "beam.z_start": self.beam.z_start,
        }
        if self.beam.flux is not None:
            d["beam.flux"] = self.beam.flux
        return d

    def fingerprint(self) -> str:
        canon = ";".join(f"{k}={v!r}" for k, v in sorted(self.to_dict().items()))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def required_loop_current(v_b: float, config=None, *, mass=None, depth=None,
                          radius=None, mu_max=None) -> float:
    """Loop current that makes the mJ=+3 barrier at the origin equal the
    beam's mean axial kinetic energy m*v_b^2/2.

    Closed form: I_c = (m*v_b^2/2 + depth) * 2R / (mu_max * mu_0).
    """
    if v_b <= 0:
        raise ConfigError("beam.v_b must be positive")
    if config is not None:
        mass = config.species.mass
        depth = config.odt.depth
        radius = config.loop.radius
        mu_max = config.mu_max
    I_c = (0.5 * mass * v_b ** 2 + depth) * 2.0 * radius / (mu_max * MU_0)
    if I_c <= 0:
        raise ConfigError("resolved loop current is not positive")
    return I_c


def _check_start_plane(odt, loop_current, loop_radius, z_start, T_r, mu_max):
    """The beam must start where the guide alone shapes the initial energy
    distribution: the loop barrier must be far below k_B*T_r and the ODT
    axial tail far below the trap depth."""
    B_loop = MU_0 * loop_current * loop_radius ** 2 / (
        2.0 * (loop_radius ** 2 + z_start ** 2) ** 1.5)
    u_loop = mu_max * B_loop
    if u_loop > 1e-3 * K_B * T_r:
        raise ConfigError(
            f"beam.z_start = {z_start} m: loop barrier tail is "
            f"{u_loop / (K_B * T_r):.2e} of k_B*T_r at the start plane")
    odt_tail = 1.0 / (1.0 + (z_start / odt.rayleigh) ** 2)
    if odt_tail > 5e-3:
        raise ConfigError(
            f"beam.z_start = {z_start} m: ODT tail is {odt_tail:.2e} of the "
            "trap depth at the start plane (need < 5e-3)")


def build_configuration(raw: Mapping[str, object],
                        species: Species = CHROMIUM_52) -> Configuration:
    """Build and validate a Configuration from raw key/value settings.

    Raises ConfigError naming the offending key for unknown keys, missing
    required keys, non-positive quantities and inconsistent combinations.
    """
    for key in raw:
        if key not in _SCHEMA:
            raise ConfigError(f"unknown configuration key: {key}")

    values: dict[str, float] = {}
    for key, (dim, required) in _SCHEMA.items():
        if key in raw:
            values[key] = parse_quantity(raw[key], dim, key)
        elif required:
            raise ConfigError(f"missing required configuration key: {key}")

    def positive(key):
        name = _KEY_NAMES.get(key, key)
        if values[key] <= 0:
            raise ConfigError(f"{name} must be positive (key {key})")

    for key in ("odt.power", "odt.waist", "odt.wavelength", "odt.depth",
                "loop.radius", "beam.v_b", "beam.T_r", "beam.T_z"):
        positive(key)

    # Guide gradient: direct, or derived from bar current and spacing.
    has_bars = "guide.bar_current" in values or "guide.bar_spacing" in values
    if has_bars:
        if "guide.bar_current" not in values or "guide.bar_spacing" not in values:
            raise ConfigError(
                "guide.bar_current and guide.bar_spacing must be given together")
        I_a = values["guide.bar_current"]
        d = values["guide.bar_spacing"]
        if I_a <= 0 or d <= 0:
            raise ConfigError("guide bar current and spacing must be positive")
        derived = 4.0 * MU_0 * I_a / (math.pi * d ** 2)
        if "guide.gradient" in values:
            if not math.isclose(values["guide.gradient"], derived, rel_tol=1e-6):
                raise ConfigError(
                    "guide.gradient inconsistent with guide.bar_current/"
                    f"guide.bar_spacing (4*mu0*I_a/(pi*d^2) = {derived:.6g} T/m)")
        gradient = derived
        guide = GuideConfig(gradient=gradient, bar_current=I_a, bar_spacing=d)
    elif "guide.gradient" in values:
        if values["guide.gradient"] <= 0:
            raise ConfigError("guide.gradient must be positive")
        guide = GuideConfig(gradient=values["guide.gradient"])
    else:
        raise ConfigError("missing required configuration key: guide.gradient")

    odt = ODTConfig(power=values["odt.power"], waist=values["odt.waist"],
                    wavelength=values["odt.wavelength"], depth=values["odt.depth"])

    z_start = values.get("beam.z_start", -0.05)
    if z_start >= 0:
        raise ConfigError("beam.z_start must be negative (key beam.z_start)")
    beam = BeamConfig(v_b=values["beam.v_b"], T_r=values["beam.T_r"],
                      T_z=values["beam.T_z"], flux=values.get("beam.flux"),
                      z_start=z_start)

    radius = values["loop.radius"]
    mu_max = MU_B * species.gJ * species.mJ_max
    if "loop.current" in values:
        current = values["loop.current"]
        if current < 0:
            raise ConfigError("loop.current must be non-negative")
    else:
        current = required_loop_current(beam.v_b, mass=species.mass,
                                        depth=odt.depth, radius=radius,
                                        mu_max=mu_max)
    loop = LoopConfig(radius=radius, current=current)

    _check_start_plane(odt, loop.current, loop.radius, z_start, beam.T_r,
                       mu_max)

    return Configuration(guide=guide, odt=odt, loop=loop, beam=beam,
                         species=species)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` config text into a raw settings dict."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        raw[key] = value
    return raw


def load_config(path: str, overrides: Mapping[str, object] | None = None,
                species: Species = CHROMIUM_52) -> Configuration:
    """Load a config file and apply CLI-style overrides on top."""
    with open(path, encoding="utf-8") as fh:
        raw: dict[str, object] = dict(parse_config_text(fh.read()))
    if overrides:
        raw.update(overrides)
    return build_configuration(raw, species=species)


def serialize_config(config: Configuration) -> str:
    """Canonical SI-units text round-trippable through build_configuration."""
    lines = [f"{k} = {v!r}" for k, v in sorted(config.to_dict().items())]
    return "\n".join(lines) + "\n"
