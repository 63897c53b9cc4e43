"""Magnetic field evaluation: 2D quadrupole guide, circular current loop,
and their superposition with grad|B|.

Positions are plain numpy arrays of shape (3,) in metres; fields are in
tesla. All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import (DEGENERATE_NORM, WIRE_EXCLUSION, ellipke_agm,
                       loop_field_cyl, total_field_grad)
from .config import Configuration, GuideConfig, LoopConfig
from .constants import MU_0


class FieldDomainError(ValueError):
    """Evaluation point outside the valid field domain (e.g. on the wire)."""


@dataclass(frozen=True)
class FieldSample:
    """Field vector, its magnitude and the gradient of the magnitude."""

    B: np.ndarray          # T
    norm: float            # T
    grad_norm: np.ndarray  # T/m
    degenerate: bool       # |B| below DEGENERATE_NORM; grad_norm is zero


def complete_elliptic_pair(m: float) -> tuple[float, float]:
    """Complete elliptic integrals (K(m), E(m)) for parameter m = k^2.

    Valid for 0 <= m < 1; m = 1 returns the exact limit (inf, 1.0).
    """
    if m == 1.0:
        return math.inf, 1.0
    if m < 0.0 or m > 1.0:
        raise FieldDomainError(f"elliptic parameter m = {m} outside [0, 1]")
    return ellipke_agm(m)


def guide_field(r: np.ndarray, guide: GuideConfig) -> np.ndarray:
    """2D quadrupole guide field b'*(-x, y, 0); independent of z."""
    x, y, _ = r
    b = guide.gradient
    return np.array([-b * x, b * y, 0.0])


def _check_wire(r, loop: LoopConfig):
    rho = math.hypot(r[0], r[1])
    if math.hypot(rho - loop.radius, r[2]) < WIRE_EXCLUSION:
        raise FieldDomainError(
            f"point {tuple(r)} is within {WIRE_EXCLUSION} m of the loop conductor")


def loop_field(r: np.ndarray, loop: LoopConfig) -> np.ndarray:
    """Field of a circular current filament of radius R in the z = 0 plane.

    Full off-axis elliptic-integral solution; reduces to the textbook
    on-axis expression mu0*I*R^2 / (2*(R^2+z^2)^(3/2)) on the axis.
    """
    _check_wire(r, loop)
    x, y, z = float(r[0]), float(r[1]), float(r[2])
    rho = math.hypot(x, y)
    pref = MU_0 * loop.current / (2.0 * math.pi)
    b_rho, b_z = loop_field_cyl(rho, z, loop.radius, pref)
    if rho > 0.0:
        return np.array([b_rho * x / rho, b_rho * y / rho, b_z])
    return np.array([0.0, 0.0, b_z])


def total_field(r: np.ndarray, guide: GuideConfig, loop: LoopConfig) -> FieldSample:
    """Superposition of guide and loop fields with |B| and grad|B|.

    grad|B| is assembled analytically from the field Jacobian as J^T B/|B|;
    inside the degenerate band |B| < 1e-10 T it is the zero vector and the
    sample is flagged.
    """
    _check_wire(r, loop)
    pref = MU_0 * loop.current / (2.0 * math.pi)
    bx, by, bz, norm, gx, gy, gz, degenerate = total_field_grad(
        float(r[0]), float(r[1]), float(r[2]),
        guide.gradient, loop.radius, pref)
    return FieldSample(B=np.array([bx, by, bz]), norm=norm,
                       grad_norm=np.array([gx, gy, gz]),
                       degenerate=bool(degenerate))


def field_norm(r: np.ndarray, config: Configuration) -> float:
    """|B_guide + B_loop| at r for a resolved configuration."""
    return total_field(r, config.guide, config.loop).norm


def biot_savart_loop(r: np.ndarray, loop: LoopConfig, segments: int = 512) -> np.ndarray:
    """Direct Biot-Savart quadrature of the filament (midpoint rule).

    Independent brute-force oracle for loop_field; O(segments) per call.
    """
    phi = (np.arange(segments) + 0.5) * (2.0 * math.pi / segments)
    dphi = 2.0 * math.pi / segments
    R = loop.radius
    src = np.stack([R * np.cos(phi), R * np.sin(phi), np.zeros_like(phi)], axis=1)
    dl = np.stack([-R * np.sin(phi), R * np.cos(phi), np.zeros_like(phi)], axis=1) * dphi
    sep = np.asarray(r, dtype=float)[None, :] - src
    dist = np.linalg.norm(sep, axis=1)
    integrand = np.cross(dl, sep) / dist[:, None] ** 3
    return MU_0 * loop.current / (4.0 * math.pi) * integrand.sum(axis=0)
