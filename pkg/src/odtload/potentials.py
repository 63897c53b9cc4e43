"""Combined trap potential, barrier-matching current and trap
characterization for the high-field-seeking state.

The total potential for Zeeman sublevel mJ is

    U(r) = mu_B * gJ * mJ * |B_guide + B_loop|(r) + U_d(r),

with the attractive dipole potential U_d (negative at the focus). Energies
are referenced to zero at infinity along the guide axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import _kernels
from .config import Configuration, required_loop_current  # noqa: F401  (re-export)
from .constants import MU_0, MU_B
from .fields import FieldDomainError


@dataclass(frozen=True)
class PotentialSample:
    U: float                    # J
    F: np.ndarray               # N
    magnetic: float             # J, Zeeman part
    optical: float              # J, dipole part


@dataclass(frozen=True)
class PlaneBasin:
    """Sublevel basin of the origin on one principal half-plane."""

    axis: int                   # 0: x-z plane, 1: y-z plane
    rho: np.ndarray             # radial grid nodes, m
    z: np.ndarray               # axial grid nodes, m
    mask: np.ndarray            # bool, True inside the basin
    U: np.ndarray               # potential on the grid, J


@dataclass(frozen=True)
class TrapCharacterization:
    """Escape threshold and basin of the mJ=-3 potential well at the origin."""

    U_esc: float                        # J
    well_minimum: float                 # J
    untrappable: bool
    saddle_location: np.ndarray | None  # m, in-plane point, None if capped at 0
    basins: tuple[PlaneBasin, PlaneBasin] | None
    resolution_meta: dict = field(default_factory=dict)

    def contains(self, r: np.ndarray) -> bool:
        """Nearest-cell basin lookup on the principal plane closest to r."""
        if self.basins is None:
            return False
        x, y, z = float(r[0]), float(r[1]), float(r[2])
        basin = self.basins[0] if abs(x) >= abs(y) else self.basins[1]
        rho = math.hypot(x, y)
        i = int(np.clip(np.searchsorted(basin.rho, rho), 0, len(basin.rho) - 1))
        if i > 0 and abs(basin.rho[i - 1] - rho) < abs(basin.rho[i] - rho):
            i -= 1
        if rho > basin.rho[-1]:
            return False
        j = int(np.clip(np.searchsorted(basin.z, z), 0, len(basin.z) - 1))
        if j > 0 and abs(basin.z[j - 1] - z) < abs(basin.z[j] - z):
            j -= 1
        if z < basin.z[0] or z > basin.z[-1]:
            return False
        return bool(basin.mask[i, j])


def _kernel_args(config: Configuration, mJ: int):
    mu = MU_B * config.species.gJ * mJ
    pref = MU_0 * config.loop.current / (2.0 * math.pi)
    return (mu, config.guide.gradient, config.loop.radius, pref,
            -config.odt.depth, config.odt.waist, config.odt.rayleigh)


def potential(r: np.ndarray, mJ: int, config: Configuration) -> PotentialSample:
    """Total potential and force F = -grad U for sublevel mJ at r."""
    if not -config.species.mJ_max <= mJ <= config.species.mJ_max:
        raise ValueError(f"mJ = {mJ} outside +-{config.species.mJ_max}")
    x, y, z = float(r[0]), float(r[1]), float(r[2])
    rho = math.hypot(x, y)
    if math.hypot(rho - config.loop.radius, z) < _kernels.WIRE_EXCLUSION:
        raise FieldDomainError(f"point {tuple(r)} too close to the loop wire")
    mu, bprime, R, pref, u0, w0, zR = _kernel_args(config, mJ)
    u, fx, fy, fz = _kernels.potential_force(x, y, z, mu, bprime, R, pref,
                                             u0, w0, zR)
    ud, _, _, _ = _kernels.odt_potential_grad(x, y, z, u0, w0, zR)
    return PotentialSample(U=u, F=np.array([fx, fy, fz]),
                           magnetic=u - ud, optical=ud)


def _clustered_axis(extent: float, h0: float, growth: float) -> np.ndarray:
    """Grid nodes from 0 to extent with geometric spacing, finest first."""
    pts = [0.0]
    h = h0
    while pts[-1] < extent:
        pts.append(pts[-1] + h)
        h *= growth
    pts[-1] = extent
    return np.array(pts)


def _plane_grids(config: Configuration, resolution: int):
    R = config.loop.radius
    w0 = config.odt.waist
    zext = 4.0 * max(R, config.odt.rayleigh)
    h0 = w0 / (10.0 * resolution)
    growth = 1.05 ** (1.0 / resolution)
    rho = _clustered_axis(4.0 * R, h0, growth)
    zpos = _clustered_axis(zext, h0, growth)
    z = np.concatenate([-zpos[::-1], zpos[1:]])
    return rho, z


def _origin_component(mask_region: np.ndarray) -> np.ndarray:
    labels, _ = ndimage.label(mask_region)
    # origin is node (0, j0) with j0 the z = 0 index
    j0 = mask_region.shape[1] // 2
    lab0 = labels[0, j0]
    if lab0 == 0:
        return np.zeros_like(mask_region)
    return labels == lab0


def _connects(mask_region: np.ndarray, sink: np.ndarray) -> bool:
    """Escape test: does the origin's component of the sublevel region reach
    the radial domain boundary or merge with a sink region?

    Sinks are cells deeper than the origin well itself; they only exist
    near the loop conductor, where the high-field-seeking potential drops
    without bound. An atom whose energy lets it cross into that region has
    left the trap well even though it never reaches the domain edge.
    """
    comp = _origin_component(mask_region)
    if not comp.any():
        return False
    if comp[-1, :].any():
        return True
    return bool((comp & sink).any())


def _characterize_once(config: Configuration, resolution: int):
    mu, bprime, R, pref, u0, w0, zR = _kernel_args(config, -config.species.mJ_max)
    rho, z = _plane_grids(config, resolution)
    planes = []
    for axis in (0, 1):
        U = _kernels.potential_on_grid(rho, z, axis, mu, bprime, R, pref,
                                       u0, w0, zR)
        planes.append(U)

    j0 = len(z) // 2
    assert abs(z[j0]) < 1e-15
    well_min = min(planes[0][0, j0], planes[1][0, j0])

    depth = config.odt.depth
    tol = 1e-3 * depth
    if tol <= 0.0:
        # ODT-free characterization (diagnostics only): scale off the well
        tol = 1e-3 * max(abs(well_min), 1e-30)
    u_escs = []
    sinks = [U < well_min - tol for U in planes]
    for U, sink in zip(planes, sinks):
        lo, hi = well_min, 0.0
        if not _connects(U < hi, sink):
            # bounded below the reference level everywhere: escape only at
            # the asymptotic zero along the axis
            u_escs.append(0.0)
            continue
        # bisect the level at which the origin basin first escapes
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _connects(U < mid, sink):
                hi = mid
            else:
                lo = mid
        u_escs.append(lo)
    u_esc = min(u_escs)
    return u_esc, well_min, rho, z, planes, sinks, tol


def characterize_trap(config: Configuration, resolution: int = 1,
                      max_refinements: int = 2) -> TrapCharacterization:
    """Escape threshold of the mJ=-3 well by bisection plus flood fill.

    The threshold is the lowest potential level at which the origin's
    sublevel region, on either principal half-plane, connects to the radial
    domain boundary (rho = 4R); it is capped at 0, the potential at
    infinity along the axis. Grids are geometrically clustered near the
    axis (finest cell <= w0/10) and refined until the threshold moves by
    less than 1%.
    """
    res = resolution
    u_esc, well_min, rho, z, planes, sinks, tol = _characterize_once(config, res)
    refinements = 0
    while refinements < max_refinements:
        res2 = res * 2
        u2, w2, rho2, z2, planes2, sinks2, tol2 = _characterize_once(config, res2)
        denom = max(abs(u_esc), 1e-3 * config.odt.depth)
        converged = abs(u2 - u_esc) / denom < 0.01
        u_esc, well_min, rho, z, planes, sinks, tol = (
            u2, w2, rho2, z2, planes2, sinks2, tol2)
        res = res2
        refinements += 1
        if converged:
            break

    meta = {"resolution": res, "finest_cell": config.odt.waist / (10.0 * res),
            "grid_shape": planes[0].shape, "level_tolerance": tol}

    if well_min >= u_esc - tol:
        return TrapCharacterization(U_esc=u_esc, well_minimum=well_min,
                                    untrappable=True, saddle_location=None,
                                    basins=None, resolution_meta=meta)

    basins = []
    saddle = None
    saddle_u = math.inf
    for axis, U in enumerate(planes):
        inside = _origin_component(U < u_esc)
        basins.append(PlaneBasin(axis=axis, rho=rho, z=z, mask=inside, U=U))
        # saddle estimate: cell on the basin frontier through which the
        # region escapes once the level is raised past u_esc
        grown = _origin_component(U < u_esc + 2.0 * tol)
        frontier = ndimage.binary_dilation(inside) & grown & ~inside
        if frontier.any():
            cand = np.where(frontier, U, np.inf)
            i, j = np.unravel_index(np.argmin(cand), cand.shape)
            if cand[i, j] < saddle_u:
                saddle_u = cand[i, j]
                point = [0.0, 0.0, z[j]]
                point[axis] = rho[i]
                saddle = np.array(point)

    return TrapCharacterization(U_esc=u_esc, well_minimum=well_min,
                                untrappable=False, saddle_location=saddle,
                                basins=(basins[0], basins[1]),
                                resolution_meta=meta)


def potential_map(plane: str, extent: tuple[float, float],
                  resolution: tuple[int, int], mJ: int,
                  config: Configuration):
    """Potential on a uniform 2D grid in a principal plane.

    plane is one of 'x-z', 'y-z', 'x-y'; extent gives the half-widths of
    the two plane axes in metres. Returns (axis1, axis2, U) with U in
    row-major (axis1, axis2) order.
    """
    n1, n2 = resolution
    if n1 < 2 or n2 < 2:
        raise ValueError("resolution must be at least 2 points per axis")
    e1, e2 = extent
    if e1 <= 0 or e2 <= 0:
        raise ValueError("extent must be positive")
    a1 = np.linspace(-e1, e1, n1)
    a2 = np.linspace(-e2, e2, n2)
    mu, bprime, R, pref, u0, w0, zR = _kernel_args(config, mJ)
    if plane in ("x-z", "y-z"):
        axis = 0 if plane == "x-z" else 1
        U = _kernels.potential_on_grid(a1, a2, axis, mu, bprime, R, pref,
                                       u0, w0, zR)
    elif plane == "x-y":
        U = np.empty((n1, n2))
        for i, x in enumerate(a1):
            for j, y in enumerate(a2):
                U[i, j], _, _, _ = _kernels.potential_force(
                    x, y, 0.0, mu, bprime, R, pref, u0, w0, zR)
    else:
        raise ValueError(f"unknown plane {plane!r} (expected x-z, y-z or x-y)")
    return a1, a2, U
