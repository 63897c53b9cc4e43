"""Trajectory integration, pump-event handling and capture classification.

An atom starts in the guided mJ=+3 state at the start plane and is
advanced with an adaptive Dormand-Prince 5(4) integrator until it either
loses its axial velocity or reaches the barrier top at z = 0, whichever
comes first. There it is pumped instantaneously to mJ=-3 (position and
velocity unchanged) and classified against the trap characterization.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import Configuration
from .constants import MU_B
from .potentials import TrapCharacterization, _kernel_args, potential
from .sampling import AtomState

RTOL = 1e-8
ATOL_POS = 1e-9      # m
ATOL_VEL = 1e-9      # m/s
VEL_EVENT_TOL = 1e-6   # m/s
POS_EVENT_TOL = 1e-9   # m
ENERGY_MARGIN_FRACTION = 1e-3   # of the ODT depth


class Trigger(enum.Enum):
    AXIAL_STOP = "AxialStop"
    BARRIER_TOP = "BarrierTop"


class OutcomeKind(enum.Enum):
    CAPTURED = "Captured"
    ENERGY_TOO_HIGH = "EnergyTooHigh"
    OUTSIDE_WELL = "OutsideWell"
    LOST_RADIALLY = "LostRadially"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class PumpEvent:
    state_at_event: AtomState
    trigger: Trigger
    E_before: float        # J, total energy in the mJ=+3 potential
    E_after: float         # J, total energy in the mJ=-3 potential
    field_norm_at_event: float   # T


@dataclass(frozen=True)
class IntegrationStats:
    steps: int
    max_energy_drift_rel: float
    t_final: float


@dataclass(frozen=True)
class TrajectoryOutcome:
    kind: OutcomeKind
    pump_event: PumpEvent | None
    stats: IntegrationStats


class NonFiniteTrajectoryError(RuntimeError):
    """Integration produced a non-finite state; indicates a field-domain bug."""


def _t_max(config: Configuration) -> float:
    return 5.0 * abs(config.beam.z_start) / config.beam.v_b


def total_energy(state: AtomState, config: Configuration) -> float:
    """Kinetic plus potential energy of the state in its own sublevel."""
    kinetic = 0.5 * config.species.mass * float(state.velocity @ state.velocity)
    return kinetic + potential(state.position, state.mJ, config).U


def integrate_until_pump_event(initial: AtomState, config: Configuration):
    """Integrate one mJ=+3 trajectory to its pump event.

    Returns (PumpEvent | None, TrajectoryOutcome | None, raw_code): the
    event when one fired, otherwise a terminal LostRadially/Timeout
    outcome.
    """
    if initial.mJ != config.species.mJ_max:
        raise ValueError("trajectory must start in the stretched mJ=+3 state")
    mu, bprime, R, pref, u0, w0, zR = _kernel_args(config, initial.mJ)
    y = np.empty(6)
    y[:3] = initial.position
    y[3:] = initial.velocity
    y_event = np.empty(6)
    stats = np.empty(3)
    code = _kernels.integrate_until_event(
        y, config.species.mass, mu, bprime, R, pref, u0, w0, zR,
        4.0 * R, _t_max(config), RTOL, ATOL_POS, ATOL_VEL, y_event, stats)
    istats = IntegrationStats(steps=int(stats[1]), max_energy_drift_rel=stats[2],
                              t_final=stats[0])
    if code == _kernels.CODE_NONFINITE:
        raise NonFiniteTrajectoryError(
            f"non-finite state near {y_event[:3].tolist()}")
    state = AtomState(t=initial.t + stats[0], position=y_event[:3].copy(),
                      velocity=y_event[3:].copy(), mJ=initial.mJ)
    if code in (_kernels.CODE_AXIAL_STOP, _kernels.CODE_BARRIER_TOP):
        trigger = (Trigger.AXIAL_STOP if code == _kernels.CODE_AXIAL_STOP
                   else Trigger.BARRIER_TOP)
        event = _make_pump_event(state, trigger, config)
        return event, None, istats
    kind = (OutcomeKind.LOST_RADIALLY if code == _kernels.CODE_LOST_RADIALLY
            else OutcomeKind.TIMEOUT)
    return None, TrajectoryOutcome(kind=kind, pump_event=None, stats=istats), istats


def _make_pump_event(state: AtomState, trigger: Trigger,
                     config: Configuration) -> PumpEvent:
    e_before = total_energy(state, config)
    norm = _field_norm(state.position, config)
    delta = 2.0 * MU_B * config.species.gJ * config.species.mJ_max * norm
    return PumpEvent(state_at_event=state, trigger=trigger,
                     E_before=e_before, E_after=e_before - delta,
                     field_norm_at_event=norm)


def _field_norm(position: np.ndarray, config: Configuration) -> float:
    mu, bprime, R, pref, u0, w0, zR = _kernel_args(config, 0)
    _, _, _, norm, _, _, _, _ = _kernels.total_field_grad(
        float(position[0]), float(position[1]), float(position[2]),
        bprime, R, pref)
    return norm


def apply_pump(event: PumpEvent) -> AtomState:
    """Instantaneous +mJ_max -> -mJ_max flip; position and velocity kept."""
    return event.state_at_event.with_mJ(-event.state_at_event.mJ)


def classify_capture(state: AtomState, trap: TrapCharacterization,
                     config: Configuration) -> OutcomeKind:
    """Two-condition capture test for a freshly pumped mJ=-3 atom.

    Captured iff the total energy lies below the escape threshold (with a
    small margin) and the pump position is inside the basin of the origin.
    """
    if state.mJ != -config.species.mJ_max:
        raise ValueError("capture classification expects the mJ=-3 state")
    margin = ENERGY_MARGIN_FRACTION * config.odt.depth
    energy = total_energy(state, config)
    if not energy < trap.U_esc - margin:
        return OutcomeKind.ENERGY_TOO_HIGH
    if not trap.contains(state.position):
        return OutcomeKind.OUTSIDE_WELL
    return OutcomeKind.CAPTURED


def run_trajectory(initial: AtomState, config: Configuration,
                   trap: TrapCharacterization) -> TrajectoryOutcome:
    """Full single-trajectory pipeline: integrate, pump, classify."""
    event, terminal, stats = integrate_until_pump_event(initial, config)
    if terminal is not None:
        return terminal
    pumped = apply_pump(event)
    kind = classify_capture(pumped, trap, config)
    return TrajectoryOutcome(kind=kind, pump_event=event, stats=stats)


def run_batch(y0s: np.ndarray, config: Configuration,
              trap: TrapCharacterization) -> np.ndarray:
    """Vectorized pipeline over an (n, 6) array of initial states.

    Returns an int array of OutcomeKind indices (order of declaration).
    Thread count is whatever numba is currently configured with; results
    are independent of it.
    """
    n = y0s.shape[0]
    mu, bprime, R, pref, u0, w0, zR = _kernel_args(config, config.species.mJ_max)
    codes = np.empty(n, dtype=np.int64)
    t_events = np.empty(n)
    y_events = np.empty((n, 6))
    steps = np.empty(n)
    drifts = np.empty(n)
    _kernels.integrate_batch(
        y0s, config.species.mass, mu, bprime, R, pref, u0, w0, zR,
        4.0 * R, _t_max(config), RTOL, ATOL_POS, ATOL_VEL,
        codes, t_events, y_events, steps, drifts)
    if np.any(codes == _kernels.CODE_NONFINITE):
        i = int(np.argmax(codes == _kernels.CODE_NONFINITE))
        raise NonFiniteTrajectoryError(
            f"non-finite state in trajectory {i} near {y_events[i, :3].tolist()}")

    kinds = list(OutcomeKind)
    out = np.empty(n, dtype=np.int64)
    mass = config.species.mass
    mu_m = -mu  # pumped sublevel
    margin = ENERGY_MARGIN_FRACTION * config.odt.depth
    for i in range(n):
        code = codes[i]
        if code == _kernels.CODE_LOST_RADIALLY:
            out[i] = kinds.index(OutcomeKind.LOST_RADIALLY)
            continue
        if code == _kernels.CODE_TIMEOUT:
            out[i] = kinds.index(OutcomeKind.TIMEOUT)
            continue
        x, y, z = y_events[i, 0], y_events[i, 1], y_events[i, 2]
        u_m, _, _, _ = _kernels.potential_force(x, y, z, mu_m, bprime, R,
                                                pref, u0, w0, zR)
        kinetic = 0.5 * mass * (y_events[i, 3] ** 2 + y_events[i, 4] ** 2
                                + y_events[i, 5] ** 2)
        energy = kinetic + u_m
        if not energy < trap.U_esc - margin:
            out[i] = kinds.index(OutcomeKind.ENERGY_TOO_HIGH)
        elif not trap.contains(y_events[i, :3]):
            out[i] = kinds.index(OutcomeKind.OUTSIDE_WELL)
        else:
            out[i] = kinds.index(OutcomeKind.CAPTURED)
    return out
