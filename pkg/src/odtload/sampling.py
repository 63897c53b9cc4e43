"""Initial-state sampling for the guided thermal beam.

Each trajectory owns a counter-based Philox stream keyed by
(master_seed, trajectory_index), so samples are reproducible bit-for-bit
on any platform and independent of how trajectories are distributed over
workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import Configuration
from .constants import K_B


@dataclass(frozen=True)
class AtomState:
    t: float                 # s
    position: np.ndarray     # m
    velocity: np.ndarray     # m/s
    mJ: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.position)) or not np.all(np.isfinite(self.velocity)):
            raise ValueError("non-finite atom state")

    def with_mJ(self, mJ: int) -> "AtomState":
        return replace(self, mJ=mJ)


@dataclass(frozen=True)
class RngStream:
    """Deterministic per-trajectory random stream."""

    master_seed: int
    stream_index: int

    def generator(self) -> np.random.Generator:
        bits = np.random.Philox(key=np.array(
            [self.master_seed & 0xFFFFFFFFFFFFFFFF,
             self.stream_index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
        return np.random.Generator(bits)


def make_rng_stream(master_seed: int, trajectory_index: int) -> RngStream:
    """Stream for one trajectory; distinct indices do not overlap."""
    return RngStream(master_seed=master_seed, stream_index=trajectory_index)


def sample_initial_state(rng: RngStream | np.random.Generator,
                         config: Configuration,
                         count_resamples: list | None = None) -> AtomState:
    """Draw one initial atom state at the start plane.

    Radial distance follows n(rho) = rho/beta^2 * exp(-rho/beta) (a shape-2
    Gamma, drawn as beta times the sum of two unit exponentials), the angle
    is uniform, transverse velocities are thermal at T_r, and v_z is thermal
    at T_z around v_b, resampled until positive. The atom starts in the
    guided stretched state mJ = +mJ_max.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    beam = config.beam
    mass = config.species.mass

    rho = config.beta * (gen.standard_exponential() + gen.standard_exponential())
    theta = gen.uniform(0.0, 2.0 * math.pi)
    position = np.array([rho * math.cos(theta), rho * math.sin(theta),
                         beam.z_start])

    sigma_r = math.sqrt(K_B * beam.T_r / mass)
    sigma_z = math.sqrt(K_B * beam.T_z / mass)
    vx = sigma_r * gen.standard_normal()
    vy = sigma_r * gen.standard_normal()
    vz = beam.v_b + sigma_z * gen.standard_normal()
    while vz <= 0.0:
        if count_resamples is not None:
            count_resamples.append(1)
        vz = beam.v_b + sigma_z * gen.standard_normal()

    return AtomState(t=0.0, position=position,
                     velocity=np.array([vx, vy, vz]),
                     mJ=config.species.mJ_max)


def sample_batch(config: Configuration, n: int, master_seed: int) -> tuple[np.ndarray, int]:
    """Initial states for trajectories 0..n-1 as an (n, 6) array of
    (x, y, z, vx, vy, vz); also returns the number of v_z resamples."""
    out = np.empty((n, 6))
    resamples = []
    for i in range(n):
        state = sample_initial_state(make_rng_stream(master_seed, i), config,
                                     count_resamples=resamples)
        out[i, :3] = state.position
        out[i, 3:] = state.velocity
    return out, len(resamples)
