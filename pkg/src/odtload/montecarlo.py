"""Monte Carlo orchestration: efficiency estimates, sweeps and rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .config import Configuration, required_loop_current
from .dynamics import OutcomeKind, run_batch
from .potentials import TrapCharacterization, characterize_trap
from .sampling import sample_batch


class UntrappableConfigError(RuntimeError):
    """The mJ=-3 potential has no bound well for this configuration."""


@dataclass(frozen=True)
class EfficiencyEstimate:
    lam: float                      # captured fraction
    ci_low: float
    ci_high: float
    n_total: int
    n_captured: int
    outcome_histogram: dict[str, int]
    config_fingerprint: str
    master_seed: int
    U_esc: float
    resample_fraction: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam, "ci_low": self.ci_low, "ci_high": self.ci_high,
            "n_total": self.n_total, "n_captured": self.n_captured,
            "outcome_histogram": self.outcome_histogram,
            "config_fingerprint": self.config_fingerprint,
            "master_seed": self.master_seed, "U_esc": self.U_esc,
            "resample_fraction": self.resample_fraction,
        }


@dataclass(frozen=True)
class SweepRow:
    v_b: float
    T_r: float
    T_z: float
    I_c: float
    U_esc: float | None
    n_total: int
    n_captured: int | None
    lam: float | None
    ci_low: float | None
    ci_high: float | None
    seed: int


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= k <= n:
        raise ValueError("k must be in [0, n]")
    from scipy.stats import norm
    z = norm.ppf(0.5 + confidence / 2.0)
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2.0 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    # clamp against rounding so the interval always contains p
    return min(p, max(0.0, centre - half)), max(p, min(1.0, centre + half))


def loading_rate(lam: float, flux: float | None) -> float | None:
    """Loading rate lambda * Phi0 in atoms/s; None when the flux is unknown."""
    if flux is None:
        return None
    if flux <= 0:
        raise ValueError("flux must be positive")
    return lam * flux


def summarize_outcomes(outcome_codes: np.ndarray, config: Configuration,
                       master_seed: int, U_esc: float,
                       resample_fraction: float = 0.0) -> EfficiencyEstimate:
    kinds = list(OutcomeKind)
    histogram = {kind.value: int((outcome_codes == i).sum())
                 for i, kind in enumerate(kinds)}
    n = len(outcome_codes)
    captured = histogram[OutcomeKind.CAPTURED.value]
    low, high = wilson_interval(captured, n)
    return EfficiencyEstimate(
        lam=captured / n, ci_low=float(low), ci_high=float(high), n_total=n,
        n_captured=captured, outcome_histogram=histogram,
        config_fingerprint=config.fingerprint(), master_seed=master_seed,
        U_esc=float(U_esc), resample_fraction=resample_fraction)


def run_experiment(config: Configuration, n: int, master_seed: int,
                   workers: int | None = None,
                   trap: TrapCharacterization | None = None) -> EfficiencyEstimate:
    """Estimate the loading efficiency from n independent trajectories.

    The result is bit-identical for any worker count: every trajectory is
    seeded by (master_seed, index) and integrated independently.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if trap is None:
        trap = characterize_trap(config)
    if trap.untrappable:
        raise UntrappableConfigError(
            "mJ=-3 potential has no bound well at the origin "
            f"(well_minimum = {trap.well_minimum:.3e} J >= U_esc = {trap.U_esc:.3e} J)")
    y0s, resamples = sample_batch(config, n, master_seed)
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be at least 1")
        # outcomes are independent of the thread count, so requesting more
        # workers than the host offers is fine
        numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))
    outcome_codes = run_batch(y0s, config, trap)
    return summarize_outcomes(outcome_codes, config, master_seed, trap.U_esc,
                              resample_fraction=resamples / n)


def _with_beam(config: Configuration, v_b=None, T_r=None) -> Configuration:
    beam = config.beam
    if v_b is not None:
        beam = replace(beam, v_b=v_b)
    if T_r is not None:
        beam = replace(beam, T_r=T_r)
    loop = config.loop
    if v_b is not None:
        loop = replace(loop, current=required_loop_current(
            beam.v_b, mass=config.species.mass, depth=config.odt.depth,
            radius=config.loop.radius,
            mu_max=config.mu_max))
    return Configuration(guide=config.guide, odt=config.odt, loop=loop,
                         beam=beam, species=config.species)


def derive_point_seed(master_seed: int, point_index: int) -> int:
    """Decorrelated per-grid-point master seed (splitmix-style mix)."""
    x = (master_seed + (point_index + 1) * 0x9E3779B97F4A7C15) & (2 ** 64 - 1)
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & (2 ** 64 - 1)
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & (2 ** 64 - 1)
    return x ^ (x >> 31)


def sweep(config: Configuration, n: int, master_seed: int,
          v_b_values=None, T_r_values=None,
          workers: int | None = None) -> list[SweepRow]:
    """One run_experiment per grid point, seeds derived per point index.

    The grid is the cross product of the supplied v_b and T_r lists (each
    defaulting to the base configuration's single value). Untrappable
    points are reported as rows with lam = None instead of aborting.
    """
    v_bs = list(v_b_values) if v_b_values else [config.beam.v_b]
    T_rs = list(T_r_values) if T_r_values else [config.beam.T_r]
    if not v_bs or not T_rs:
        raise ValueError("sweep grid must be nonempty")
    rows = []
    index = 0
    for v_b in v_bs:
        for T_r in T_rs:
            point = _with_beam(config, v_b=v_b, T_r=T_r)
            seed = derive_point_seed(master_seed, index)
            try:
                est = run_experiment(point, n, seed, workers=workers)
                rows.append(SweepRow(
                    v_b=v_b, T_r=T_r, T_z=point.beam.T_z,
                    I_c=point.loop.current, U_esc=est.U_esc, n_total=n,
                    n_captured=est.n_captured, lam=est.lam,
                    ci_low=est.ci_low, ci_high=est.ci_high, seed=seed))
            except UntrappableConfigError:
                rows.append(SweepRow(
                    v_b=v_b, T_r=T_r, T_z=point.beam.T_z,
                    I_c=point.loop.current, U_esc=None, n_total=n,
                    n_captured=None, lam=None, ci_low=None, ci_high=None,
                    seed=seed))
            index += 1
    return rows


SWEEP_CSV_HEADER = ("v_b_mps,T_r_K,T_z_K,I_c_A,U_esc_J,N,captured,"
                    "lambda,ci_low,ci_high,seed")


def sweep_rows_to_csv(rows: list[SweepRow]) -> str:
    def fmt(v):
        if v is None:
            return ""
        return str(v) if isinstance(v, int) else repr(float(v))
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            fmt(r.v_b), fmt(r.T_r), fmt(r.T_z), fmt(r.I_c),
            fmt(r.U_esc), str(r.n_total), fmt(r.n_captured), fmt(r.lam),
            fmt(r.ci_low), fmt(r.ci_high), str(r.seed)]))
    return "\n".join(lines) + "\n"
