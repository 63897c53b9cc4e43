"""Monte Carlo simulator for continuous loading of an optical dipole trap
from a magnetically guided ultracold atom beam."""

from .config import (ConfigError, Configuration, build_configuration,
                     kappa_from_depth, load_config, required_loop_current)
from .constants import CHROMIUM_52, Species
from .dynamics import (OutcomeKind, PumpEvent, TrajectoryOutcome, Trigger,
                       apply_pump, classify_capture,
                       integrate_until_pump_event, run_trajectory,
                       total_energy)
from .fields import (FieldSample, complete_elliptic_pair, guide_field,
                     loop_field, total_field)
from .montecarlo import (EfficiencyEstimate, SweepRow, UntrappableConfigError,
                         loading_rate, run_experiment, sweep, wilson_interval)
from .potentials import (PotentialSample, TrapCharacterization,
                         characterize_trap, potential, potential_map)
from .sampling import (AtomState, RngStream, make_rng_stream,
                       sample_initial_state)

__version__ = "0.1.0"
