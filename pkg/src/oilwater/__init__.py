"""Simulation and verification engine for the abelian oil and water model."""
__version__ = "0.1.0"

from .graph import BallSpec, Graph, GraphError, annulus, ball, build, interior
from .particle_config import DensitySpec, ExtendedConfig, Odometer, ParticleConfig, sample_initial
from .instructions import FiringCounter, IllegalFiring, InstructionArray, fire
from .stabilizer import (StabilizationResult, Strategy, driven_stabilize, stabilize, verify_abelian,
                         verify_monotonicity)
from .green import (NoExitError, green_table, harmonic_solve, pair_bound, properties_green_scan,
                    verify_lemma_green)
from .ghost_engine import (MartingaleTracker, ghost_stabilize, collect_section4_counters,
                           replay_martingale, verify_lemma_brw)
from .harness import ExperimentConfig, fixation_sweep, run
