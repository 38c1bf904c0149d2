"""Master-equation simulator for a driven spin coupled to a cavity mode and a phonon mode."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DimensionError,
    IntegrationError,
    InvalidTruncationError,
    SolverError,
    TrilindError,
    TruncationError,
    UndefinedCorrelationError,
)
from .fock import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    PureState,
    ReducedDensity,
    basis_state,
    build_space,
    expectation,
    identity,
    mode_annihilator,
    number_operator,
    partial_trace,
    spin_operator,
    truncation_tails,
)
from .model import (
    EffectiveParams,
    SystemParams,
    build_beamsplitter_hamiltonian,
    build_full_hamiltonian,
    build_squeeze_hamiltonian,
    rabi_splitting,
    resonance_detunings,
    squeeze_spectrum,
)
from .lindblad import (
    CollapseSet,
    EvolutionSpec,
    Liouvillian,
    Trajectory,
    build_liouvillian,
    dense_steady_state,
    evolve,
    steady_state,
)
from .observables import g2_tau, g2_zero, moments, number_distribution, steady_distribution, wigner
from .config import RunConfig, validate_config

__all__ = [name for name in dir() if not name.startswith("_")]
