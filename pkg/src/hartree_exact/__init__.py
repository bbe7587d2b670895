"""Exact solutions, propagator and symmetries of a driven 1-D Hartree oscillator.

The package provides, for the quadratic-kernel Hartree equation with harmonic
confinement and dipole driving:

* the closed-form moment flow and its integration constants
  (:mod:`hartree_exact.hamilton_ehrenfest`),
* exact Hermite--Gaussian solution families, quasi-energies and geometric
  phases (:mod:`hartree_exact.exact_states`),
* the explicit oscillatory-kernel evolution operator and its inverse
  (:mod:`hartree_exact.propagator`),
* ladder/displacement symmetry operators of the nonlinear flow
  (:mod:`hartree_exact.symmetry`),
* an independent split-step reference integrator (:mod:`hartree_exact.oracle`),
* a command-line interface (``hartree-exact``).
"""

from . import _kernels
from .errors import (
    AliasError,
    CausticError,
    ClassError,
    ConfigError,
    GridError,
    HartreeError,
    ParseError,
    QuadratureError,
    RegimeError,
    ResonanceError,
    StepError,
    ToleranceError,
    ValidationError,
)
from .exact_states import (
    QuasiEnergy,
    aa_phase_numeric,
    action,
    coherent_constants,
    coherent_state_closed_form,
    fock_state,
    germ_solution,
    hermite_function,
    mean_energy,
    periodic_constants,
    quasi_energy,
    tcs_constants,
    trajectory_hamiltonian,
)
from .hamilton_ehrenfest import (
    Constants,
    HETrajectory,
    HigherMoments,
    TrajectoryState,
    closed_form,
    constants_from_moments,
    forced_amplitude,
    integrate,
    system_matrix,
    uncertainty,
)
from .model import Frequencies, ModelParams, derive_frequencies
from .oracle import OracleResult, SolverConfig, effective_potential
from .oracle import run as oracle_run
from .oracle import step as oracle_step
from .propagator import (
    KernelSpec,
    compose,
    compose_inverse,
    constants_of,
    evolve,
    green_kernel,
    inverse_evolve,
    kernel_matrix,
    kernel_spec,
)
from .symmetry import (
    DisplacementDirection,
    DisplacementOp,
    IdentityOp,
    LadderOp,
    ZeroGenerator,
    displacement_apply,
    displacement_build,
    family_generator,
    initial_means,
    ladder_build,
    symmetry_apply,
)
from .wavefunction import (
    Grid,
    MomentSet,
    WaveFunction,
    apply_momentum,
    default_grid,
    inner,
    load_wavefunction,
    moments,
    norm_sq,
    normalized,
    save_wavefunction,
)

__version__ = "0.1.0"

kernel_backend = _kernels.backend_name
