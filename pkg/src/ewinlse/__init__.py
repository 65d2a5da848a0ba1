"""Spectral solver and experiment harness for the nonlinear Schrodinger
equation with singular (Coulomb-type) potentials on periodic boxes.

The time stepper is a band-filtered first-order exponential integrator whose
convergence order under singular potentials the experiment presets measure
empirically; see the README for the CLI and the acceptance suite.
"""

from .spectral import (
    Grid,
    Multiplier,
    SpectralField,
    band_index,
    embed_coeffs,
    forward_transform,
    fractional_laplacian,
    free_flow,
    identity_multiplier,
    inverse_transform,
    low_pass_filter,
    make_grid,
    norm,
    phi1,
    phi1_multiplier,
    restrict_coeffs,
    smooth_cutoff,
)
from .potentials import (
    ConstantPotential,
    FourierDecay,
    InversePower,
    PotentialField,
    RandomFourier,
    SumPotential,
    apply_potential,
    realize,
    realize_fourier,
    realize_inverse_power,
)
from .integrator import (
    BlowupError,
    EwiParams,
    EwiStepper,
    Trajectory,
    evolve,
    ewi_step,
    power_nonlinearity,
)
from .groundstate import (
    GroundStateError,
    GroundStateProblem,
    reflection_asymmetry,
    solve_ground_state,
)
from .experiments import (
    AdmissibilityError,
    ConvergenceReport,
    DynamicsResult,
    DynamicsSetup,
    OrderFit,
    StrichartzConfig,
    StrichartzReport,
    SweepConfig,
    fit_order,
    gaussian_datum,
    run_convergence,
    run_dynamics_demo,
    strichartz_pair_for_integrability,
    strichartz_probe,
    validate_admissible,
)
from .config import ConfigError, RunConfig, load_config
from .presets import PRESETS, get_preset, preset_names

__version__ = "0.1.0"
