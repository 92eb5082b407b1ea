"""coltherm: Gaussian collision-model thermometry.

Simulates a bosonic system that alternately thermalizes with a bath and
collides with a stream of identically prepared Gaussian ancillae, and
computes the temperature quantum Fisher information of the joint ancilla
state.  The Williamson-accelerated QFI route makes chains of hundreds of
ancillae routine; `coltherm bench` quantifies the speedup over the dense
formulas.
"""

__version__ = "0.1.0"

from .analysis import (
    NStarResult,
    QfiCurve,
    RateEstimate,
    SigmoidFit,
    estimate_rate,
    fit_alpha,
    n_star,
    qfi_curve,
    sigmoid_density,
)
from .collision import (
    ChainConfig,
    InteractionParams,
    StateWithGradient,
    SteadyStateResult,
    ThermalChannel,
    ThermalChannelParams,
    UnstableSteadyStateError,
    apply_thermal_channel,
    build_interaction_symplectic,
    build_thermal_channel,
    chain_prefix_states,
    collision_step,
    simulate_chain,
    steady_state,
)
from .config import ConfigError, RunConfig, parse_config
from .gaussian import (
    EPS_PHYS,
    BoseOccupation,
    CovarianceMatrix,
    InvalidStateError,
    ValidityReport,
    apply_symplectic,
    direct_sum,
    partial_trace,
    squeezed_vacuum,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_residual,
    thermal_state,
    vacuum_state,
    validate,
)
from .qfi import (
    KAPPA,
    QFI_METHODS,
    WilliamsonDecomposition,
    compute_qfi,
    d_superoperator,
    qfi_dense_inverse,
    qfi_dense_solve,
    qfi_fast,
    qfi_from_decomposition,
    transform_gradient,
    williamson,
)

__all__ = [name for name in dir() if not name.startswith("_")]
