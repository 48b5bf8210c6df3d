"""Simulation of coherent-control heat-bath algorithmic cooling on diagonal registers."""

from .errors import AlgoCoolError, ConvergenceError, DomainError, PreconditionError, ShapeError
from .states import (
    DiagonalHamiltonian,
    DiagonalState,
    QubitParam,
    Repr,
    binary_entropy,
    convert,
    energy,
    entropy,
    entropy_change,
    gibbs_state,
    marginal,
    mutual_information,
    product,
    qubit_state,
    relative_entropy,
    thermal_oscillator,
    thermal_qubit,
    trace_distance,
)
from .channels import (
    LocalMap,
    PermutationMatrix,
    StepKind,
    TransitionMatrix,
    beta_swap,
    cms_on,
    energy_ordered_compression,
    gamma1,
    gamma2,
    is_gibbs_stochastic,
    lift,
    pauli_x,
    pauli_x_on,
    reset_qubits,
    sort_compression,
    u_ppa3,
)
from .protocols import (
    CoolingTrace,
    Protocol,
    ProtocolPlan,
    asymptotic_state,
    improved_xhbac_run,
    round_steps,
    run,
    single_shot_compress,
    stationary_target,
)
from .thermo import (
    EfficiencyReport,
    cop,
    efficiency_report,
    landauer_ratio,
    landauer_ratio_comp,
    theorem2_bound,
    verify_lp_driven,
    verify_lp_thermalization,
)
from . import analytics

__version__ = "0.1.0"
