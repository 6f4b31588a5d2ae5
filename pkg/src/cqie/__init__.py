"""Simulator and analysis toolkit for cooperative register-reset
protocols on spin networks."""

from .analysis import (FitResult, ScalingPoint, coupling_to_temperature,
                       fit_alpha, fit_effective_temperature,
                       fit_inverse_n_model, fit_n0_model,
                       locate_critical_coupling, predict_global_fidelity,
                       pseudo_likelihood_beta)
from .dynamics import (BathParameters, ShotSet, classical_sweep, equilibrate,
                       exact_thermal_oracle, pimc_sweep, random_initial_state,
                       run_protocol, target_all_zero)
from .measurement import (average_magnetization, global_fidelity,
                          per_qubit_zero_frequency, single_qubit_fidelity)
from .schedule import (EnergyScales, HamiltonianParams, PiecewiseLinear,
                       ProtocolSchedule, classical_flag,
                       default_energy_scales, instantaneous_params,
                       linear_energy_scales, make_original_protocol,
                       make_quench_protocol)
from .topology import (Topology, TopologyKind, average_connectivity,
                       build_individual, build_pegasus, build_random_regular,
                       build_square_lattice, sample_patch)

__version__ = "0.1.0"
