"""RIS-aided massive MIMO downlink simulator with low-resolution DACs.

Modules: geometry and Rician channel sampling (channels), MRT precoding and
the quantization noise model (precoding), closed-form and Monte Carlo rate
analysis (rates), particle swarm phase optimization (pso), and experiment
runners with a CLI (experiments, cli).
"""

__version__ = "0.1.0"

from .channels import (ChannelRealization, LinkGains, array_response, build_scene,
                       cascaded_channel, los_components, path_loss, sample_channel)
from .config import ScenarioConfig, dbm_to_watt, make_config, watt_to_dbm
from .kernels import BACKEND as KERNEL_BACKEND
from .precoding import (DacModel, Precoder, apply_aqnm, mrt_precoder,
                        quantization_noise_covariance, rho_of_bits)
from .pso import (PsoParams, PsoState, adjust_adaptive_parameter, fitness, init_swarm,
                  project_discrete, pso_optimize, pso_step, refine_discrete)
from .rates import (PhaseVector, RateBreakdown, RateContext, closed_form_rates, dac_term,
                    delta, empirical_moments, interference_term, los_inner_product,
                    moment_oracles, monte_carlo_rates, noise_term, psi, signal_term)
from .rng import substream

__all__ = [
    "__version__", "KERNEL_BACKEND",
    "ScenarioConfig", "make_config", "dbm_to_watt", "watt_to_dbm",
    "LinkGains", "ChannelRealization", "array_response", "path_loss", "build_scene",
    "los_components", "sample_channel", "cascaded_channel",
    "DacModel", "Precoder", "rho_of_bits", "mrt_precoder",
    "quantization_noise_covariance", "apply_aqnm",
    "PhaseVector", "RateBreakdown", "RateContext", "delta", "psi", "los_inner_product",
    "signal_term", "interference_term", "dac_term", "noise_term", "closed_form_rates",
    "monte_carlo_rates", "empirical_moments", "moment_oracles",
    "PsoParams", "PsoState", "fitness", "init_swarm", "pso_step",
    "adjust_adaptive_parameter", "pso_optimize", "project_discrete", "refine_discrete",
    "substream",
]
