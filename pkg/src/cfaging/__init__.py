"""Uplink simulator and analytical engine for cell-free massive MIMO with
hardware impairments, spatial correlation, Rician fading, and channel aging."""

__version__ = "0.1.0"

from .channel import (ChannelBlock, NumericalError, age_channel, draw_initial,
                      draw_phase_rician, dump_block, load_block, psd_sqrt)
from .closed_form import (ClosedFormEngine, ClosedFormTerms, TraceTables,
                          closed_form_se, rayleigh_reference_sinr, optimal_weights,
                          precompute_tables)
from .config import (ConfigError, ExperimentSpec, HardwareConfig, ScenarioConfig,
                     dbm_to_mw, load_experiment_spec, load_scenario_config)
from .estimation import (EstimateMoments, est_second_moments, lmmse,
                         noise_shaping_diag, psi_mk, rx_pilot)
from .hardware import (AdcBank, HardwareProfile, ap_front_end, bits_to_rho,
                       dac_out, ue_rf_out)
from .harness import run, se_cdf, term_power_trace
from .monte_carlo import (TermPowers, local_combine, lsfd_combine, mc_se,
                          mc_sinr, mc_term_powers)
from .scenario import (DomainError, LinkStats, PilotPlan, Scenario, aoa_to_phase,
                       assign_pilots, build_scenario, link_stats,
                       local_scattering, pathloss_db, rician_factor,
                       steering_vector, temporal_rho, temporal_rho_fd)
