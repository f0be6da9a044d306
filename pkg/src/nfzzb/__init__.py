"""Ziv-Zakai and Cramer-Rao bounds for near-field localization with a
uniform linear array, plus a seeded Monte Carlo maximum-likelihood
simulator and an SNR-sweep runner with CSV/JSON/PNG output."""

from .asymptotics import (
    FresnelPair,
    fresnel_integrals,
    gamma_coefficient,
    highsnr_integral_closed,
    lobe_parameter,
    pmin_small_h,
    rho_fresnel,
    rho_taylor,
)
from .crb import (
    ConvergenceError,
    FisherMatrix,
    PriorBox,
    crb_aoa_local,
    crb_distance_local,
    crb_global,
    crb_global_distance_closed,
    numerical_fim,
)
from .mle import (
    MonteCarloConfig,
    MonteCarloResult,
    Observation,
    ml_grid_search,
    monte_carlo_mse,
    simulate_observation,
)
from .model import (
    SPEED_OF_LIGHT,
    ArrayConfig,
    Displacement,
    PolarPosition,
    SnrSpec,
    correlation,
    correlation_map,
    element_positions,
    exact_distance,
    fresnel_distance,
    pmin,
    q_function,
    steering_vector,
)
from .runner import (
    BoundCurve,
    ConfigError,
    ScenarioConfig,
    detect_threshold,
    emit,
    load_config,
    run_sweep,
)
from .zzb import (
    DistanceKnownAoaZzbEngine,
    JointZzbEngine,
    QuadratureSpec,
    ZzbResult,
    zzb_aoa_joint,
    zzb_distance_joint,
    zzb_distance_known_aoa,
    zzb_highsnr_asymptote,
    zzb_prior_limit,
)

__version__ = "1.0.0"

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayConfig",
    "BoundCurve",
    "ConfigError",
    "ConvergenceError",
    "Displacement",
    "DistanceKnownAoaZzbEngine",
    "FisherMatrix",
    "FresnelPair",
    "JointZzbEngine",
    "MonteCarloConfig",
    "MonteCarloResult",
    "Observation",
    "PolarPosition",
    "PriorBox",
    "QuadratureSpec",
    "ScenarioConfig",
    "SnrSpec",
    "ZzbResult",
    "correlation",
    "correlation_map",
    "crb_aoa_local",
    "crb_distance_local",
    "crb_global",
    "crb_global_distance_closed",
    "detect_threshold",
    "element_positions",
    "emit",
    "exact_distance",
    "fresnel_distance",
    "fresnel_integrals",
    "gamma_coefficient",
    "highsnr_integral_closed",
    "load_config",
    "lobe_parameter",
    "ml_grid_search",
    "monte_carlo_mse",
    "numerical_fim",
    "pmin",
    "pmin_small_h",
    "q_function",
    "rho_fresnel",
    "rho_taylor",
    "run_sweep",
    "simulate_observation",
    "steering_vector",
    "zzb_aoa_joint",
    "zzb_distance_joint",
    "zzb_distance_known_aoa",
    "zzb_highsnr_asymptote",
    "zzb_prior_limit",
]
