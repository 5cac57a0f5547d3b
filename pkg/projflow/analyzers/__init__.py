"""
Analyzers for plane and space flows.

This module provides:
- The fundamental ODE, its radical solutions and orbit integrals
- Classification predicates and normal-form searches
- Numeric cross-checks (RK4, area and volume conservation, orbit samples)
"""

from projflow.analyzers.classify import (
    Level1ZeroSecond,
    QuadPair,
    SolenoidalHit,
    classify_field,
    classify_flow,
    i0_symmetric,
    i0_symmetric_vf,
    i_symmetric,
    i_symmetric_vf,
    is_solenoidal,
    level1_zero_second,
    level_of,
    orthogonal_orbits,
    shared_orbits,
    solenoidal_search,
    symmetric_level0,
    transport_symmetry,
)
from projflow.analyzers.numeric import (
    ConservationCheck,
    Curve2,
    Surface3,
    area_check,
    orbit_samples,
    rk4_flow,
    volume_check,
    write_csv,
)
from projflow.analyzers.odeorbit import (
    FundamentalOde,
    OdeSolution,
    OrbitIntegral,
    UnivariateConstruction,
    flow_from_integral_univariate,
    fundamental_ode,
    orbit_integral,
    orbit_integral_from_q,
    solve_ode_radical,
    verify_implicit,
    verify_orbit,
    vf_from_ode_data,
)

__all__ = [
    # Fundamental ODE and orbits
    "FundamentalOde",
    "OdeSolution",
    "OrbitIntegral",
    "UnivariateConstruction",
    "fundamental_ode",
    "solve_ode_radical",
    "orbit_integral",
    "orbit_integral_from_q",
    "verify_orbit",
    "vf_from_ode_data",
    "verify_implicit",
    "flow_from_integral_univariate",
    # Classification
    "Level1ZeroSecond",
    "QuadPair",
    "SolenoidalHit",
    "classify_field",
    "classify_flow",
    "is_solenoidal",
    "level_of",
    "i0_symmetric",
    "i0_symmetric_vf",
    "i_symmetric",
    "i_symmetric_vf",
    "symmetric_level0",
    "transport_symmetry",
    "shared_orbits",
    "orthogonal_orbits",
    "solenoidal_search",
    "level1_zero_second",
    # Numerics
    "ConservationCheck",
    "Curve2",
    "Surface3",
    "rk4_flow",
    "area_check",
    "volume_check",
    "orbit_samples",
    "write_csv",
]
