"""Finite-time quantum Otto cycles with a harmonically trapped Calogero-Sutherland gas."""
from .cycle import (
    CycleResult,
    CycleSpec,
    EfficiencyBounds,
    efficiency_bounds,
    make_cycle_spec,
    power,
    run_cycle,
    sudden_q,
    work_total,
)
from .ermakov import (
    FundamentalPair,
    ScalingTrajectory,
    accidental_q_closed,
    final_q,
    fundamental_solutions,
    husimi_q,
    q_factor,
    solve_ermakov,
    sta_times,
)
from .errors import (
    InfeasibleProtocolError,
    IntegrationError,
    NoCrossingError,
    NonOperatingError,
    OttoError,
    SingularPointError,
)
from .medium import (
    Medium,
    Reservoirs,
    dilog,
    ground_state_energy,
    mu_lambda,
    thermal_energy,
    thermal_energy_approx,
)
from .optimize import (
    OptimizationResult,
    SweepGrid,
    adiabatic_optimum,
    crossing_times,
    efficiency_at_max_power_sweep,
    nf_factor,
    optimize_x,
)
from .protocols import (
    TrapProtocol,
    accidental_protocol,
    cd_q_factor,
    constant_protocol,
    gamma_of,
    lcd_effective_frequency,
    lcd_protocol,
    lcd_q_factor,
    min_feasible_tau,
    omega_from_b,
    poly_b_protocol,
    poly_omega,
    protocol_from_config,
    reverse_engineered_b,
    sine_b,
    sine_b_protocol,
    sudden_protocol,
)

__version__ = "0.1.0"
