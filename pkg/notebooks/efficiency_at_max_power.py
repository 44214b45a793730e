"""
Efficiency at maximum power
===========================

N = 500 particles, sigma_c = N beta_c omega1 = 1. Power is maximized over
the compression ratio x for each point of a sweep, with three drivings:
sudden quench, accidental ramp of duration tau, and the adiabatic limit.
"""

import numpy as np

from ottosta.medium import Medium, Reservoirs
from ottosta.optimize import crossing_times, efficiency_at_max_power_sweep

n = 500
beta_c = 1.0 / n

# temperature-ratio sweep at tau = 1.5 for three couplings
a_values = np.linspace(0.05, 0.95, 10)
for lam in (0.0, 1.0, 2.0):
    grid = efficiency_at_max_power_sweep(
        "temperature_ratio_a", a_values, Medium(n, lam), Reservoirs.from_ratio(beta_c, 0.3), tau=1.5
    )
    print(f"\nlambda = {lam:g}")
    print(f"{'a':>6} {'sudden':>9} {'accid.':>9} {'adiab.':>9}")
    for a, s, c, d in zip(a_values, grid.curve("sudden"), grid.curve("accidental"), grid.curve("adiabatic")):
        print(f"{a:6.2f} {s:9.5f} {c:9.5f} {d:9.5f}")

# stroke-time sweep at a = 0.3
med = Medium(n, 0.0)
res = Reservoirs.from_ratio(beta_c, 0.3)
taus = np.array([0.001, 0.1, 0.5, 1.0, 1.5, 2.0, 2.2, 2.4, 3.0, 5.0, 10.0, 50.0])
grid = efficiency_at_max_power_sweep("stroke_time_tau", taus, med, res)
print(f"\n{'tau':>7} {'sudden':>9} {'accid.':>9} {'adiab.':>9} {'x_opt':>9}")
for t, s, c, d, xo in zip(taus, grid.curve("sudden"), grid.curve("accidental"),
                          grid.curve("adiabatic"), grid.curve("accidental", "x_opt")):
    print(f"{t:7.3f} {s:9.5f} {c:9.5f} {d:9.5f} {xo:9.5f}")

# the window where the finite-time engine beats the adiabatic optimum
c = crossing_times(0.3, med, beta_c)
print(f"\nadiabatic optimum: x = {c.x_ad_opt:.6f}, eta = {c.eta_ad_opt:.6f}")
print(f"tau1' = {c.tau1_prime:.6f}  Q* = {c.q_tau1_prime:.6f}")
print(f"tau1  = {c.tau1:.6f}  Q* = {c.q_tau1:.9f}  (shortcut time at x_ad: {c.tau1_sta:.6f})")
