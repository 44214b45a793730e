"""
Adiabatic engine across temperature regimes
===========================================

Closed-form optimum of the adiabatic Otto engine compared with direct
numerical maximization of the work, from a classical cold bath
(sigma_c << 1) to a nearly frozen one (beta_c omega1 >> 1).
"""

import math
import warnings

from ottosta.medium import Medium, Reservoirs, mu_lambda
from ottosta.optimize import adiabatic_optimum, optimize_x

warnings.simplefilter("ignore", RuntimeWarning)

n = 500
print(f"{'sigma_c':>8} {'a':>5} {'eta closed':>11} {'eta numeric':>12} {'1-sqrt(a mu)':>13} {'regime':>13}")
for sigma_c, a in [(1e-3, 0.25), (1e-2, 0.25), (1.0, 0.04), (5.0, 0.04), (20.0, 0.01)]:
    res = Reservoirs.from_ratio(sigma_c / n, a)
    closed = adiabatic_optimum(Medium(n), res)
    num = optimize_x(Medium(n), res, 1.0, mode="adiabatic")
    approx = 1 - math.sqrt(a * mu_lambda(0.5, sigma_c))
    print(f"{sigma_c:8.3g} {a:5.2f} {closed.efficiency_at_opt:11.6f} {num.efficiency_at_opt:12.6f} "
          f"{approx:13.6f} {num.regime:>13}")

# very cold bath, few particles: x_opt tends to sqrt(beta_h (N + 1) / 4)
m = Medium(10)
res = Reservoirs.from_ratio(50.0, 0.002)
closed = adiabatic_optimum(m, res)
num = optimize_x(m, res, 1.0, mode="adiabatic")
print(f"\nlow T: closed x_opt = {closed.x_opt:.6f}, sqrt(beta_h (N+1)/4) = {math.sqrt(res.beta_h * 11 / 4):.6f}, "
      f"numeric x_opt = {num.x_opt:.6f}")
