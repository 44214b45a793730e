"""
Nonadiabatic factor along a shortcut
====================================

Q*(t) for a compression with omega1/omega2 = 0.3, driven three ways:
the accidental (constant adiabaticity) ramp, counterdiabatic driving,
and local counterdiabatic driving over a quintic frequency ramp.
Then Q*(tau) at the end of the accidental stroke as tau varies.
"""

import numpy as np

from ottosta import protocols as P
from ottosta.ermakov import accidental_q_closed, solve_ermakov, sta_gamma, sta_times

x = 0.3
w1, w2 = 1.0, 1.0 / x

# the first accidental shortcut time
tau1 = sta_times(x)
print(f"tau_1 = {tau1:.6f}, gamma_1 = {sta_gamma(x):.6f}")

acc = solve_ermakov(P.accidental_protocol(w1, w2, tau1), n_samples=11)
base = P.poly_omega(w1, w2, tau1)
q_lcd = P.lcd_q_factor(base, acc.times)

print(f"{'t':>8} {'Q_acc':>10} {'Q_cd':>6} {'Q_lcd':>10}")
for t, qa, ql in zip(acc.times, acc.q, q_lcd):
    print(f"{t:8.4f} {qa:10.6f} {1.0:6.1f} {ql:10.6f}")

# b lands on the adiabatic value with zero velocity
end = acc.final
print(f"b(tau_1) = {end['b']:.9f}  sqrt(x) = {np.sqrt(x):.9f}  bdot = {end['bdot']:.1e}")

# Q*(tau): oscillates for gamma > 1 and touches 1 at every tau_n
taus = np.linspace(0.05, 8, 400)
q = np.array([accidental_q_closed(x, P.gamma_of(w1, t, x)) for t in taus])
for n in (1, 2, 3, 4):
    tn = sta_times(x, n=n)
    print(f"tau_{n} = {tn:.5f}   Q* there = {accidental_q_closed(x, sta_gamma(x, n)):.12f}")

# the local minima of the sampled curve sit next to those times
mins = [taus[i] for i in range(1, len(q) - 1) if q[i] < q[i - 1] and q[i] < q[i + 1]]
print("sampled minima:", np.round(mins, 3))
