"""Scaling dynamics: Ermakov integration, the nonadiabatic factor, and the
closed forms available for the constant-adiabaticity (accidental) protocol.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import ode

from .errors import IntegrationError
from .protocols import SuddenProtocol

TRAJECTORY_COLUMNS = ("t", "omega", "b", "bdot", "q", "b_ad")

# |u L^2| below which the entire-function series replace cosh/cos forms
_SERIES_RADIUS = 0.5
_SERIES_TERMS = 24


def q_factor(b, bdot, omega_t, omega0, b_ad_sq=None):
    """Ratio of the nonadiabatic to the adiabatic mean energy.

    ``b_ad_sq`` defaults to ``omega0 / omega_t``. Passing it explicitly lets
    ``omega_t`` be a driving frequency different from the reference one, as
    for local counterdiabatic driving.
    """
    if b_ad_sq is None:
        b_ad_sq = omega0 / omega_t
    w0sq = omega0 * omega0
    return b_ad_sq * (0.5 / (b * b) + 0.5 * omega_t * omega_t * b * b / w0sq + 0.5 * bdot * bdot / w0sq)


@dataclass(frozen=True)
class ScalingTrajectory:
    times: np.ndarray
    omega: np.ndarray
    b: np.ndarray
    bdot: np.ndarray
    q: np.ndarray
    b_ad: np.ndarray

    @property
    def final(self):
        return {name: float(getattr(self, name)[-1]) for name in ("b", "bdot", "q", "b_ad")}

    def columns(self):
        return {
            "t": self.times,
            "omega": self.omega,
            "b": self.b,
            "bdot": self.bdot,
            "q": self.q,
            "b_ad": self.b_ad,
        }

    def write_csv(self, fh, extra=None):
        """Write the fixed column set (plus optional ``extra`` columns) as CSV."""
        cols = self.columns()
        if extra:
            cols.update(extra)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(cols))
        for row in zip(*cols.values()):
            writer.writerow([format(float(v), ".9g") for v in row])


def solve_ermakov(protocol, rel_tol=1e-10, abs_tol=1e-12, n_samples=501, times=None, max_steps=1_000_000,
                  check_feasible=True):
    """Integrate b'' + omega(t)^2 b = omega(0)^2 / b^3 from b = 1, b' = 0.

    Uses the embedded Dormand-Prince 8(5,3) pair with adaptive steps. The
    state is reported at ``times`` (default: ``n_samples`` uniform points on
    [0, duration]). With ``check_feasible=False`` a transiently inverted trap
    (omega^2 < 0, as LCD driving produces on short strokes) is integrated
    as is; the ``omega`` column then holds sqrt(max(omega^2, 0)) while Q*
    uses the signed omega^2.
    """
    if isinstance(protocol, SuddenProtocol) or protocol.duration <= 0:
        raise ValueError("solve_ermakov needs a protocol of positive duration")
    if check_feasible:
        protocol.require_feasible()

    tau = protocol.duration
    if times is None:
        times = np.linspace(0.0, tau, n_samples)
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("sample times must start at 0 and increase strictly")

    w_sq = protocol.omega_squared
    w0_sq = float(w_sq(0.0))

    def rhs(t, y):
        b = y[0]
        return [y[1], -w_sq(t) * b + w0_sq / (b * b * b)]

    solver = ode(rhs).set_integrator("dop853", rtol=rel_tol, atol=abs_tol, nsteps=max_steps)
    solver.set_initial_value([1.0, 0.0], 0.0)
    states = np.empty((times.size, 2))
    states[0] = (1.0, 0.0)
    for i, t in enumerate(times[1:], start=1):
        states[i] = solver.integrate(t)
        if not solver.successful():
            code = solver.get_return_code()
            reason = {-2: "too many steps", -3: "step size underflow", -4: "problem is stiff"}.get(
                code, f"return code {code}"
            )
            raise IntegrationError(f"Ermakov integration failed at t={solver.t:.9g} ({reason})", t=solver.t)

    b, bdot = states[:, 0], states[:, 1]
    drive_sq = np.asarray(w_sq(times), dtype=float) * np.ones_like(times)
    w_ref = np.asarray(protocol.reference_omega(times), dtype=float) * np.ones_like(times)
    w_ref0 = float(protocol.reference_omega(0.0))
    b_ad_sq = w_ref0 / w_ref
    q = b_ad_sq * (0.5 / (b * b) + 0.5 * (drive_sq * b * b + bdot * bdot) / w0_sq)
    omega_drive = np.sqrt(np.maximum(drive_sq, 0.0))
    return ScalingTrajectory(times, omega_drive, b, bdot, q, np.sqrt(b_ad_sq))


def final_q(protocol, rel_tol=1e-10, check_feasible=True):
    """Q*(tau) alone; integrates without intermediate output."""
    traj = solve_ermakov(protocol, rel_tol=rel_tol, n_samples=2, check_feasible=check_feasible)
    return float(traj.q[-1])


# ---------------------------------------------------------------------------
# closed forms for the accidental protocol


def _half_cosh_sinh(u, L):
    """c = cosh(sqrt(u) L/2) and s = sinh(sqrt(u) L/2)/sqrt(u), analytic in u.

    For u < 0 these are cos/sin of sqrt(-u) L/2; near u = 0 the power series
    is used so that gamma = 1 needs no separate branch.
    """
    u = np.asarray(u, dtype=float)
    L = np.asarray(L, dtype=float)
    u, L = np.broadcast_arrays(u, L)
    z = u * L * L / 4.0
    c = np.empty(z.shape)
    s = np.empty(z.shape)

    small = np.abs(z) < _SERIES_RADIUS
    if np.any(small):
        zs = z[small]
        term_c = np.ones_like(zs)
        term_s = np.ones_like(zs)
        sum_c = term_c.copy()
        sum_s = term_s.copy()
        for k in range(1, _SERIES_TERMS):
            term_c = term_c * zs / ((2 * k - 1) * (2 * k))
            term_s = term_s * zs / ((2 * k) * (2 * k + 1))
            sum_c += term_c
            sum_s += term_s
        c[small] = sum_c
        s[small] = 0.5 * L[small] * sum_s

    pos = ~small & (u > 0)
    if np.any(pos):
        v = np.sqrt(u[pos])
        arg = 0.5 * v * L[pos]
        c[pos] = np.cosh(arg)
        s[pos] = np.sinh(arg) / v
    neg = ~small & (u < 0)
    if np.any(neg):
        kappa = np.sqrt(-u[neg])
        arg = 0.5 * kappa * L[neg]
        c[neg] = np.cos(arg)
        s[neg] = np.sin(arg) / kappa
    return c, s


def _scalar_or_array(v):
    return float(v) if np.ndim(v) == 0 else v


def accidental_q_closed(x, gamma):
    """Q*(tau) of the accidental protocol as a function of x and gamma.

    Equals 1 + (cosh(sqrt(1-g^2) ln x) - 1)/(1-g^2), continued analytically
    through g = 1 (where it is 1 + ln(x)^2/2) into the oscillatory branch.
    """
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("x must lie in (0, 1)")
    if np.any(gamma < 0):
        raise ValueError("gamma must be non-negative")
    _, s = _half_cosh_sinh(1.0 - gamma * gamma, np.log(x))
    # (cosh(y) - 1)/u = 2 sinh^2(y/2)/u with y = sqrt(u) ln x
    return _scalar_or_array(1.0 + 2.0 * s * s)


def accidental_q_dx(x, tau, omega1=1.0):
    """Q*(x, gamma(x, tau)) and its total derivative in x at fixed tau."""
    x = np.asarray(x, dtype=float)
    gamma = 2.0 * omega1 * tau / (1.0 - x)
    u = 1.0 - gamma * gamma
    L = np.log(x)
    c, s = _half_cosh_sinh(u, L)
    u, L = np.broadcast_arrays(u, L)
    z = u * L * L / 4.0
    ds_du = np.empty(z.shape)
    small = np.abs(z) < _SERIES_RADIUS
    if np.any(small):
        zs = z[small]
        term = np.full(zs.shape, 1.0 / 6.0)
        total = term.copy()
        for k in range(2, _SERIES_TERMS):
            term = term * zs / ((2 * k) * (2 * k + 1))
            total += k * term
        Ls = L[small]
        ds_du[small] = 0.5 * Ls * (Ls * Ls / 4.0) * total
    big = ~small
    if np.any(big):
        ds_du[big] = (0.5 * L[big] * c[big] - s[big]) / (2.0 * u[big])
    du_dx = -2.0 * gamma * gamma / (1.0 - x)
    q = 1.0 + 2.0 * s * s
    dq = 4.0 * s * (0.5 * c / x + ds_du * du_dx)
    return _scalar_or_array(q), _scalar_or_array(dq)


class FundamentalPair(NamedTuple):
    g1: np.ndarray
    g1dot: np.ndarray
    g2: np.ndarray
    g2dot: np.ndarray

    @property
    def wronskian(self):
        return self.g1 * self.g2dot - self.g1dot * self.g2


def fundamental_solutions(x, gamma, t, omega1=1.0):
    """Solutions of g'' + omega(t)^2 g = 0 along the accidental compression.

    Normalized so that G1(0) = 1, G1'(0) = 0, G2(0) = 0, G2'(0) = 1.
    """
    if not 0 < x < 1:
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    t1 = gamma / (2.0 * omega1)
    phi = 1.0 - np.asarray(t, dtype=float) / t1
    if np.any(phi <= 0):
        raise ValueError("t must satisfy t < t1 = gamma / (2 omega1)")
    c, s = _half_cosh_sinh(1.0 - gamma * gamma, np.log(phi))
    root = np.sqrt(phi)
    g1 = root * (c - s)
    g1dot = gamma * gamma * s / (2.0 * t1 * root)
    g2 = -2.0 * t1 * root * s
    g2dot = (s + c) / root
    return FundamentalPair(*(_scalar_or_array(v) for v in (g1, g1dot, g2, g2dot)))


def scaling_from_pair(pair, omega0):
    """b and b' from the fundamental pair, b = sqrt(G1^2 + omega0^2 G2^2)."""
    b = np.sqrt(pair.g1 ** 2 + omega0 ** 2 * pair.g2 ** 2)
    bdot = (pair.g1 * pair.g1dot + omega0 ** 2 * pair.g2 * pair.g2dot) / b
    return b, bdot


def husimi_q(pair, omega0, omega_t):
    """Nonadiabatic factor from the fundamental pair.

    The second bracket carries G2; with G1 repeated there the constant-trap
    value would not reduce to 1.
    """
    first = pair.g1dot ** 2 + omega_t ** 2 * pair.g1 ** 2
    second = pair.g2dot ** 2 + omega_t ** 2 * pair.g2 ** 2
    return (first + omega0 ** 2 * second) / (2.0 * omega0 * omega_t)


def accidental_omega(x, gamma, t, omega1=1.0):
    """omega(t) of the accidental compression in (x, gamma) parameters."""
    t1 = gamma / (2.0 * omega1)
    return omega1 / (1.0 - np.asarray(t, dtype=float) / t1)


def sta_gamma(x, n=1):
    """gamma_n at which the accidental protocol is a shortcut."""
    return math.sqrt(1.0 + 4.0 * math.pi ** 2 * n * n / math.log(x) ** 2)


def sta_times(x, omega1=1.0, n=1):
    """Stroke durations tau_n at which Q*(tau_n) = 1 for the accidental protocol."""
    if not 0 < x < 1:
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return (1.0 - x) / (2.0 * omega1) * sta_gamma(x, n)
