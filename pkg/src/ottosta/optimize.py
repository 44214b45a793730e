"""Output-work and power optimization over the compression ratio x."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import protocols as P
from .cycle import make_cycle_spec, run_cycle, sudden_q
from .ermakov import accidental_q_closed, accidental_q_dx, final_q, sta_times
from .errors import InfeasibleProtocolError, NoCrossingError, NonOperatingError, SingularPointError
from .medium import Medium, Reservoirs, ground_state_energy, thermal_energy

X_MIN = 1e-3
X_EPS = 1e-4
X_TOL = 1e-8
N_BRACKET = 20
FD_STEP = 1e-5
SINGULAR_TOL = 1e-12

# sigma_h above which the high-temperature stationarity check is not attempted
HIGH_T_SIGMA = 0.1

REGIMES = ("numeric", "adiabatic_closed", "high_T", "intermediate", "low_T")
SWEEP_AXES = ("temperature_ratio_a", "stroke_time_tau", "lambda", "n_particles")
SWEEP_FIELDS = ("axis_value", "curve", "x_opt", "w_max", "power", "efficiency", "regime")

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def regime_label(sigma_c, n_particles):
    """Temperature regime of the cold bath; "numeric" in the unlabelled gaps."""
    if sigma_c < 0.1:
        return "high_T"
    if 1.0 <= sigma_c <= n_particles / 10.0:
        return "intermediate"
    if sigma_c > n_particles:
        return "low_T"
    return "numeric"


@dataclass(frozen=True)
class OptimizationResult:
    x_opt: float
    w_max: float
    power_max: float
    efficiency_at_opt: float
    regime: str
    iterations: int
    mode: str = "numeric"
    tau: float = math.nan
    a: float = math.nan
    sigma_c: float = math.nan
    stationarity_residual: float = math.nan

    def to_record(self):
        return {
            "x_opt": self.x_opt,
            "w_max": self.w_max,
            "power_max": self.power_max,
            "efficiency_at_opt": self.efficiency_at_opt,
            "regime": self.regime,
            "iterations": self.iterations,
            "mode": self.mode,
            "tau": self.tau,
            "a": self.a,
            "sigma_c": self.sigma_c,
            "stationarity_residual": self.stationarity_residual,
        }


def golden_section(f, lo, hi, xtol=X_TOL, max_iter=200):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (x, f(x), iterations)."""
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > xtol and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return x, fx, it


def maximize_bracketed(f, lo, hi, n_grid=N_BRACKET, xtol=X_TOL):
    """Log-spaced pre-scan, then golden-section refinement of every local maximum.

    Returns (x, f(x), iterations) for the best refined point.
    """
    grid = np.geomspace(lo, hi, n_grid)
    vals = np.array([f(x) for x in grid])
    best = (grid[0], -math.inf, 0)
    total_it = 0
    for i in range(n_grid):
        left = vals[i - 1] if i > 0 else -math.inf
        right = vals[i + 1] if i < n_grid - 1 else -math.inf
        if not (vals[i] >= left and vals[i] >= right) or not np.isfinite(vals[i]):
            continue
        x, fx, it = golden_section(f, grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)], xtol)
        total_it += it
        if vals[i] > fx:
            x, fx = grid[i], vals[i]
        if fx > best[1]:
            best = (x, fx, it)
    return best[0], best[1], total_it


def optimize_x(medium, reservoirs, tau, mode="numeric", family="accidental", omega1=1.0,
               tau_expansion=None, isochore_overhead=0.0, x_min=X_MIN, x_eps=X_EPS, xtol=X_TOL):
    """Maximize the output work (hence the power, tau being fixed) over x.

    Protocols that are infeasible at a trial x count as zero-power points.
    Raises ``NonOperatingError`` when no x in the window gives positive work.
    """
    def build(x):
        return make_cycle_spec(medium, reservoirs, x, tau, family, omega1, tau_expansion, isochore_overhead)

    def work(x):
        try:
            res = run_cycle(build(x), mode)
        except InfeasibleProtocolError:
            return -math.inf
        return res.w_total

    x_opt, w_max, iterations = maximize_bracketed(work, x_min, 1.0 - x_eps, xtol=xtol)
    best = run_cycle(build(x_opt), mode)
    if not best.operating:
        raise NonOperatingError(
            f"no positive-work operating point for x in [{x_min:g}, {1 - x_eps:g}] "
            f"(mode={mode}, tau={tau:.9g}, a={reservoirs.a:.9g})"
        )
    sigma_c = medium.n_particles * reservoirs.beta_c * omega1
    residual = math.nan
    if medium.n_particles * reservoirs.beta_h * omega1 / x_opt < HIGH_T_SIGMA:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                residual = stationarity_residual(
                    x_opt, medium, reservoirs, tau, _nf_family(mode, family), omega1, tau_expansion
                )
            except (SingularPointError, InfeasibleProtocolError):
                residual = math.nan
    return OptimizationResult(
        x_opt=float(x_opt),
        w_max=best.w_total,
        power_max=best.power,
        efficiency_at_opt=best.efficiency,
        regime=regime_label(sigma_c, medium.n_particles),
        iterations=iterations,
        mode=mode,
        tau=float(tau),
        a=reservoirs.a,
        sigma_c=sigma_c,
        stationarity_residual=residual,
    )


def _nf_family(mode, family):
    if mode in ("adiabatic", "cd", "lcd", "sudden"):
        return mode
    return family


# ---------------------------------------------------------------------------
# stationarity factor


def _stroke_q(family, x, tau, direction, omega1, source):
    if source == "closed":
        return accidental_q_closed(x, P.gamma_of(omega1, tau, x))
    omega2 = omega1 / x
    if family == "accidental":
        proto = P.accidental_protocol(omega1, omega2, tau, direction)
    else:
        ends = (omega1, omega2) if direction == "compression" else (omega2, omega1)
        maker = {"poly_omega": P.poly_omega, "poly_b": P.poly_b_protocol}[family]
        proto = maker(*ends, tau)
    return final_q(proto)


def _q_and_slope(family, x, tau, direction, omega1, method):
    if family == "accidental" and method == "analytic":
        return accidental_q_dx(x, tau, omega1)
    source = "closed" if (family == "accidental" and method == "fd") else "ode"
    h = FD_STEP * x
    q = _stroke_q(family, x, tau, direction, omega1, source)
    qp = _stroke_q(family, x + h, tau, direction, omega1, source)
    qm = _stroke_q(family, x - h, tau, direction, omega1, source)
    return q, (qp - qm) / (2.0 * h)


def nf_factor(family, x, tau=None, omega1=1.0, tau_expansion=None, method="analytic"):
    """N_F = (Q_CD + x dQ_CD/dx) / (Q_AB - x dQ_AB/dx) at fixed stroke times.

    ``family`` is one of adiabatic, cd, lcd (N_F = 1 identically), sudden,
    accidental, poly_omega or poly_b. For the accidental family ``method``
    picks the analytic derivative of the closed form ("analytic"), central
    differences of the closed form ("fd"), or central differences of
    integrated Q* values ("ode"); the polynomial families always use the
    integrated values.
    """
    if not 0 < x < 1:
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    if family in ("adiabatic", "cd", "lcd"):
        return 1.0
    if family == "sudden":
        q = sudden_q(x)
        slope = 0.5 * (1.0 - 1.0 / (x * x))
        q_ab = q_cd = (q, slope)
    elif family in ("accidental", "poly_omega", "poly_b"):
        if tau is None:
            raise ValueError(f"family {family!r} needs a stroke time tau")
        if method not in ("analytic", "fd", "ode"):
            raise ValueError(f"unknown derivative method {method!r}")
        tau_e = tau if tau_expansion is None else tau_expansion
        q_ab = _q_and_slope(family, x, tau, "compression", omega1, method)
        q_cd = _q_and_slope(family, x, tau_e, "expansion", omega1, method)
    else:
        raise ValueError(f"unknown protocol family {family!r}")
    den = q_ab[0] - x * q_ab[1]
    if abs(den) < SINGULAR_TOL:
        raise SingularPointError(f"N_F denominator vanishes at x={x:.9g}")
    return float((q_cd[0] + x * q_cd[1]) / den)


def stationarity_residual(x, medium, reservoirs, tau, family, omega1=1.0, tau_expansion=None,
                          zero_point_shift=True):
    """Relative residual of the high-temperature optimality condition at x.

    Compares a beta_c <H>_A / N with N_F x^2. With ``zero_point_shift`` the
    cold energy is replaced by its lambda = 1/2 counterpart, which absorbs
    the leading zero-point term of the hot-bath energy; that shift is exact
    for Q* = 1 only.
    """
    e_a = thermal_energy(medium, omega1, reservoirs.beta_c)
    if zero_point_shift:
        e_a += ground_state_energy(Medium(medium.n_particles, 0.5), omega1) - ground_state_energy(medium, omega1)
    lhs = reservoirs.a * reservoirs.beta_c * e_a / medium.n_particles
    rhs = nf_factor(family, x, tau, omega1, tau_expansion) * x * x
    return (lhs - rhs) / rhs


# ---------------------------------------------------------------------------
# closed-form adiabatic optimum


def adiabatic_optimum(medium, reservoirs, omega1=1.0):
    """Optimal x, work and efficiency of the adiabatic engine at high hot-bath temperature.

    Uses the exact lambda = 1/2 cold-bath energy; the hot bath enters through
    its classical value N / beta_h, so a warning is issued when
    N beta_h omega1 / x_opt exceeds 0.1.
    """
    n = medium.n_particles
    a, beta_c = reservoirs.a, reservoirs.beta_c
    e_half = thermal_energy(Medium(n, 0.5), omega1, beta_c)
    x_opt = math.sqrt(a * beta_c * e_half / n)
    if x_opt >= 1.0:
        raise NonOperatingError(f"closed-form optimum x_opt={x_opt:.9g} >= 1: no engine window")
    sigma_h = n * reservoirs.beta_h * omega1 / x_opt
    if sigma_h > HIGH_T_SIGMA:
        warnings.warn(
            f"hot bath is not classical at the optimum (N beta_h omega2 = {sigma_h:.3g} > {HIGH_T_SIGMA})",
            RuntimeWarning,
            stacklevel=2,
        )
    return OptimizationResult(
        x_opt=x_opt,
        w_max=n / (a * beta_c) * (1.0 - x_opt) ** 2,
        power_max=0.0,
        efficiency_at_opt=1.0 - x_opt,
        regime="adiabatic_closed",
        iterations=0,
        mode="adiabatic",
        tau=math.inf,
        a=a,
        sigma_c=n * beta_c * omega1,
    )


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepGrid:
    axis: str
    values: tuple
    curves: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        vals = tuple(float(v) for v in self.values)
        if len(vals) == 0 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be non-empty and strictly increasing")
        object.__setattr__(self, "values", vals)

    def records(self):
        """One flat record per (grid point, curve); gaps carry NaN and regime non_operating."""
        rows = []
        for i, v in enumerate(self.values):
            for name, results in self.curves.items():
                r = results[i]
                if r is None:
                    rows.append(dict(axis_value=v, curve=name, x_opt=math.nan, w_max=math.nan,
                                     power=math.nan, efficiency=math.nan, regime="non_operating"))
                else:
                    rows.append(dict(axis_value=v, curve=name, x_opt=r.x_opt, w_max=r.w_max,
                                     power=r.power_max, efficiency=r.efficiency_at_opt, regime=r.regime))
        return rows

    def curve(self, name, attr="efficiency_at_opt"):
        return np.array([math.nan if r is None else getattr(r, attr) for r in self.curves[name]])


def _point_params(axis, value, medium, reservoirs, tau):
    if axis == "temperature_ratio_a":
        return medium, Reservoirs.from_ratio(reservoirs.beta_c, value), tau
    if axis == "stroke_time_tau":
        return medium, reservoirs, value
    if axis == "lambda":
        return Medium(medium.n_particles, value), reservoirs, tau
    return Medium(int(round(value)), medium.lam), reservoirs, tau


def efficiency_at_max_power_sweep(axis, values, medium, reservoirs, tau=1.5, family="accidental",
                                  omega1=1.0, curves=("accidental", "sudden", "adiabatic")):
    """Efficiency at maximum power along one parameter axis, for several drivings.

    The "accidental" curve uses the closed-form Q*; any other built-in family
    name gives a curve from integrated Q* values. Points with no engine window
    are stored as ``None`` (gaps).
    """
    grid = SweepGrid(axis, tuple(values))
    out = {}
    for name in curves:
        if name in ("sudden", "adiabatic"):
            mode, fam = name, family
        elif name == "accidental":
            mode, fam = "closed_form", "accidental"
        else:
            mode, fam = "numeric", name
        results = []
        for v in grid.values:
            med, res, t = _point_params(axis, v, medium, reservoirs, tau)
            try:
                results.append(optimize_x(med, res, t, mode=mode, family=fam, omega1=omega1))
            except NonOperatingError:
                results.append(None)
        out[name] = tuple(results)
    fixed = {"n_particles": medium.n_particles, "lambda": medium.lam, "beta_c": reservoirs.beta_c,
             "a": reservoirs.a, "tau": tau, "omega1": omega1, "family": family}
    return SweepGrid(axis, grid.values, out, fixed)


# ---------------------------------------------------------------------------
# crossings of the accidental curve with the adiabatic optimum


class CrossingTimes(NamedTuple):
    tau1_prime: float
    tau1: float
    tau1_sta: float
    x_ad_opt: float
    eta_ad_opt: float
    q_tau1: float
    q_tau1_prime: float

    @property
    def sta_verified(self):
        """tau1 agrees with the first shortcut time at the adiabatic optimum."""
        return abs(self.tau1 - self.tau1_sta) < 1e-5


def _bisect(f, lo, hi, f_lo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def crossing_times(a, medium, beta_c, omega1=1.0, tau_max=10.0, d_tau=0.05, tol=1e-6):
    """First pair of stroke times where the accidental efficiency at max power
    crosses the adiabatic-optimal efficiency: upward at tau1', downward at tau1.
    """
    res = Reservoirs.from_ratio(beta_c, a)
    ad = optimize_x(medium, res, 1.0, mode="adiabatic", omega1=omega1)

    def opt_at(tau):
        return optimize_x(medium, res, tau, mode="closed_form", family="accidental", omega1=omega1)

    def gap(tau):
        try:
            return opt_at(tau).efficiency_at_opt - ad.efficiency_at_opt
        except NonOperatingError:
            return -math.inf

    taus = np.arange(d_tau, tau_max + 0.5 * d_tau, d_tau)
    up = None
    prev_t, prev_d = taus[0], gap(taus[0])
    for t in taus[1:]:
        d = gap(t)
        if up is None and prev_d <= 0 < d:
            up = _bisect(gap, prev_t, t, prev_d, tol)
        elif up is not None and prev_d > 0 >= d:
            down = _bisect(gap, prev_t, t, prev_d, tol)
            break
        prev_t, prev_d = t, d
    else:
        raise NoCrossingError(f"no up/down crossing pair of the adiabatic optimum for tau in (0, {tau_max:g}]")

    def q_at(tau):
        x = opt_at(tau).x_opt
        return accidental_q_closed(x, P.gamma_of(omega1, tau, x))

    return CrossingTimes(
        tau1_prime=up,
        tau1=down,
        tau1_sta=sta_times(ad.x_opt, omega1, 1),
        x_ad_opt=ad.x_opt,
        eta_ad_opt=ad.efficiency_at_opt,
        q_tau1=q_at(down),
        q_tau1_prime=q_at(up),
    )
