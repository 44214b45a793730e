"""Four-stroke quantum Otto cycle built on the scaling law for mean energies."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from . import protocols as P
from .ermakov import accidental_q_closed, final_q
from .medium import Medium, Reservoirs, thermal_energy

MODES = ("numeric", "closed_form", "adiabatic", "sudden", "cd", "lcd")
# work or heat below this fraction of the corner energies counts as zero
OPERATING_RTOL = 1e-11

FAMILIES = ("accidental", "poly_omega", "lcd", "poly_b", "cd", "adiabatic", "sudden")

RECORD_FIELDS = (
    "e_a", "e_b", "e_c", "e_d", "w1", "q2", "w3", "q4", "w_total", "efficiency",
    "power", "q_ab", "q_cd", "x", "a", "n_particles", "lambda", "tau",
)


def sudden_q(x):
    """Nonadiabatic factor of an instantaneous quench between frequencies in ratio x."""
    return (x * x + 1.0) / (2.0 * x)


@dataclass(frozen=True)
class CycleSpec:
    medium: Medium
    reservoirs: Reservoirs
    omega1: float
    omega2: float
    compression: P.TrapProtocol
    expansion: P.TrapProtocol
    isochore_overhead: float = 0.0

    def __post_init__(self):
        if not 0 < self.omega1 < self.omega2:
            raise ValueError(f"need 0 < omega1 < omega2, got {self.omega1!r}, {self.omega2!r}")
        if self.isochore_overhead < 0:
            raise ValueError("isochore_overhead must be non-negative")
        for name, stroke, ends in (
            ("compression", self.compression, (self.omega1, self.omega2)),
            ("expansion", self.expansion, (self.omega2, self.omega1)),
        ):
            got = (stroke.omega_start, stroke.omega_end)
            if any(not math.isclose(g, e, rel_tol=1e-9) for g, e in zip(got, ends)):
                raise ValueError(f"{name} stroke runs {got[0]:.9g} -> {got[1]:.9g}, expected {ends[0]:.9g} -> {ends[1]:.9g}")

    @property
    def x(self):
        return self.omega1 / self.omega2

    @property
    def cycle_time(self):
        return self.compression.duration + self.expansion.duration + self.isochore_overhead


def stroke_pair(family, omega1, omega2, tau, tau_expansion=None):
    """Compression and expansion schedules of one family with durations tau, tau'."""
    tau_e = tau if tau_expansion is None else tau_expansion
    if family == "accidental":
        return (
            P.accidental_protocol(omega1, omega2, tau, "compression"),
            P.accidental_protocol(omega1, omega2, tau_e, "expansion"),
        )
    if family == "sudden":
        return P.sudden_protocol(omega1, omega2), P.sudden_protocol(omega2, omega1)
    if family in ("poly_omega", "cd", "adiabatic"):
        return P.poly_omega(omega1, omega2, tau), P.poly_omega(omega2, omega1, tau_e)
    if family == "lcd":
        return (
            P.lcd_protocol(P.poly_omega(omega1, omega2, tau)),
            P.lcd_protocol(P.poly_omega(omega2, omega1, tau_e)),
        )
    if family == "poly_b":
        return P.poly_b_protocol(omega1, omega2, tau), P.poly_b_protocol(omega2, omega1, tau_e)
    raise ValueError(f"unknown protocol family {family!r}; expected one of {FAMILIES}")


def make_cycle_spec(medium, reservoirs, x, tau, family="accidental", omega1=1.0,
                    tau_expansion=None, isochore_overhead=0.0):
    omega2 = omega1 / x
    comp, exp_ = stroke_pair(family, omega1, omega2, tau, tau_expansion)
    return CycleSpec(medium, reservoirs, omega1, omega2, comp, exp_, isochore_overhead)


@dataclass(frozen=True)
class CycleResult:
    e_a: float
    e_b: float
    e_c: float
    e_d: float
    w1: float
    w3: float
    q2: float
    q4: float
    w_total: float
    efficiency: float
    power: float
    q_ab: float
    q_cd: float
    x: float
    a: float
    n_particles: int
    lam: float
    tau: float
    mode: str = "numeric"

    @property
    def operating(self):
        """True when the cycle absorbs heat from the hot bath and outputs work."""
        return is_operating(self.q2, self.w_total, (self.e_a, self.e_b, self.e_c, self.e_d))

    def to_record(self):
        rec = {}
        for name in RECORD_FIELDS:
            rec[name] = getattr(self, "lam" if name == "lambda" else name)
        return rec


@lru_cache(maxsize=4096)
def _numeric_q(protocol, rel_tol):
    return final_q(protocol, rel_tol=rel_tol)


def _lcd_endpoint_q(stroke):
    base = stroke.base if isinstance(stroke, P.LCDProtocol) else stroke
    return float(P.lcd_q_factor(base, base.duration))


def stroke_q_factors(spec, mode, rel_tol=1e-10):
    x = spec.x
    if mode in ("adiabatic", "cd"):
        return 1.0, 1.0
    if mode == "sudden":
        q = sudden_q(x)
        return q, q
    if mode == "closed_form":
        for stroke in (spec.compression, spec.expansion):
            if not isinstance(stroke, P.AccidentalProtocol):
                raise ValueError("closed_form mode needs accidental strokes")
        return (
            accidental_q_closed(x, spec.compression.gamma),
            accidental_q_closed(x, spec.expansion.gamma),
        )
    if mode == "lcd":
        return _lcd_endpoint_q(spec.compression), _lcd_endpoint_q(spec.expansion)
    if mode == "numeric":
        return tuple(
            sudden_q(x) if isinstance(s, P.SuddenProtocol) else _numeric_q(s, rel_tol)
            for s in (spec.compression, spec.expansion)
        )
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def cycle_from_q(e_a, e_c, x, q_ab, q_cd):
    """Corner energies, stroke works and heats for given thermal energies and Q* values."""
    e_b = q_ab * e_a / x
    e_d = q_cd * x * e_c
    w1 = e_b - e_a
    w3 = e_d - e_c
    q2 = e_c - e_b
    q4 = e_a - e_d
    return e_b, e_d, w1, w3, q2, q4


def work_total(e_a, e_c, x, q_ab, q_cd):
    """Net output work per cycle, |W| = (1 - Q_AB/x) E_A + (1 - x Q_CD) E_C."""
    return (1.0 - q_ab / x) * e_a + (1.0 - x * q_cd) * e_c


def otto_efficiency(e_a, e_c, x, q_ab, q_cd):
    """Efficiency in the two-ratio form; equal to |W| / Q2."""
    return 1.0 - x * (q_cd * e_c - e_a / x) / (e_c - q_ab * e_a / x)


def is_operating(q2, w, energies):
    floor = OPERATING_RTOL * max(abs(e) for e in energies)
    return q2 > floor and w > floor


def run_cycle(spec, mode="numeric", rel_tol=1e-10):
    q_ab, q_cd = stroke_q_factors(spec, mode, rel_tol)
    x = spec.x
    e_a = thermal_energy(spec.medium, spec.omega1, spec.reservoirs.beta_c)
    e_c = thermal_energy(spec.medium, spec.omega2, spec.reservoirs.beta_h)
    e_b, e_d, w1, w3, q2, q4 = cycle_from_q(e_a, e_c, x, q_ab, q_cd)
    w = -(w1 + w3)
    eta = w / q2 if is_operating(q2, w, (e_a, e_b, e_c, e_d)) else math.nan
    tau_c = spec.cycle_time
    pw = w / tau_c if tau_c > 0 else math.nan
    return CycleResult(
        e_a=e_a, e_b=e_b, e_c=e_c, e_d=e_d, w1=w1, w3=w3, q2=q2, q4=q4,
        w_total=w, efficiency=eta, power=pw, q_ab=float(q_ab), q_cd=float(q_cd),
        x=x, a=spec.reservoirs.a, n_particles=spec.medium.n_particles,
        lam=spec.medium.lam, tau=spec.compression.duration, mode=mode,
    )


def power(result, spec):
    """Output power |W| / tau_c; raises when the cycle time is zero."""
    tau_c = spec.cycle_time
    if tau_c <= 0:
        raise ZeroDivisionError("cycle time is zero (sudden strokes, no overhead); power undefined")
    return result.w_total / tau_c


class EfficiencyBounds(NamedTuple):
    eta_sq: float
    eta_otto: float
    eta_nad: float

    def admits(self, eta, tol=1e-12):
        """sudden <= eta <= Otto and eta <= nonadiabatic Otto, up to ``tol``."""
        lower_ok = math.isnan(self.eta_sq) or self.eta_sq <= eta + tol
        return lower_ok and eta <= self.eta_otto + tol and eta <= self.eta_nad + tol


def efficiency_bounds(result, x=None):
    """(eta_sq, eta_O, eta_nad) for a computed cycle.

    ``eta_sq`` is NaN when the sudden-quench cycle at the same x takes no heat
    from the hot bath, in which case the lower bound is vacuous.
    """
    x = result.x if x is None else x
    qs = sudden_q(x)
    w_sq = work_total(result.e_a, result.e_c, x, qs, qs)
    q2_sq = result.e_c - qs * result.e_a / x
    eta_sq = w_sq / q2_sq if q2_sq > 0 else math.nan
    return EfficiencyBounds(eta_sq, 1.0 - x, 1.0 - result.q_cd * x)
