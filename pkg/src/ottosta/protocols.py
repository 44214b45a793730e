"""Trap-frequency schedules and shortcut-to-adiabaticity generators.

Every built-in schedule supplies analytic derivatives of omega(t) through a
Taylor jet (see ``_jet``); tabulated schedules fall back to fourth-order
central differences. Schedules obtained by inverting the Ermakov equation
may have omega(t)**2 < 0; that is reported through ``feasible`` rather than
raised, so that scans can step over infeasible regions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import cached_property
from typing import ClassVar, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from . import _jet
from .errors import InfeasibleProtocolError

TWO_PI = 2.0 * math.pi


class ScheduleSample(NamedTuple):
    t: float
    omega: float
    domega: float
    ddomega: float


def feasibility_grid_size(duration, omega_scale):
    return max(2000, math.ceil(200.0 * duration * omega_scale))


# ---------------------------------------------------------------------------
# scaling-factor trajectories


@dataclass(frozen=True)
class ScalingPolynomial:
    """b(t) = 1 + a3 t^3 + a4 t^4 + a5 t^5 with flat ends at t = 0 and t = tau."""

    b_ad: float
    tau: float

    @property
    def coefficients(self):
        d = self.b_ad - 1.0
        tau = self.tau
        return 10.0 * d / tau ** 3, -15.0 * d / tau ** 4, 6.0 * d / tau ** 5

    @cached_property
    def _poly(self):
        a3, a4, a5 = self.coefficients
        return np.polynomial.Polynomial([1.0, 0.0, 0.0, a3, a4, a5])

    def jet(self, t, order):
        t = np.asarray(t, dtype=float)
        p = self._poly
        derivs = [p(t)]
        for _ in range(order):
            p = p.deriv()
            derivs.append(p(t))
        return _jet.from_derivatives(np.array(derivs))

    def derivatives(self, t, order=2):
        return _jet.to_derivatives(self.jet(t, order))


@dataclass(frozen=True)
class SineScaling:
    """b(t) = 1 + beta [sin(t/t0) - t/t0], an accidental shortcut at tau_n = 2 n pi t0."""

    b_ad: float
    t0: float
    n: int = 1

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")

    @property
    def beta(self):
        return (1.0 - self.b_ad) / (TWO_PI * self.n)

    @property
    def tau(self):
        return TWO_PI * self.n * self.t0

    def jet(self, t, order):
        s = np.asarray(t, dtype=float) / self.t0
        beta = self.beta
        sin, cos = np.sin(s), np.cos(s)
        cycle = (sin, cos, -sin, -cos)
        derivs = [1.0 + beta * (sin - s)]
        for k in range(1, order + 1):
            d = beta * cycle[k % 4] / self.t0 ** k
            if k == 1:
                d = d - beta / self.t0
            derivs.append(d)
        return _jet.from_derivatives(np.array(derivs))

    def derivatives(self, t, order=2):
        return _jet.to_derivatives(self.jet(t, order))


def reverse_engineered_b(b_ad, tau):
    """Quintic scaling factor with b, b', b'' pinned at both ends."""
    if not (b_ad > 0 and tau > 0):
        raise ValueError(f"need b_ad > 0 and tau > 0, got b_ad={b_ad!r}, tau={tau!r}")
    return ScalingPolynomial(float(b_ad), float(tau))


def sine_b(b_ad, t0, n=1):
    return SineScaling(float(b_ad), float(t0), int(n))


def omega_from_b(b, bdd, omega0):
    """Signed omega(t)**2 that makes b(t) an exact Ermakov solution."""
    return omega0 ** 2 / b ** 4 - bdd / b


def gamma_of(omega1, tau, x):
    """Dimensionless speed of the accidental protocol, 2 omega1 tau / (1 - x)."""
    if not 0 < x < 1:
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau!r}")
    return 2.0 * omega1 * tau / (1.0 - x)


# ---------------------------------------------------------------------------
# protocols


class TrapProtocol:
    """A schedule omega(t) on [0, duration].

    Subclasses are frozen dataclasses whose fields are exactly their config
    keys; ``to_config``/``protocol_from_config`` round-trip through them.
    """

    kind: ClassVar[str] = ""

    omega_start: float
    omega_end: float
    duration: float

    # -- evaluation -------------------------------------------------------
    def jet(self, t, order=2):
        raise NotImplementedError

    def derivatives(self, t, order=2):
        """Stacked ``[omega, omega', ..., omega^(order)]`` at ``t``."""
        return _jet.to_derivatives(self.jet(t, order))

    def omega(self, t):
        return self.derivatives(t, 0)[0]

    def domega(self, t):
        return self.derivatives(t, 1)[1]

    def ddomega(self, t):
        return self.derivatives(t, 2)[2]

    def omega_squared(self, t):
        """omega(t)**2, signed for schedules built from a scaling factor."""
        return self.omega(t) ** 2

    def reference_omega(self, t):
        """Frequency defining the adiabatic reference b_ad = sqrt(omega(0)/omega(t))."""
        return self.omega(t)

    def sample(self, t):
        w, dw, ddw = self.derivatives(float(t), 2)
        return ScheduleSample(float(t), float(w), float(dw), float(ddw))

    # -- feasibility ------------------------------------------------------
    @property
    def omega_scale(self):
        return max(self.omega_start, self.omega_end)

    def feasibility_grid(self):
        return np.linspace(0.0, self.duration, feasibility_grid_size(self.duration, self.omega_scale))

    @cached_property
    def min_omega_squared(self):
        return float(np.min(self.omega_squared(self.feasibility_grid())))

    @property
    def feasible(self):
        return self.min_omega_squared >= 0.0

    def first_infeasible_time(self):
        """Earliest grid time with omega**2 < 0, or None."""
        t = self.feasibility_grid()
        bad = np.flatnonzero(self.omega_squared(t) < 0.0)
        return float(t[bad[0]]) if bad.size else None

    def require_feasible(self):
        if not self.feasible:
            t_bad = self.first_infeasible_time()
            raise InfeasibleProtocolError(
                f"{self.kind} protocol has omega^2 < 0 starting at t={t_bad:.9g}", t=t_bad
            )

    # -- serialization ----------------------------------------------------
    def to_config(self):
        cfg = {"kind": self.kind}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, TrapProtocol):
                value = value.to_config()
            elif isinstance(value, tuple):
                value = list(value)
            cfg[f.name] = value
        return cfg


def _check_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class ConstantProtocol(TrapProtocol):
    kind: ClassVar[str] = "constant"
    omega1: float
    tau: float

    def __post_init__(self):
        _check_positive(omega1=self.omega1, tau=self.tau)

    omega_start = property(lambda self: self.omega1)
    omega_end = property(lambda self: self.omega1)
    duration = property(lambda self: self.tau)

    def jet(self, t, order=2):
        t = np.asarray(t, dtype=float)
        out = np.zeros((order + 1,) + t.shape)
        out[0] = self.omega1
        return out


@dataclass(frozen=True)
class SuddenProtocol(TrapProtocol):
    """Instantaneous jump from omega1 to omega2; never integrated."""

    kind: ClassVar[str] = "sudden"
    omega1: float
    omega2: float

    def __post_init__(self):
        _check_positive(omega1=self.omega1, omega2=self.omega2)

    omega_start = property(lambda self: self.omega1)
    omega_end = property(lambda self: self.omega2)
    duration = property(lambda self: 0.0)

    @property
    def q_factor(self):
        return (self.omega1 ** 2 + self.omega2 ** 2) / (2.0 * self.omega1 * self.omega2)

    def jet(self, t, order=2):
        raise ValueError("a sudden quench has no schedule to evaluate")

    @property
    def feasible(self):
        return True


@dataclass(frozen=True)
class AccidentalProtocol(TrapProtocol):
    """Constant adiabaticity coefficient |omega'/omega^2| = 2/gamma.

    ``omega1 < omega2`` always; ``direction`` selects compression
    (omega1 -> omega2) or expansion (omega2 -> omega1).
    """

    kind: ClassVar[str] = "accidental"
    omega1: float
    omega2: float
    tau: float
    direction: str = "compression"

    def __post_init__(self):
        _check_positive(omega1=self.omega1, tau=self.tau)
        if not self.omega1 < self.omega2:
            raise ValueError(f"need omega1 < omega2, got {self.omega1!r} >= {self.omega2!r}")
        if self.direction not in ("compression", "expansion"):
            raise ValueError(f"direction must be 'compression' or 'expansion', got {self.direction!r}")

    @property
    def x(self):
        return self.omega1 / self.omega2

    @property
    def t1(self):
        return self.tau / (1.0 - self.x)

    @property
    def t2(self):
        return self.x * self.t1

    @property
    def gamma(self):
        return 2.0 * self.omega1 * self.t1

    @property
    def omega_start(self):
        return self.omega1 if self.direction == "compression" else self.omega2

    @property
    def omega_end(self):
        return self.omega2 if self.direction == "compression" else self.omega1

    duration = property(lambda self: self.tau)

    def jet(self, t, order=2):
        t = np.asarray(t, dtype=float)
        if self.direction == "compression":
            # omega1 t1 / (t1 - t): k-th Taylor coefficient is omega1 t1 / (t1 - t)^(k+1)
            u = 1.0 / (self.t1 - t)
            scale, sign = self.omega1 * self.t1, 1.0
        else:
            u = 1.0 / (t + self.t2)
            scale, sign = self.omega2 * self.t2, -1.0
        return np.array([scale * sign ** k * u ** (k + 1) for k in range(order + 1)])

    def omega_squared(self, t):
        if self.direction == "compression":
            w = self.omega1 * self.t1 / (self.t1 - t)
        else:
            w = self.omega2 * self.t2 / (t + self.t2)
        return w * w


@dataclass(frozen=True)
class PolyOmegaProtocol(TrapProtocol):
    """omega(t) = omega1 + alpha3 t^3 + alpha4 t^4 + alpha5 t^5, flat to second order at both ends."""

    kind: ClassVar[str] = "poly_omega"
    omega1: float
    omega2: float
    tau: float

    def __post_init__(self):
        _check_positive(omega1=self.omega1, omega2=self.omega2, tau=self.tau)

    omega_start = property(lambda self: self.omega1)
    omega_end = property(lambda self: self.omega2)
    duration = property(lambda self: self.tau)

    @property
    def coefficients(self):
        d = self.omega2 - self.omega1
        tau = self.tau
        return 10.0 * d / tau ** 3, -15.0 * d / tau ** 4, 6.0 * d / tau ** 5

    @cached_property
    def _poly(self):
        a3, a4, a5 = self.coefficients
        return np.polynomial.Polynomial([self.omega1, 0.0, 0.0, a3, a4, a5])

    def jet(self, t, order=2):
        t = np.asarray(t, dtype=float)
        p = self._poly
        derivs = [p(t)]
        for _ in range(order):
            p = p.deriv()
            derivs.append(p(t))
        return _jet.from_derivatives(np.array(derivs))

    def omega_squared(self, t):
        w = self._poly(t)
        return w * w


class _ScalingProtocol(TrapProtocol):
    """Schedule obtained from a prescribed b(t) through the inverted Ermakov equation."""

    omega1: float
    omega2: float

    @property
    def b_ad(self):
        return math.sqrt(self.omega1 / self.omega2)

    @property
    def scaling(self):
        raise NotImplementedError

    omega_start = property(lambda self: self.omega1)
    omega_end = property(lambda self: self.omega2)

    @property
    def duration(self):
        return self.scaling.tau

    def omega_squared(self, t):
        b, _, bdd = self.scaling.derivatives(t, 2)
        return omega_from_b(b, bdd, self.omega1)

    def jet(self, t, order=2):
        bj = self.scaling.jet(t, order + 2)
        r = _jet.reciprocal(bj[: order + 1])
        r2 = _jet.mul(r, r)
        bdd = _jet.derivative(_jet.derivative(bj))
        w2 = self.omega1 ** 2 * _jet.mul(r2, r2) - _jet.mul(bdd, r)
        return _jet.sqrt(w2)


@dataclass(frozen=True)
class PolyBProtocol(_ScalingProtocol):
    kind: ClassVar[str] = "poly_b"
    omega1: float
    omega2: float
    tau: float

    def __post_init__(self):
        _check_positive(omega1=self.omega1, omega2=self.omega2, tau=self.tau)

    @cached_property
    def scaling(self):
        return ScalingPolynomial(self.b_ad, self.tau)


@dataclass(frozen=True)
class SineBProtocol(_ScalingProtocol):
    kind: ClassVar[str] = "sine_b"
    omega1: float
    omega2: float
    t0: float
    n: int = 1

    def __post_init__(self):
        _check_positive(omega1=self.omega1, omega2=self.omega2, t0=self.t0)

    @cached_property
    def scaling(self):
        return SineScaling(self.b_ad, self.t0, self.n)


@dataclass(frozen=True)
class LCDProtocol(TrapProtocol):
    """Local counterdiabatic schedule Omega(t) assisting a base schedule."""

    kind: ClassVar[str] = "lcd"
    base: TrapProtocol

    def __post_init__(self):
        if isinstance(self.base, (SuddenProtocol, LCDProtocol)):
            raise ValueError(f"cannot build an LCD schedule on a {self.base.kind!r} base")

    @property
    def duration(self):
        return self.base.duration

    @property
    def omega_start(self):
        return float(np.sqrt(self.omega_squared(0.0)))

    @property
    def omega_end(self):
        return float(np.sqrt(self.omega_squared(self.duration)))

    @property
    def omega_scale(self):
        return self.base.omega_scale

    def omega_squared(self, t):
        w, dw, ddw = self.base.derivatives(t, 2)
        return w * w - 0.75 * dw * dw / (w * w) + 0.5 * ddw / w

    def jet(self, t, order=2):
        wj = self.base.jet(t, order + 2)
        w = wj[: order + 1]
        r = _jet.reciprocal(w)
        dw = _jet.derivative(wj)[: order + 1]
        ddw = _jet.derivative(_jet.derivative(wj))
        dwr = _jet.mul(dw, r)
        big2 = _jet.mul(w, w) - 0.75 * _jet.mul(dwr, dwr) + 0.5 * _jet.mul(ddw, r)
        return _jet.sqrt(big2)

    def reference_omega(self, t):
        return self.base.omega(t)

    def q_factor(self, t):
        return lcd_q_factor(self.base, t)


def _fd4(values, h):
    """Fourth-order first derivative on a uniform grid (one-sided at the edges)."""
    y = np.asarray(values, dtype=float)
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d


@dataclass(frozen=True)
class TabulatedProtocol(TrapProtocol):
    """omega sampled on a uniform grid starting at t = 0."""

    kind: ClassVar[str] = "tabulated"
    times: tuple
    omegas: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        w = np.asarray(self.omegas, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or t.size < 5:
            raise ValueError("times and omegas must be 1-D of equal length >= 5")
        if t[0] != 0.0 or not np.all(np.diff(t) > 0):
            raise ValueError("times must start at 0 and increase strictly")
        if not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=0.0):
            raise ValueError("times must be uniformly spaced")
        object.__setattr__(self, "times", tuple(float(v) for v in t))
        object.__setattr__(self, "omegas", tuple(float(v) for v in w))

    omega_start = property(lambda self: self.omegas[0])
    omega_end = property(lambda self: self.omegas[-1])
    duration = property(lambda self: self.times[-1])

    @cached_property
    def _splines(self):
        t = np.asarray(self.times)
        h = t[1] - t[0]
        level = np.asarray(self.omegas)
        splines = [CubicSpline(t, level)]
        for _ in range(4):
            level = _fd4(level, h)
            splines.append(CubicSpline(t, level))
        return splines

    def jet(self, t, order=2):
        if order > 4:
            raise ValueError("tabulated schedules provide derivatives up to order 4")
        t = np.asarray(t, dtype=float)
        return _jet.from_derivatives(np.array([s(t) for s in self._splines[: order + 1]]))


_KINDS = {
    cls.kind: cls
    for cls in (
        ConstantProtocol,
        SuddenProtocol,
        AccidentalProtocol,
        PolyOmegaProtocol,
        PolyBProtocol,
        SineBProtocol,
        LCDProtocol,
        TabulatedProtocol,
    )
}


def protocol_from_config(cfg):
    """Inverse of ``TrapProtocol.to_config``. Unknown keys raise ``ValueError``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"unknown protocol kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls = _KINDS[kind]
    names = {f.name for f in fields(cls)}
    extra = set(cfg) - names
    if extra:
        raise ValueError(f"unknown key(s) for {kind!r} protocol: {', '.join(sorted(extra))}")
    if kind == "lcd":
        cfg["base"] = protocol_from_config(cfg["base"])
    if kind == "tabulated":
        cfg["times"], cfg["omegas"] = tuple(cfg["times"]), tuple(cfg["omegas"])
    if "n" in cfg:
        cfg["n"] = int(cfg["n"])
    return cls(**cfg)


# ---------------------------------------------------------------------------
# constructors


def constant_protocol(omega1, tau):
    return ConstantProtocol(float(omega1), float(tau))


def sudden_protocol(omega_from, omega_to):
    return SuddenProtocol(float(omega_from), float(omega_to))


def accidental_protocol(omega1, omega2, tau, direction="compression"):
    return AccidentalProtocol(float(omega1), float(omega2), float(tau), direction)


def poly_omega(omega1, omega2, tau):
    return PolyOmegaProtocol(float(omega1), float(omega2), float(tau))


def poly_b_protocol(omega_from, omega_to, tau):
    return PolyBProtocol(float(omega_from), float(omega_to), float(tau))


def sine_b_protocol(omega_from, omega_to, t0, n=1):
    return SineBProtocol(float(omega_from), float(omega_to), float(t0), int(n))


def lcd_protocol(base):
    return LCDProtocol(base)


def lcd_effective_frequency(base, t):
    """Signed Omega(t)**2 for local counterdiabatic driving of ``base``."""
    return LCDProtocol(base).omega_squared(t)


def lcd_q_factor(base, t):
    """Nonadiabatic factor along an LCD-assisted stroke."""
    w, dw, ddw = base.derivatives(t, 2)
    return 1.0 + 0.25 * (ddw / w ** 3 - dw * dw / w ** 4)


def cd_q_factor(*_args, **_kwargs):
    """Counterdiabatic driving keeps the nonadiabatic factor at exactly 1."""
    return 1.0


# ---------------------------------------------------------------------------
# reverse-engineering feasibility


def _poly_b_min_omega_squared(omega0, b_ad, tau, n_grid=4001):
    s = np.linspace(0.0, 1.0, n_grid)
    b, _, bdd = ScalingPolynomial(b_ad, tau).derivatives(s * tau, 2)
    return float(np.min(omega_from_b(b, bdd, omega0)))


def min_feasible_tau(omega0, b_ad, tol=None, n_grid=4001):
    """Shortest duration above which the quintic-b schedule keeps omega**2 >= 0.

    Bisection on the sign of the grid minimum of omega**2; for the quintic the
    sign is monotone in tau (the b'' term scales as tau**-2), so the root is
    unique.
    """
    if b_ad == 1.0:
        return 0.0
    tol = 1e-8 / omega0 if tol is None else tol
    lo, hi = 0.0, 1.0 / omega0
    while _poly_b_min_omega_squared(omega0, b_ad, hi, n_grid) < 0.0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _poly_b_min_omega_squared(omega0, b_ad, mid, n_grid) < 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def sine_b_min_shortcut_time(omega1, omega2, n=1, tol=1e-9, n_grid=4001):
    """Smallest feasible tau_n = 2 n pi t0 for the sinusoidal scaling factor.

    Scans and then bisects on the sign of min omega**2; returns the first
    duration at which the schedule becomes feasible and stays so on the
    bracketing scan.
    """
    def min_w2(tau):
        p = SineBProtocol(omega1, omega2, tau / (TWO_PI * n), n)
        t = np.linspace(0.0, tau, max(n_grid, feasibility_grid_size(tau, p.omega_scale)))
        return float(np.min(p.omega_squared(t)))

    taus = np.geomspace(1e-3, 50.0, 400) / omega1
    ok = np.array([min_w2(t) >= 0.0 for t in taus])
    first = int(np.argmax(ok))
    if not ok[first]:
        raise ValueError("no feasible sinusoidal shortcut found below tau = 50/omega1")
    if first == 0:
        return float(taus[0])
    lo, hi = float(taus[first - 1]), float(taus[first])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if min_w2(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi
