"""Canonical thermodynamics of the harmonic Calogero-Sutherland gas.

Units are hbar = m = 1 throughout, so frequencies and energies share a scale
and ``sigma = N * beta * omega`` is dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PI2_6 = math.pi ** 2 / 6.0

# below this sigma the Li2 closed form of mu_lambda cancels badly; the
# Bernoulli series is used instead (next term ~ sigma^8 / 1e7)
_MU_SMALL_SIGMA = 1e-2


@dataclass(frozen=True)
class Medium:
    """Working gas: ``n_particles`` bosons with inverse-square coupling ``lam``."""

    n_particles: int
    lam: float = 0.0

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be a positive integer, got {self.n_particles!r}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam!r}")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class Reservoirs:
    """Cold and hot baths given by their inverse temperatures."""

    beta_c: float
    beta_h: float

    def __post_init__(self):
        if not (0 < self.beta_h <= self.beta_c):
            raise ValueError(
                f"need 0 < beta_h <= beta_c, got beta_h={self.beta_h!r}, beta_c={self.beta_c!r}"
            )

    @classmethod
    def from_ratio(cls, beta_c, a):
        """Build from ``beta_c`` and the temperature ratio ``a = beta_h / beta_c``."""
        return cls(beta_c=float(beta_c), beta_h=float(a) * float(beta_c))

    @property
    def a(self):
        return self.beta_h / self.beta_c


def ground_state_energy(medium, omega):
    """E0 = (omega/2) N [1 + lambda (N - 1)]."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    n = medium.n_particles
    return 0.5 * omega * n * (1.0 + medium.lam * (n - 1))


def excitation_energy(n_particles, omega, beta):
    """Thermal part of the mean energy, ``omega * sum_k k / (exp(beta k omega) - 1)``.

    Written as ``k e^{-y} / (1 - e^{-y})`` so large ``y`` underflows to zero
    instead of overflowing; ``beta = inf`` gives exactly 0.
    """
    if not (omega > 0 and beta > 0):
        raise ValueError(f"omega and beta must be positive, got omega={omega!r}, beta={beta!r}")
    if math.isinf(beta):
        return 0.0
    k = np.arange(1, n_particles + 1, dtype=float)
    y = beta * omega * k
    return float(omega * np.sum(k * np.exp(-y) / -np.expm1(-y)))


def thermal_energy(medium, omega, beta):
    """Exact canonical mean energy at frequency ``omega`` and inverse temperature ``beta``."""
    return ground_state_energy(medium, omega) + excitation_energy(medium.n_particles, omega, beta)


def dilog(z):
    """Real dilogarithm Li2(z) on [0, 1].

    Direct power series for z <= 1/2, Euler reflection above that, so the
    series argument never exceeds 1/2 and ~40 terms reach 1e-16.
    """
    z = float(z)
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"dilog is implemented on [0, 1], got {z!r}")
    if z == 1.0:
        return PI2_6
    if z > 0.5:
        w = 1.0 - z
        return PI2_6 - math.log(z) * math.log(w) - _dilog_series(w)
    return _dilog_series(z)


def _dilog_series(z):
    total = 0.0
    power = z
    j = 1
    while power > 1e-18 * j * j:
        total += power / (j * j)
        j += 1
        power *= z
    return total


def mu_lambda(lam, sigma):
    """Quantum deviation of the mean energy from its classical value N/beta.

    ``mu = (1/sigma) int_0^sigma s/(e^s - 1) ds + lam sigma / 2``, evaluated in
    closed form via Li2.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if sigma < _MU_SMALL_SIGMA:
        s2 = sigma * sigma
        series = 1.0 - 0.25 * sigma + s2 / 36.0 - s2 * s2 / 3600.0 + s2 * s2 * s2 / 211680.0
        return series + 0.5 * lam * sigma
    return (
        PI2_6 / sigma
        + math.log(-math.expm1(-sigma))
        - dilog(math.exp(-sigma)) / sigma
        + 0.5 * lam * sigma
    )


def thermal_energy_approx(medium, omega, beta):
    """Large-N estimate ``(N / beta) mu_lambda(N beta omega)`` of the mean energy."""
    n = medium.n_particles
    return n / beta * mu_lambda(medium.lam, n * beta * omega)
