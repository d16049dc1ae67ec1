"""Cavity kinematics for a boundary contracting at constant speed.

The cavity occupies ``0 <= x <= l(t) = l_i - v t`` for ``0 <= t <= T``.  All
quantities are in natural units (``c = 1``); lengths default to ``l_i = 1``.
Only the Doppler factor ``d`` and the fractional phase count ``theta`` enter
the final particle spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "CavityParams",
    "DerivedModeQuantities",
    "params_from",
    "chi_of_t",
    "derived_mode",
    "check_mode",
    "doppler_from_speed",
    "EXACT_POWER_TOL",
]

#: Edge of the accepted speed range; values closer to 0 or 1 are rejected.
SPEED_EDGE = 1e-12
#: |ln(1/rho)/ln d - k| below this marks rho as the exact power d**(-k).
EXACT_POWER_TOL = 1e-12


@dataclass(frozen=True)
class CavityParams:
    """Immutable, mutually consistent cavity parameters.

    Attributes
    ----------
    v : float
        Boundary speed, ``0 < v < 1``.
    gamma : float
        Lorentz factor ``(1 - v**2) ** -0.5``.
    d : float
        Doppler factor ``(1 + v) / (1 - v)``.
    log_d : float
        ``ln d`` evaluated without cancellation.
    l_i, l_f : float
        Initial and final cavity lengths.
    rho : float
        Squeeze rate ``l_f / l_i``.
    T : float
        Contraction duration ``(l_i - l_f) / v``.
    Theta : float
        Phase count of the principal mode, ``ln(1/rho) / ln d``.
    theta : float
        Fractional part of ``Theta`` in ``[0, 1)``.
    chi_f : float
        Final value of the auxiliary time, ``(pi / v) ln(1/rho)``.
    exact_power : int or None
        ``k`` when ``rho`` equals ``d**(-k)`` (then ``theta == 0`` exactly).
    """

    v: float
    gamma: float
    d: float
    log_d: float
    l_i: float
    l_f: float
    rho: float
    T: float
    Theta: float
    theta: float
    chi_f: float
    exact_power: int | None = None

    def length_at(self, t: float) -> float:
        """Cavity length ``l(t) = l_i - v t``."""
        _check_time(self, t)
        return self.l_i - self.v * t


class DerivedModeQuantities(NamedTuple):
    """Per-mode quantities at time ``t``."""

    omega_n_t: float
    lambda_n: float
    stable_energy: float


def doppler_from_speed(v: float) -> tuple[float, float]:
    """Return ``(d, ln d)`` for speed ``v``."""
    return (1.0 + v) / (1.0 - v), math.log1p(v) - math.log1p(-v)


def check_mode(n) -> int:
    """Validate a mode index and return it as ``int``."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"mode index must be a positive integer, got {n!r}")
    return int(n)


def _speed(v: float | None, gamma: float | None) -> tuple[float, float, float, float]:
    if (v is None) == (gamma is None):
        raise ValueError("give exactly one of v or gamma")
    if v is not None:
        v = float(v)
        if not (SPEED_EDGE < v < 1.0 - SPEED_EDGE):
            raise ValueError(f"speed v must lie in ({SPEED_EDGE}, 1 - {SPEED_EDGE}), got {v}")
        d, log_d = doppler_from_speed(v)
        gamma = 1.0 / math.sqrt((1.0 - v) * (1.0 + v))
        return v, gamma, d, log_d
    gamma = float(gamma)
    if not gamma > 1.0 or not math.isfinite(gamma):
        raise ValueError(f"Lorentz factor must be finite and > 1, got {gamma}")
    root = math.sqrt((gamma - 1.0) * (gamma + 1.0))
    v = root / gamma
    if not (SPEED_EDGE < v < 1.0 - SPEED_EDGE):
        raise ValueError(f"gamma={gamma} gives a speed outside the accepted range")
    return v, gamma, (gamma + root) ** 2, 2.0 * math.acosh(gamma)


def params_from(
    *,
    v: float | None = None,
    gamma: float | None = None,
    rho: float | None = None,
    rho_power: int | None = None,
    T: float | None = None,
    l_i: float = 1.0,
    theta: float | None = None,
) -> CavityParams:
    """Build validated cavity parameters.

    Give one speed (``v`` or ``gamma``) and one duration form: ``rho``,
    ``rho_power`` (``rho = d**-k``), ``T`` (with ``l_i``), or ``theta``
    directly (then ``Theta = theta`` and ``rho = d**-theta``).

    Examples
    --------
    >>> round(params_from(v=0.6, rho=0.5).d, 12)
    4.0
    >>> params_from(v=0.6, rho_power=2).theta
    0.0
    """
    v, gamma, d, log_d = _speed(v, gamma)
    l_i = float(l_i)
    if not (l_i > 0.0 and math.isfinite(l_i)):
        raise ValueError(f"initial length must be positive, got {l_i}")
    given = [x is not None for x in (rho, rho_power, T, theta)]
    if sum(given) != 1:
        raise ValueError("give exactly one of rho, rho_power, T or theta")

    exact: int | None = None
    if rho_power is not None:
        k = int(rho_power)
        if k != rho_power or k < 1:
            raise ValueError(f"rho_power must be an integer >= 1, got {rho_power}")
        exact, Theta, rho = k, float(k), d ** (-k)
        l_f = rho * l_i
        T = (l_i - l_f) / v
    elif theta is not None:
        theta = float(theta)
        if not (0.0 <= theta < 1.0):
            raise ValueError(f"theta must lie in [0, 1), got {theta}")
        if theta == 0.0:
            exact, Theta, rho = 1, 1.0, 1.0 / d
        else:
            Theta, rho = theta, math.exp(-theta * log_d)
        l_f = rho * l_i
        T = (l_i - l_f) / v
    elif T is not None:
        T = float(T)
        if not (0.0 < T < l_i / v):
            raise ValueError(f"duration must lie in (0, l_i/v) = (0, {l_i / v}), got {T}")
        rho = 1.0 - v * T / l_i
        l_f = l_i - v * T
        Theta = -math.log1p(-v * T / l_i) / log_d
    else:
        rho = float(rho)
        if not (0.0 < rho < 1.0):
            raise ValueError(f"squeeze rate rho must lie in (0, 1), got {rho}")
        l_f = rho * l_i
        T = (l_i - l_f) / v
        Theta = -math.log(rho) / log_d

    if exact is None:
        k = round(Theta)
        if k >= 1 and abs(Theta - k) <= EXACT_POWER_TOL:
            exact = int(k)
    if exact is not None:
        frac = 0.0
    elif theta is not None:
        frac = theta
    else:
        frac = Theta - math.floor(Theta)
        if frac >= 1.0:
            frac = 0.0
    chi_f = math.pi / v * Theta * log_d
    return CavityParams(v, gamma, d, log_d, l_i, l_f, rho, T, Theta, frac, chi_f, exact)


def _check_time(p: CavityParams, t: float) -> None:
    if not (0.0 <= t <= p.T):
        raise ValueError(f"time must lie in [0, T] = [0, {p.T}], got {t}")


def chi_of_t(p: CavityParams, t: float) -> float:
    """Auxiliary time ``chi(t) = -(pi/v) ln(1 - v t / l_i)``."""
    _check_time(p, t)
    if t == p.T:
        return p.chi_f
    return -math.pi / p.v * math.log1p(-p.v * t / p.l_i)


def derived_mode(p: CavityParams, n: int, t: float) -> DerivedModeQuantities:
    """Instantaneous frequency, generator eigenvalue and stable-mode energy."""
    n = check_mode(n)
    length = p.length_at(t)
    lam = 2.0 * p.v * n / p.log_d
    return DerivedModeQuantities(math.pi * n / length, lam, math.pi * lam / length)
