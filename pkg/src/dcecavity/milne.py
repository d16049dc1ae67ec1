"""Exact mode functions of the uniformly contracting cavity.

Each mode is a superposition of a right- and a left-moving wave,

    Psi_n(x, t) = -i / (2 sqrt(pi n)) * [z_-^(i mu_n) - z_+^(i mu_n)],
    z_(-/+) = 1 - v (t -/+ x) / l_i,        mu_n = 2 pi n / ln d,

which vanishes on both walls ``x = 0`` and ``x = l(t)``.  Inside the cavity
strip both ``z`` are real and positive, so ``z**(i mu) = exp(i mu ln z)``
needs no branch choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .core import CavityParams, check_mode
from .quadrature import QuadratureConfig, QuadratureError, QuadResult, adaptive_integral

__all__ = [
    "MilneMode",
    "milne_mode_value",
    "milne_mode_dt",
    "kg_inner_product",
    "kg_gram_matrix",
]

_EDGE = 1e-12


@dataclass(frozen=True)
class MilneMode:
    """Mode ``n`` of the cavity described by ``params``."""

    n: int
    params: CavityParams

    def __post_init__(self):
        check_mode(self.n)

    @property
    def mu(self) -> float:
        return 2.0 * math.pi * self.n / self.params.log_d


def _check_strip(p: CavityParams, x, t) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > p.T):
        raise ValueError(f"time outside [0, T] = [0, {p.T}]")
    length = p.l_i - p.v * t
    if np.any(x < 0) or np.any(x > length * (1 + _EDGE) + _EDGE):
        raise ValueError("position outside the cavity 0 <= x <= l(t)")
    return x, t


def _branches(m: MilneMode, x, t):
    p = m.params
    zm = 1.0 - p.v * (t - x) / p.l_i
    zp = 1.0 - p.v * (t + x) / p.l_i
    # the right wall can round to a hair below zero-length; clamp at tiny z
    return zm, np.maximum(zp, np.finfo(float).tiny)


def _psi(m: MilneMode, x, t, method: str = "exp"):
    zm, zp = _branches(m, x, t)
    mu = m.mu
    if method == "exp":
        wm = np.exp(1j * mu * np.log(zm))
        wp = np.exp(1j * mu * np.log(zp))
    elif method == "polar":
        wm = np.power(zm.astype(complex), 1j * mu)
        wp = np.power(zp.astype(complex), 1j * mu)
    else:
        raise ValueError(f"unknown method {method!r}")
    return -0.5j / math.sqrt(math.pi * m.n) * (wm - wp)


def _psi_dt(m: MilneMode, x, t):
    p = m.params
    zm, zp = _branches(m, x, t)
    mu = m.mu
    # d/dt z**(i mu) = i mu z**(i mu - 1) * (-v / l_i)
    c = -1j * mu * p.v / p.l_i
    dm = c * np.exp(1j * mu * np.log(zm)) / zm
    dp = c * np.exp(1j * mu * np.log(zp)) / zp
    return -0.5j / math.sqrt(math.pi * m.n) * (dm - dp)


def _scalar(out):
    return out[()] if out.ndim == 0 else out


def milne_mode_value(m: MilneMode, x, t, method: str = "exp"):
    """Evaluate ``Psi_n(x, t)``.

    Parameters
    ----------
    m : MilneMode
    x, t : float or array_like
        Points of the cavity strip (broadcast together).
    method : {"exp", "polar"}
        ``"exp"`` uses ``exp(i mu ln z)``; ``"polar"`` uses the complex power
        of a complex base, an independent route for cross-checks.
    """
    x, t = _check_strip(m.params, x, t)
    return _scalar(_psi(m, x, t, method))


def milne_mode_dt(m: MilneMode, x, t):
    """Analytic time derivative ``d Psi_n / dt``."""
    x, t = _check_strip(m.params, x, t)
    return _scalar(_psi_dt(m, x, t))


def _phase_breaks(p: CavityParams, mus, t: float) -> np.ndarray:
    """Positions where either branch phase of any mode crosses k*pi."""
    length = p.l_i - p.v * t
    z0 = 1.0 - p.v * t / p.l_i
    pts = [np.linspace(0.0, length, 9)]
    for mu in mus:
        for sgn in (1.0, -1.0):
            z1 = z0 + sgn * p.v * length / p.l_i
            lo, hi = sorted((mu * math.log(z0), mu * math.log(max(z1, 1e-300))))
            k = np.arange(math.ceil(lo / math.pi), math.floor(hi / math.pi) + 1)
            z = np.exp(k * math.pi / mu)
            pts.append(sgn * (z - z0) * p.l_i / p.v)
    x = np.concatenate(pts)
    return np.unique(x[(x > 0) & (x < length)])


def kg_inner_product(
    m1: MilneMode,
    m2: MilneMode,
    t: float,
    quad: QuadratureConfig = QuadratureConfig(rel_tol=1e-11, abs_tol=1e-12),
) -> QuadResult:
    """Klein-Gordon product ``i * int_0^l(t) (Psi1* dPsi2/dt - dPsi1*/dt Psi2) dx``.

    Returns the value and the quadrature error estimate.  Raises
    :class:`~dcecavity.quadrature.QuadratureError` if the budget runs out.
    """
    if m1.params != m2.params:
        raise ValueError("both modes must share the same cavity parameters")
    p = m1.params
    length = p.length_at(t)

    def integrand(x):
        a, b = _psi(m1, x, t), _psi(m2, x, t)
        da, db = _psi_dt(m1, x, t), _psi_dt(m2, x, t)
        return complex(1j * (np.conj(a) * db - np.conj(da) * b))

    breaks = _phase_breaks(p, (m1.mu, m2.mu), t)
    return adaptive_integral(integrand, 0.0, length, quad, breaks=breaks)


def kg_gram_matrix(
    params: CavityParams,
    n_max: int,
    t: float,
    quad: QuadratureConfig = QuadratureConfig(rel_tol=1e-11, abs_tol=1e-12),
) -> tuple[np.ndarray, float]:
    """Gram matrix of modes ``1..n_max`` at time ``t``.

    All entries share one vector-valued adaptive integration; the returned
    error is the max-norm estimate over the matrix.
    """
    n_max = check_mode(n_max)
    length = params.length_at(t)
    modes = [MilneMode(n, params) for n in range(1, n_max + 1)]

    def integrand(x):
        a = np.array([_psi(m, x, t) for m in modes])
        da = np.array([_psi_dt(m, x, t) for m in modes])
        return 1j * (np.outer(np.conj(a), da) - np.outer(np.conj(da), a))

    breaks = _phase_breaks(params, [m.mu for m in modes], t)
    gram, err = quad_vec(
        integrand,
        0.0,
        length,
        epsabs=quad.abs_tol,
        epsrel=quad.rel_tol,
        points=breaks if quad.oscillation_split else None,
        limit=max(int(quad.max_subdivisions), 2 * len(breaks) + 10),
    )
    if not quad.accepts(np.abs(gram).max(), err):
        raise QuadratureError("Gram matrix quadrature missed its tolerance", gram, err)
    return gram, float(err)
