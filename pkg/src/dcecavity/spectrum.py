"""Mean number of created particles per mode and its structure.

With ``A = d^theta``, ``B = d^(1-theta)``::

    N_n = (d-1)^2 n / pi^2 * sum_{k>=1} k sin^2(pi (A-1)(n + kB)/(d-1))
                                       / ((nA + k)^2 (n + kB)^2)

The sine argument is ``pi (x0 + k x1)`` with ``x0 = n (A-1)/(d-1)`` and
``x1 = (d-B)/(d-1)``; both are reduced modulo 1 before use, and at
``theta = 0`` both vanish exactly, so every term is an exact zero.

The series converges like ``k^-3`` but the sine factor is nearly constant
over long stretches when ``x1`` is close to an integer, so the truncation
error is bounded rigorously (see :func:`mean_particle_number`).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import quad

from ._numeric import NeumaierSum, sinpi
from .core import CavityParams, check_mode

__all__ = [
    "ParticleNumber",
    "SpectrumEntry",
    "SpectrumResult",
    "ClusterKinematics",
    "ClusterInterference",
    "MaximumSearch",
    "ScanRow",
    "EULER_GAMMA",
    "mean_particle_number",
    "spectrum",
    "plateau_estimate",
    "leading_log_estimate",
    "maxima_positions",
    "exact_maximum_search",
    "zero_positions",
    "cluster_interference",
    "scan_theta",
    "tail_slope",
]

EULER_GAMMA = 0.5772156649015329
DEFAULT_TOL = 1e-10
DEFAULT_MAX_TERMS = 1 << 25
_CHUNK = 1 << 18


class ParticleNumber(NamedTuple):
    """``n_mean`` lies within ``tail_bound`` of the exact value."""

    n_mean: float
    tail_bound: float
    terms: int
    converged: bool


class _Series:
    """Summation state of one spectral series."""

    def __init__(self, n: int, d: float, theta: float):
        L = math.log(d)
        em = math.expm1(L)
        ea = math.expm1(theta * L)
        eb = math.expm1((1.0 - theta) * L)
        self.n = n
        self.A, self.B = ea + 1.0, eb + 1.0
        self.pref = (d - 1.0) ** 2 * n / math.pi**2
        self.x0 = math.fmod(n * (ea / em), 1.0)
        # (d - B)/(d - 1) = 1 - (B - 1)/(d - 1)
        self.x1 = math.fmod(1.0 - eb / em, 1.0)
        self.acc = NeumaierSum()
        self.M = 0

    @property
    def zero(self) -> bool:
        return self.x0 == 0.0 and self.x1 == 0.0

    def f(self, k):
        return k / ((self.n * self.A + k) ** 2 * (self.n + k * self.B) ** 2)

    def extend(self, M: int) -> None:
        nA, n, B = self.n * self.A, self.n, self.B
        for lo in range(self.M + 1, M + 1, _CHUNK):
            k = np.arange(lo, min(lo + _CHUNK, M + 1), dtype=float)
            # sin^2 has period 1: reduce the phase to [-1/2, 1/2]
            z = k * self.x1
            z -= np.floor(z)
            z += self.x0
            z -= np.rint(z)
            np.multiply(z, math.pi, out=z)
            np.sin(z, out=z)
            z *= z
            q = (nA + k) * (n + B * k)
            q *= q
            z *= k
            z /= q
            self.acc.add(float(np.sum(z)))
        self.M = max(self.M, M)

    def F(self, X: float) -> float:
        """``int_X^inf f(k) dk``, integrated in ``u = 1/k`` over ``[0, 1/X]``."""
        nA, n, B = self.n * self.A, self.n, self.B
        val, _ = quad(
            lambda u: u / ((nA * u + 1.0) ** 2 * (n * u + B) ** 2),
            0.0,
            1.0 / X,
            epsabs=0.0,
            epsrel=1e-13,
        )
        return val

    def estimate(self) -> tuple[float, float]:
        """Best value and rigorous bound on the neglected tail."""
        M, B, P = self.M, self.B, self.pref
        S = P * self.acc.value
        # sin^2 <= 1 and f(k) <= 1/(k^3 B^2)
        best = (S, P / (2.0 * M**2 * B**2))
        # sin^2 = (1 - cos)/2; the cosine tail is bounded by Abel summation,
        # the mean part lies between F(M+1) and F(M) since f decreases here
        sx = abs(math.sin(math.pi * self.x1))
        if sx > 0.0:
            Fm1 = self.F(M + 1)
            gap, _ = quad(self.f, M, M + 1, epsabs=0.0, epsrel=1e-12)
            Fm = Fm1 + gap
            bound = P * (0.25 * gap + 0.5 * self.f(M + 1) / sx)
            if bound < best[1]:
                best = (S + P * 0.25 * (Fm + Fm1), bound)
        # sin^2(pi z) <= pi^2 z^2 while the phase is still small
        u = abs(self.x0 - round(self.x0))
        w = abs(self.x1 - round(self.x1))
        if w > 0.0 and u < 1.0 / math.pi:
            kstar = math.floor((1.0 / math.pi - u) / w)
            if kstar > M:
                bound = P / B**2 * (
                    math.pi**2
                    * (u * u / (2.0 * M**2) + 2.0 * u * w / M + w * w * math.log(kstar / M))
                    + 1.0 / (2.0 * kstar**2)
                )
                if bound < best[1]:
                    best = (S, bound)
        return best


def _validate(n, d, theta):
    n = check_mode(n)
    d, theta = float(d), float(theta)
    if not d > 1.0:
        raise ValueError(f"Doppler factor must exceed 1, got {d}")
    if not (0.0 <= theta < 1.0):
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    return n, d, theta


def mean_particle_number(
    n: int,
    d: float,
    theta: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ParticleNumber:
    """Mean number of particles created in mode ``n``.

    Terms are summed in ascending order in chunks (pairwise sums inside a
    chunk, compensated accumulation across chunks).  At least
    ``max(64, 8 n d^theta)`` terms are used; the count is doubled until the
    tail bound drops below ``tol`` or ``max_terms`` is reached, in which case
    the result carries ``converged=False`` and its honest bound.

    The tail bound is the smallest of three rigorous majorants: the plain
    ``k^-3`` envelope, an Abel-summation bound on the oscillating part of
    ``sin^2`` (the mean part is added at the midpoint of its bracket), and a
    small-phase bound for ``x1`` close to an integer.
    """
    n, d, theta = _validate(n, d, theta)
    if not tol > 0:
        raise ValueError("tol must be positive")
    s = _Series(n, d, theta)
    if s.zero:
        return ParticleNumber(0.0, 0.0, 0, True)
    M = int(min(max(64, math.ceil(8 * n * s.A)), max_terms))
    while True:
        s.extend(M)
        value, bound = s.estimate()
        if bound <= tol:
            return ParticleNumber(value, bound, M, True)
        if M >= max_terms:
            return ParticleNumber(value, bound, M, False)
        M = min(2 * M, max_terms)


class SpectrumEntry(NamedTuple):
    n: int
    n_mean: float
    tail_bound: float
    converged: bool


@dataclass(frozen=True)
class SpectrumResult:
    """Mean particle numbers for modes ``1..n_max`` at ``(d, theta)``."""

    d: float
    theta: float
    entries: tuple[SpectrumEntry, ...]
    n_max: int

    @property
    def shortfall(self) -> tuple[int, ...]:
        """Modes whose tail bound missed the tolerance."""
        return tuple(e.n for e in self.entries if not e.converged)

    def values(self) -> np.ndarray:
        return np.array([e.n_mean for e in self.entries])


def spectrum(
    d: float, theta: float, n_max: int, tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS
) -> SpectrumResult:
    """:func:`mean_particle_number` for every mode ``1..n_max``."""
    n_max = check_mode(n_max)
    entries = []
    for n in range(1, n_max + 1):
        r = mean_particle_number(n, d, theta, tol, max_terms)
        entries.append(SpectrumEntry(n, r.n_mean, r.tail_bound, r.converged))
    return SpectrumResult(float(d), float(theta), tuple(entries), n_max)


def plateau_estimate(n: int) -> float:
    """Large-``d`` plateau height ``(ln(2 pi n) + C - 1) / (2 pi^2 n)``.

    ``C`` is Euler's constant.
    """
    n = check_mode(n)
    return (math.log(2.0 * math.pi * n) + EULER_GAMMA - 1.0) / (2.0 * math.pi**2 * n)


def leading_log_estimate(n: int, d: float, theta: float) -> float:
    """Leading-logarithm estimate ``sin^2(pi n d^(theta-1)) ln(n d) / (pi^2 n)``."""
    n, d, theta = _validate(n, d, theta)
    s = float(sinpi(n * math.exp((theta - 1.0) * math.log(d))))
    return s * s * math.log(n * d) / (math.pi**2 * n)


def maxima_positions(n: int, d: float) -> list[float]:
    """Predicted maxima ``theta_j = 1 + ln((j + 1/2)/n) / ln d`` inside ``[0, 1)``."""
    n = check_mode(n)
    if not d > 1.0:
        raise ValueError(f"Doppler factor must exceed 1, got {d}")
    L = math.log(d)
    out = [1.0 + math.log((j + 0.5) / n) / L for j in range(n)]
    return sorted(t for t in out if 0.0 <= t < 1.0)


class MaximumSearch(NamedTuple):
    theta_max: float
    n_at_max: float
    multimodal: bool
    evaluations: int


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def exact_maximum_search(
    n: int,
    d: float,
    bracket: tuple[float, float] = (1.0 / 128, 1.0 - 1.0 / 128),
    tol: float = 1e-5,
    grid: int = 64,
    value_tol: float = 1e-9,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> MaximumSearch:
    """Maximise ``N_n(theta)`` over ``bracket``.

    A uniform ``grid``-point scan locates the best sample; golden-section
    search then refines inside the two neighbouring grid cells until the
    bracket is shorter than ``tol``.  ``multimodal`` is set when the coarse
    scan shows more than one interior local maximum (the refined value is
    then the global grid winner's local peak).
    """
    n = check_mode(n)
    lo, hi = map(float, bracket)
    if not (0.0 < lo < hi < 1.0):
        raise ValueError("bracket must lie inside (0, 1)")
    evals = 0

    def N(t):
        nonlocal evals
        evals += 1
        return mean_particle_number(n, d, t, value_tol, max_terms).n_mean

    ts = np.linspace(lo, hi, grid)
    vals = np.array([N(t) for t in ts])
    interior = (vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])
    multimodal = int(interior.sum()) > 1
    i = int(np.argmax(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
    c = b - _INVPHI * (b - a)
    e = a + _INVPHI * (b - a)
    fc, fe = N(c), N(e)
    while b - a > tol:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - _INVPHI * (b - a)
            fc = N(c)
        else:
            a, c, fc = c, e, fe
            e = a + _INVPHI * (b - a)
            fe = N(e)
    t_best, f_best = (c, fc) if fc >= fe else (e, fe)
    if vals[i] > f_best:
        t_best, f_best = float(ts[i]), float(vals[i])
    return MaximumSearch(float(t_best), float(f_best), multimodal, evals)


class ZeroPosition(NamedTuple):
    k: int
    rho: float
    theta_zero: bool


def zero_positions(d: float, k_max: int) -> list[ZeroPosition]:
    """Squeeze rates ``rho_k = d^-k`` (``k = 1..k_max``) at which no particles are created.

    ``k = 0`` is the static cavity and is excluded.
    """
    k_max = check_mode(k_max)
    if not d > 1.0:
        raise ValueError(f"Doppler factor must exceed 1, got {d}")
    return [ZeroPosition(k, d ** (-k), True) for k in range(1, k_max + 1)]


class ClusterKinematics(NamedTuple):
    """Collision kinematics of the wave packet emitted at ``t = 0``.

    ``k`` collisions with the moving wall happen during the contraction,
    the last one at ``(x_k, t_k)``; ``Delta`` is the separation of the two
    packets at ``t = T`` and ``j`` the interference order.
    """

    k: int
    x_k: float
    t_k: float
    Delta: float
    j: int


class ClusterInterference(NamedTuple):
    kinematics: ClusterKinematics
    ratio: float
    classification: str


def cluster_interference(p: CavityParams, n: int, tol: float = 0.05) -> ClusterInterference:
    """Classify the interference of the two packets in mode ``n``.

    ``ratio = n Delta / (2 l_f)`` close to an integer (within ``tol``) is
    ``"destructive"``, close to ``j + 1/2`` is ``"constructive"``, anything
    else ``"neither"``.
    """
    n = check_mode(n)
    k = p.exact_power if p.exact_power is not None else int(math.floor(p.Theta))
    dk = math.exp(-k * p.log_d)
    x_k = p.l_i * dk
    t_k = p.l_i / p.v * (1.0 - dk)
    if p.exact_power is not None:
        travel = 0.0
    else:
        travel = p.T - t_k
    if travel > x_k:
        Delta = p.l_f + (x_k - travel)
    else:
        Delta = p.l_f - (x_k - travel)
    ratio = n * Delta / (2.0 * p.l_f)
    j = int(math.floor(ratio))
    if abs(ratio - round(ratio)) <= tol:
        cls = "destructive"
    elif abs(ratio - (j + 0.5)) <= tol and 2 * j + 1 <= n:
        cls = "constructive"
    else:
        cls = "neither"
    return ClusterInterference(ClusterKinematics(k, x_k, t_k, Delta, j), ratio, cls)


class ScanRow(NamedTuple):
    theta: float
    n: int
    n_mean: float
    tail_bound: float
    converged: bool


def _scan_point(args) -> ScanRow:
    theta, n, d, tol, max_terms = args
    r = mean_particle_number(n, d, theta, tol, max_terms)
    return ScanRow(theta, n, r.n_mean, r.tail_bound, r.converged)


def scan_theta(
    n_list: Sequence[int],
    d: float,
    grid: Sequence[float],
    tol: float = 1e-8,
    workers: int = 1,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> list[ScanRow]:
    """Evaluate ``N_n(theta)`` on a grid.

    Rows are ordered by grid position, then by the order of ``n_list``.
    Each point is an independent pure computation, so the output is the
    same for every ``workers`` count.
    """
    modes = [check_mode(n) for n in n_list]
    thetas = [float(t) for t in grid]
    for t in thetas:
        if not (0.0 <= t < 1.0):
            raise ValueError(f"grid point {t} outside [0, 1)")
    tasks = [(t, n, float(d), tol, max_terms) for t in thetas for n in modes]
    if workers <= 1 or len(tasks) < 2:
        return [_scan_point(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def tail_slope(d: float, theta: float, n_values: Sequence[int], tol: float = 1e-12) -> float:
    """Least-squares slope of ``ln N_n`` against ``ln n``."""
    ns = np.array([check_mode(n) for n in n_values], dtype=float)
    vals = np.array([mean_particle_number(int(n), d, theta, tol).n_mean for n in ns])
    return float(np.polyfit(np.log(ns), np.log(vals), 1)[0])
