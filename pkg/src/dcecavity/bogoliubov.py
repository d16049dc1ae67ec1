"""Time-independent Bogoliubov coefficients of the contracting cavity.

The stable-particle operators are ``b_n = sum_k alpha_nk a_k + beta_nk a_k^+``
with

    {alpha, beta}_nk = 1/2 sqrt(k/n) int_{-1}^{1} (1 - v y)^(-2 pi i n / ln d)
                       exp(-/+ i pi k y) dy.

The integrand carries two oscillations: ``exp(i pi k y)`` (period ``2/k``)
and the power term, whose phase is linear in ``s = ln((1+v)/(1-vy)) / ln d``
and runs through ``n`` full turns.  Quadrature panels are laid on the union
of the half-periods of both.

The same module holds the generator of the motion in the auxiliary time
``chi``,

    Lambda = sum h_nk a_n^+ a_k + sum (g_nk a_n a_k + g_nk^* a_k^+ a_n^+),

and the closed-form couplings that appear once the speed changes in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import CavityParams, check_mode, derived_mode, doppler_from_speed
from .quadrature import (
    QuadratureConfig,
    QuadratureError,
    adaptive_integral,
    gk15_panels,
    romberg_integral,
)

__all__ = [
    "AlphaBeta",
    "BogoliubovMatrices",
    "GeneratorMatrices",
    "CouplingMatrices",
    "MatrixQuadratureError",
    "MAX_DENSE",
    "oscillation_breaks",
    "bogoliubov_integral",
    "alpha_beta",
    "bogoliubov_matrices",
    "bogoliubov_block",
    "generator_matrices",
    "nonadiabatic_couplings",
    "stable_particle_energy",
    "unitarity_residuals",
    "commutator_residual",
]

#: Largest truncation for which dense matrices are built.
MAX_DENSE = 512

_MATRIX_QUAD = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-12, max_subdivisions=16)


def _check_speed(v: float) -> float:
    v = float(v)
    if not (0.0 < v < 1.0):
        raise ValueError(f"speed v must lie in (0, 1), got {v}")
    return v


def _check_truncation(N) -> int:
    N = check_mode(N)
    if N > MAX_DENSE:
        raise ValueError(f"truncation N={N} exceeds the dense limit {MAX_DENSE}")
    return N


def oscillation_breaks(v: float, n: int, k: int, per_half: int = 1) -> np.ndarray:
    """Panel edges on ``[-1, 1]`` at the half-periods of both phases.

    ``per_half`` further splits every half-period into equal parts.
    """
    _, log_d = doppler_from_speed(v)
    m = max(abs(int(k)), 1) * per_half
    y_lin = np.linspace(-1.0, 1.0, m + 1)
    s = np.linspace(0.0, 1.0, 2 * max(int(n), 1) * per_half + 1)
    # invert s = ln((1+v)/(1-vy)) / ln d
    y_pow = -np.expm1(math.log1p(v) - s * log_d) / v
    br = np.unique(np.concatenate([y_lin, y_pow]))
    br[0], br[-1] = -1.0, 1.0
    return br[(br >= -1.0) & (br <= 1.0)]


def _integrand(n: int, k: int, v: float, log_d: float):
    mu = 2.0 * math.pi * n / log_d

    def f(y):
        return np.exp(-1j * (mu * np.log1p(-v * y) + math.pi * k * y))

    return f


def bogoliubov_integral(
    n: int,
    k: int,
    v: float,
    quad: QuadratureConfig = QuadratureConfig(),
    rule: str = "adaptive",
):
    """``int_{-1}^{1} (1 - v y)^(-2 pi i n / ln d) exp(-i pi k y) dy``.

    ``k`` may be any integer; ``alpha`` uses ``k = n'`` and ``beta`` uses
    ``k = -n'``.  ``rule`` selects ``"adaptive"`` (Gauss-Kronrod) or
    ``"romberg"``.
    """
    n = check_mode(n)
    v = _check_speed(v)
    _, log_d = doppler_from_speed(v)
    f = _integrand(n, int(k), v, log_d)
    br = oscillation_breaks(v, n, k)
    if rule == "adaptive":
        return adaptive_integral(f, -1.0, 1.0, quad, breaks=br)
    if rule == "romberg":
        return romberg_integral(f, -1.0, 1.0, quad, breaks=br)
    raise ValueError(f"unknown rule {rule!r}")


class AlphaBeta(NamedTuple):
    alpha: complex
    beta: complex
    alpha_err: float
    beta_err: float


def alpha_beta(
    n: int, n2: int, v: float, quad: QuadratureConfig = QuadratureConfig(), rule: str = "adaptive"
) -> AlphaBeta:
    """Single pair of coefficients ``(alpha_{n n2}, beta_{n n2})``.

    Raises :class:`~dcecavity.quadrature.QuadratureError` when the budget
    is exhausted; the exception carries the best estimate.
    """
    n, n2 = check_mode(n), check_mode(n2)
    pref = 0.5 * math.sqrt(n2 / n)
    ia = bogoliubov_integral(n, n2, v, quad, rule)
    ib = bogoliubov_integral(n, -n2, v, quad, rule)
    return AlphaBeta(
        pref * ia.value, pref * ib.value, float(pref * ia.error), float(pref * ib.error)
    )


@dataclass(frozen=True)
class BogoliubovMatrices:
    """Truncated coefficient matrices, rows and columns indexed ``1..N``.

    ``err`` holds the per-entry quadrature error estimate (the larger of
    the alpha and beta estimates).
    """

    alpha: np.ndarray
    beta: np.ndarray
    v: float
    N: int
    err: np.ndarray


class MatrixQuadratureError(QuadratureError):
    """Matrix build missed its tolerance; ``index`` is the worst ``(n, n')``."""

    def __init__(self, message, estimate, error, index):
        super().__init__(f"{message} at (n, n')={index}", estimate, error)
        self.index = index


def _panel_block(v: float, rows, cols, per_half: int, chunk: int = 8192):
    _, log_d = doppler_from_speed(v)
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    br = oscillation_breaks(v, rows.max(), cols.max(), per_half)
    y, wk, wd = gk15_panels(br)
    mu = 2.0 * math.pi * rows / log_d
    shape = (rows.size, cols.size)
    al, be = np.zeros(shape, complex), np.zeros(shape, complex)
    ea, eb = np.zeros(shape, complex), np.zeros(shape, complex)
    for lo in range(0, y.size, chunk):
        yc = y[lo : lo + chunk]
        ph = np.exp(-1j * np.outer(mu, np.log1p(-v * yc)))
        osc = np.exp(-1j * math.pi * np.outer(yc, cols))
        fk = ph * wk[lo : lo + chunk]
        fd = ph * wd[lo : lo + chunk]
        al += fk @ osc
        be += fk @ osc.conj()
        ea += fd @ osc
        eb += fd @ osc.conj()
    pref = 0.5 * np.sqrt(cols[None, :] / rows[:, None])
    return pref * al, pref * be, pref * np.abs(ea), pref * np.abs(eb)


def bogoliubov_block(v: float, rows, cols, quad: QuadratureConfig = _MATRIX_QUAD):
    """Coefficients for arbitrary row and column index sets.

    Returns ``(alpha, beta, err)`` of shape ``(len(rows), len(cols))``.  The
    panel rule is refined by doubling until all entries meet the tolerance
    (see :func:`bogoliubov_matrices`).
    """
    v = _check_speed(v)
    rows = np.array([check_mode(r) for r in np.atleast_1d(rows)])
    cols = np.array([check_mode(c) for c in np.atleast_1d(cols)])
    per_half = 2
    while True:
        al, be, ea, eb = _panel_block(v, rows, cols, per_half)
        err = np.maximum(ea, eb)
        scale = np.maximum(np.abs(al), np.abs(be))
        excess = err - (quad.abs_tol + quad.rel_tol * scale)
        if np.all(excess <= 0):
            return al, be, err
        if 2 * per_half > quad.max_subdivisions:
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            raise MatrixQuadratureError(
                "Bogoliubov matrix quadrature missed its tolerance",
                complex(al[i, j]),
                float(err[i, j]),
                (int(rows[i]), int(cols[j])),
            )
        per_half *= 2


def bogoliubov_matrices(
    v: float, N: int, quad: QuadratureConfig = _MATRIX_QUAD
) -> BogoliubovMatrices:
    """All ``alpha_{n n'}``, ``beta_{n n'}`` for ``1 <= n, n' <= N``.

    A composite Gauss-Kronrod 7/15 rule on shared half-period panels is
    refined by doubling (up to ``quad.max_subdivisions`` panels per
    half-period) until every entry meets the tolerance.
    """
    v = _check_speed(v)
    N = _check_truncation(N)
    idx = np.arange(1, N + 1)
    al, be, err = bogoliubov_block(v, idx, idx, quad)
    for a in (al, be, err):
        a.flags.writeable = False
    return BogoliubovMatrices(al, be, v, N, err)


@dataclass(frozen=True)
class GeneratorMatrices:
    """Coefficients of the generator ``Lambda`` truncated to ``N`` modes.

    ``h`` multiplies ``a_n^+ a_k`` and is Hermitian.  ``g`` multiplies
    ``a_n a_k`` (its conjugate multiplies ``a_k^+ a_n^+``) and is symmetric.
    """

    h: np.ndarray
    g: np.ndarray
    v: float
    N: int


def generator_matrices(v: float, N: int) -> GeneratorMatrices:
    """Closed-form generator coefficients.

    ``h_nn = n``; for ``n != k``
    ``h_nk = -(i v / pi) (-1)^(n+k) sqrt(n k) / (k - n)`` and
    ``g_nk = -(i v / 2 pi) (-1)^(n+k) sqrt(n k) / (n + k)``, which gives the
    same-mode pair coefficient ``-i v / 4 pi``.
    """
    v = _check_speed(v)
    N = _check_truncation(N)
    n = np.arange(1, N + 1)
    w = (-1.0) ** (n[:, None] + n[None, :]) * np.sqrt(np.outer(n, n))
    diff = n[None, :] - n[:, None]
    h = np.zeros((N, N), complex)
    off = diff != 0
    h[off] = -1j * v / math.pi * w[off] / diff[off]
    h[np.diag_indices(N)] = n
    g = -1j * v / (2.0 * math.pi) * w / (n[:, None] + n[None, :])
    return GeneratorMatrices(h, g, v, N)


@dataclass(frozen=True)
class CouplingMatrices:
    """Couplings ``A`` (scattering) and ``B`` (pair creation) that multiply
    the boundary acceleration."""

    A_cal: np.ndarray
    B_cal: np.ndarray
    v: float


def nonadiabatic_couplings(v: float, N: int) -> CouplingMatrices:
    """Closed-form couplings of the stable-particle operators.

    With ``m = k - n``, ``L = ln d`` and ``gamma = (1 - v^2)^(-1/2)``::

        A_nk = (i/pi) (-1)^m sqrt(nk) gamma^(2 + 2 pi i m / L) / (m (m + i L / 2 pi)),  n != k
        A_nn = -(2 pi i n / L^2) (L / v + 2 gamma^2 ln gamma - 1)
        B_nk = (i/pi) (-1)^(n+k) sqrt(nk) gamma^(2 - 2 pi i (n+k) / L)
               / ((n + k) (n + k - i L / 2 pi))
    """
    v = _check_speed(v)
    N = _check_truncation(N)
    _, L = doppler_from_speed(v)
    log_g = -0.5 * math.log1p(-v * v)
    g2 = math.exp(2.0 * log_g)
    n = np.arange(1, N + 1)
    root = np.sqrt(np.outer(n, n))
    m = n[None, :] - n[:, None]
    s = n[None, :] + n[:, None]
    sign_m = (-1.0) ** m
    A = np.empty((N, N), complex)
    off = m != 0
    mo = m[off].astype(float)
    A[off] = (
        1j / math.pi * sign_m[off] * root[off] * g2 * np.exp(2j * math.pi * mo * log_g / L)
        / (mo * (mo + 1j * L / (2.0 * math.pi)))
    )
    # the diagonal has its own closed form (not a limit of the off-diagonal one)
    A[np.diag_indices(N)] = -2j * math.pi * n / L**2 * (L / v + 2.0 * g2 * log_g - 1.0)
    B = (
        1j / math.pi * (-1.0) ** s * root * g2 * np.exp(-2j * math.pi * s * log_g / L)
        / (s * (s - 1j * L / (2.0 * math.pi)))
    )
    return CouplingMatrices(A, B, v)


def stable_particle_energy(p: CavityParams, n: int, t: float) -> float:
    """Energy ``pi lambda_n / l(t)`` of a stable particle in mode ``n``."""
    return derived_mode(p, n, t).stable_energy


class UnitarityResiduals(NamedTuple):
    normalization: float
    symmetry: float
    tail_estimate: float


def unitarity_residuals(bm: BogoliubovMatrices, k: int = 8) -> UnitarityResiduals:
    """Truncated unitarity defects on the leading ``k x k`` block.

    ``normalization`` is ``max |alpha alpha^+ - beta beta^+ - 1|`` and
    ``symmetry`` is ``max |alpha beta^T - beta alpha^T|``.  ``tail_estimate``
    is the contribution of the upper half of the summation range to the
    normalization sums, a proxy for the size of the neglected tail.
    """
    k = min(check_mode(k), bm.N)
    a, b = bm.alpha[:k], bm.beta[:k]
    norm = a @ a.conj().T - b @ b.conj().T - np.eye(k)
    sym = a @ b.T - b @ a.T
    h = bm.N // 2
    upper = a[:, h:] @ a[:, h:].conj().T - b[:, h:] @ b[:, h:].conj().T
    return UnitarityResiduals(
        float(np.abs(norm).max()), float(np.abs(sym).max()), float(np.abs(upper).max())
    )


def commutator_residual(bm: BogoliubovMatrices, k: int = 4) -> float:
    """Defect of ``[Lambda, b_n] = -lambda_n b_n`` on the leading block.

    ``Lambda`` and the ``b_n`` are both truncated to ``bm.N`` modes.  The
    coefficients of ``a_j`` and ``a_j^+`` in the commutator are compared
    for ``n, j <= k``.
    """
    k = min(check_mode(k), bm.N)
    gm = generator_matrices(bm.v, bm.N)
    _, log_d = doppler_from_speed(bm.v)
    lam = 2.0 * bm.v * np.arange(1, bm.N + 1) / log_d
    a, b = bm.alpha, bm.beta
    # [Lambda, a] = -h a - 2 g^* a^+ and [Lambda, a^+] = h^* a^+ + 2 g a
    ra = -a @ gm.h + 2.0 * b @ gm.g + lam[:, None] * a
    rb = -2.0 * a @ gm.g.conj() + b @ gm.h.conj() + lam[:, None] * b
    return float(max(np.abs(ra[:k, :k]).max(), np.abs(rb[:k, :k]).max()))
