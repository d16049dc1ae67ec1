"""In-to-out Bogoliubov transform ``a_out = U a_in + V a_in^+``.

The production route evaluates the closed forms; with ``A = d^theta``,
``B = d^(1-theta)``, ``e = (A-1)/(d-1)`` and ``c = (B-1)/(d-1)``::

    V_nk = (-1)^(n+k) i (d-1) sqrt(nk) / (2 pi (nA + k)(n + kB))
           * [exp(-2 pi i n e) - exp(-2 pi i k c)]
    U_nk = the same with k -> -k in the bracket and the denominator.

The brackets are rewritten as ``-2i sin(pi x) exp(-i pi y)`` with exactly
reduced arguments, so the zeros at ``theta = 0`` come out as exact zeros.
``U`` has removable singularities on the lines ``nA = k`` and ``n = kB``;
there an exact quotient of sines is used instead of the ratio.

A slower series route over the Bogoliubov coefficients serves as an oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._numeric import cispi, sinpi
from .bogoliubov import bogoliubov_block
from .core import CavityParams, check_mode
from .quadrature import QuadratureConfig

__all__ = [
    "TransformMatrices",
    "DEGENERACY_EPS",
    "ROUTES",
    "v_closed",
    "u_closed",
    "closed_form_block",
    "uv_series",
    "transform_matrices",
    "transform_unitarity",
    "mode_phase",
]

#: Relative size of a vanishing ``U`` denominator factor that selects the limit branch.
DEGENERACY_EPS = 1e-9
ROUTES = ("closed_form", "series", "ode_oracle")


def _check_d_theta(d: float, theta: float) -> tuple[float, float]:
    d, theta = float(d), float(theta)
    if not d > 1.0:
        raise ValueError(f"Doppler factor must exceed 1, got {d}")
    if not (0.0 <= theta < 1.0):
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    return d, theta


class _Shared(NamedTuple):
    A: float
    B: float
    e: float
    c: float


def _shared(d: float, theta: float) -> _Shared:
    """``d^theta``, ``d^(1-theta)`` and the reduced exponents, computed once."""
    L = math.log(d)
    em = math.expm1(L)
    ea = math.expm1(theta * L)
    eb = math.expm1((1.0 - theta) * L)
    return _Shared(ea + 1.0, eb + 1.0, ea / em, eb / em)


def _uv_arrays(n, k, d: float, sh: _Shared, eps: float = DEGENERACY_EPS):
    """Closed-form ``U``, ``V`` on broadcast index arrays plus the degeneracy mask."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    A, B, e, c = sh
    scale = (d - 1.0) * np.sqrt(n * k) / math.pi
    sign = np.where(np.mod(n + k, 2) == 0, 1.0, -1.0)
    ne, kc = n * e, k * c

    V = sign * scale / ((n * A + k) * (n + k * B)) * sinpi(ne - kc) * cispi(ne + kc)

    f1 = n * A - k
    f2 = n - k * B
    ph = cispi(ne - kc)
    with np.errstate(divide="ignore", invalid="ignore"):
        U = sign * scale / (f1 * f2) * sinpi(ne + kc) * ph
        # ne + kc = n - c f1 = k + e f2 (exactly, since e + A c = B e + c = 1)
        lim1 = -np.where(np.mod(k, 2) == 0, 1.0, -1.0) * scale * math.pi * c * np.sinc(c * f1) / f2 * ph
        lim2 = np.where(np.mod(n, 2) == 0, 1.0, -1.0) * scale * math.pi * e * np.sinc(e * f2) / f1 * ph
    deg1 = np.abs(f1) < eps * n
    deg2 = np.abs(f2) < eps * n
    U = np.where(deg1, lim1, np.where(deg2, lim2, U))
    return U, V, deg1 | deg2


def v_closed(n: int, n2: int, d: float, theta: float) -> complex:
    """Closed-form ``V_{n n2}``; exactly zero at ``theta = 0``."""
    n, n2 = check_mode(n), check_mode(n2)
    d, theta = _check_d_theta(d, theta)
    return complex(_uv_arrays(n, n2, d, _shared(d, theta))[1])


def u_closed(n: int, n2: int, d: float, theta: float) -> complex:
    """Closed-form ``U_{n n2}`` including its removable-singularity limit."""
    n, n2 = check_mode(n), check_mode(n2)
    d, theta = _check_d_theta(d, theta)
    return complex(_uv_arrays(n, n2, d, _shared(d, theta))[0])


def closed_form_block(d: float, theta: float, rows, cols):
    """Closed-form ``U``, ``V`` and degeneracy mask for index sets ``rows x cols``."""
    d, theta = _check_d_theta(d, theta)
    n = np.asarray(rows, dtype=float)[:, None]
    k = np.asarray(cols, dtype=float)[None, :]
    if n.min() < 1 or k.min() < 1:
        raise ValueError("mode indices must be >= 1")
    return _uv_arrays(n, k, d, _shared(d, theta))


def mode_phase(p: CavityParams, n: int) -> complex:
    """Phase ``exp(-2 pi i n theta)`` gathered by stable mode ``n``."""
    n = check_mode(n)
    return complex(cispi(2.0 * n * p.theta))


class SeriesResult(NamedTuple):
    U: complex
    V: complex
    tail: float
    quad_err: float


def _series(rows, cols, p: CavityParams, trunc: int, quad: QuadratureConfig, block: int = 256):
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    need = np.union1d(rows, cols)
    pos = {int(m): i for i, m in enumerate(need)}
    ri = [pos[int(m)] for m in rows]
    ci = [pos[int(m)] for m in cols]
    U = np.zeros((rows.size, cols.size), complex)
    V = np.zeros_like(U)
    quad_err = 0.0
    last_u = np.zeros((0,) + U.shape)
    last_v = np.zeros((0,) + U.shape)
    tail_window = 16
    for lo in range(1, trunc + 1, block):
        ks = np.arange(lo, min(lo + block, trunc + 1))
        al, be, err = bogoliubov_block(p.v, ks, need, quad)
        ph = np.exp(-2j * math.pi * np.mod(ks * p.theta, 1.0))[:, None, None]
        a_r, a_c = al[:, ri], al[:, ci]
        b_r, b_c = be[:, ri], be[:, ci]
        # per-k terms, shape (k, row, col)
        tu = ph * a_r.conj()[:, :, None] * a_c[:, None, :]
        tu -= ph.conj() * b_c.conj()[:, None, :] * b_r[:, :, None]
        tv = ph * a_r.conj()[:, :, None] * b_c[:, None, :]
        tv -= ph.conj() * a_c.conj()[:, None, :] * b_r[:, :, None]
        U += tu.sum(axis=0)
        V += tv.sum(axis=0)
        amp = np.maximum(np.abs(al), np.abs(be)).max(axis=0)
        quad_err += float((2.0 * err.max(axis=0) * amp).max() * ks.size)
        last_u = np.concatenate([last_u, tu])[-tail_window:]
        last_v = np.concatenate([last_v, tv])[-tail_window:]
    # terms fall off like k^-3; Sum_{k>K} C k^-3 ~ C / (2 K^2)
    ks = np.arange(trunc - last_u.shape[0] + 1, trunc + 1, dtype=float)[:, None, None]
    C = np.maximum(np.abs(last_u), np.abs(last_v)) * ks**3
    tail = float(C.max() / (2.0 * trunc**2))
    return U, V, tail, quad_err


def uv_series(
    n: int, n2: int, p: CavityParams, trunc: int, quad: QuadratureConfig | None = None
) -> SeriesResult:
    """``U_{n n2}``, ``V_{n n2}`` from truncated sums over the coefficients.

    ``U_nk = sum_j [ph_j conj(alpha_jn) alpha_jk - conj(ph_j) conj(beta_jk) beta_jn]`` and
    ``V_nk = sum_j [ph_j conj(alpha_jn) beta_jk - conj(ph_j) conj(alpha_jk) beta_jn]``
    with ``ph_j = exp(-2 pi i j theta)``.  The tail estimate assumes the
    ``j^-3`` decay of the summands; a warning is issued if it exceeds
    the quadrature tolerance.
    """
    n, n2 = check_mode(n), check_mode(n2)
    trunc = check_mode(trunc)
    if trunc < max(n, n2):
        raise ValueError("truncation must be at least max(n, n2)")
    quad = quad or _default_series_quad()
    U, V, tail, qerr = _series([n], [n2], p, trunc, quad)
    if tail > quad.abs_tol:
        warnings.warn(
            f"series tail estimate {tail:.2e} exceeds tolerance {quad.abs_tol:.1e}", stacklevel=2
        )
    return SeriesResult(complex(U[0, 0]), complex(V[0, 0]), tail, qerr)


def _default_series_quad() -> QuadratureConfig:
    return QuadratureConfig(rel_tol=1e-10, abs_tol=1e-12, max_subdivisions=16)


@dataclass(frozen=True)
class TransformMatrices:
    """Truncated ``U``, ``V`` with provenance.

    ``route`` is one of ``"closed_form"``, ``"series"``, ``"ode_oracle"``;
    ``err`` is the route's own error estimate (rounding level for the closed
    form, tail plus quadrature for the series, extrapolation spread for the
    ODE).  ``degenerate`` marks closed-form entries evaluated on the limit
    branch.
    """

    U: np.ndarray
    V: np.ndarray
    d: float
    theta: float
    route: str
    err: float
    degenerate: np.ndarray | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)


def transform_matrices(
    p: CavityParams, N: int, route: str = "closed_form", **options
) -> TransformMatrices:
    """Build ``U``, ``V`` for modes ``1..N`` by the selected route.

    Options: ``trunc`` and ``quad`` (series route); ``M`` and other keywords
    of :func:`dcecavity.oracles.evolve_bogoliubov_ode` (ODE route).
    """
    N = check_mode(N)
    if route == "closed_form":
        idx = np.arange(1, N + 1)
        U, V, deg = closed_form_block(p.d, p.theta, idx, idx)
        notes = ()
        if deg.any():
            hits = [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(deg))]
            notes = (f"limit branch used at {len(hits)} entries, first {hits[:4]}",)
            warnings.warn(notes[0], stacklevel=2)
        err = 64.0 * np.finfo(float).eps * max(1.0, float(np.abs(U).max()))
        return TransformMatrices(U, V, p.d, p.theta, route, err, deg, notes)
    if route == "series":
        trunc = int(options.get("trunc", max(8 * N, 512)))
        quad = options.get("quad", _default_series_quad())
        idx = np.arange(1, N + 1)
        U, V, tail, qerr = _series(idx, idx, p, trunc, quad)
        notes = (f"series truncated at {trunc} terms",)
        if tail > quad.abs_tol:
            notes += (f"tail estimate {tail:.2e} exceeds {quad.abs_tol:.1e}",)
            warnings.warn(notes[-1], stacklevel=2)
        return TransformMatrices(U, V, p.d, p.theta, route, tail + qerr, None, notes)
    if route == "ode_oracle":
        from .oracles import evolve_bogoliubov_ode

        tm = evolve_bogoliubov_ode(p, n_interest=N, **options)
        return TransformMatrices(
            tm.U[:N, :N], tm.V[:N, :N], p.d, p.theta, route, tm.err, None, tm.notes
        )
    raise ValueError(f"unknown route {route!r}; choose one of {ROUTES}")


class TransformUnitarity(NamedTuple):
    normalization: float
    symmetry: float


def transform_unitarity(U: np.ndarray, V: np.ndarray, k: int = 8) -> TransformUnitarity:
    """``max |U U^+ - V V^+ - 1|`` and ``max |U V^T - V U^T|`` over the first ``k`` rows."""
    k = min(check_mode(k), U.shape[0])
    u, v = U[:k], V[:k]
    norm = u @ u.conj().T - v @ v.conj().T - np.eye(k)
    sym = u @ v.T - v @ u.T
    return TransformUnitarity(float(np.abs(norm).max()), float(np.abs(sym).max()))
