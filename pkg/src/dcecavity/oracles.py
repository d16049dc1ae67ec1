"""Independent routes to the in-to-out transform, used to validate the closed forms.

* :func:`v_double_quadrature` integrates the pre-summed kernel
  ``Im sum_k exp(2 pi i k Z)/k = pi (1/2 - frac Z)`` over the square
  ``[-1, 1]^2`` with the pieces cut along the kernel's jump lines.
* :func:`v_region_integration` integrates ``exp(i pi (n y1 + k y2))`` over
  the two polygonal regions analytically.
* :func:`evolve_bogoliubov_ode` evolves the coefficient matrices of
  ``a_n(chi)`` under the truncated generator and reads off ``U`` and ``V``.
* :func:`couplings_fd_oracle` differentiates the Bogoliubov coefficients in
  ``v`` numerically and contracts them into the acceleration couplings.

:func:`compare_routes` runs several routes over a parameter grid and
reports pairwise discrepancies against combined error budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import RK45
from scipy.linalg import expm

from .bogoliubov import bogoliubov_block, generator_matrices
from .core import CavityParams, check_mode, params_from
from .quadrature import QuadratureConfig, QuadratureError
from .transform import TransformMatrices, closed_form_block, _default_series_quad, _series

__all__ = [
    "RegionSpec",
    "OracleReport",
    "PointResult",
    "OdeDriftError",
    "region_spec",
    "v_double_quadrature",
    "kernel_constant_term",
    "v_region_integration",
    "evolve_bogoliubov_ode",
    "default_ode_truncation",
    "couplings_fd_oracle",
    "compare_routes",
    "MAX_ODE_MODES",
]

MAX_ODE_MODES = 1024
EXPM_NORM_LIMIT = 1e3


# --------------------------------------------------------------------------
# region geometry


@dataclass(frozen=True)
class RegionSpec:
    """Geometry of the kernel's jump lines on the square ``[-1, 1]^2``.

    ``Z(y1, y2) = log_d(d^-theta (1 - v y1) / (1 - v y2))``; ``Z = 0`` on
    the line ``y2 = b(y1)`` and ``Z = -1`` on ``y2 = c(y1)``.  ``a`` is the
    abscissa where ``b`` leaves the square through ``y2 = 1``.
    """

    d: float
    theta: float
    v: float
    a: float
    b0: float
    b1: float
    c0: float
    c1: float

    def b_of_y1(self, y1):
        return self.b0 + self.b1 * np.asarray(y1, dtype=float)

    def c_of_y1(self, y1):
        return self.c0 + self.c1 * np.asarray(y1, dtype=float)

    def Z(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        L = math.log(self.d)
        return -self.theta + (np.log1p(-self.v * y1) - np.log1p(-self.v * y2)) / L


def region_spec(d: float, theta: float) -> RegionSpec:
    d, theta = float(d), float(theta)
    if not d > 1.0 or not (0.0 <= theta < 1.0):
        raise ValueError("need d > 1 and 0 <= theta < 1")
    v = (d - 1.0) / (d + 1.0)
    L = math.log(d)
    A = math.exp(theta * L)
    dm = math.exp(-theta * L)
    B = math.exp((1.0 - theta) * L)
    a = 1.0 - 2.0 * math.expm1(theta * L) / math.expm1(L)
    return RegionSpec(d, theta, v, a, -math.expm1(-theta * L) / v, dm, -math.expm1((1.0 - theta) * L) / v, B)


# --------------------------------------------------------------------------
# two-dimensional quadrature of the summed kernel


def _gl_panels(lo, hi, panels: int, x, w):
    """Composite Gauss-Legendre nodes on ``[lo, hi]`` (arrays, broadcast on a leading axis)."""
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    edges = np.linspace(0.0, 1.0, panels + 1)
    t = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * x).ravel()
    wt = ((edges[1:, None] - edges[:-1, None]) / 2 * w).ravel()
    nodes = lo + (hi - lo) * t
    weights = (hi - lo) * wt
    return nodes, weights


def _double_quad(n: int, k: int, rs: RegionSpec, kernel, order: int, panels: int) -> complex:
    x, w = leggauss(order)
    lines = []
    for p0, p1 in ((rs.b0, rs.b1), (rs.c0, rs.c1)):
        for edge in (-1.0, 1.0):
            lines.append((edge - p0) / p1)
    kinks = np.unique(np.clip([-1.0, 1.0, *lines], -1.0, 1.0))
    total = 0j
    inner_panels = max(2, panels * (abs(k) + 1) // 2)
    for lo1, hi1 in zip(kinks[:-1], kinks[1:]):
        if hi1 - lo1 <= 0.0:
            continue
        n_out = max(2, int(math.ceil(panels * (abs(n) + 1) * (hi1 - lo1) / 2)))
        y1, w1 = _gl_panels(lo1, hi1, n_out, x, w)
        # inner pieces: [-1, c, b, 1] clipped, Z ordered so that the kernel is smooth inside
        cuts = np.sort(
            np.clip(np.stack([np.full_like(y1, -1.0), rs.c_of_y1(y1), rs.b_of_y1(y1), np.full_like(y1, 1.0)]), -1.0, 1.0),
            axis=0,
        )
        inner = np.zeros_like(y1, dtype=complex)
        for j in range(3):
            lo2, hi2 = cuts[j], cuts[j + 1]
            y2, w2 = _gl_panels(lo2, hi2, inner_panels, x, w)
            z = rs.Z(y1[:, None], y2)
            mid = rs.Z(y1, 0.5 * (lo2 + hi2))
            inner += np.sum(w2 * np.exp(1j * math.pi * k * y2) * kernel(z, np.floor(mid)[:, None]), axis=1)
        total += np.sum(w1 * np.exp(1j * math.pi * n * y1) * inner)
    return total


def _sawtooth(z, floor_z):
    # Im sum_k exp(2 pi i k Z) / k = pi (1/2 - (Z - floor Z)) away from integers
    return math.pi * (0.5 - (z - floor_z))


class QuadValue(NamedTuple):
    value: complex
    error: float


def v_double_quadrature(
    n: int,
    n2: int,
    d: float,
    theta: float,
    quad: QuadratureConfig = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-11, max_subdivisions=64),
) -> QuadValue:
    """``V_{n n2}`` as ``(i sqrt(n n2) / 2) * int int exp(i pi (n y1 + n2 y2)) K(Z) d^2y``.

    ``K`` is the summed sawtooth kernel.  The outer integral is split where
    the jump lines cross the square's edges, the inner one along the jump
    lines themselves; composite Gauss-Legendre rules are doubled until two
    successive levels agree.
    """
    n, n2 = check_mode(n), check_mode(n2)
    rs = region_spec(d, theta)
    pref = 0.5j * math.sqrt(n * n2)
    panels = 2
    prev = pref * _double_quad(n, n2, rs, _sawtooth, 16, panels)
    while True:
        panels *= 2
        cur = pref * _double_quad(n, n2, rs, _sawtooth, 16, panels)
        err = abs(cur - prev)
        if quad.accepts(cur, err):
            return QuadValue(complex(cur), float(err))
        if panels >= quad.max_subdivisions:
            raise QuadratureError("double quadrature missed its tolerance", complex(cur), float(err))
        prev = cur


def kernel_constant_term(n: int, n2: int, d: float, theta: float, order: int = 24, panels: int = 8) -> complex:
    """``int int exp(i pi (n y1 + n2 y2)) pi (1/2 - Z) d^2y`` (vanishes analytically)."""
    n, n2 = check_mode(n), check_mode(n2)
    rs = region_spec(d, theta)
    return complex(_double_quad(n, n2, rs, lambda z, _f: math.pi * (0.5 - z), order, panels))


# --------------------------------------------------------------------------
# analytic region integration


def _eint(kk: float, lo: float, hi: float) -> complex:
    """``int_lo^hi exp(i kk y) dy``."""
    if kk == 0.0:
        return complex(hi - lo)
    return (np.exp(1j * kk * hi) - np.exp(1j * kk * lo)) / (1j * kk)


def v_region_integration(n: int, n2: int, d: float, theta: float) -> complex:
    """``V_{n n2}`` from the region form

        (i pi sqrt(n n2) / 2) [ int_{-1}^{a} dy1 int_{b(y1)}^{1} dy2
                               - int_{a}^{1} dy1 int_{-1}^{c(y1)} dy2 ] exp(i pi (n y1 + n2 y2))

    with both iterated integrals done in closed form.
    """
    n, n2 = check_mode(n), check_mode(n2)
    rs = region_spec(d, theta)
    pn, pk = math.pi * n, math.pi * n2
    # inner: (exp(i pk) - exp(i pk b(y1))) / (i pk)
    i1 = (np.exp(1j * pk) * _eint(pn, -1.0, rs.a) - np.exp(1j * pk * rs.b0) * _eint(pn + pk * rs.b1, -1.0, rs.a)) / (1j * pk)
    # inner: (exp(i pk c(y1)) - exp(-i pk)) / (i pk)
    i2 = (np.exp(1j * pk * rs.c0) * _eint(pn + pk * rs.c1, rs.a, 1.0) - np.exp(-1j * pk) * _eint(pn, rs.a, 1.0)) / (1j * pk)
    return complex(0.5j * math.pi * math.sqrt(n * n2) * (i1 - i2))


# --------------------------------------------------------------------------
# evolution under the generator


class OdeDriftError(RuntimeError):
    """Symplectic drift of the ODE state exceeded its threshold."""

    def __init__(self, message: str, chi: float, drift: float):
        super().__init__(f"{message} (chi={chi:.6g}, drift={drift:.3e})")
        self.chi = chi
        self.drift = drift


def default_ode_truncation(p: CavityParams, n_interest: int = 4) -> int:
    """``max(64, 8 * ceil(n_interest * d^theta))``."""
    return max(64, 8 * math.ceil(check_mode(n_interest) * math.exp(p.theta * p.log_d)))


def _ode_generator(v: float, M: int) -> np.ndarray:
    gm = generator_matrices(v, M)
    G = gm.g.conj()
    # d/dchi [P; conj(Q)] = -i [[h, 2 G], [-2 G^*, -h^*]] [P; conj(Q)],  G = g^*
    return -1j * np.block([[gm.h, 2.0 * G], [-2.0 * G.conj(), -gm.h.conj()]])


def _symplectic_drift(y: np.ndarray, M: int, k: int) -> float:
    P, Qb = y[:M], y[M:]
    gram = P.conj().T @ P - Qb.conj().T @ Qb
    return float(np.abs(gram - np.eye(k)).max())


def _evolve_single(p: CavityParams, M: int, k: int, method: str, rtol: float, drift_rate: float):
    chi = math.pi * p.theta * p.log_d / p.v
    K = _ode_generator(p.v, M)
    y0 = np.zeros((2 * M, k), complex)
    y0[np.arange(k), np.arange(k)] = 1.0
    if chi == 0.0:
        return y0, 0.0, "identity (theta = 0)"
    norm = chi * float(np.abs(K).sum(axis=1).max())
    if method == "auto":
        method = "expm" if norm < EXPM_NORM_LIMIT else "rk45"
    if method == "expm":
        y = expm(K * chi)[:, :k]
        return y, _symplectic_drift(y, M, k), f"expm (chi*|K|={norm:.3g})"
    if method != "rk45":
        raise ValueError(f"unknown ODE method {method!r}")
    solver = RK45(
        lambda _t, yv: (K @ yv.reshape(2 * M, k)).ravel(),
        0.0,
        y0.ravel(),
        chi,
        rtol=rtol,
        atol=rtol * 1e-2,
    )
    steps, drift = 0, 0.0
    while solver.status == "running":
        solver.step()
        steps += 1
        if solver.status == "failed":
            raise OdeDriftError("RK45 step-size control failed", solver.t, drift)
        drift = _symplectic_drift(solver.y.reshape(2 * M, k), M, k)
        if drift > drift_rate * max(solver.t, 1.0):
            raise OdeDriftError("symplectic drift exceeded its threshold", solver.t, drift)
    return solver.y.reshape(2 * M, k), drift, f"rk45 ({steps} steps)"


def evolve_bogoliubov_ode(
    p: CavityParams,
    M: int | None = None,
    n_interest: int = 4,
    method: str = "auto",
    rtol: float = 1e-10,
    drift_rate: float = 1e-6,
    ladder: Sequence[int] | None = None,
) -> TransformMatrices:
    """``U``, ``V`` by evolving ``a_n(chi) = sum P a_in + Q a_in^+`` under ``Lambda``.

    The first ``n_interest`` columns of ``(P, conj Q)`` are evolved over
    ``chi in [0, pi theta ln d / v]``; whole periods of ``pi ln d / v`` act
    as the identity on the stable modes and are skipped.  ``method`` picks
    the embedded 5(4) Runge-Kutta pair (``"rk45"``, drift of the column
    symplectic form checked after every step) or the matrix exponential
    (``"expm"``); ``"auto"`` uses the exponential while
    ``chi * ||K||_inf < 1e3``.

    The truncation error decays only like ``1/M``.  Passing ``ladder``
    (increasing truncations) applies Richardson extrapolation in ``1/M``
    of order ``len(ladder) - 1``; ``err`` is then the change against the
    extrapolation of one order lower.  Without a ladder ``err`` is the
    final symplectic drift, which does not measure truncation.
    """
    n_interest = check_mode(n_interest)
    Ms = list(ladder) if ladder is not None else [M or default_ode_truncation(p, n_interest)]
    for m in Ms:
        if check_mode(m) > MAX_ODE_MODES:
            raise ValueError(f"ODE truncation {m} exceeds the limit {MAX_ODE_MODES}")
        if m < n_interest:
            raise ValueError("truncation must be at least n_interest")
    runs, notes = [], []
    for m in Ms:
        y, drift, how = _evolve_single(p, m, n_interest, method, rtol, drift_rate)
        runs.append((y[:n_interest], y[m : m + n_interest].conj()))
        notes.append(f"M={m}: {how}, drift {drift:.2e}")
    if len(Ms) == 1:
        U, V = runs[0]
        return TransformMatrices(U, V, p.d, p.theta, "ode_oracle", drift, None, tuple(notes))

    def extrapolate(sel):
        h = np.array([1.0 / Ms[i] for i in sel])
        w = np.linalg.solve(np.vander(h, len(sel), increasing=True).T, np.eye(len(sel))[:, 0])
        U = sum(wi * runs[i][0] for wi, i in zip(w, sel))
        V = sum(wi * runs[i][1] for wi, i in zip(w, sel))
        return U, V

    idx = list(range(len(Ms)))
    U, V = extrapolate(idx)
    U1, V1 = extrapolate(idx[1:])
    err = float(max(np.abs(U - U1).max(), np.abs(V - V1).max()))
    notes.append(f"Richardson order {len(Ms) - 1} in 1/M over {Ms}")
    return TransformMatrices(U, V, p.d, p.theta, "ode_oracle", err, None, tuple(notes))


# --------------------------------------------------------------------------
# acceleration couplings by finite differences


def couplings_fd_oracle(v: float, n_max: int = 4, K: int = 256, delta: float = 1e-4):
    """Central-difference estimate of the couplings ``A``, ``B`` for ``n, n' <= n_max``.

    ``A_nm = sum_k (da_nk/dv conj(a_mk) - conj(b_mk) db_nk/dv)`` and
    ``B_nm = sum_k (db_nk/dv a_mk - b_mk da_nk/dv)``, truncated at ``k = K``.
    """
    n_max = check_mode(n_max)
    rows = np.arange(1, n_max + 1)
    cols = np.arange(1, check_mode(K) + 1)
    ap, bp, _ = bogoliubov_block(v + delta, rows, cols)
    am, bm, _ = bogoliubov_block(v - delta, rows, cols)
    a, b, _ = bogoliubov_block(v, rows, cols)
    da = (ap - am) / (2.0 * delta)
    db = (bp - bm) / (2.0 * delta)
    A = da @ a.conj().T - db @ b.conj().T
    B = db @ a.T - da @ b.T
    return A, B


# --------------------------------------------------------------------------
# route comparison


class PointResult(NamedTuple):
    params: dict
    max_abs_diff: float
    budget: float
    passed: bool
    failure: str | None


@dataclass(frozen=True)
class OracleReport:
    """Pairwise comparison of two routes over a parameter grid."""

    route_a: str
    route_b: str
    max_abs_diff: float
    grid: tuple
    per_point: tuple[PointResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.per_point) and len(self.per_point) > 0

    @property
    def failures(self) -> tuple[PointResult, ...]:
        return tuple(r for r in self.per_point if r.failure is not None)


_V_ONLY = {"region", "double_quadrature"}
ALL_ROUTES = ("closed_form", "region", "double_quadrature", "series", "ode")


def _route_values(route: str, pt: dict):
    """Return ``(U or None, V, err)`` for modes ``1..N`` at a grid point."""
    d, theta, N = pt["d"], pt["theta"], pt["N"]
    idx = np.arange(1, N + 1)
    if route == "closed_form":
        U, V, _ = closed_form_block(d, theta, idx, idx)
        return U, V, 1e-14 * max(1.0, float(np.abs(U).max()))
    if route == "region":
        V = np.array([[v_region_integration(i, j, d, theta) for j in idx] for i in idx])
        return None, V, 1e-13 * max(1.0, float(np.abs(V).max()))
    if route == "double_quadrature":
        vals = [[v_double_quadrature(i, j, d, theta) for j in idx] for i in idx]
        V = np.array([[x.value for x in row] for row in vals])
        return None, V, max(x.error for row in vals for x in row)
    p = params_from(v=(d - 1.0) / (d + 1.0), theta=theta)
    if route == "series":
        trunc = int(pt.get("trunc", 1024))
        U, V, tail, qerr = _series(idx, idx, p, trunc, _default_series_quad())
        return U, V, tail + qerr
    if route == "ode":
        ladder = pt.get("ladder", (128, 256, 512))
        tm = evolve_bogoliubov_ode(p, n_interest=N, ladder=ladder, method=pt.get("method", "expm"))
        return tm.U, tm.V, tm.err
    raise ValueError(f"unknown route {route!r}; choose from {ALL_ROUTES}")


def compare_routes(
    grid: Iterable[dict], routes: Sequence[str], floor: float = 1e-12
) -> list[OracleReport]:
    """Pairwise discrepancies between routes.

    Each grid point is a dict with ``d``, ``theta`` and ``N`` (entries
    ``n, n' <= N`` are compared), plus optional route options (``trunc``,
    ``ladder``, ``method``).  ``U`` is compared only when both routes supply
    it.  A point passes when the discrepancy is within the sum of both
    routes' error estimates plus ``floor``.  A failing route is recorded
    for that point and the comparison continues.
    """
    routes = list(dict.fromkeys(routes))
    if len(routes) < 2:
        raise ValueError("need at least two routes")
    grid = [dict(pt) for pt in grid]
    results: dict = {}
    for i, pt in enumerate(grid):
        for r in routes:
            try:
                results[i, r] = _route_values(r, pt)
            except (QuadratureError, OdeDriftError, ValueError) as exc:
                results[i, r] = exc
    reports = []
    for ra, rb in combinations(routes, 2):
        rows = []
        for i, pt in enumerate(grid):
            xa, xb = results[i, ra], results[i, rb]
            bad = [f"{r}: {x}" for r, x in ((ra, xa), (rb, xb)) if isinstance(x, Exception)]
            if bad:
                rows.append(PointResult(pt, math.nan, math.nan, False, "; ".join(bad)))
                continue
            diff = float(np.abs(xa[1] - xb[1]).max())
            if xa[0] is not None and xb[0] is not None:
                diff = max(diff, float(np.abs(xa[0] - xb[0]).max()))
            budget = xa[2] + xb[2] + floor
            rows.append(PointResult(pt, diff, budget, diff <= budget, None))
        diffs = [r.max_abs_diff for r in rows if r.failure is None]
        reports.append(
            OracleReport(ra, rb, max(diffs) if diffs else math.nan, tuple(grid), tuple(rows))
        )
    return reports
