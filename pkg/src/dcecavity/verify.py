"""Verification suites with machine-readable results.

Every check yields a :class:`CheckResult` with the measured quantity, the
threshold it is compared to and the parameters used.  A failing check is
reported, never raised; only configuration errors raise.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.signal import find_peaks

from .bogoliubov import bogoliubov_matrices, unitarity_residuals
from .core import params_from
from .milne import kg_gram_matrix
from .oracles import evolve_bogoliubov_ode, kernel_constant_term, v_double_quadrature, v_region_integration
from .spectrum import (
    exact_maximum_search,
    maxima_positions,
    mean_particle_number,
    scan_theta,
    spectrum,
    tail_slope,
)
from .transform import closed_form_block, transform_unitarity, v_closed

__all__ = ["CheckResult", "SUITES", "run_suites", "MAXIMA_TABLE", "SCAN_GAMMAS"]


class CheckResult(NamedTuple):
    suite: str
    check: str
    status: str
    measured: float
    threshold: float
    params: dict

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return self._asdict()


def _result(suite, check, ok, measured, threshold, **params) -> CheckResult:
    return CheckResult(suite, check, "pass" if ok else "fail", float(measured), float(threshold), params)


# reference values: gamma -> (exact theta_max, predicted theta_max)
MAXIMA_TABLE = {2.0: (0.85, 0.74), 10.0: (0.90, 0.88), 100.0: (0.94, 0.94), 1000.0: (0.96, 0.95)}
SCAN_GAMMAS = (2.0, 10.0, 100.0, 1000.0)
PLATEAU_REFERENCE = {1: 7.17e-2, 2: 5.34e-2}


def _d_of_gamma(gamma: float) -> float:
    return params_from(gamma=gamma, theta=0.5).d


def suite_zeros(workers: int = 1) -> list[CheckResult]:
    out = []
    for v in (0.3, 0.6, 0.9):
        for k in (1, 2, 3):
            p = params_from(v=v, rho_power=k)
            s = spectrum(p.d, p.theta, 16, tol=1e-10)
            worst = max(abs(e.n_mean) + e.tail_bound for e in s.entries)
            out.append(_result("zeros", "N_vanishes_at_rho_power", worst <= 1e-10, worst, 1e-10, v=v, k=k, n_max=16))
    return out


def suite_maxima(workers: int = 1) -> list[CheckResult]:
    out = []
    for gamma, (exact_ref, pred_ref) in MAXIMA_TABLE.items():
        d = _d_of_gamma(gamma)
        pred = maxima_positions(1, d)[0]
        out.append(
            _result("maxima", "predicted_theta_max", abs(pred - pred_ref) <= 0.005, abs(pred - pred_ref), 0.005,
                    gamma=gamma, n=1, value=pred, reference=pred_ref)
        )
        m = exact_maximum_search(1, d)
        out.append(
            _result("maxima", "exact_theta_max", abs(m.theta_max - exact_ref) <= 0.01, abs(m.theta_max - exact_ref), 0.01,
                    gamma=gamma, n=1, value=m.theta_max, reference=exact_ref, n_at_max=m.n_at_max, multimodal=m.multimodal)
        )
    return out


def suite_plateau(workers: int = 1) -> list[CheckResult]:
    d = _d_of_gamma(1000.0)
    out = []
    for n, ref in PLATEAU_REFERENCE.items():
        r = mean_particle_number(n, d, 0.5, tol=1e-10)
        rel = abs(r.n_mean - ref) / ref
        out.append(_result("plateau", f"N{n}_plateau", rel <= 0.15, rel, 0.15, gamma=1000.0, theta=0.5, n=n, value=r.n_mean))
    return out


def suite_threshold(workers: int = 1) -> list[CheckResult]:
    d = _d_of_gamma(1000.0)
    m = exact_maximum_search(1, d)
    return [_result("threshold", "max_N1_exceeds_one", m.n_at_max > 1.0, m.n_at_max, 1.0, gamma=1000.0, theta_max=m.theta_max)]


DQ_POINTS = ((4.0, 0.5, 1, 1), (4.0, 0.3, 2, 3), (14.0, 0.9, 2, 3), (2.5, 0.1, 3, 1), (13.93, 0.7, 4, 4))


def suite_oracles(workers: int = 1) -> list[CheckResult]:
    out = []
    idx = range(1, 6)
    diff = max(abs(v_region_integration(n, k, 4.0, 0.3) - v_closed(n, k, 4.0, 0.3)) for n in idx for k in idx)
    out.append(_result("oracles", "closed_vs_region", diff < 1e-12, diff, 1e-12, d=4.0, theta=0.3, n_max=5))
    worst = 0.0
    for d, th, n, k in DQ_POINTS:
        q = v_double_quadrature(n, k, d, th)
        worst = max(worst, abs(q.value - v_closed(n, k, d, th)))
    out.append(_result("oracles", "closed_vs_double_quadrature", worst < 1e-8, worst, 1e-8, points=[list(x) for x in DQ_POINTS]))
    const = abs(kernel_constant_term(2, 3, 4.0, 0.3))
    out.append(_result("oracles", "kernel_constant_term", const < 1e-8, const, 1e-8, d=4.0, theta=0.3, n=2, n2=3))
    p = params_from(gamma=2.0, theta=0.5)
    cols = np.arange(1, 5)
    U, V, _ = closed_form_block(p.d, p.theta, cols, cols)
    for label, kw in (("closed_vs_ode_M64", {"M": 64}), ("closed_vs_ode_richardson", {"ladder": (128, 256, 512), "method": "expm"})):
        tm = evolve_bogoliubov_ode(p, n_interest=4, **kw)
        diff = float(max(np.abs(tm.U - U).max(), np.abs(tm.V - V).max()))
        out.append(_result("oracles", label, diff < 1e-4, diff, 1e-4, gamma=2.0, theta=0.5, n_max=4, **{k: list(v) if isinstance(v, tuple) else v for k, v in kw.items()}))
    return out


UNITARITY_LADDER = (32, 64, 128, 256)


def _ladder_check(suite, check, residuals, **params) -> CheckResult:
    decreasing = all(b < a for a, b in zip(residuals, residuals[1:]))
    ok = decreasing and residuals[-1] < 1e-3
    return _result(suite, check, ok, residuals[-1], 1e-3, decreasing=decreasing, residuals=list(residuals), **params)


def suite_unitarity(workers: int = 1) -> list[CheckResult]:
    out = []
    for v in (0.5, 0.9):
        res = [unitarity_residuals(bogoliubov_matrices(v, N), k=8) for N in UNITARITY_LADDER]
        out.append(_ladder_check("unitarity", "alpha_beta_normalization", [r.normalization for r in res], v=v, k=8))
        out.append(_ladder_check("unitarity", "alpha_beta_symmetry", [r.symmetry for r in res], v=v, k=8))
    # the columns must cover the support n' ~ k d^theta of the first k rows
    for v, theta in ((math.sqrt(3.0) / 2.0, 0.3), (0.6, 0.7)):
        p = params_from(v=v, theta=theta)
        res = []
        for N in UNITARITY_LADDER:
            U, V, _ = closed_form_block(p.d, p.theta, np.arange(1, 9), np.arange(1, N + 1))
            res.append(transform_unitarity(U, V, k=8).normalization)
        out.append(_ladder_check("unitarity", "U_V_normalization", res, v=v, d=p.d, theta=theta, k=8))
    return out


def suite_tail_slope(workers: int = 1) -> list[CheckResult]:
    d = _d_of_gamma(10.0)
    ns = np.unique(np.round(np.geomspace(64, 256, 9)).astype(int))
    s = tail_slope(d, 0.5, ns)
    return [_result("tail-slope", "loglog_slope", abs(s + 1.0) <= 0.1, s, 0.1, gamma=10.0, theta=0.5, n_range=[64, 256])]


SCAN_GRID = tuple(np.arange(256) / 256.0)


def shape_scans(workers: int = 1, grid=SCAN_GRID) -> dict:
    """``{gamma: {n: values on grid}}`` for the structural checks."""
    out = {}
    for gamma in SCAN_GAMMAS:
        rows = scan_theta((1, 2), _d_of_gamma(gamma), grid, tol=1e-8, workers=workers)
        out[gamma] = {n: np.array([r.n_mean for r in rows if r.n == n]) for n in (1, 2)}
    return out


def pronounced_maxima(theta: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Positions of local maxima whose prominence is at least a quarter of the plateau mean."""
    plateau = values[(theta >= 0.3) & (theta <= 0.7)].mean()
    peaks, _ = find_peaks(values, prominence=0.25 * plateau)
    return theta[peaks]


def suite_scan_shape(workers: int = 1, scans: dict | None = None) -> list[CheckResult]:
    grid = np.asarray(SCAN_GRID)
    scans = scans or shape_scans(workers)
    out = []
    for gamma in SCAN_GAMMAS:
        d = _d_of_gamma(gamma)
        vals = scans[gamma][1]
        # left endpoint is exact; the right limit is approached from below
        near_one = mean_particle_number(1, d, 1.0 - 1e-6, tol=1e-10).n_mean
        edge = max(abs(vals[0]), near_one) / vals.max()
        out.append(_result("scan-shape", "vanishes_at_endpoints", edge < 1e-2, edge, 1e-2, gamma=gamma, n=1))
        # below gamma ~ 100 the n = 1 curve carries a secondary bump near theta ~ 0.25
        for n in (1, 2) if gamma >= 100 else ():
            peaks = pronounced_maxima(grid, scans[gamma][n])
            out.append(_result("scan-shape", f"maxima_count_n{n}", len(peaks) == n, len(peaks), n,
                               gamma=gamma, n=n, positions=[float(x) for x in peaks]))
    v100 = scans[100.0][1][(grid >= 0.3) & (grid <= 0.7)]
    var = (v100.max() - v100.min()) / v100.mean()
    out.append(_result("scan-shape", "plateau_variation", var < 0.25, var, 0.25, gamma=100.0, theta_range=[0.3, 0.7]))
    top = SCAN_GAMMAS[-3:]
    heights = [float(scans[g][1].max()) for g in top]
    logs = [math.log(_d_of_gamma(g)) for g in top]
    slopes = [float(h2 - h1) / (l2 - l1) for h1, h2, l1, l2 in zip(heights, heights[1:], logs, logs[1:])]
    dev = max(abs(s * math.pi**2 - 1.0) for s in slopes)
    out.append(_result("scan-shape", "max_height_log_growth", all(np.diff(heights) > 0) and dev < 0.2, dev, 0.2,
                       gammas=list(top), heights=heights, slopes=slopes))
    return out


def suite_orthonormality(workers: int = 1) -> list[CheckResult]:
    p = params_from(v=0.6, rho=0.3)
    out = []
    for t in (0.0, 0.5 * p.T, p.T):
        gram, _ = kg_gram_matrix(p, 8, t)
        dev = float(np.abs(gram - np.eye(8)).max())
        out.append(_result("orthonormality", "kg_gram_identity", dev < 1e-6, dev, 1e-6, v=0.6, rho=0.3, t=t, modes=8))
    return out


SUITES: dict[str, Callable[..., list[CheckResult]]] = {
    "zeros": suite_zeros,
    "maxima": suite_maxima,
    "plateau": suite_plateau,
    "threshold": suite_threshold,
    "oracles": suite_oracles,
    "unitarity": suite_unitarity,
    "tail-slope": suite_tail_slope,
    "scan-shape": suite_scan_shape,
    "orthonormality": suite_orthonormality,
}


def run_suites(names, workers: int = 1) -> list[CheckResult]:
    """Run the named suites (``"all"`` runs every suite) in a fixed order."""
    names = list(names)
    if "all" in names:
        names = list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)} or 'all'")
    out = []
    for name in dict.fromkeys(names):
        out.extend(SUITES[name](workers=workers))
    return out
