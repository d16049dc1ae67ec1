"""Quadrature helpers for smooth oscillatory integrands on finite intervals.

Two independent rules are provided so that every integral can be checked
against a second route:

* :func:`adaptive_integral` - QUADPACK adaptive Gauss-Kronrod (via SciPy),
  applied piecewise on caller-supplied break points;
* :func:`romberg_integral` - Richardson-extrapolated trapezoid sums on
  nested uniform grids, applied on the same pieces.

:func:`gk15_panels` exposes a fixed Gauss-Kronrod 7/15 panel rule whose nodes
can be shared between many integrands with a common variable, which is what
the dense matrix builders need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad, romb

__all__ = [
    "QuadratureConfig",
    "QuadratureError",
    "QuadResult",
    "adaptive_integral",
    "romberg_integral",
    "gk15_panels",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Numerical policy for one-dimensional quadrature.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Requested accuracy; a result is accepted when its error estimate is
        below ``max(abs_tol, rel_tol * |value|)``.
    max_subdivisions : int
        Bisection budget per piece (adaptive rule) or the largest refinement
        level (Romberg rule, capped at 24).
    oscillation_split : bool
        Split the interval at the integrand half-periods before refining.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 200
    oscillation_split: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be an integer >= 1")

    def accepts(self, value: complex, error: float) -> bool:
        return error <= max(self.abs_tol, self.rel_tol * abs(value))


class QuadratureError(RuntimeError):
    """Raised when the accuracy target is missed within the budget.

    The best available ``estimate`` and its ``error`` are attached.
    """

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error:.3e})")
        self.estimate = estimate
        self.error = error


class QuadResult(NamedTuple):
    value: complex
    error: float


def _pieces(a: float, b: float, breaks) -> np.ndarray:
    pts = np.asarray([a, b] if breaks is None else breaks, dtype=float)
    pts = np.unique(np.clip(np.concatenate([[a, b], pts]), a, b))
    return pts


def adaptive_integral(
    f: Callable[[float], complex],
    a: float,
    b: float,
    config: QuadratureConfig = QuadratureConfig(),
    breaks=None,
    raise_on_failure: bool = True,
) -> QuadResult:
    """Integrate a complex scalar function with adaptive Gauss-Kronrod.

    The interval is split at ``breaks`` (ignored unless
    ``config.oscillation_split``) and each piece is integrated separately.
    """
    pts = _pieces(a, b, breaks if config.oscillation_split else None)
    npc = len(pts) - 1
    total, err = 0j, 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        # full_output silences QUADPACK warnings; the error estimate decides
        val, e, *_ = quad(
            f,
            lo,
            hi,
            complex_func=True,
            epsabs=config.abs_tol / npc,
            epsrel=config.rel_tol,
            limit=int(config.max_subdivisions),
            full_output=1,
        )
        total += val
        err += float(np.hypot(e.real, e.imag)) if isinstance(e, complex) else abs(e)
    if raise_on_failure and not config.accepts(total, err):
        raise QuadratureError("adaptive quadrature missed its tolerance", total, err)
    return QuadResult(complex(total), err)


def romberg_integral(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    config: QuadratureConfig = QuadratureConfig(),
    breaks=None,
    raise_on_failure: bool = True,
) -> QuadResult:
    """Integrate with Romberg extrapolation on nested uniform grids.

    ``f`` must accept an array of abscissae.  On each piece the level ``k``
    (``2**k + 1`` samples) is raised until two consecutive extrapolated
    values agree; the last difference is the error estimate.
    """
    pts = _pieces(a, b, breaks if config.oscillation_split else None)
    npc = len(pts) - 1
    top = min(int(config.max_subdivisions), 24)
    total, err = 0j, 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        prev = None
        for k in range(2, top + 1):
            x = np.linspace(lo, hi, 2**k + 1)
            cur = romb(np.asarray(f(x), dtype=complex), dx=(hi - lo) / 2**k)
            if prev is not None:
                diff = abs(cur - prev)
                if diff <= max(config.abs_tol / npc, config.rel_tol * abs(cur)) and k >= 4:
                    break
            prev = cur
        total += cur
        err += diff
    if raise_on_failure and not config.accepts(total, err):
        raise QuadratureError("Romberg quadrature missed its tolerance", total, err)
    return QuadResult(complex(total), err)


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327,
])
GK15_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK15_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G7_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


def gk15_panels(breaks) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes and weights of the composite G7/K15 rule on the given panels.

    Returns
    -------
    y : ndarray
        All Kronrod nodes, panel by panel.
    wk : ndarray
        Kronrod weights scaled to the panels.
    wd : ndarray
        ``wk - wg``; ``|sum(wd * f(y))|`` estimates the error of the sum.
    """
    br = np.asarray(breaks, dtype=float)
    half = 0.5 * np.diff(br)
    mid = 0.5 * (br[1:] + br[:-1])
    y = (mid[:, None] + half[:, None] * GK15_NODES[None, :]).ravel()
    wk = (half[:, None] * GK15_WEIGHTS[None, :]).ravel()
    wg = (half[:, None] * G7_WEIGHTS[None, :]).ravel()
    return y, wk, wk - wg
