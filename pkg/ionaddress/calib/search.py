"""One-dimensional maximum search: a bracketing grid scan, then bounded
Brent refinement (golden section steps with parabolic interpolation)."""
from __future__ import annotations

import logging
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

log = logging.getLogger(__name__)

ITERLIMIT = 200  # iteration limit


class CalibrationError(Exception):
    """Raised when a calibration cannot find or trust its optimum."""


class SearchResult(NamedTuple):
    x: float
    fx: float
    iterations: int
    converged: bool


class ScanResult(NamedTuple):
    grid: np.ndarray
    values: np.ndarray
    best: int

    @property
    def at_edge(self) -> bool:
        return self.best in (0, len(self.grid) - 1)


def maximize_bounded(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    iterlimit: int = ITERLIMIT,
) -> SearchResult:
    """Maximize a unimodal `f` on ``[lo, hi]`` to within `tol` in x.

    >>> round(maximize_bounded(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-9).x, 6)
    0.3
    """
    if not hi > lo:
        raise ValueError(f"Empty search interval [{lo}, {hi}]")
    res = minimize_scalar(
        lambda x: -f(x),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": tol, "maxiter": iterlimit},
    )
    if res.status == 1:
        log.warning("Failed to converge; exceeded iteration limit")
    log.debug("Bounded search: %.9g after %d iterations", res.x, res.nit)
    return SearchResult(float(res.x), -float(res.fun), int(res.nit), bool(res.success))


def scan(f: Callable[[float], float], grid: Sequence[float]) -> ScanResult:
    points = np.asarray(grid, dtype=float)
    values = np.array([f(x) for x in points])
    return ScanResult(points, values, int(np.argmax(values)))


def refine(f: Callable[[float], float], s: ScanResult, tol: float) -> SearchResult:
    """Bounded search between the best grid point's neighbours.

    Raises `CalibrationError` when the best grid point is on the edge,
    since the maximum may then lie outside the grid. The iteration count
    includes the scan.
    """
    if s.at_edge:
        raise CalibrationError(
            f"No peak inside the scan window [{s.grid[0]:g}, {s.grid[-1]:g}]"
        )
    result = maximize_bounded(f, s.grid[s.best - 1], s.grid[s.best + 1], tol)
    return result._replace(iterations=result.iterations + len(s.grid))


def scan_then_refine(
    f: Callable[[float], float], grid: Sequence[float], tol: float
) -> SearchResult:
    return refine(f, scan(f, grid), tol)


def curvature(f: Callable[[float], float], x: float, h: float) -> float:
    """Central second difference of `f` at `x`."""
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
