"""Grid search followed by bounded scalar refinement on (0, 1).

Suprema over ``s > 1`` are taken in the variable ``u = 1/s``.  The grid is
logistic so that both ends of the interval are sampled densely; limits at
the ends are supplied separately by callers in closed form.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import OptimizerStalled

GRID_POINTS = 512
GRID_SPAN = 14.0
XATOL = 1e-10


def unit_grid(n: int = GRID_POINTS, span: float = GRID_SPAN) -> np.ndarray:
    z = np.linspace(-span, span, n)
    return 1.0 / (1.0 + np.exp(-z))


UNIT_GRID = unit_grid()


def maximize_unit(f, values: np.ndarray | None = None, grid: np.ndarray = UNIT_GRID) -> tuple[float, float]:
    """Maximise ``f`` over the open unit interval.

    ``f`` must accept numpy arrays.  Precomputed ``values`` of ``f`` on
    ``grid`` may be passed to skip the grid evaluation.  Returns
    ``(argmax, max)``.
    """
    vals = f(grid) if values is None else values
    vals = np.where(np.isnan(vals), -np.inf, vals)
    i = int(np.argmax(vals))
    best_x, best = float(grid[i]), float(vals[i])
    if not np.isfinite(best):
        return best_x, best
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi - lo <= XATOL:
        return best_x, best

    def neg(x):
        v = float(f(np.array([x]))[0])
        return np.inf if np.isnan(v) else -v

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": XATOL})
    if not res.success:
        warnings.warn("bounded refinement did not converge", OptimizerStalled, stacklevel=2)
    if -res.fun > best:
        return float(res.x), float(-res.fun)
    return best_x, best


def minimize_unit(f, values=None, grid=UNIT_GRID) -> tuple[float, float]:
    x, v = maximize_unit(lambda u: -f(u), None if values is None else -values, grid)
    return x, -v


def maximize_unit_2d(f, grid: np.ndarray, values: np.ndarray | None = None, rounds: int = 6):
    """Coordinate-wise refinement of a 2-D grid maximum over ``(0,1)^2``.

    ``f(u, v)`` must broadcast.  Returns ``((u, v), max)``.
    """
    vals = f(grid[:, None], grid[None, :]) if values is None else values
    vals = np.where(np.isnan(vals), -np.inf, vals)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    u, v, best = float(grid[i]), float(grid[j]), float(vals[i, j])
    if not np.isfinite(best):
        return (u, v), best
    n = len(grid)
    ulo, uhi = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
    vlo, vhi = grid[max(j - 1, 0)], grid[min(j + 1, n - 1)]
    for _ in range(rounds):
        prev = best
        r = minimize_scalar(lambda x: -float(f(x, v)), bounds=(ulo, uhi), method="bounded",
                            options={"xatol": XATOL})
        if -r.fun > best:
            u, best = float(r.x), float(-r.fun)
        r = minimize_scalar(lambda y: -float(f(u, y)), bounds=(vlo, vhi), method="bounded",
                            options={"xatol": XATOL})
        if -r.fun > best:
            v, best = float(r.x), float(-r.fun)
        if best - prev <= 1e-14 * max(1.0, abs(best)):
            break
    return (u, v), best
