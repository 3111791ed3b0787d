"""Achievable exponent regions for tests that may abstain.

Type-I and type-II error exponents are ``A`` and ``B``; ``K`` and ``L`` are
the exponents at which the probability of an inconclusive outcome vanishes
under ``rho`` and ``sigma``.  All quantities are in nats.

Optimisations over an order ``s > 1`` use ``u = 1/s`` on a logistic grid
with bounded refinement; the limits ``s -> 1`` (relative entropy) and
``s -> infinity`` (max-relative entropy) enter in closed form.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._optimize import UNIT_GRID, maximize_unit, maximize_unit_2d, minimize_unit, unit_grid
from .divergences import RenyiPair
from .errors import InputError
from .linalg import eig, matrix_function

LN2 = math.log(2.0)
SCAN_KINDS = (
    "deterministic_hoeffding",
    "high_conclusiveness",
    "onesided",
    "conclusive_KL_slice",
    "classical_reject",
    "symmetric",
)
_GRID_2D = unit_grid(128)


@dataclass(frozen=True)
class ConclusiveResult:
    inside: bool
    slack_a: float
    slack_b: float


@dataclass(frozen=True)
class RejectBounds:
    """Achievable and converse type-II exponents; their gap is unresolved in general."""

    achievable: float
    converse: float

    @property
    def gap(self) -> float:
        return self.converse - self.achievable


@dataclass(frozen=True, eq=False)
class RegionBoundary:
    x: np.ndarray
    y: np.ndarray
    x_label: str
    y_label: str
    meta: dict = field(default_factory=dict)

    def scaled(self, factor: float) -> "RegionBoundary":
        """Copy with both coordinates multiplied by ``factor`` (1/ln 2 for bits)."""
        return RegionBoundary(self.x * factor, self.y * factor, self.x_label, self.y_label, dict(self.meta))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        for a, b in zip(self.x, self.y):
            w.writerow([f"{a:.17g}", f"{b:.17g}"])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "x_label": self.x_label,
            "y_label": self.y_label,
            "points": [[float(a), float(b)] for a, b in zip(self.x, self.y)],
            "meta": self.meta,
        })

    @classmethod
    def from_json(cls, text: str) -> "RegionBoundary":
        data = json.loads(text)
        pts = np.asarray(data["points"], dtype=float).reshape(-1, 2)
        return cls(pts[:, 0], pts[:, 1], data["x_label"], data["y_label"], data.get("meta", {}))


class ExponentRegions:
    """Exponent-region computations for a fixed pair ``(rho, sigma)``.

    Grid values of every Renyi curve are cached, so repeated queries on the
    same pair cost only a refinement step each.
    """

    def __init__(self, rho, sigma):
        self.pair = RenyiPair(rho, sigma)
        self._dirs = {"rs": self.pair, "sr": self.pair.swapped}
        self._cache: dict = {}

    # --- cached curves ---------------------------------------------------------------

    def _curve(self, direction: str, family: str) -> np.ndarray:
        key = ("low", direction, family)
        if key not in self._cache:
            self._cache[key] = self._dirs[direction].family(family)(UNIT_GRID)
        return self._cache[key]

    def _tail(self, direction: str, grid: np.ndarray = UNIT_GRID) -> np.ndarray:
        """Sandwiched divergence at ``s = 1/u`` on ``grid``."""
        key = ("tail", direction, len(grid))
        if key not in self._cache:
            self._cache[key] = self._dirs[direction].sandwiched(1.0 / grid)
        return self._cache[key]

    def D(self, direction: str = "rs") -> float:
        return self._dirs[direction].relative_entropy

    def D_max(self, direction: str = "rs") -> float:
        return self._dirs[direction].max_relative_entropy

    @property
    def d_omega(self) -> float:
        return self.D_max("rs") + self.D_max("sr")

    @property
    def d_xi(self) -> float:
        return max(self.D_max("rs"), self.D_max("sr"))

    # --- Hoeffding-type functions -----------------------------------------------------

    def hoeffding(self, a: float, direction: str = "sr", family: str = "petz") -> float:
        """``sup_{0<s<1} ((s-1)/s) (a - D_s)`` for the pair in ``direction``.

        ``direction="sr"`` gives ``H_a(sigma || rho)``.
        """
        div = self._dirs[direction].family(family)

        def obj(s):
            return (1.0 - s) / s * (div(s) - a)

        vals = (1.0 - UNIT_GRID) / UNIT_GRID * (self._curve(direction, family) - a)
        _, best = maximize_unit(obj, vals)
        if a <= 0.0 and family in ("petz", "reverse_sandwiched"):
            best = max(best, self._dirs[direction].swapped.relative_entropy - a)
        return max(best, 0.0)

    def han_kobayashi(self, r: float, direction: str = "sr") -> float:
        """``sup_{s>1} ((s-1)/s) (r - D~_s)`` for the pair in ``direction``."""
        pair = self._dirs[direction]

        def obj(u):
            return (1.0 - u) * (r - pair.sandwiched(1.0 / u))

        _, best = maximize_unit(obj, (1.0 - UNIT_GRID) * (r - self._tail(direction)))
        return max(best, r - pair.max_relative_entropy, 0.0)

    def milan_threshold(self, direction: str = "sr") -> float:
        """Smallest ``r`` from which the anti-divergence equals ``r - D_max``.

        Equals ``D_max + lim_{s->inf} (s-1)(D_max - D~_s)``; the limit of this
        nondecreasing function is estimated from its largest sampled value
        and a Richardson step in ``1/s``.
        """
        pair = self._dirs[direction]
        dmax = pair.max_relative_entropy
        s = np.concatenate([1.0 / UNIT_GRID, [1e5, 2e5]])
        g = (s - 1.0) * dmax - pair.sandwiched_log_q(s)
        limit = 2.0 * g[-1] - g[-2]
        return dmax + max(float(np.max(g)), float(limit))

    # --- conclusive region ------------------------------------------------------------

    def _tail_inf(self, direction: str, weight, weight_u0: float, at_u1: float) -> float:
        """``inf_u weight(u) + D~_{1/u}`` plus the two endpoint limits."""
        pair = self._dirs[direction]
        vals = weight(UNIT_GRID) + self._tail(direction)
        _, best = minimize_unit(lambda u: weight(u) + pair.sandwiched(1.0 / u), vals)
        return min(best, weight_u0 + pair.max_relative_entropy, at_u1)

    def _weighted_inf(self, coef: float, direction: str) -> float:
        """``inf_{s>1} s/(s-1) coef + D~_s``."""
        key = ("winf", direction, coef)
        if key not in self._cache:
            at_u1 = self.D(direction) if coef == 0 else math.inf
            self._cache[key] = self._tail_inf(direction, lambda u: coef / (1.0 - u), coef, at_u1)
        return self._cache[key]

    def conclusive_region(self, a: float, b: float, k: float, l: float) -> ConclusiveResult:
        rhs_a = self._weighted_inf(l, "sr")
        rhs_b = self._weighted_inf(k, "rs")
        sa, sb = rhs_a - (a + k), rhs_b - (b + l)
        return ConclusiveResult(sa >= 0 and sb >= 0, sa, sb)

    def min_conclusiveness_exponent(self, a: float, b: float) -> float:
        """Smallest ``K`` for which some ``L`` makes ``(a, b, K, L)`` feasible."""
        if a + b > self.d_omega + 1e-12:
            return math.inf
        rs, sr = self._dirs["rs"], self._dirs["sr"]
        ds = self._tail("rs", _GRID_2D)
        dt = self._tail("sr", _GRID_2D)
        dmax_rs, dmax_sr = rs.max_relative_entropy, sr.max_relative_entropy

        def g(u, v):
            du = rs.sandwiched(1.0 / np.atleast_1d(u)).reshape(np.shape(u)) if np.ndim(u) else float(rs.sandwiched(1.0 / u)[0])
            dv = sr.sandwiched(1.0 / np.atleast_1d(v)).reshape(np.shape(v)) if np.ndim(v) else float(sr.sandwiched(1.0 / v)[0])
            return (1 - u) * (b - du + (1 - v) * (a - dv)) / (u + v - u * v)

        uu, vv = _GRID_2D[:, None], _GRID_2D[None, :]
        vals = (1 - uu) * (b - ds[:, None] + (1 - vv) * (a - dt[None, :])) / (uu + vv - uu * vv)
        _, best = maximize_unit_2d(g, _GRID_2D, vals)

        def edge_u0(v):
            return (b - dmax_rs + (1 - v) * (a - sr.sandwiched(1.0 / v))) / v

        def edge_v0(u):
            return (1 - u) * (b - rs.sandwiched(1.0 / u) + a - dmax_sr) / u

        _, e1 = maximize_unit(edge_u0, (b - dmax_rs + (1 - UNIT_GRID) * (a - self._tail("sr"))) / UNIT_GRID)
        _, e2 = maximize_unit(edge_v0, (1 - UNIT_GRID) * (b - self._tail("rs") + a - dmax_sr) / UNIT_GRID)
        e3 = self.han_kobayashi(b, "rs")
        return max(0.0, best, e1, e2, e3)

    def onesided_boundary(self, a: float) -> float:
        """Largest ``B`` at ``K = 0`` with ``L`` left free."""
        return max(0.0, self.D("rs") - self.han_kobayashi(a, "sr"))

    def d_plus(self) -> float:
        """``inf_{s>1} s/(s-1) D(rho||sigma) + D~_s(sigma||rho)``."""
        return self._weighted_inf(self.D("rs"), "sr")

    def d_plus_simplification(self) -> tuple[bool, float, float]:
        """Whether ``d_plus`` reduces to ``D(rho||sigma) + D_max(sigma||rho)``.

        Returns ``(holds, lhs, rhs)`` with ``rhs = -log Tr exp(P log(rho) P)``
        restricted to the top eigenspace ``P`` of ``rho^-1/2 sigma rho^-1/2``.
        """
        rho = self.pair.rho
        inv_half = matrix_function(rho.matrix, ("power", -0.5), rho.spectrum)
        x = inv_half @ self.pair.sigma.matrix @ inv_half
        spec = eig(0.5 * (x + x.conj().T))
        top = spec.eigenvalues[0]
        basis = spec.eigenvectors[:, spec.eigenvalues >= top * (1 - 1e-9)]
        log_rho = matrix_function(rho.matrix, "log", rho.spectrum)
        y = basis.conj().T @ log_rho @ basis
        inner = eig(0.5 * (y + y.conj().T)).eigenvalues
        rhs = -float(np.log(np.sum(np.exp(inner))))
        lhs = self.D("rs") + self.D_max("sr")
        return lhs >= rhs, lhs, rhs

    # --- reject region ----------------------------------------------------------------

    def reject_branch(self, a: float, k: float, l: float) -> str:
        if a > self.hoeffding(l, "rs"):
            return "hoeffding_high"
        return "boosted" if a >= k else "hoeffding_low"

    def classical_reject_region(self, a: float, k: float, l: float) -> float:
        """Largest ``B`` for commuting pairs; exact piecewise characterisation."""
        h_a = self.hoeffding(a, "sr")
        if a <= self.hoeffding(l, "rs"):
            return max(h_a, self.hoeffding(k, "sr"))
        return h_a

    def quantum_reject_region(self, a: float, k: float, l: float) -> RejectBounds:
        h_a = self.hoeffding(a, "sr")
        achievable = h_a
        if a <= self.hoeffding(l, "rs", "reverse_sandwiched"):
            achievable = max(achievable, self.hoeffding(k, "sr", "sandwiched"))
        if a <= self.hoeffding(l, "rs", "sandwiched"):
            achievable = max(achievable, self.hoeffding(k, "sr", "reverse_sandwiched"))
        converse = h_a
        if a <= self.hoeffding(l, "rs"):
            converse = max(converse, self.hoeffding(k, "sr"))
        return RejectBounds(achievable, max(converse, achievable))

    # --- symmetric setting ------------------------------------------------------------

    def symmetric_boundary(self, z: float, mode: str = "average") -> float:
        """Largest common error exponent when both inconclusive exponents are ``z``.

        ``mode="average"`` bounds the prior-averaged error, ``"maximal"`` the
        larger of the two errors.
        """
        if z < 0:
            raise InputError("inconclusive exponent must be non-negative")
        vals = []
        for direction in ("rs", "sr"):
            at_u1 = self.D(direction) if z == 0 else math.inf
            vals.append(self._tail_inf(direction, lambda u: z * u / (1.0 - u), 0.0, at_u1))
        if mode == "average":
            return max(vals)
        if mode == "maximal":
            return min(vals)
        raise InputError(f"unknown symmetric mode {mode!r}")

    # --- scans ------------------------------------------------------------------------

    def boundary_scan(self, which: str, samples: int = 64, **params) -> RegionBoundary:
        if samples < 2:
            raise InputError("a boundary scan needs at least two samples")
        if which not in SCAN_KINDS:
            raise InputError(f"unknown region {which!r}")
        d_rs, d_sr = self.D("rs"), self.D("sr")
        clipped = False
        k = float(params.get("K", 0.0))
        l = float(params.get("L", 0.0))
        if which == "deterministic_hoeffding":
            x = np.linspace(0.0, d_sr, samples)
            y = [self.hoeffding(a, "sr") for a in x]
        elif which == "high_conclusiveness":
            x = np.linspace(0.0, d_sr, samples)
            y = np.full(samples, d_rs)
        elif which == "onesided":
            x = np.linspace(0.0, self.d_plus(), samples)
            raw = np.array([d_rs - self.han_kobayashi(a, "sr") for a in x])
            clipped = bool(np.any(raw < 0))
            y = np.maximum(raw, 0.0)
        elif which == "conclusive_KL_slice":
            a_raw = self._weighted_inf(l, "sr") - k
            b_raw = self._weighted_inf(k, "rs") - l
            clipped = a_raw < 0 or b_raw < 0
            x = np.linspace(0.0, max(a_raw, 0.0), samples)
            y = np.full(samples, max(b_raw, 0.0))
        elif which == "classical_reject":
            x = np.linspace(0.0, max(d_sr, self.hoeffding(l, "rs")), samples)
            commuting = _commute(self.pair.rho.matrix, self.pair.sigma.matrix)
            if commuting:
                y = [self.classical_reject_region(a, k, l) for a in x]
            else:
                y = [self.quantum_reject_region(a, k, l).achievable for a in x]
        else:
            mode = params.get("mode", "average")
            z_max = float(params.get("Z_max", 1.0))
            x = np.linspace(0.0, z_max, samples)
            y = [self.symmetric_boundary(z, mode) for z in x]
            return RegionBoundary(np.asarray(x), np.asarray(y, float), "Z", "E",
                                  {"which": which, "mode": mode, "clipped": False})
        return RegionBoundary(np.asarray(x, float), np.asarray(y, float), "A", "B",
                              {"which": which, "K": k, "L": l, "clipped": clipped})


def _commute(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.max(np.abs(a @ b - b @ a)) < 1e-13)


# --- module-level wrappers ---------------------------------------------------------------


def hoeffding(a: float, rho, sigma, family: str = "petz") -> float:
    """``H_a(rho || sigma)``."""
    return ExponentRegions(rho, sigma).hoeffding(a, "rs", family)


def han_kobayashi(r: float, rho, sigma) -> float:
    """``H*_r(rho || sigma)``."""
    return ExponentRegions(rho, sigma).han_kobayashi(r, "rs")


def milan_threshold(rho, sigma) -> float:
    """Threshold for ``H*_r(rho || sigma) = r - D_max(rho || sigma)``."""
    return ExponentRegions(rho, sigma).milan_threshold("rs")


def conclusive_region(a, b, k, l, rho, sigma) -> ConclusiveResult:
    return ExponentRegions(rho, sigma).conclusive_region(a, b, k, l)


def min_conclusiveness_exponent(a, b, rho, sigma) -> float:
    return ExponentRegions(rho, sigma).min_conclusiveness_exponent(a, b)


def onesided_boundary(a, rho, sigma) -> float:
    return ExponentRegions(rho, sigma).onesided_boundary(a)


def d_plus(sigma, rho) -> float:
    """``D_+(sigma || rho)``; note the argument order."""
    return ExponentRegions(rho, sigma).d_plus()


def d_plus_simplification(sigma, rho) -> tuple[bool, float, float]:
    return ExponentRegions(rho, sigma).d_plus_simplification()


def classical_reject_region(a, k, l, p, q) -> float:
    return ExponentRegions(p, q).classical_reject_region(a, k, l)


def quantum_reject_region(a, k, l, rho, sigma) -> RejectBounds:
    return ExponentRegions(rho, sigma).quantum_reject_region(a, k, l)


def symmetric_boundary(z, rho, sigma, mode: str = "average") -> float:
    return ExponentRegions(rho, sigma).symmetric_boundary(z, mode)


def boundary_scan(which, rho, sigma, samples: int = 64, **params) -> RegionBoundary:
    return ExponentRegions(rho, sigma).boundary_scan(which, samples, **params)
