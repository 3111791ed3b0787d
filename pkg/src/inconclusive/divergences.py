"""Quantum and classical divergences.

All values are in nats.  :class:`RenyiPair` caches the spectral data of an
ordered pair ``(rho, sigma)`` so that whole families of Renyi divergences can
be evaluated on grids of orders at once; the module-level functions are thin
wrappers that build one for a single evaluation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from scipy.special import logsumexp, xlogy

from ._optimize import UNIT_GRID, maximize_unit
from .errors import ConvergenceFailure, OptimizerStalled, UnsupportedOrder
from .linalg import _log_eig_scaled_2x2, eig, log_eig_scaled, matrix_function
from .states import as_state

FAMILIES = ("petz", "sandwiched", "reverse_sandwiched")
_STAR_EPS = (1e-3, 5e-4, 2.5e-4)
_STAR_TOL = 1e-5


@dataclass(frozen=True)
class DivergenceFamily:
    """A Renyi family tag together with its order ``s``."""

    tag: str
    s: float

    def validate(self) -> None:
        s = self.s
        if self.tag not in FAMILIES:
            raise UnsupportedOrder(f"unknown family {self.tag!r}")
        if not (s > 0 and s != 1 and math.isfinite(s)):
            raise UnsupportedOrder(f"order {s} is not allowed")
        if self.tag == "petz" and s > 2:
            raise UnsupportedOrder("Petz orders above 2 are not supported")
        if self.tag == "reverse_sandwiched" and s >= 1:
            raise UnsupportedOrder("reverse sandwiched orders must lie in (0, 1)")


class RenyiPair:
    """Divergences of ``rho`` with respect to ``sigma``."""

    def __init__(self, rho, sigma, _swapped: "RenyiPair | None" = None):
        self.rho = as_state(rho)
        self.sigma = as_state(sigma)
        if self.rho.dim != self.sigma.dim:
            raise ValueError("states have different dimensions")
        self.dim = self.rho.dim
        sr, ss = self.rho.spectrum, self.sigma.spectrum
        self._logp = np.log(sr.eigenvalues)
        self._logq = np.log(ss.eigenvalues)
        ov = np.abs(sr.eigenvectors.conj().T @ ss.eigenvectors) ** 2
        self._ov = ov
        with np.errstate(divide="ignore"):
            self._log_ov = np.log(ov)
        v = ss.eigenvectors
        self._w = v.conj().T @ self.rho.matrix @ v
        self._swapped = _swapped

    @property
    def swapped(self) -> "RenyiPair":
        """The pair with arguments exchanged; spectra are shared."""
        if self._swapped is None:
            self._swapped = RenyiPair(self.sigma, self.rho, _swapped=self)
        return self._swapped

    # --- Umegaki and its endpoints -------------------------------------------------

    @cached_property
    def relative_entropy(self) -> float:
        p = np.exp(self._logp)
        cross = float(np.sum(p[:, None] * self._ov * self._logq[None, :]))
        return max(float(np.sum(p * self._logp)) - cross, 0.0)

    @cached_property
    def max_relative_entropy(self) -> float:
        return float(log_eig_scaled(self._w, -0.5 * self._logq)[0])

    # --- Petz ----------------------------------------------------------------------

    def petz_log_q(self, s) -> np.ndarray:
        """``log Tr rho^s sigma^(1-s)`` for an array of orders."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        terms = (s[:, None, None] * self._logp[None, :, None]
                 + (1.0 - s)[:, None, None] * self._logq[None, None, :]
                 + self._log_ov[None])
        return logsumexp(terms.reshape(len(s), -1), axis=1)

    def petz(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.petz_log_q(s) / (s - 1.0)
        return np.where(s == 1.0, self.relative_entropy, out)

    # --- sandwiched ----------------------------------------------------------------

    def sandwiched_log_q(self, s) -> np.ndarray:
        """``log Tr (sigma^a rho sigma^a)^s`` with ``a = (1-s)/(2s)``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        a = (1.0 - s) / (2.0 * s)
        h = a[:, None] * self._logq[None, :]
        if self.dim == 2:
            w = self._w
            det = float(w[0, 0].real * w[1, 1].real - abs(w[0, 1]) ** 2)
            lam = _log_eig_scaled_2x2(w[0, 0].real, w[1, 1].real, abs(w[0, 1]) ** 2, det,
                                      h[:, 0], h[:, 1])
        else:
            lam = np.array([log_eig_scaled(self._w, row) for row in h])
        return logsumexp(s[:, None] * lam, axis=1)

    def sandwiched(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.sandwiched_log_q(s) / (s - 1.0)
        return np.where(s == 1.0, self.relative_entropy, out)

    def reverse_sandwiched(self, s) -> np.ndarray:
        """``s/(1-s) * D~_{1-s}(sigma || rho)`` for ``s`` in (0, 1)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return s / (1.0 - s) * self.swapped.sandwiched(1.0 - s)

    def family(self, tag: str):
        return {"petz": self.petz, "sandwiched": self.sandwiched,
                "reverse_sandwiched": self.reverse_sandwiched}[tag]

    # --- derived quantities ----------------------------------------------------------

    @cached_property
    def chernoff(self) -> float:
        _, val = maximize_unit(lambda s: -self.petz_log_q(s))
        return max(val, 0.0)

    @cached_property
    def fidelity(self) -> float:
        a = matrix_function(self.rho.matrix, "sqrt", self.rho.spectrum)
        b = matrix_function(self.sigma.matrix, "sqrt", self.sigma.spectrum)
        return float(_trace_norm(a @ b) ** 2)

    @cached_property
    def d_star(self) -> float:
        return d_star_extrapolated(self)


def d_star_extrapolated(pair: RenyiPair, eps=_STAR_EPS, tol: float = _STAR_TOL,
                        min_eps: float = 1e-8) -> float:
    """Limit of the reverse sandwiched divergence at order one.

    The reverse divergence at order ``1 - e`` equals ``-log Q(e) / e`` where
    ``Q(e) = Tr(rho^a sigma rho^a)^e`` and ``a = (1-e)/(2e)``.  Three-point
    Richardson extrapolation in ``e`` is applied; if the two last
    extrapolants disagree by more than ``tol`` the step is halved (nearly
    degenerate spectra of ``rho`` need smaller steps).
    """
    rev = pair.swapped
    e0 = float(eps[0])
    ratio = float(eps[1]) / e0
    while e0 >= min_eps:
        es = np.array([e0, e0 * ratio, e0 * ratio * ratio])
        f = -rev.sandwiched_log_q(es) / es
        r1 = (f[1] - ratio * f[0]) / (1 - ratio)
        r2 = (f[2] - ratio * f[1]) / (1 - ratio)
        r = (r2 - ratio * ratio * r1) / (1 - ratio * ratio)
        if abs(r2 - r1) <= tol and abs(r - r2) <= tol:
            return float(r)
        e0 *= ratio * ratio
    raise ConvergenceFailure("Richardson extrapolants for D* did not agree")


# --- public functions ----------------------------------------------------------------


def renyi(rho, sigma, s: float, family: str = "petz") -> float:
    """Renyi divergence of order ``s`` from the named family, in nats."""
    DivergenceFamily(family, float(s)).validate()
    pair = RenyiPair(rho, sigma)
    return float(pair.family(family)(s)[0])


def petz_renyi(rho, sigma, s: float) -> float:
    return renyi(rho, sigma, s, "petz")


def sandwiched_renyi(rho, sigma, s: float) -> float:
    return renyi(rho, sigma, s, "sandwiched")


def reverse_sandwiched_renyi(rho, sigma, s: float) -> float:
    return renyi(rho, sigma, s, "reverse_sandwiched")


def _trace_norm(x: np.ndarray) -> float:
    """Sum of singular values, from the spectrum of ``x x^dagger``."""
    g = x @ x.conj().T
    lam = eig(0.5 * (g + g.conj().T)).eigenvalues
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))))


def relative_entropy(rho, sigma) -> float:
    return RenyiPair(rho, sigma).relative_entropy


def max_relative_entropy(rho, sigma) -> float:
    return RenyiPair(rho, sigma).max_relative_entropy


def min_relative_entropy_zero(rho, sigma) -> float:
    """``-log Tr P sigma`` with ``P`` the support projector of ``rho``."""
    r = as_state(rho, require_full_rank=False)
    sig = as_state(sigma, require_full_rank=False)
    spec = r.spectrum
    v = spec.eigenvectors[:, spec.eigenvalues > 1e-12]
    overlap = float(np.real(np.trace(v.conj().T @ sig.matrix @ v)))
    return -math.log(overlap) if overlap > 0 else math.inf


def fidelity(rho, sigma) -> float:
    """``(Tr |sqrt(rho) sqrt(sigma)|)^2``."""
    r = as_state(rho, require_full_rank=False)
    sig = as_state(sigma, require_full_rank=False)
    a = matrix_function(r.matrix, "sqrt", r.spectrum)
    b = matrix_function(sig.matrix, "sqrt", sig.spectrum)
    return float(_trace_norm(a @ b) ** 2)


def chernoff(rho, sigma) -> float:
    return RenyiPair(rho, sigma).chernoff


def d_star(rho, sigma) -> float:
    """Order-one limit of the reverse sandwiched divergence."""
    pair = RenyiPair(rho, sigma)
    val = pair.d_star
    lo, hi = -math.log(pair.fidelity), pair.relative_entropy
    if not (lo - 1e-5 <= val <= hi + 1e-5):
        warnings.warn(f"D* = {val:.10g} outside [{lo:.10g}, {hi:.10g}]", OptimizerStalled,
                      stacklevel=2)
    return val


def projective_metrics(rho, sigma) -> tuple[float, float]:
    """Sum and maximum of the two max-relative entropies."""
    pair = RenyiPair(rho, sigma)
    a, b = pair.max_relative_entropy, pair.swapped.max_relative_entropy
    return a + b, max(a, b)


# --- measured relative entropy -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasuredResult:
    """Optimised measurement: ``basis`` columns define the rank-one projectors."""

    value: float
    basis: np.ndarray
    quality: str

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        b = self.basis
        return tuple(np.outer(b[:, k], b[:, k].conj()) for k in range(b.shape[1]))


def _basis_divergence(basis: np.ndarray, rho: np.ndarray, sigma: np.ndarray) -> float:
    p = np.real(np.einsum("ik,ij,jk->k", basis.conj(), rho, basis))
    q = np.real(np.einsum("ik,ij,jk->k", basis.conj(), sigma, basis))
    p = np.clip(p, 0.0, None)
    q = np.clip(q, 1e-300, None)
    return float(np.sum(xlogy(p, p) - xlogy(p, q)))


def _hermitian_from(params: np.ndarray, d: int) -> np.ndarray:
    h = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = params[:m] + 1j * params[m:2 * m]
    h = h + h.conj().T
    h[np.diag_indices(d)] = params[2 * m:]
    return h


def measured_relative_entropy(rho, sigma, restarts: int = 8, seed: int = 20240601) -> MeasuredResult:
    """Best relative entropy reachable with a rank-one projective measurement.

    Local optimisation over unitaries ``B exp(iH)`` starts from the
    eigenbases of ``rho``, ``sigma`` and ``log rho - log sigma`` and from
    ``restarts`` random unitaries drawn with a fixed seed.  The quality flag
    is ``"exact"`` when the states commute (the value then equals the
    relative entropy), ``"converged"`` when the two best local optima agree
    and ``"lower_bound"`` otherwise.
    """
    r, s = as_state(rho), as_state(sigma)
    d = r.dim
    rm, sm = r.matrix, s.matrix
    commuting = np.max(np.abs(rm @ sm - sm @ rm)) < 1e-13
    starts = [r.spectrum.eigenvectors, s.spectrum.eigenvectors]
    diff = matrix_function(rm, "log", r.spectrum) - matrix_function(sm, "log", s.spectrum)
    starts.append(eig(0.5 * (diff + diff.conj().T)).eigenvectors)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        qmat, _ = np.linalg.qr(g)
        starts.append(qmat)
    npar = d * d
    results = []
    for base in starts:
        base = np.asarray(base, dtype=complex)

        def objective(x, base=base):
            return -_basis_divergence(base @ expm(1j * _hermitian_from(x, d)), rm, sm)

        res = minimize(objective, np.zeros(npar), method="BFGS", options={"gtol": 1e-10})
        results.append((-res.fun, base @ expm(1j * _hermitian_from(res.x, d))))
        start_val = _basis_divergence(base, rm, sm)
        results.append((start_val, base))
    results.sort(key=lambda t: -t[0])
    best, basis = results[0]
    if commuting:
        quality = "exact"
    elif len(results) > 1 and results[0][0] - max(v for v, _ in results[1:3]) < 1e-8:
        quality = "converged"
    else:
        quality = "lower_bound"
    return MeasuredResult(float(best), basis, quality)
