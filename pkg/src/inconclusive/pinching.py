"""Pinching maps and the classical pairs they produce on tensor powers.

Pinching ``X`` with respect to a Hermitian ``S`` keeps only the blocks of
``X`` inside the eigenspaces of ``S``.  After pinching ``rho^{(x)k}`` with
respect to ``sigma^{(x)k}`` the two operators commute, so the pair reduces
to two classical distributions over the joint eigenbasis.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .divergences import RenyiPair
from .errors import DimensionBudget
from .linalg import HermitianSpectrum, eig, tensor_power
from .regions import ExponentRegions
from .states import DensityMatrix, as_state

CLUSTER_TOL = 1e-10
MAX_PINCH_DIM = 256


@dataclass(frozen=True, eq=False)
class PinchingBasis:
    """Eigenbasis of the pinching operator grouped into eigenvalue clusters."""

    eigenvectors: np.ndarray
    labels: np.ndarray
    cluster_values: np.ndarray

    @property
    def num_clusters(self) -> int:
        return len(self.cluster_values)

    @property
    def projectors(self) -> list[np.ndarray]:
        v = self.eigenvectors
        return [v[:, self.labels == c] @ v[:, self.labels == c].conj().T
                for c in range(self.num_clusters)]


def _cluster(values: np.ndarray, tol: float = CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Group sorted-descending values whose relative spacing is below ``tol``."""
    labels = np.zeros(len(values), dtype=int)
    reps = [values[0]]
    for i in range(1, len(values)):
        scale = max(abs(values[i - 1]), abs(values[i]), 1e-300)
        if abs(values[i - 1] - values[i]) > tol * scale:
            reps.append(values[i])
        labels[i] = len(reps) - 1
    means = np.array([values[labels == c].mean() for c in range(len(reps))])
    return labels, means


def pinching_basis(operator, spectrum: HermitianSpectrum | None = None) -> PinchingBasis:
    spec = spectrum if spectrum is not None else eig(np.asarray(operator))
    labels, means = _cluster(spec.eigenvalues)
    return PinchingBasis(spec.eigenvectors, labels, means)


def pinch(operator, x) -> np.ndarray:
    """``sum_i P_i X P_i`` over the eigenprojectors ``P_i`` of ``operator``."""
    if isinstance(operator, PinchingBasis):
        basis = operator
    elif isinstance(operator, DensityMatrix):
        basis = pinching_basis(operator.matrix, operator.spectrum)
    else:
        basis = pinching_basis(operator)
    if isinstance(x, DensityMatrix):
        x = x.matrix
    v = basis.eigenvectors
    y = v.conj().T @ np.asarray(x) @ v
    mask = basis.labels[:, None] == basis.labels[None, :]
    return v @ (y * mask) @ v.conj().T


def _power_basis(state, k: int) -> PinchingBasis:
    """Cluster basis of ``state^{(x)k}`` built from the single-copy spectrum."""
    spec = state.spectrum
    logs = np.log(spec.eigenvalues)
    vals = logs
    vecs = spec.eigenvectors
    for _ in range(k - 1):
        vals = (vals[:, None] + logs[None, :]).ravel()
        vecs = np.kron(vecs, spec.eigenvectors)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    labels, _ = _cluster(np.exp(vals))
    means = np.array([np.exp(vals[labels == c]).mean() for c in range(labels.max() + 1)])
    return PinchingBasis(vecs, labels, means)


def pinched_pair(rho, sigma, k: int, direction: str = "pinch_first_arg") -> tuple[np.ndarray, np.ndarray]:
    """Classical distributions equivalent to the pinched ``k``-copy pair.

    ``pinch_first_arg`` pinches ``rho^{(x)k}`` by ``sigma^{(x)k}``;
    ``pinch_second_arg`` pinches ``sigma^{(x)k}`` by ``rho^{(x)k}``.  The
    returned ``(p, q)`` are aligned with the first and second argument.
    """
    r, s = as_state(rho), as_state(sigma)
    if r.dim ** k > MAX_PINCH_DIM:
        raise DimensionBudget(f"dimension {r.dim ** k} exceeds {MAX_PINCH_DIM}")
    if direction == "pinch_first_arg":
        fixed, moving = s, r
    elif direction == "pinch_second_arg":
        fixed, moving = r, s
    else:
        raise ValueError(f"unknown direction {direction!r}")
    basis = _power_basis(fixed, k)
    single = basis.eigenvectors
    m = single.conj().T @ tensor_power(moving.matrix, k) @ single
    pin_vals, fix_vals = [], []
    for c in range(basis.num_clusters):
        idx = np.flatnonzero(basis.labels == c)
        block = m[np.ix_(idx, idx)]
        ev = eig(0.5 * (block + block.conj().T)).eigenvalues
        pin_vals.append(np.clip(ev, 1e-300, None))
        fix_vals.append(np.full(len(idx), basis.cluster_values[c]))
    pin = np.concatenate(pin_vals)
    fix = np.concatenate(fix_vals)
    pin, fix = pin / pin.sum(), fix / fix.sum()
    return (pin, fix) if direction == "pinch_first_arg" else (fix, pin)


def _target(pair: RenyiPair, s: float, direction: str) -> float:
    if s == 1.0:
        return pair.relative_entropy if direction == "pinch_first_arg" else pair.d_star
    if direction == "pinch_first_arg":
        return float(pair.sandwiched(s)[0])
    return float(pair.reverse_sandwiched(s)[0])


@dataclass(frozen=True)
class PinchedRate:
    k: int
    rate: float
    target: float
    bound: float

    @property
    def gap(self) -> float:
        return self.target - self.rate


def pinched_renyi_rate(s: float, rho, sigma, k: int, direction: str = "pinch_first_arg") -> PinchedRate:
    """``(1/k) D_s`` of the pinched ``k``-copy pair with its single-letter target.

    The target is the sandwiched divergence (first argument pinched) or the
    reverse sandwiched divergence (second argument pinched); ``bound`` is
    ``d log(k+1) / k``.
    """
    p, q = pinched_pair(rho, sigma, k, direction)
    cp = RenyiPair(p, q)
    rate = float(cp.petz(s)[0]) / k
    r = as_state(rho)
    return PinchedRate(k, rate, _target(RenyiPair(rho, sigma), s, direction), r.dim * math.log(k + 1) / k)


def spectrum_count(sigma, k: int) -> int:
    """Number of distinct eigenvalues of ``sigma^{(x)k}``; at most ``(k+1)^d``."""
    s = as_state(sigma, require_full_rank=False)
    lam = s.spectrum.eigenvalues
    d = s.dim
    logs = np.log(np.clip(lam, 1e-300, None))
    vals = sorted({round(sum(c * lv for c, lv in zip(combo, logs)), 10)
                   for combo in _compositions(k, d)}, reverse=True)
    labels, _ = _cluster(np.exp(np.array(vals)))
    return int(labels.max() + 1)


def _compositions(k: int, d: int):
    for cut in itertools.combinations(range(k + d - 1), d - 1):
        prev, out = -1, []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(k + d - 2 - prev)
        yield out


def pinched_hoeffding_rate(a: float, rho, sigma, k: int, direction: str = "pinch_first_arg") -> float:
    """``(1/k) H_{a k}`` of the pinched ``k``-copy pair."""
    p, q = pinched_pair(rho, sigma, k, direction)
    return ExponentRegions(p, q).hoeffding(a * k, "rs") / k


def pinching_bound_holds(rho, sigma, k: int, tol: float = 1e-10) -> bool:
    """Check ``(k+1)^d E(rho^{(x)k}) >= rho^{(x)k}`` for pinching by ``sigma^{(x)k}``."""
    r, s = as_state(rho), as_state(sigma)
    rk = tensor_power(r.matrix, k)
    basis = _power_basis(s, k)
    diff = (k + 1) ** r.dim * pinch(basis, rk) - rk
    return bool(eig(0.5 * (diff + diff.conj().T)).eigenvalues.min() >= -tol)
