"""Validated quantum states, classical distributions and their file formats."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import NotAState, RankDeficient
from .linalg import HermitianSpectrum, eig

TRACE_TOL = 1e-10
FULL_RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix.  Construct through :func:`validate_state`."""

    matrix: np.ndarray
    min_eigenvalue: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> HermitianSpectrum:
        return eig(self.matrix)

    @property
    def is_diagonal(self) -> bool:
        m = self.matrix
        return bool(np.all(m[~np.eye(self.dim, dtype=bool)] == 0))

    def to_json(self) -> dict:
        m = np.asarray(self.matrix, dtype=complex)
        return {
            "dim": self.dim,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
        }


@dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    probs: np.ndarray

    @property
    def alphabet_size(self) -> int:
        return self.probs.shape[0]

    def as_state(self) -> DensityMatrix:
        return validate_state(np.diag(self.probs))

    def to_json(self) -> dict:
        return {"probs": [float(p) for p in self.probs]}


def validate_state(matrix, require_full_rank: bool = True) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity of ``matrix``.

    With ``require_full_rank`` the smallest eigenvalue must exceed ``1e-12``.
    """
    if isinstance(matrix, DensityMatrix):
        if require_full_rank and matrix.min_eigenvalue <= FULL_RANK_TOL:
            raise RankDeficient(f"smallest eigenvalue {matrix.min_eigenvalue:.3g} is not positive")
        return matrix
    m = np.array(matrix)
    if m.dtype.kind not in "fc":
        m = m.astype(float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotAState(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotAState("matrix has non-finite entries")
    if np.max(np.abs(m - m.conj().T)) > TRACE_TOL:
        raise NotAState("matrix is not Hermitian")
    if abs(np.trace(m) - 1.0) > TRACE_TOL:
        raise NotAState(f"trace is {np.trace(m).real:.12g}, expected 1")
    m = 0.5 * (m + m.conj().T)
    if np.all(m.imag == 0):
        m = m.real.copy()
    spec = eig(m)
    lo = float(spec.eigenvalues[-1])
    if lo < -FULL_RANK_TOL:
        raise NotAState(f"matrix has negative eigenvalue {lo:.3g}")
    if require_full_rank and lo <= FULL_RANK_TOL:
        raise RankDeficient(f"smallest eigenvalue {lo:.3g} is not positive")
    state = DensityMatrix(m, lo)
    state.__dict__["spectrum"] = spec
    return state


def validate_distribution(probs, require_full_support: bool = True) -> ClassicalDistribution:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise NotAState("a distribution must be a non-empty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise NotAState("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > TRACE_TOL:
        raise NotAState(f"probabilities sum to {p.sum():.12g}, expected 1")
    if require_full_support and np.any(p <= FULL_RANK_TOL):
        raise RankDeficient("distribution does not have full support")
    return ClassicalDistribution(p.copy())


def bernoulli(p: float) -> ClassicalDistribution:
    """Two-point distribution ``(p, 1 - p)``."""
    return validate_distribution([p, 1.0 - p])


def as_state(x, require_full_rank: bool = True) -> DensityMatrix:
    """Coerce matrices, probability vectors and distributions to a state."""
    if isinstance(x, DensityMatrix):
        return validate_state(x, require_full_rank)
    if isinstance(x, ClassicalDistribution):
        return validate_state(np.diag(x.probs), require_full_rank)
    arr = np.asarray(x)
    if arr.ndim == 1:
        validate_distribution(arr, require_full_rank)
        return validate_state(np.diag(arr.astype(float)), require_full_rank)
    return validate_state(arr, require_full_rank)


def as_distribution(x, require_full_support: bool = True) -> ClassicalDistribution:
    if isinstance(x, ClassicalDistribution):
        if require_full_support:
            validate_distribution(x.probs)
        return x
    if isinstance(x, DensityMatrix):
        if not x.is_diagonal:
            raise NotAState("state is not diagonal")
        return validate_distribution(np.diag(x.matrix).real, require_full_support)
    if np.ndim(x) == 2:
        return as_distribution(as_state(x, require_full_support), require_full_support)
    return validate_distribution(x, require_full_support)


def random_density_matrix(dim: int, rng: np.random.Generator, min_weight: float = 0.02) -> DensityMatrix:
    """Ginibre state mixed with a little white noise so it has full rank."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    m = (1.0 - min_weight) * m + min_weight * np.eye(dim) / dim
    return validate_state(0.5 * (m + m.conj().T))


def random_distribution(size: int, rng: np.random.Generator, min_weight: float = 0.02) -> ClassicalDistribution:
    p = rng.dirichlet(np.ones(size))
    return validate_distribution((1.0 - min_weight) * p + min_weight / size)


def load_input(path) -> DensityMatrix | ClassicalDistribution:
    """Read ``{"dim", "matrix"}`` state files or ``{"probs"}`` distribution files."""
    data = json.loads(Path(path).read_text())
    return parse_input(data)


def parse_input(data: dict) -> DensityMatrix | ClassicalDistribution:
    if "probs" in data:
        return validate_distribution(data["probs"])
    if "matrix" not in data:
        raise NotAState("input needs a 'matrix' or 'probs' field")
    raw = np.asarray(data["matrix"], dtype=float)
    if raw.ndim != 3 or raw.shape[-1] != 2:
        raise NotAState("matrix entries must be [re, im] pairs")
    m = raw[..., 0] + 1j * raw[..., 1]
    if "dim" in data and int(data["dim"]) != m.shape[0]:
        raise NotAState("declared dim does not match the matrix")
    return validate_state(m)
