"""Exact evaluation of type-based tests on i.i.d. sequences.

A test is a pair of disjoint sets of types: ``guess_rho`` (the ``M`` set)
and ``guess_sigma`` (the ``N`` set); remaining types give an inconclusive
outcome.  Probabilities of type classes are summed exactly in the log
domain, with chunks reduced in a fixed order so results do not depend on
chunking.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from .errors import EmptySequence, InvalidThresholds, OverlappingSets, TooManyTypes
from .regions import ExponentRegions
from .states import ClassicalDistribution, as_distribution

TYPE_BUDGET = 10**8
_CHUNK = 1 << 18
_TIE = 1e-12
LN2 = math.log(2.0)


@dataclass(frozen=True)
class TypeVector:
    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def frequencies(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.n


def type_of(sequence: Sequence[int], alphabet_size: int) -> TypeVector:
    seq = np.asarray(sequence, dtype=int)
    if seq.size == 0:
        raise EmptySequence("cannot take the type of an empty sequence")
    if seq.min() < 0 or seq.max() >= alphabet_size:
        raise ValueError("symbol outside the alphabet")
    return TypeVector(tuple(int(c) for c in np.bincount(seq, minlength=alphabet_size)))


def type_count(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def _check_budget(n: int, k: int) -> None:
    if type_count(n, k) > TYPE_BUDGET:
        raise TooManyTypes(f"{type_count(n, k)} types exceed the budget of {TYPE_BUDGET}")


def _all_types(n: int, k: int) -> np.ndarray:
    """Every type of length ``n`` over ``k`` letters as rows, lexicographic order."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = [np.column_stack([np.full(type_count(n - c, k - 1), c, dtype=np.int64),
                               _all_types(n - c, k - 1)]) for c in range(n + 1)]
    return np.concatenate(blocks)


def _type_chunks(n: int, k: int, prefix: tuple[int, ...] = ()) -> Iterator[np.ndarray]:
    if type_count(n, k) <= _CHUNK or k == 1:
        rows = _all_types(n, k)
        if prefix:
            rows = np.column_stack([np.tile(np.asarray(prefix, dtype=np.int64), (len(rows), 1)), rows])
        yield rows
        return
    for c in range(n + 1):
        yield from _type_chunks(n - c, k - 1, prefix + (c,))


def enumerate_types(n: int, k: int) -> Iterator[TypeVector]:
    """All types of length ``n`` over ``k`` letters, in lexicographic order."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    _check_budget(n, k)
    for chunk in _type_chunks(n, k):
        for row in chunk:
            yield TypeVector(tuple(int(c) for c in row))


def _log_prob(counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=-1)
    with np.errstate(divide="ignore"):
        return (gammaln(n + 1.0) - gammaln(counts + 1.0).sum(axis=-1)
                + xlogy(counts, p).sum(axis=-1))


def log_prob_type_class(t: TypeVector, p) -> float:
    """Log-probability that ``n`` i.i.d. draws from ``p`` have type ``t``."""
    dist = as_distribution(p, require_full_support=False)
    if len(t.counts) != dist.alphabet_size:
        raise ValueError("type and distribution have different alphabets")
    return float(_log_prob(np.asarray(t.counts, dtype=float), dist.probs))


def _kl_rows(freq: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return (xlogy(freq, freq) - xlogy(freq, q)).sum(axis=-1)


@dataclass(frozen=True)
class TestStatistics:
    """Exact (or sampled) performance of a test that may abstain.

    Log values are natural logarithms of: the conditional type-I error
    ``alpha_bar`` (guessing sigma given rho is true and the test concluded),
    the conditional type-II error ``beta_bar``, the conclusive
    probabilities ``pi_P``/``pi_Q`` and the inconclusive probabilities.
    """

    __test__ = False

    n: int
    exact: bool
    log_alpha_bar: float
    log_beta_bar: float
    log_pi_P: float
    log_pi_Q: float
    log_incon_P: float
    log_incon_Q: float
    flags: tuple[str, ...] = field(default_factory=tuple)

    def exponent(self, name: str) -> float:
        """``-(1/n) log`` of the named probability, in nats."""
        return -getattr(self, "log_" + name) / self.n

    def exponents(self) -> dict:
        return {
            "alpha_bar": self.exponent("alpha_bar"),
            "beta_bar": self.exponent("beta_bar"),
            "inconclusive_P": self.exponent("incon_P"),
            "inconclusive_Q": self.exponent("incon_Q"),
        }

    def to_dict(self) -> dict:
        keys = ["log_alpha_bar", "log_beta_bar", "log_pi_P", "log_pi_Q", "log_incon_P", "log_incon_Q"]
        body = {k: _finite_or_str(getattr(self, k)) for k in keys}
        ex = self.exponents()
        return {
            "n": self.n,
            "exact": self.exact,
            "flags": list(self.flags),
            **body,
            "exponents": {k: _finite_or_str(v) for k, v in ex.items()},
            "base2": {
                **{k.replace("log_", "log2_"): _finite_or_str(getattr(self, k) / LN2) for k in keys},
                "exponents": {k: _finite_or_str(v / LN2) for k, v in ex.items()},
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _finite_or_str(x: float):
    return float(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _evaluate(p: np.ndarray, q: np.ndarray, n: int, classify, exact: bool = True,
              mc_samples: int = 0, seed: int = 0) -> TestStatistics:
    """Sum class probabilities into the guess-rho, guess-sigma and abstain bins.

    ``classify(freq)`` returns two boolean arrays ``(in_M, in_N)``.
    """
    k = p.size
    parts = {key: [] for key in ("PM", "PN", "PI", "QM", "QN", "QI")}
    if exact:
        _check_budget(n, k)
        for chunk in _type_chunks(n, k):
            freq = chunk / n
            in_m, in_n = classify(freq)
            if np.any(in_m & in_n):
                raise OverlappingSets("test sets intersect")
            rest = ~(in_m | in_n)
            lp, lq = _log_prob(chunk.astype(float), p), _log_prob(chunk.astype(float), q)
            for tag, lv in (("P", lp), ("Q", lq)):
                for sub, mask in (("M", in_m), ("N", in_n), ("I", rest)):
                    parts[tag + sub].append(logsumexp(lv[mask]) if mask.any() else -np.inf)
        tot = {key: float(logsumexp(v)) if v else -np.inf for key, v in parts.items()}
    else:
        rng = np.random.default_rng(seed)
        tot = {}
        for tag, dist in (("P", p), ("Q", q)):
            counts = rng.multinomial(n, dist, size=mc_samples)
            in_m, in_n = classify(counts / n)
            with np.errstate(divide="ignore"):
                for sub, mask in (("M", in_m), ("N", in_n), ("I", ~(in_m | in_n))):
                    tot[tag + sub] = float(np.log(mask.mean()))
    flags = []
    log_pi_p = float(np.logaddexp(tot["PM"], tot["PN"]))
    log_pi_q = float(np.logaddexp(tot["QM"], tot["QN"]))
    if tot["PM"] == -np.inf and tot["QM"] == -np.inf:
        flags.append("empty_guess_rho")
    if tot["PN"] == -np.inf and tot["QN"] == -np.inf:
        flags.append("empty_guess_sigma")
    with np.errstate(invalid="ignore"):
        la = tot["PN"] - log_pi_p if log_pi_p > -np.inf else -np.inf
        lb = tot["QM"] - log_pi_q if log_pi_q > -np.inf else -np.inf
    if not exact:
        flags.append("monte_carlo")
    return TestStatistics(n, exact, float(la), float(lb), log_pi_p, log_pi_q,
                          tot["PI"], tot["QI"], tuple(flags))


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    pd, qd = as_distribution(p), as_distribution(q)
    if pd.alphabet_size != qd.alphabet_size:
        raise ValueError("distributions have different alphabets")
    return pd.probs, qd.probs


def eval_stein_test(p, q, n: int, delta: float | None = None, exact: bool = True,
                    mc_samples: int = 100_000, seed: int = 0) -> TestStatistics:
    """Guess by sup-norm proximity of the empirical type to ``p`` or ``q``.

    ``delta`` defaults to ``n^(-1/3)``; the two balls must be disjoint.
    """
    pv, qv = _pair(p, q)
    delta = n ** (-1.0 / 3.0) if delta is None else float(delta)
    if delta >= 0.5 * float(np.max(np.abs(pv - qv))):
        raise OverlappingSets("delta is too large for the sup-norm balls to be disjoint")

    def classify(freq):
        return (np.max(np.abs(freq - pv), axis=-1) <= delta + _TIE,
                np.max(np.abs(freq - qv), axis=-1) <= delta + _TIE)

    return _evaluate(pv, qv, n, classify, exact, mc_samples, seed)


def eval_threshold_test(p, q, n: int, guess_rho_above: float, guess_sigma_below: float,
                        exact: bool = True, mc_samples: int = 100_000, seed: int = 0) -> TestStatistics:
    """Guess rho when ``D(t||q) > guess_rho_above``, sigma when ``D(t||q) <= guess_sigma_below``."""
    pv, qv = _pair(p, q)
    if guess_rho_above < guess_sigma_below:
        raise InvalidThresholds("thresholds overlap")

    def classify(freq):
        d = _kl_rows(freq, qv)
        return d > guess_rho_above + _TIE, d <= guess_sigma_below + _TIE

    return _evaluate(pv, qv, n, classify, exact, mc_samples, seed)


def eval_reject_test(p, q, n: int, k: float, l: float, exact: bool = True,
                     mc_samples: int = 100_000, seed: int = 0) -> TestStatistics:
    """Test that abstains on types near neither hypothesis.

    Guesses ``p`` when ``D(t||q)`` exceeds the Hoeffding value ``H_k(q||p)``
    and ``q`` when ``D(t||q) <= l``.  Inconclusive probabilities then decay
    with exponents at least ``k`` (under ``p``) and ``l`` (under ``q``).
    """
    pv, qv = _pair(p, q)
    h_k = ExponentRegions(pv, qv).hoeffding(k, "sr")
    if h_k < l:
        raise InvalidThresholds(f"H_K = {h_k:.6g} is below L = {l:.6g}")
    return eval_threshold_test(pv, qv, n, h_k, l, exact, mc_samples, seed)


def eval_hoeffding_test(p, q, n: int, a: float) -> TestStatistics:
    """Deterministic test guessing ``q`` when ``D(t||p) > a``."""
    pv, qv = _pair(p, q)

    def classify(freq):
        far = _kl_rows(freq, pv) > a + _TIE
        return ~far, far

    return _evaluate(pv, qv, n, classify)


def sanov_log_prob(center, radius: float, under, n: int, complement: bool = False) -> float:
    """Exact ``log Pr_under[D(t||center) <= radius]`` (or of the complement)."""
    c = as_distribution(center, require_full_support=False).probs
    u = as_distribution(under, require_full_support=False).probs
    k = c.size
    _check_budget(n, k)
    parts = []
    for chunk in _type_chunks(n, k):
        d = _kl_rows(chunk / n, c)
        mask = d <= radius + _TIE
        if complement:
            mask = ~mask
        if mask.any():
            parts.append(logsumexp(_log_prob(chunk[mask].astype(float), u)))
    return float(logsumexp(parts)) if parts else -math.inf
