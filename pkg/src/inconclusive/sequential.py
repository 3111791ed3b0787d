"""Adaptive measure-and-accumulate protocol with a fixed number of copies.

Each copy is measured with the measurement that best separates the
hypothesis currently favoured by the running log-likelihood ratio ``S``:
the rho-optimal one when ``S >= 0`` and the sigma-optimal one otherwise.
After ``n`` copies the protocol answers rho when ``S_n >= B_n``, sigma when
``S_n <= -A_n`` and abstains in between.

Randomness is counter based: trial ``i`` of a run with seed ``seed`` draws
its uniforms from a Philox stream keyed by ``(seed, i)``, the ``j``-th
uniform driving step ``j``.  Results therefore do not depend on chunking or
thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .divergences import measured_relative_entropy
from .errors import ConfigError
from .states import as_state
from .types_engine import TestStatistics

LN2 = math.log(2.0)
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class MeasurementPair:
    """Two projective measurements with their outcome statistics.

    ``probs[h, m, x]`` is the probability of outcome ``x`` of measurement
    ``m`` (0 = rho-optimal, 1 = sigma-optimal) under hypothesis ``h``
    (0 = rho, 1 = sigma).
    """

    bases: tuple[np.ndarray, np.ndarray]
    probs: np.ndarray
    value_rho: float
    value_sigma: float
    quality: tuple[str, str]

    @property
    def identical(self) -> bool:
        return bool(np.allclose(self.probs[:, 0], self.probs[:, 1], atol=0, rtol=0)
                    and np.allclose(np.abs(self.bases[0]), np.abs(self.bases[1])))

    @property
    def log_ratio(self) -> np.ndarray:
        """``Z[m, x] = log p_rho(x) - log p_sigma(x)`` under measurement ``m``."""
        return np.log(self.probs[0]) - np.log(self.probs[1])

    @property
    def increment_bound(self) -> float:
        return float(np.max(np.abs(self.log_ratio)))

    def drift(self, hypothesis: int) -> np.ndarray:
        """Expected increment under each measurement for the given hypothesis."""
        return np.sum(self.probs[hypothesis] * self.log_ratio, axis=1)

    @classmethod
    def from_bases(cls, rho, sigma, basis_rho, basis_sigma, quality=("given", "given")):
        r, s = as_state(rho), as_state(sigma)
        probs = np.empty((2, 2, r.dim))
        for h, st in enumerate((r, s)):
            for m, b in enumerate((basis_rho, basis_sigma)):
                probs[h, m] = np.real(np.einsum("ik,ij,jk->k", b.conj(), st.matrix, b))
        probs = np.clip(probs, 1e-300, None)
        probs /= probs.sum(axis=-1, keepdims=True)
        kl = lambda a, b: float(np.sum(a * (np.log(a) - np.log(b))))  # noqa: E731
        return cls((np.asarray(basis_rho), np.asarray(basis_sigma)), probs,
                   kl(probs[0, 0], probs[1, 0]), kl(probs[1, 1], probs[0, 1]), tuple(quality))


def optimal_measurements(rho, sigma) -> MeasurementPair:
    """Measurements maximising the measured relative entropy in each direction."""
    r, s = as_state(rho), as_state(sigma)
    fwd = measured_relative_entropy(r, s)
    if np.max(np.abs(r.matrix @ s.matrix - s.matrix @ r.matrix)) < 1e-13:
        bwd_basis, bwd_quality = fwd.basis, fwd.quality
    else:
        bwd = measured_relative_entropy(s, r)
        bwd_basis, bwd_quality = bwd.basis, bwd.quality
    return MeasurementPair.from_bases(r, s, fwd.basis, bwd_basis, (fwd.quality, bwd_quality))


@dataclass(frozen=True)
class ProtocolConfig:
    """Copies ``n``, slack ``epsilon`` (nats), seed, trials and thresholds."""

    n: int
    epsilon: float
    seed: int
    trials: int
    threshold_a: float
    threshold_b: float

    @classmethod
    def build(cls, pair: MeasurementPair, n: int, epsilon: float, seed: int = 0,
              trials: int = 10_000) -> "ProtocolConfig":
        if n < 1 or trials < 1:
            raise ConfigError("n and trials must be positive")
        a_n = n * (pair.value_sigma - epsilon)
        b_n = n * (pair.value_rho - epsilon)
        if a_n <= 0 or b_n <= 0:
            raise ConfigError(
                f"epsilon {epsilon:.6g} leaves a non-positive threshold "
                f"(A_n = {a_n:.6g}, B_n = {b_n:.6g})")
        return cls(n, float(epsilon), int(seed), int(trials), a_n, b_n)


@dataclass(frozen=True, eq=False)
class TrialOutcome:
    decision: str
    final_statistic: float
    switches: int
    trajectory: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Recorded paths: ``statistic`` is (trials, n+1), ``measurement`` is (trials, n)."""

    statistic: np.ndarray
    measurement: np.ndarray
    drift: np.ndarray


@dataclass(frozen=True)
class DriftReport:
    martingale_part_scale: float
    negative_time_fraction: float


def _uniforms(seed: int, trial_indices: np.ndarray, n: int) -> np.ndarray:
    out = np.empty((len(trial_indices), n))
    for row, i in enumerate(trial_indices):
        gen = np.random.Generator(np.random.Philox(key=int(seed) + (int(i) << 64)))
        out[row] = gen.random(n)
    return out


def _simulate(hypothesis: int, pair: MeasurementPair, cfg: ProtocolConfig,
              trial_indices: np.ndarray, record: bool = False) -> dict:
    u = _uniforms(cfg.seed, trial_indices, cfg.n)
    cdf = np.cumsum(pair.probs[hypothesis], axis=1)[:, :-1]
    z = pair.log_ratio
    drift = pair.drift(hypothesis)
    m_trials = len(trial_indices)
    s = np.zeros(m_trials)
    comp = np.zeros(m_trials)
    prev = np.zeros(m_trials, dtype=int)
    switches = np.zeros(m_trials, dtype=int)
    negative = np.zeros(m_trials, dtype=int)
    max_mart = np.zeros(m_trials)
    identical = pair.identical
    paths = np.zeros((m_trials, cfg.n + 1)) if record else None
    meas = np.zeros((m_trials, cfg.n), dtype=np.int8) if record else None
    for j in range(cfg.n):
        neg = s < 0
        m = neg.astype(int)
        negative += neg
        if j > 0 and not identical:
            switches += m != prev
        prev = m
        x = np.sum(u[:, j, None] >= cdf[m], axis=1)
        s = s + z[m, x]
        comp = comp + drift[m]
        max_mart = np.maximum(max_mart, np.abs(s - comp))
        if record:
            paths[:, j + 1] = s
            meas[:, j] = m
    out = {"statistic": s, "switches": switches, "negative": negative, "max_mart": max_mart}
    if record:
        out["paths"] = paths
        out["measurement"] = meas
        out["drift"] = drift
    return out


def _decide(stat: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    """0 = rho, 1 = sigma, 2 = inconclusive."""
    return np.where(stat >= cfg.threshold_b, 0, np.where(stat <= -cfg.threshold_a, 1, 2))


def run_trial(true_state: str, pair: MeasurementPair, cfg: ProtocolConfig, trial_index: int,
              record: bool = True) -> TrialOutcome:
    """Run one trial with ``true_state`` in ``{"rho", "sigma"}``."""
    h = _hypothesis_index(true_state)
    res = _simulate(h, pair, cfg, np.array([trial_index]), record)
    dec = int(_decide(res["statistic"], cfg)[0])
    return TrialOutcome(("guess_rho", "guess_sigma", "inconclusive")[dec], float(res["statistic"][0]),
                        int(res["switches"][0]), res["paths"][0] if record else None)


def record_trajectories(true_state: str, pair: MeasurementPair, cfg: ProtocolConfig,
                        trial_indices) -> TrajectorySet:
    h = _hypothesis_index(true_state)
    res = _simulate(h, pair, cfg, np.asarray(trial_indices), record=True)
    return TrajectorySet(res["paths"], res["measurement"], res["drift"])


def drift_diagnostic(traj: TrajectorySet) -> DriftReport:
    """Size of the martingale part of ``S`` and time spent below zero.

    The martingale part is ``S_k`` minus the summed conditional drifts of
    the measurements actually used; its scale is ``(1/n) max_k |M_k|``
    averaged over trials.
    """
    n = traj.measurement.shape[1]
    comp = np.cumsum(traj.drift[traj.measurement.astype(int)], axis=1)
    mart = traj.statistic[:, 1:] - comp
    scale = float(np.mean(np.max(np.abs(mart), axis=1)) / n)
    negative = float(np.mean(traj.statistic[:, :-1] < 0))
    return DriftReport(scale, negative)


def _hypothesis_index(name: str) -> int:
    if name not in ("rho", "sigma"):
        raise ConfigError("true state must be 'rho' or 'sigma'")
    return 0 if name == "rho" else 1


@dataclass(frozen=True)
class HypothesisSummary:
    trials: int
    correct: int
    wrong: int
    inconclusive: int
    mean_rate: float
    switch_free_fraction: float
    drift: DriftReport

    def interval(self, count: int) -> tuple[float, float]:
        ci = binomtest(count, self.trials).proportion_ci(0.95, method="wilson")
        return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class SequentialReport:
    config: ProtocolConfig
    pair_values: tuple[float, float]
    under_rho: HypothesisSummary
    under_sigma: HypothesisSummary
    statistics: TestStatistics
    extras: dict = field(default_factory=dict)

    def error_bound_ok(self) -> tuple[bool, bool]:
        """Error counts within ``trials exp(-A_n) + 3 sqrt(trials exp(-A_n))``."""
        def ok(wrong, trials, thr):
            mean = trials * math.exp(-thr)
            return wrong <= mean + 3 * math.sqrt(mean)
        return (ok(self.under_rho.wrong, self.under_rho.trials, self.config.threshold_a),
                ok(self.under_sigma.wrong, self.under_sigma.trials, self.config.threshold_b))

    def to_dict(self) -> dict:
        def summary(h: HypothesisSummary):
            return {
                "trials": h.trials, "correct": h.correct, "wrong": h.wrong,
                "inconclusive": h.inconclusive,
                "wrong_ci95": h.interval(h.wrong),
                "inconclusive_ci95": h.interval(h.inconclusive),
                "mean_statistic_over_n": h.mean_rate,
                "mean_statistic_over_n_bits": h.mean_rate / LN2,
                "switch_free_fraction": h.switch_free_fraction,
                "martingale_part_scale": h.drift.martingale_part_scale,
                "negative_time_fraction": h.drift.negative_time_fraction,
            }
        c = self.config
        return {
            "config": {"n": c.n, "epsilon": c.epsilon, "epsilon_bits": c.epsilon / LN2,
                       "seed": c.seed, "trials": c.trials,
                       "threshold_a": c.threshold_a, "threshold_b": c.threshold_b},
            "measured_values": {"rho_vs_sigma": self.pair_values[0],
                                "sigma_vs_rho": self.pair_values[1]},
            "under_rho": summary(self.under_rho),
            "under_sigma": summary(self.under_sigma),
            "error_bounds_hold": list(self.error_bound_ok()),
            "statistics": self.statistics.to_dict(),
            **self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _summarise(hypothesis: int, pair: MeasurementPair, cfg: ProtocolConfig,
               threads: int = 1) -> tuple[HypothesisSummary, np.ndarray]:
    starts = range(0, cfg.trials, _CHUNK)
    chunks = [np.arange(a, min(a + _CHUNK, cfg.trials)) for a in starts]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda idx: _simulate(hypothesis, pair, cfg, idx), chunks))
    else:
        parts = [_simulate(hypothesis, pair, cfg, idx) for idx in chunks]
    stat = np.concatenate([p["statistic"] for p in parts])
    dec = _decide(stat, cfg)
    correct = int(np.sum(dec == hypothesis))
    wrong = int(np.sum(dec == 1 - hypothesis))
    incon = int(np.sum(dec == 2))
    switches = np.concatenate([p["switches"] for p in parts])
    negative = np.concatenate([p["negative"] for p in parts])
    mart = np.concatenate([p["max_mart"] for p in parts])
    drift = DriftReport(float(np.mean(mart) / cfg.n), float(np.mean(negative) / cfg.n))
    summary = HypothesisSummary(cfg.trials, correct, wrong, incon, float(np.mean(stat) / cfg.n),
                                float(np.mean(switches == 0)), drift)
    return summary, dec


def estimate_statistics(pair: MeasurementPair, cfg: ProtocolConfig, threads: int = 1) -> SequentialReport:
    """Monte Carlo performance of the protocol under both hypotheses."""
    under_rho, _ = _summarise(0, pair, cfg, threads)
    under_sigma, _ = _summarise(1, pair, cfg, threads)
    with np.errstate(divide="ignore"):
        def lg(x, tot):
            return math.log(x / tot) if x > 0 else -math.inf
        concl_r = under_rho.correct + under_rho.wrong
        concl_s = under_sigma.correct + under_sigma.wrong
        stats = TestStatistics(
            n=cfg.n, exact=False,
            log_alpha_bar=lg(under_rho.wrong, concl_r) if concl_r else math.nan,
            log_beta_bar=lg(under_sigma.wrong, concl_s) if concl_s else math.nan,
            log_pi_P=lg(concl_r, cfg.trials), log_pi_Q=lg(concl_s, cfg.trials),
            log_incon_P=lg(under_rho.inconclusive, cfg.trials),
            log_incon_Q=lg(under_sigma.inconclusive, cfg.trials),
            flags=("monte_carlo",))
    return SequentialReport(cfg, (pair.value_rho, pair.value_sigma), under_rho, under_sigma, stats)
