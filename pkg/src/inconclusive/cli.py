"""Command-line interface.

Exit codes: 0 ok, 1 verification failure, 2 input error, 3 numerical
error, 4 budget refusal.  Numbers are written with 17 significant digits
(scalar results of ``divergence`` with 15); ``--base 2`` multiplies
exponents by ``1/ln 2`` at output time only.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .divergences import RenyiPair, measured_relative_entropy, min_relative_entropy_zero
from .errors import InconclusiveError
from .pinching import pinched_renyi_rate
from .regions import SCAN_KINDS, ExponentRegions, RegionBoundary
from .sequential import ProtocolConfig, estimate_statistics, optimal_measurements
from .states import ClassicalDistribution, as_state, bernoulli, load_input
from .types_engine import TestStatistics, eval_reject_test, eval_stein_test
from .verify import SUITES, format_results, run_suite

LN2 = math.log(2.0)
DIVERGENCE_KINDS = ("umegaki", "petz", "sandwiched", "reverse_sandwiched", "max", "min0",
                    "chernoff", "fidelity", "d_star", "d_omega", "d_xi", "measured", "d_plus")


def _fmt(x: float, digits: int = 17) -> str:
    return f"{x:.{digits}g}"


def _scale(args) -> float:
    return 1.0 / LN2 if args.base == "2" else 1.0


def _to_nats(args, x: float | None) -> float | None:
    return None if x is None else (x * LN2 if args.base == "2" else x)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Run:
    """Collects inputs and outputs for the run manifest."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}

    def load(self, spec: str | None, default):
        """Read a state from a JSON path, a Bernoulli parameter, or use ``default``."""
        if spec is None:
            return default
        path = Path(spec)
        if path.exists():
            self.inputs[str(spec)] = _sha256(path.read_bytes())
            return load_input(path)
        try:
            return bernoulli(float(spec))
        except ValueError:
            raise FileNotFoundError(f"input {spec!r} is neither a file nor a number") from None

    def emit(self, text: str) -> None:
        data = text if text.endswith("\n") else text + "\n"
        args = self.args
        if args.out:
            Path(args.out).write_text(data)
        else:
            sys.stdout.write(data)
        manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
        if manifest_path:
            argmap = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
            manifest = {
                "command": args.command,
                "arguments": argmap,
                "input_digests": self.inputs,
                "tool_version": __version__,
                "seed": getattr(args, "seed", None),
                "output_digests": {args.out or "stdout": _sha256(data.encode())},
            }
            Path(manifest_path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _pair_inputs(run: _Run, args):
    rho = run.load(args.rho, bernoulli(0.9))
    sigma = run.load(args.sigma, bernoulli(0.2))
    return rho, sigma


def cmd_divergence(args) -> int:
    run = _Run(args)
    rho, sigma = _pair_inputs(run, args)
    kind = args.kind
    if kind == "min0":
        value = min_relative_entropy_zero(_loose(rho), _loose(sigma))
    elif kind == "fidelity":
        value = RenyiPair(rho, sigma).fidelity
    elif kind == "measured":
        value = measured_relative_entropy(rho, sigma).value
    elif kind == "d_plus":
        value = ExponentRegions(rho, sigma).d_plus()
    else:
        pair = RenyiPair(rho, sigma)
        if kind in ("petz", "sandwiched", "reverse_sandwiched"):
            if args.s is None:
                raise _InputError("--s is required for Renyi divergences")
            from .divergences import renyi

            value = renyi(rho, sigma, args.s, kind)
        else:
            value = {
                "umegaki": lambda: pair.relative_entropy,
                "max": lambda: pair.max_relative_entropy,
                "chernoff": lambda: pair.chernoff,
                "d_star": lambda: pair.d_star,
                "d_omega": lambda: pair.max_relative_entropy + pair.swapped.max_relative_entropy,
                "d_xi": lambda: max(pair.max_relative_entropy, pair.swapped.max_relative_entropy),
            }[kind]()
    shown = value if kind == "fidelity" else value * _scale(args)
    if args.json:
        text = json.dumps({"kind": kind, "s": args.s, "base": args.base, "value": shown,
                           "value_nats": value if kind != "fidelity" else None,
                           "inputs": run.inputs}, indent=2)
    else:
        text = _fmt(shown, 15)
    run.emit(text)
    return 0


def _loose(x):
    return as_state(x, require_full_rank=False)


class _InputError(InconclusiveError):
    exit_code = 2


def cmd_region(args) -> int:
    run = _Run(args)
    rho, sigma = _pair_inputs(run, args)
    reg = ExponentRegions(rho, sigma)
    scale = _scale(args)
    if args.which == "symmetric" and args.Z is not None:
        z = _to_nats(args, args.Z)
        e = reg.symmetric_boundary(z, args.mode)
        bd = RegionBoundary(np.array([z]), np.array([e]), "Z", "E", {"which": "symmetric"})
    else:
        params = {"K": _to_nats(args, args.K) or 0.0, "L": _to_nats(args, args.L) or 0.0,
                  "mode": args.mode, "Z_max": _to_nats(args, args.Z_max)}
        bd = reg.boundary_scan(args.which, args.samples, **params)
    bd = bd.scaled(scale)
    run.emit(bd.to_json() if args.json else bd.to_csv())
    return 0


def _statistics_text(st: TestStatistics, scale: float, unit: str) -> str:
    lines = [f"n: {st.n}", f"exact: {str(st.exact).lower()}"]
    for k, v in st.exponents().items():
        lines.append(f"exponent_{k} [{unit}]: {_fmt(v * scale)}")
    for k in ("log_pi_P", "log_pi_Q"):
        lines.append(f"{k}: {_fmt(getattr(st, k))}")
    if st.flags:
        lines.append("flags: " + ",".join(st.flags))
    return "\n".join(lines)


def cmd_simulate_classical(args) -> int:
    run = _Run(args)
    p = run.load(args.P, bernoulli(0.9))
    q = run.load(args.Q, bernoulli(0.2))
    p, q = _as_probs(p), _as_probs(q)
    common = {"exact": True, "mc_samples": args.mc_samples, "seed": args.seed}
    from .errors import TooManyTypes

    def evaluate(**kw):
        if args.mode == "stein":
            return eval_stein_test(p, q, args.n, args.delta, **kw)
        if args.K is None or args.L is None:
            raise _InputError("--K and --L are required in reject mode")
        return eval_reject_test(p, q, args.n, _to_nats(args, args.K), _to_nats(args, args.L), **kw)

    try:
        st = evaluate(**common)
    except TooManyTypes:
        if args.exact:
            raise
        st = evaluate(**{**common, "exact": False})
    unit = "bits" if args.base == "2" else "nats"
    run.emit(st.to_json() if args.json else _statistics_text(st, _scale(args), unit))
    return 0


def _as_probs(x):
    if isinstance(x, ClassicalDistribution):
        return x
    from .states import as_distribution

    return as_distribution(x)


def cmd_simulate_sequential(args) -> int:
    run = _Run(args)
    rho, sigma = _pair_inputs(run, args)
    start = time.perf_counter()
    pair = optimal_measurements(rho, sigma)
    cfg = ProtocolConfig.build(pair, args.n, args.epsilon_bits * LN2, args.seed, args.trials)
    rep = estimate_statistics(pair, cfg, threads=args.threads)
    data = rep.to_dict()
    if args.timing:
        data["wall_clock_seconds"] = time.perf_counter() - start
    if args.json:
        text = json.dumps(data, indent=2)
    else:
        s = _scale(args)
        lines = [f"threshold_a: {_fmt(cfg.threshold_a * s)}", f"threshold_b: {_fmt(cfg.threshold_b * s)}"]
        for h in ("under_rho", "under_sigma"):
            d = data[h]
            lines.append(f"{h}: correct={d['correct']} wrong={d['wrong']} "
                         f"inconclusive={d['inconclusive']} mean_rate={_fmt(d['mean_statistic_over_n'] * s)}")
        text = "\n".join(lines)
    run.emit(text)
    return 0


def cmd_pinching_scan(args) -> int:
    run = _Run(args)
    rho, sigma = _pair_inputs(run, args)
    s = _scale(args)
    rows = [pinched_renyi_rate(args.s, rho, sigma, k, args.direction) for k in range(1, args.kmax + 1)]
    if args.json:
        text = json.dumps({"s": args.s, "direction": args.direction, "base": args.base,
                           "rows": [{"k": r.k, "rate": r.rate * s, "target": r.target * s,
                                     "gap": r.gap * s, "bound": r.bound * s} for r in rows]}, indent=2)
    else:
        lines = ["k,rate,target,gap,bound"]
        lines += [f"{r.k},{_fmt(r.rate * s)},{_fmt(r.target * s)},{_fmt(r.gap * s)},{_fmt(r.bound * s)}"
                  for r in rows]
        text = "\n".join(lines)
    run.emit(text)
    return 0


def cmd_verify(args) -> int:
    run = _Run(args)
    results = run_suite(args.suite)
    if args.json:
        text = json.dumps([{
            "criterion": r.number, "title": r.title, "passed": r.passed, "seconds": r.seconds,
            "checks": [{"name": c.name, "measured": c.measured, "expected": c.expected,
                        "tolerance": c.tolerance, "passed": c.passed} for c in r.checks],
        } for r in results], indent=2)
    else:
        text = format_results(results)
    run.emit(text)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inconclusive", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="emit JSON")
        p.add_argument("--base", choices=("e", "2"), default="e", help="logarithm base for output")
        p.add_argument("--threads", type=int, default=1, help="maximum worker threads")
        p.add_argument("--out", help="write output here; a manifest is written next to it")
        p.add_argument("--manifest", help="explicit manifest path")

    def states(p):
        p.add_argument("--rho", help="state JSON, distribution JSON or a Bernoulli parameter")
        p.add_argument("--sigma", help="state JSON, distribution JSON or a Bernoulli parameter")

    p = sub.add_parser("divergence", help="evaluate a divergence")
    p.add_argument("--kind", choices=DIVERGENCE_KINDS, required=True)
    p.add_argument("--s", type=float)
    states(p)
    common(p)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("region", help="sample an exponent-region boundary")
    p.add_argument("--which", choices=SCAN_KINDS, required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--K", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--Z", type=float, help="single inconclusive exponent (symmetric only)")
    p.add_argument("--Z-max", dest="Z_max", type=float, default=1.0)
    p.add_argument("--mode", choices=("average", "maximal"), default="average")
    states(p)
    common(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate-classical", help="exact type-class evaluation of a test")
    p.add_argument("--P", help="Bernoulli parameter or distribution JSON")
    p.add_argument("--Q", help="Bernoulli parameter or distribution JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("stein", "reject"), default="stein")
    p.add_argument("--delta", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--exact", action="store_true", help="refuse to fall back to sampling")
    p.add_argument("--mc-samples", dest="mc_samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_simulate_classical)

    p = sub.add_parser("simulate-sequential", help="Monte Carlo run of the adaptive protocol")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon-bits", dest="epsilon_bits", type=float, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="include wall-clock time (not byte-stable)")
    states(p)
    common(p)
    p.set_defaults(func=cmd_simulate_sequential)

    p = sub.add_parser("pinching-scan", help="pinched Renyi rates for k = 1..kmax")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--direction", choices=("pinch_first_arg", "pinch_second_arg"),
                   default="pinch_first_arg")
    states(p)
    common(p)
    p.set_defaults(func=cmd_pinching_scan)

    p = sub.add_parser("verify", help="run acceptance checks")
    p.add_argument("--suite", choices=tuple(SUITES), default="all")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InconclusiveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
