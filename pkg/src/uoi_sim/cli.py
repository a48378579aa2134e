"""Command line front end.

    uoi-sim <scenario> [--config FILE] [--seed S] [--out PATH]
            [--format csv|jsonl|plot] [scenario flags]

Exit codes: 0 success, 2 configuration error, 3 bound violation when
--assert-bounds is set.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .mdp import format_policy_table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uoi-sim",
                                     description="Status-update scheduling simulator")
    sub = parser.add_subparsers(dest="scenario", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output path (plot format: directory)")
        sp.add_argument("--format", choices=("csv", "jsonl", "plot"), default="csv")
        sp.add_argument("--horizon", type=int, help="slots per replication")
        sp.add_argument("--replications", type=int)
        sp.add_argument("--policy", action="append", dest="policies",
                        help="policy to run (repeatable)")
        sp.add_argument("--assert-bounds", action="store_true",
                        help="exit 3 if a measured average exceeds its bound")
        sp.add_argument("--trace", action="store_true",
                        help="record a per-slot trace (jsonl output only)")

    sp = sub.add_parser("single", help="single-terminal updating")
    common(sp)
    sp.add_argument("--rho", type=float, help="update frequency budget")
    sp.add_argument("--v", type=float, help="drift/penalty tradeoff V")

    sp = sub.add_parser("multi", help="centralized K-of-N scheduling")
    common(sp)
    sp.add_argument("--n", type=int, help="number of terminals")
    sp.add_argument("--k", type=int, help="sub-channels per slot")

    sp = sub.add_parser("csma", help="distributed CSMA/CA scheduling")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--window", type=int, help="contention window W in mini-slots")
    sp.add_argument("--mini-slot-us", type=float, dest="mini_slot_us")

    sp = sub.add_parser("mdp", help="reference policies by relative value iteration")
    common(sp)
    sp.add_argument("--cost", choices=("uoi", "aoi"))
    sp.add_argument("--rho", type=float)
    sp.add_argument("--qmax", type=float)
    sp.add_argument("--qstep", type=float)

    sp = sub.add_parser("control", help="remote tracking-control demo")
    common(sp)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--a", type=float, help="plant state coefficient")
    sp.add_argument("--b", type=float, help="plant control gain")
    sp.add_argument("--noise-var", type=float, dest="noise_var")

    sp = sub.add_parser("waterfill", help="stationary policy optimizer")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    return parser


_OVERRIDES = ("seed", "horizon", "replications", "rho", "v", "n", "k",
              "a", "b", "noise_var", "trace")


def config_from_args(args: argparse.Namespace) -> harness.ExperimentConfig:
    if args.config:
        config = harness.load_config(args.config)
        if config.scenario != args.scenario:
            raise harness.ConfigError(
                "scenario", f"config says {config.scenario!r} but the "
                f"command line asked for {args.scenario!r}")
    else:
        config = harness.config_from_dict({"scenario": args.scenario})
    for name in _OVERRIDES:
        value = getattr(args, name, None)
        if value is not None and value is not False:
            setattr(config, name, value)
    if getattr(args, "policies", None):
        config.policies = tuple(args.policies)
    if getattr(args, "window", None) is not None:
        config.window = args.window
    if getattr(args, "mini_slot_us", None) is not None:
        config.mini_slot_us = args.mini_slot_us
    if getattr(args, "cost", None) is not None:
        config.mdp_cost = args.cost
    if getattr(args, "qmax", None) is not None:
        config.q_max = args.qmax
    if getattr(args, "qstep", None) is not None:
        config.q_step = args.qstep
    # re-validate after overrides
    return harness.config_from_dict(_config_to_dict(config))


def _config_to_dict(config: harness.ExperimentConfig) -> dict:
    w = config.weights
    if hasattr(w, "prob_hi"):
        weights = {"kind": "two-point", "w_lo": w.w_lo, "w_hi": w.w_hi,
                   "prob_hi": w.prob_hi}
    elif hasattr(w, "period"):
        weights = {"kind": "periodic-burst", "base": w.base, "burst": w.burst,
                   "period": w.period, "burst_len": w.burst_len}
    else:
        weights = {"kind": "constant", "w": w.w}
    d = {
        "scenario": config.scenario,
        "horizon": config.horizon,
        "replications": config.replications,
        "seed": config.seed,
        "policies": list(config.policies),
        "rho": config.rho,
        "v": config.v,
        "terminal": {"p": config.p, "sigma2": config.sigma2},
        "weights": weights,
        "fleet": {"n": config.n, "k": config.k,
                  "p_min": config.p_min, "p_max": config.p_max},
        "contention": {"w": config.window, "mini_slot_us": config.mini_slot_us},
        "control": {"a": config.a, "b": config.b, "noise_var": config.noise_var,
                    "y_ref": {"kind": config.y_ref.kind, "value": config.y_ref.value,
                              "amplitude": config.y_ref.amplitude,
                              "period": config.y_ref.period}},
        "mdp": {"cost": config.mdp_cost},
        "thresholds": {str(k): v for k, v in config.thresholds.items()},
        "trace": config.trace,
        "n_batches": config.n_batches,
    }
    if config.q_max is not None:
        d["mdp"]["q_max"] = config.q_max
    if config.q_step is not None:
        d["mdp"]["q_step"] = config.q_step
    return d


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        rows = harness.run(config)
    except harness.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if config.scenario == "mdp":
        table = rows[0].extras["policy_table"]
        text = format_policy_table(table)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        print(f"avg_cost={table.avg_cost:.6f} avg_freq={table.avg_freq:.6f} "
              f"lam={rows[0].extras['lam']:.6g}", file=sys.stderr)
        return 0

    for m in rows:
        freq = "" if m.avg_update_freq is None else f" freq={float(m.avg_update_freq.mean()):.4f}"
        uoi = "" if m.avg_uoi is None else f" avg_uoi={m.avg_uoi:.6f}"
        bound = "" if m.bound_value is None else f" bound={m.bound_value:.6f}"
        print(f"[{m.scenario}] {m.policy}:{uoi}{freq}{bound}")
        if m.scenario == "waterfill":
            print("pi = " + " ".join(f"{x:.6f}" for x in m.extras["pi"]))

    if args.out:
        paths = harness.export(rows, args.format, args.out)
        for p in paths:
            print(f"wrote {p}")

    if args.assert_bounds:
        for m in rows:
            if m.bound_value is not None and m.avg_uoi is not None:
                slack = 3.0 * (m.stderr_uoi or 0.0)
                if m.avg_uoi > m.bound_value + slack:
                    print(f"bound violated: {m.policy} avg_uoi {m.avg_uoi:.6f} "
                          f"> bound {m.bound_value:.6f} + {slack:.6f}", file=sys.stderr)
                    return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
