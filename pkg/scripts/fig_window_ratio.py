#!/usr/bin/env python3
"""Distributed-to-centralized UoI ratio as the contention window grows.

Small windows collide often; large windows stretch the slot (and the
per-slot error variance) by 1 + W/100.  Writes one curve of
(W, ratio, 0) per fleet size.
"""

import argparse

from uoi_sim.csma import ContentionConfig
from uoi_sim.harness import build_fleet, config_from_dict
from uoi_sim.multi import waterfill
from uoi_sim.rng import StreamFactory
from uoi_sim.sim import run_fleet


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--windows", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64])
    ap.add_argument("--out", default="fig_window_ratio.csv")
    args = ap.parse_args()

    cfg = config_from_dict({
        "scenario": "csma", "fleet": {"n": args.n, "k": 2},
        "weights": {"kind": "two-point", "w_lo": 1.0, "w_hi": 100.0,
                    "prob_hi": 0.05}})
    fleet = build_fleet(cfg)
    pi = waterfill(fleet).pi
    weights = [cfg.weights] * args.n

    central = run_fleet(fleet, weights, "centralized", pi=pi,
                        horizon=args.horizon, factory=StreamFactory(args.seed))
    lines = ["w,ratio,avg_uoi_distributed,avg_uoi_centralized"]
    for w in args.windows:
        res = run_fleet(fleet, weights, "csma", pi=pi, horizon=args.horizon,
                        factory=StreamFactory(args.seed),
                        contention=ContentionConfig(w=w, k=2))
        ratio = res.avg_uoi / central.avg_uoi
        lines.append(f"{w},{ratio:.4f},{res.avg_uoi:.4f},{central.avg_uoi:.4f}")
        print(f"W={w:<3d} distributed {res.avg_uoi:8.3f} ratio {ratio:.3f}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
