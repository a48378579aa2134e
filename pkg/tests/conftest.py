"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np

from uoi_sim.core import TerminalParams, TwoPointWeights
from uoi_sim.multi import FleetConfig


def desk_terminal() -> TerminalParams:
    """The single-terminal desk configuration: p=0.8, sigma2=1, two-point
    weights 1/100 with mean 1.99."""
    return TerminalParams(id=0, p=0.8, sigma2=1.0, omega_bar=1.99)


def desk_weights() -> TwoPointWeights:
    return TwoPointWeights(w_lo=1.0, w_hi=100.0, prob_hi=0.01)


def fleet_weights() -> TwoPointWeights:
    return TwoPointWeights(w_lo=1.0, w_hi=100.0, prob_hi=0.05)


def make_fleet(n: int, k: int = 2, sigma2: float = 1.0,
               omega_bar: float | None = None) -> FleetConfig:
    """Success probabilities spread linearly over [0.7, 1.0]."""
    if omega_bar is None:
        omega_bar = fleet_weights().mean
    terminals = tuple(
        TerminalParams(id=i,
                       p=0.7 + (0.3 * i / (n - 1) if n > 1 else 0.0),
                       sigma2=sigma2, omega_bar=omega_bar)
        for i in range(n))
    return FleetConfig(terminals=terminals, k=k)


def grid_min_objective(d: np.ndarray, k: int, step: float = 1e-3) -> float:
    """Brute-force lattice minimum of sum d_i^2 / pi_i with pi_i in
    {step, 2*step, ..., 1}, sum(pi) <= k.

    Computed by exact dynamic programming over the integer lattice, which
    enumerates the same set of allocations as a nested grid search.
    Independent of the water-filling solver.
    """
    levels = int(round(1.0 / step))          # lattice points per terminal
    budget = k * levels                      # total lattice units
    d = np.asarray(d, dtype=float)
    inf = np.inf
    costs = []
    for di in d:
        c = np.full(levels + 1, inf)
        if di == 0.0:
            c[:] = 0.0                       # zero width: pi = 0 is free
        else:
            units = np.arange(1, levels + 1)
            c[1:] = di * di / (units * step)
        costs.append(c)

    # f[r] = min cost of allocating exactly r lattice units to the suffix.
    f = np.full(budget + 1, inf)
    last = costs[-1]
    r = np.arange(budget + 1)
    take = np.minimum(r, levels)
    f = last[take]
    if d[-1] == 0.0:
        f = np.zeros(budget + 1)
    for c in reversed(costs[:-1]):
        g = np.full(budget + 1, inf)
        x_lo = 0 if c[0] == 0.0 else 1
        for x in range(x_lo, levels + 1):
            g[x:] = np.minimum(g[x:], c[x] + f[: budget + 1 - x])
        f = g
    return float(f.min())
