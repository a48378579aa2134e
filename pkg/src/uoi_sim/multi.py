"""Centralized K-of-N scheduling and the baseline schedulers.

The adaptive scheduler picks, each slot, the K terminals with the largest
update indices.  The index coefficients come from a stationary randomized
policy pi that minimizes sum_i omega_bar_i * sigma2_i / (p_i * pi_i)
subject to sum(pi) <= K and pi_i <= 1 -- a water-filling allocation over
d_i = sqrt(omega_bar_i * sigma2_i / p_i).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import TerminalParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FleetConfig:
    terminals: tuple[TerminalParams, ...]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if len(self.terminals) < 1:
            raise ValueError("need at least one terminal")

    @property
    def n(self) -> int:
        return len(self.terminals)

    def array(self, field: str) -> np.ndarray:
        return np.array([getattr(t, field) for t in self.terminals], dtype=float)


@dataclass(frozen=True)
class StationaryPolicy:
    """Schedule terminal i independently with probability pi[i] per slot."""

    pi: np.ndarray
    objective: float


def allocation_widths(fleet: FleetConfig) -> np.ndarray:
    """d_i = sqrt(omega_bar_i * sigma2_i / p_i), the water-filling widths."""
    return np.sqrt(fleet.array("omega_bar") * fleet.array("sigma2") / fleet.array("p"))


def _objective(d: np.ndarray, pi: np.ndarray) -> float:
    mask = d > 0.0
    return float(np.sum(d[mask] ** 2 / pi[mask]))


def waterfill(fleet: FleetConfig, tol: float = 1e-9, max_iter: int = 200) -> StationaryPolicy:
    """Minimize sum d_i^2 / pi_i over sum(pi) <= K, 0 <= pi_i <= 1.

    Solved by bisection on the water level lam with pi_i(lam) = min(1, d_i/lam);
    sum pi_i(lam) is strictly decreasing in lam on the relevant range, so the
    level with sum pi = min(K, N) is the unique KKT point.  Terminals with
    zero width (sigma2 == 0 is rejected by TerminalParams, but widths can be
    zero if callers construct d manually) get pi = 0 with a diagnostic.
    """
    return waterfill_from_widths(allocation_widths(fleet), fleet.k, tol=tol, max_iter=max_iter)


def waterfill_from_widths(d: np.ndarray, k: int, tol: float = 1e-9,
                          max_iter: int = 200) -> StationaryPolicy:
    d = np.asarray(d, dtype=float)
    if np.any(d < 0.0):
        raise ValueError("widths must be nonnegative")
    n = len(d)
    active = d > 0.0
    if not np.all(active):
        log.warning("terminals %s have zero width; assigned pi = 0",
                    np.flatnonzero(~active).tolist())
    n_active = int(active.sum())
    if n_active == 0:
        return StationaryPolicy(pi=np.zeros(n), objective=0.0)

    pi = np.zeros(n)
    if k >= n_active:
        # Enough sub-channels for everyone: all always eligible.
        pi[active] = 1.0
        return StationaryPolicy(pi=pi, objective=_objective(d, pi))

    target = float(k)
    da = d[active]
    # lam <= min(d) saturates everything (sum = n_active > target);
    # lam = sum(d)/target gives sum <= target.  Bisect between them.
    lo = float(da.min())
    hi = float(da.sum()) / target
    for _ in range(max_iter):
        lam = 0.5 * (lo + hi)
        s = float(np.minimum(1.0, da / lam).sum())
        if abs(s - target) < min(tol, 1e-12):
            break
        if s > target:
            lo = lam
        else:
            hi = lam
    pia = np.minimum(1.0, da / lam)
    # Exact stationarity on the unsaturated set: rescale so sum(pi) == K.
    unsat = pia < 1.0
    deficit = target - float(pia[~unsat].sum())
    if unsat.any() and deficit > 0.0:
        pia[unsat] *= deficit / float(pia[unsat].sum())
    pi[active] = pia
    if abs(pi.sum() - target) > tol:
        raise RuntimeError(f"water level bisection failed: sum(pi) = {pi.sum():.12f}")
    return StationaryPolicy(pi=pi, objective=_objective(d, pi))


def kkt_residual(d: np.ndarray, k: int, policy: StationaryPolicy) -> float:
    """Max violation of the KKT system at `policy` (0 at the true optimum).

    Checks stationarity on unsaturated coordinates (common d_i/pi_i ratio),
    dual feasibility of the cap multipliers, and primal feasibility.
    """
    d = np.asarray(d, dtype=float)
    pi = policy.pi
    active = d > 0.0
    target = float(min(k, int(active.sum())))
    res = abs(float(pi[active].sum()) - target)
    unsat = active & (pi < 1.0)
    if unsat.any():
        ratios = d[unsat] / pi[unsat]
        lam = float(ratios.mean())
        res = max(res, float(np.abs(ratios - lam).max()) / max(1.0, lam))
        # Saturated coordinates need d_i >= lam (cap multiplier >= 0).
        sat = active & (pi >= 1.0)
        if sat.any():
            res = max(res, float(np.maximum(0.0, lam - d[sat]).max()) / max(1.0, lam))
    return res


def multi_update_index(t: TerminalParams, omega_next: float, q: float) -> float:
    """J_i = (omega_bar_i * (1/(p_i pi_i) - 1) + omega_next) * p_i * q^2."""
    if t.pi is None or t.pi <= 0.0:
        raise ValueError(f"terminal {t.id} has pi = {t.pi}; excluded from adaptive scheduling")
    coeff = t.omega_bar * (1.0 / (t.p * t.pi) - 1.0) + omega_next
    return coeff * t.p * q * q


def index_coefficients(fleet: FleetConfig, pi: np.ndarray) -> np.ndarray:
    """Vectorized constant part of the update index: omega_bar*(1/(p pi) - 1)."""
    p = fleet.array("p")
    if np.any(pi <= 0.0):
        raise ValueError("all pi must be positive for adaptive scheduling")
    return fleet.array("omega_bar") * (1.0 / (p * pi) - 1.0)


def schedule_topk(indices: np.ndarray, k: int) -> list[int]:
    """Ids of the min(k, N) largest values; ties broken by lowest id."""
    indices = np.asarray(indices, dtype=float)
    k = min(int(k), len(indices))
    order = np.argsort(-indices, kind="stable")
    return order[:k].tolist()


def fleet_uoi_bound(fleet: FleetConfig, policy: StationaryPolicy) -> float:
    """(1/N) sum_i omega_bar_i sigma2_i / (p_i pi_i), the average-UoI ceiling
    of the adaptive scheduler parameterized by `policy`."""
    pi = policy.pi
    sigma2 = fleet.array("sigma2")
    if np.any((pi <= 0.0) & (sigma2 > 0.0)):
        raise ValueError("pi must be positive wherever sigma2 > 0")
    mask = sigma2 > 0.0
    terms = fleet.array("omega_bar")[mask] * sigma2[mask] / (fleet.array("p")[mask] * pi[mask])
    return float(terms.sum()) / fleet.n


def schedule_round_robin(slot: int, n: int, k: int) -> list[int]:
    """K consecutive ids modulo N, advancing by K per slot."""
    k = min(k, n)
    return [(slot * k + j) % n for j in range(k)]


@dataclass(frozen=True)
class AoIState:
    """Ages of the freshest delivered status, one per terminal."""

    delta: np.ndarray

    @classmethod
    def fresh(cls, n: int) -> "AoIState":
        return cls(delta=np.ones(n, dtype=np.int64))


def step_aoi(aoi: AoIState, delivered: np.ndarray) -> AoIState:
    """Age resets to 1 exactly on delivered slots, else increments."""
    return AoIState(delta=np.where(delivered, 1, aoi.delta + 1))


def schedule_aoi(aoi: AoIState, fleet: FleetConfig) -> list[int]:
    """Top-K ids by p_i * delta_i * (delta_i + 1), lowest-id tie-break."""
    scores = fleet.array("p") * aoi.delta * (aoi.delta + 1.0)
    return schedule_topk(scores, fleet.k)


def schedule_stationary(pi: np.ndarray, u: float) -> list[int]:
    """Systematic probability-proportional draw of terminals.

    Selects floor-or-ceil of sum(pi) terminals with inclusion probability
    exactly pi_i, never more than K when sum(pi) <= K; one uniform u drives
    the whole slot.  With all pi = 1 every terminal is selected.
    """
    cum = np.cumsum(pi)
    total = cum[-1]
    if total <= 0.0:
        return []
    points = u + np.arange(int(np.floor(total - u)) + 1)
    points = points[points < total]
    ids = np.searchsorted(cum, points, side="right")
    return np.unique(ids).tolist()
