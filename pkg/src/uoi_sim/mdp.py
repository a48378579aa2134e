"""Frequency-constrained reference policies via relative value iteration.

The single-terminal system with i.i.d. increments and i.i.d. two-point
weights is Markov in (Q, w_now, w_next); truncating and discretizing Q
gives a finite average-cost MDP.  The frequency budget enters as a
Lagrange multiplier lam on the transmit action, calibrated by bisection;
where no pure policy hits the budget exactly, the two bracketing policies
are randomized state-wise.  The same machinery solves the age-based chain
(cost = age) to produce the age-optimal comparison policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import TerminalParams


@dataclass(frozen=True)
class MdpGrid:
    """Discretization of the error state plus the constraint multiplier.

    q_max / q_step must be an integer; Gaussian increment mass outside
    [-q_max, q_max] folds into the boundary bins.  delta_max caps the age
    chain used for the age-cost variant.
    """

    q_max: float
    q_step: float
    weight_support: tuple[tuple[float, float], ...]
    lam: float = 0.0
    delta_max: int = 200

    def __post_init__(self):
        ratio = self.q_max / self.q_step
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("q_max must be an integer multiple of q_step")
        probs = sum(p for _, p in self.weight_support)
        if self.weight_support and abs(probs - 1.0) > 1e-9:
            raise ValueError(f"weight probabilities sum to {probs}, expected 1")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        if self.delta_max < 2:
            raise ValueError("delta_max must be at least 2")

    @property
    def q_values(self) -> np.ndarray:
        m = round(self.q_max / self.q_step)
        return np.arange(-m, m + 1) * self.q_step

    @classmethod
    def default(cls, sigma2: float, weight_support, lam: float = 0.0) -> "MdpGrid":
        sigma = math.sqrt(sigma2)
        return cls(q_max=25.0 * sigma, q_step=0.25 * sigma,
                   weight_support=tuple(weight_support), lam=lam)


@dataclass(frozen=True)
class StationaryPolicyTable:
    """Greedy (possibly state-randomized) policy with its exact chain averages.

    table holds P(transmit | state): shape (nq, nw, nw) for cost_kind "uoi"
    (axes: q bin, current weight, next weight), shape (delta_max,) for "aoi".
    avg_cost excludes the multiplier term; avg_freq is the long-run E[U].
    """

    cost_kind: str
    table: np.ndarray
    avg_cost: float
    avg_freq: float
    grid: MdpGrid
    gain: float
    iterations: int


class RviConvergenceError(RuntimeError):
    def __init__(self, span: float, iterations: int):
        super().__init__(
            f"relative value iteration did not converge: span {span:.3e} "
            f"after {iterations} iterations")
        self.span = span
        self.iterations = iterations


# --------------------------------------------------------------------------
# Gaussian kernel on the q grid.
# --------------------------------------------------------------------------


def _phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def gaussian_kernel(grid: MdpGrid, sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """(G, g0): G[i, j] = P(bin j | q_i + A), g0 = row from q = 0.

    Interior bin edges sit halfway between grid points; tail mass folds
    into the outermost bins.
    """
    q = grid.q_values
    nq = len(q)
    step = grid.q_step
    sigma = math.sqrt(sigma2)
    # Edge offsets (d + 0.5) * step for integer d; row i needs d = j - i - 1
    # for interior edge j in 1..nq-1, i.e. d in [-nq + 1, nq - 2].
    d_vals = np.arange(-nq + 1, nq - 1)
    cdf = np.array([_phi((d + 0.5) * step / sigma) for d in d_vals])
    G = np.empty((nq, nq))
    for i in range(nq):
        # c[j - 1] = CDF at the lower edge of bin j, j = 1..nq-1
        c = cdf[nq - 1 - i: 2 * nq - 2 - i]
        G[i, 0] = c[0]
        G[i, 1:nq - 1] = np.diff(c)
        G[i, nq - 1] = 1.0 - c[-1]
    m = nq // 2
    return G, G[m].copy()


# --------------------------------------------------------------------------
# Solvers.
# --------------------------------------------------------------------------


def relative_value_iteration(transitions: np.ndarray, costs: np.ndarray,
                             span_tol: float = 1e-6, max_iter: int = 100_000,
                             ref: int = 0, h0: np.ndarray | None = None):
    """Generic dense average-cost solver.

    transitions: (A, S, S) row-stochastic per action; costs: (S, A).
    Returns (h, gain, policy, iterations) where policy is the greedy action
    (ties to the lower action index) and gain the optimal average cost.
    """
    n_actions, n_states, _ = transitions.shape
    h = np.zeros(n_states) if h0 is None else h0.copy()
    span = math.inf
    for it in range(1, max_iter + 1):
        q_vals = costs + np.stack([transitions[a] @ h for a in range(n_actions)], axis=1)
        th = q_vals.min(axis=1)
        diff = th - h
        span = float(diff.max() - diff.min())
        gain = 0.5 * float(diff.max() + diff.min())
        h = th - th[ref]
        if span < span_tol:
            return h, gain, q_vals.argmin(axis=1), it
    raise RviConvergenceError(span, max_iter)


def _uoi_rvi(grid: MdpGrid, params: TerminalParams, span_tol: float = 1e-6,
             max_iter: int = 100_000, h0: np.ndarray | None = None):
    """Structured solver for the (q, w_now, w_next) chain.

    Exploits that only the q component depends on the action and that the
    weight pair shifts (w_now, w_next) -> (w_next, fresh draw).
    """
    if not grid.weight_support:
        raise ValueError("uoi cost needs a finite weight support")
    q = grid.q_values
    nq = len(q)
    w_vals = np.array([w for w, _ in grid.weight_support])
    pw = np.array([p for _, p in grid.weight_support])
    nw = len(w_vals)
    G, g0 = gaussian_kernel(grid, params.sigma2)
    base = w_vals[None, :, None] * (q ** 2)[:, None, None]  # (nq, nw, 1)
    p = params.p
    m = nq // 2

    h = np.zeros((nq, nw, nw)) if h0 is None else h0.copy()
    span = math.inf
    for it in range(1, max_iter + 1):
        hbar = h @ pw                      # (nq, nw): E over next-next weight
        c0 = G @ hbar                      # continuation, no delivery
        r0 = g0 @ hbar                     # continuation after a delivery
        q0 = base + c0[:, None, :]
        q1 = base + grid.lam + (p * r0)[None, None, :] + (1.0 - p) * c0[:, None, :]
        th = np.minimum(q0, q1)
        diff = th - h
        span = float(diff.max() - diff.min())
        gain = 0.5 * float(diff.max() + diff.min())
        h = th - th[m, 0, 0]
        if span < span_tol:
            return h, gain, (q1 < q0).astype(float), it
    raise RviConvergenceError(span, max_iter)


# --------------------------------------------------------------------------
# Exact evaluation of a (possibly randomized) policy on the discrete chain.
# --------------------------------------------------------------------------


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    M = P.T - np.eye(n)
    M[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    mu = np.linalg.solve(M, b)
    mu = np.maximum(mu, 0.0)
    return mu / mu.sum()


def _uoi_policy_chain(grid: MdpGrid, params: TerminalParams, table: np.ndarray):
    """Dense transition matrix plus per-state base cost and transmit prob."""
    q = grid.q_values
    nq = len(q)
    w_vals = np.array([w for w, _ in grid.weight_support])
    pw = np.array([p for _, p in grid.weight_support])
    nw = len(w_vals)
    G, g0 = gaussian_kernel(grid, params.sigma2)
    p = params.p
    S = nq * nw * nw
    P6 = np.zeros((nq, nw, nw, nq, nw, nw))
    for a in range(nw):
        for b in range(nw):
            u = table[:, a, b]                       # (nq,)
            qrows = (1.0 - p * u)[:, None] * G + (p * u)[:, None] * g0[None, :]
            P6[:, a, b, :, b, :] = qrows[:, :, None] * pw[None, None, :]
    P = P6.reshape(S, S)
    base = (w_vals[None, :, None] * (q ** 2)[:, None, None]
            * np.ones((1, 1, nw))).reshape(S)
    freq = table.reshape(S)
    return P, base, freq


def _aoi_policy_chain(grid: MdpGrid, params: TerminalParams, table: np.ndarray):
    dmax = grid.delta_max
    p = params.p
    P = np.zeros((dmax, dmax))
    ages = np.arange(1, dmax + 1, dtype=float)
    for i in range(dmax):
        up = min(i + 1, dmax - 1)
        u = table[i]
        P[i, 0] += p * u
        P[i, up] += 1.0 - p * u
    return P, ages, table.astype(float)


def evaluate_policy(grid: MdpGrid, params: TerminalParams, cost_kind: str,
                    table: np.ndarray) -> tuple[float, float]:
    """(avg base cost, avg transmit frequency) of the induced chain."""
    if cost_kind == "uoi":
        P, base, freq = _uoi_policy_chain(grid, params, table)
    elif cost_kind == "aoi":
        P, base, freq = _aoi_policy_chain(grid, params, table)
    else:
        raise ValueError(f"unknown cost kind {cost_kind!r}")
    mu = stationary_distribution(P)
    return float(mu @ base), float(mu @ freq)


# --------------------------------------------------------------------------
# Public entry points.
# --------------------------------------------------------------------------


def _aoi_mdp(grid: MdpGrid, params: TerminalParams):
    dmax = grid.delta_max
    p = params.p
    T = np.zeros((2, dmax, dmax))
    for i in range(dmax):
        up = min(i + 1, dmax - 1)
        T[0, i, up] = 1.0
        T[1, i, 0] = p
        T[1, i, up] = 1.0 - p
    ages = np.arange(1, dmax + 1, dtype=float)
    costs = np.stack([ages, ages + grid.lam], axis=1)
    return T, costs


def rvi_solve(grid: MdpGrid, params: TerminalParams, cost_kind: str,
              span_tol: float = 1e-6, max_iter: int = 100_000,
              h0: np.ndarray | None = None) -> StationaryPolicyTable:
    """Solve the lam-penalized average-cost problem and evaluate its greedy
    policy exactly on the discrete chain."""
    if cost_kind == "uoi":
        _, gain, table, iters = _uoi_rvi(grid, params, span_tol, max_iter, h0=h0)
    elif cost_kind == "aoi":
        T, costs = _aoi_mdp(grid, params)
        _, gain, actions, iters = relative_value_iteration(
            T, costs, span_tol, max_iter, h0=h0)
        table = actions.astype(float)
    else:
        raise ValueError(f"unknown cost kind {cost_kind!r}")
    avg_cost, avg_freq = evaluate_policy(grid, params, cost_kind, table)
    return StationaryPolicyTable(cost_kind=cost_kind, table=table,
                                 avg_cost=avg_cost, avg_freq=avg_freq,
                                 grid=grid, gain=gain, iterations=iters)


def _mix_tables(lo: StationaryPolicyTable, hi: StationaryPolicyTable, eta: float) -> np.ndarray:
    return eta * lo.table + (1.0 - eta) * hi.table


def calibrate_multiplier(grid: MdpGrid, params: TerminalParams, rho: float,
                         cost_kind: str, freq_tol: float = 1e-3,
                         max_bisect: int = 60, lam_cap: float = 1e6
                         ) -> tuple[float, StationaryPolicyTable]:
    """Find lam so the policy's long-run transmit frequency meets rho.

    Bisection on lam; if the pure policies jump across rho, the two
    bracketing policies are randomized state-wise and the mixing weight is
    itself bisected against the exact chain frequency.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must be in (0, 1], got {rho}")

    def solve(lam: float) -> StationaryPolicyTable:
        return rvi_solve(replace(grid, lam=lam), params, cost_kind)

    lo_tab = solve(0.0)
    if lo_tab.avg_freq <= rho + freq_tol:
        return 0.0, lo_tab  # constraint slack at lam = 0

    lam_hi, hi_tab = 1.0, None
    while lam_hi <= lam_cap:
        hi_tab = solve(lam_hi)
        if hi_tab.avg_freq <= rho:
            break
        lam_hi *= 4.0
    else:
        raise RuntimeError(
            f"no multiplier below {lam_cap} meets rho = {rho}; "
            f"frequency still {hi_tab.avg_freq:.4f}")

    lam_lo = 0.0
    for _ in range(max_bisect):
        lam_mid = 0.5 * (lam_lo + lam_hi)
        mid_tab = solve(lam_mid)
        if abs(mid_tab.avg_freq - rho) < freq_tol:
            return lam_mid, mid_tab
        if mid_tab.avg_freq > rho:
            lam_lo, lo_tab = lam_mid, mid_tab
        else:
            lam_hi, hi_tab = lam_mid, mid_tab

    # Duality gap: randomize between the bracketing policies.
    eta_lo, eta_hi = 0.0, 1.0  # eta = weight on the more aggressive policy
    mixed = hi_tab.table
    freq = hi_tab.avg_freq
    cost = hi_tab.avg_cost
    for _ in range(60):
        eta = 0.5 * (eta_lo + eta_hi)
        mixed = _mix_tables(lo_tab, hi_tab, eta)
        cost, freq = evaluate_policy(grid, params, cost_kind, mixed)
        if abs(freq - rho) < freq_tol:
            break
        if freq > rho:
            eta_hi = eta
        else:
            eta_lo = eta
    table = StationaryPolicyTable(cost_kind=cost_kind, table=mixed,
                                  avg_cost=cost, avg_freq=freq, grid=grid,
                                  gain=hi_tab.gain, iterations=hi_tab.iterations)
    return lam_hi, table


def format_policy_table(table: StationaryPolicyTable) -> str:
    """Human-readable dump of the decision map."""
    lines = [f"# cost_kind={table.cost_kind} avg_cost={table.avg_cost:.6f} "
             f"avg_freq={table.avg_freq:.6f} lam={table.grid.lam:.6g}"]
    if table.cost_kind == "aoi":
        lines.append("# age -> P(transmit)")
        for i, u in enumerate(table.table):
            lines.append(f"{i + 1} {u:.4f}")
    else:
        w_vals = [w for w, _ in table.grid.weight_support]
        lines.append("# q w_now w_next -> P(transmit)")
        q = table.grid.q_values
        for iq, qq in enumerate(q):
            for a, wa in enumerate(w_vals):
                for b, wb in enumerate(w_vals):
                    lines.append(f"{qq:.4f} {wa:g} {wb:g} {table.table[iq, a, b]:.4f}")
    return "\n".join(lines) + "\n"
