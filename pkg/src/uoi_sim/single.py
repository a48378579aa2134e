"""Single-terminal adaptive updating under an average-frequency budget.

A virtual queue H tracks how much of the transmission budget rho has been
used; keeping it mean-rate stable enforces the budget.  Each slot the
terminal computes an update index from its error and the next-slot weight
and transmits iff the index exceeds V * H.  The achieved average UoI is
bounded by omega_bar * sigma2 / (p * rho) + V / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ErrorQueue, TerminalParams


@dataclass(frozen=True)
class VirtualQueue:
    """Budget-tracking queue: h grows by (1 - rho) on a transmitting slot
    and drains by at most rho otherwise.  v is the drift/penalty tradeoff."""

    h: float
    rho: float
    v: float

    def __post_init__(self):
        if self.h < 0.0:
            raise ValueError("h must be nonnegative")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")
        if self.v <= 0.0:
            raise ValueError("v must be positive")


def step_virtual_queue(vq: VirtualQueue, u: int) -> VirtualQueue:
    """H' = max(0, H - rho + U)."""
    return VirtualQueue(h=max(0.0, vq.h - vq.rho + u), rho=vq.rho, v=vq.v)


def update_index(params: TerminalParams, rho: float, omega_next: float, q: float) -> float:
    """Index J = (omega_next - omega_bar + omega_bar / (p * rho)) * p * q^2.

    Nonnegative for any positive omega_next since omega_bar * (1/(p*rho) - 1)
    is nonnegative.
    """
    p_rho = params.p * rho
    if p_rho <= 0.0:
        raise ValueError("p * rho must be positive")
    coeff = omega_next - params.omega_bar + params.omega_bar / p_rho
    return coeff * params.p * q * q


def drift_coefficient(params: TerminalParams, rho: float) -> float:
    """theta = omega_bar * (1 - p*rho) / (p*rho), the Lyapunov weight on Q^2
    that makes the per-slot drift-plus-penalty bound constant."""
    p_rho = params.p * rho
    if p_rho <= 0.0:
        raise ValueError("p * rho must be positive")
    return params.omega_bar * (1.0 - p_rho) / p_rho


@dataclass(frozen=True)
class SingleUpdaterState:
    params: TerminalParams
    vq: VirtualQueue
    eq: ErrorQueue
    theta: float

    def __post_init__(self):
        expected = drift_coefficient(self.params, self.vq.rho)
        if abs(self.theta - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError("theta must equal omega_bar*(1 - p*rho)/(p*rho)")


def make_single_updater(params: TerminalParams, rho: float, v: float) -> SingleUpdaterState:
    """Fresh updater with H_0 = 0, Q_0 = 0 and theta fixed from (p, rho)."""
    return SingleUpdaterState(
        params=params,
        vq=VirtualQueue(h=0.0, rho=rho, v=v),
        eq=ErrorQueue(),
        theta=drift_coefficient(params, rho),
    )


def decide_update(state: SingleUpdaterState, omega_next: float) -> int:
    """Transmit iff the update index strictly exceeds V * H (ties hold)."""
    j = update_index(state.params, state.vq.rho, omega_next, state.eq.q)
    return 1 if j > state.vq.v * state.vq.h else 0


def adaptive_uoi_bound(params: TerminalParams, rho: float, v: float) -> float:
    """Guaranteed ceiling on the long-run average UoI of the adaptive scheme."""
    p_rho = params.p * rho
    if p_rho <= 0.0:
        raise ValueError("p * rho must be positive")
    return params.omega_bar * params.sigma2 / p_rho + v / 2.0
