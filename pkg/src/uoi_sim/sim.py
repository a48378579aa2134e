"""Slot-loop simulators for the single-terminal, fleet, and control systems.

All randomness comes from named per-(terminal, kind) streams so that
different policies run against identical weight/increment/channel draws.
Weight, increment and channel variates are consumed once per slot
unconditionally, which keeps the streams aligned across policies; a
policy's own coin flips live on separate streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import csma as csma_mod
from .control import LinearPlant, ReferencePath, optimal_control, step_plant_with_noise
from .core import (GaussianIncrements, TerminalParams, WeightProcess,
                   sample_channel_block)
from .mdp import StationaryPolicyTable
from .multi import (FleetConfig, index_coefficients, schedule_round_robin,
                    schedule_stationary)
from .rng import BufferedInts, BufferedUniforms, StreamFactory

SINGLE_POLICIES = ("adaptive", "periodic", "random", "age-threshold", "rvi-uoi", "rvi-aoi")
FLEET_SCHEDULERS = ("centralized", "aoi", "round-robin", "stationary", "csma")


@dataclass
class SimResult:
    avg_uoi: float
    batch_means: np.ndarray
    update_freq: np.ndarray          # per-terminal attempt frequency
    violation_prob: float | None
    extras: dict
    trace: list | None = None


def stderr_from_batches(batch_means: np.ndarray) -> float:
    batch_means = np.asarray(batch_means, dtype=float)
    if len(batch_means) < 2:
        return 0.0
    return float(batch_means.std(ddof=1) / math.sqrt(len(batch_means)))


def _threshold_array(w: np.ndarray, thresholds: dict[float, float] | None) -> np.ndarray | None:
    """Per-slot |Q| bound looked up from the realized weight; weights with no
    mapped bound never violate."""
    if not thresholds:
        return None
    thr = np.full(len(w), np.inf)
    for value, bound in thresholds.items():
        thr[w == float(value)] = float(bound)
    return thr


def age_threshold_for_budget(p: float, rho: float) -> int:
    """Smallest age threshold whose attempt frequency stays within rho.

    Retransmits every slot past the threshold until a success, so a cycle
    is (m - 1) waiting slots plus Geometric(p) attempts.
    """
    return max(1, math.ceil(1.0 + (1.0 / rho - 1.0) / p - 1e-12))


def _table_lookup(table: StationaryPolicyTable, widx: dict[float, int],
                  q: float, w_now: float, w_next: float, age: int) -> float:
    grid = table.grid
    if table.cost_kind == "aoi":
        return float(table.table[min(age, grid.delta_max) - 1])
    qc = min(max(q, -grid.q_max), grid.q_max)
    iq = int(round((qc + grid.q_max) / grid.q_step))
    return float(table.table[iq, widx[w_now], widx[w_next]])


def run_single(params: TerminalParams, weights: WeightProcess, rho: float, v: float,
               policy: str = "adaptive", horizon: int = 1_000_000,
               factory: StreamFactory | None = None,
               thresholds: dict[float, float] | None = None,
               n_batches: int = 10, trace: bool = False,
               policy_table: StationaryPolicyTable | None = None) -> SimResult:
    """Simulate one terminal under an update policy for `horizon` slots."""
    if policy not in SINGLE_POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy.startswith("rvi") and policy_table is None:
        raise ValueError(f"policy {policy!r} needs a solved policy_table")
    factory = factory or StreamFactory(0)
    T = int(horizon)
    tid = params.id

    w = weights.sample_block(factory.stream("weight", tid), 0, T + 1)
    inc = GaussianIncrements(params.sigma2).sample_block(
        factory.stream("increment", tid), 0, T)
    s_good = sample_channel_block(factory.stream("channel", tid), params.p, T)
    thr = _threshold_array(w[:T], thresholds)

    theta = params.omega_bar * (1.0 / (params.p * rho) - 1.0)
    p = params.p
    coin = BufferedUniforms(factory.stream("policy", tid))
    age_m = age_threshold_for_budget(p, rho)
    widx = ({float(val): i for i, (val, _) in enumerate(policy_table.grid.weight_support)}
            if policy_table is not None and policy_table.cost_kind == "uoi" else {})

    nb = max(1, n_batches)
    batch_len = max(1, T // nb)
    batch_sums = np.zeros(nb)
    batch_counts = np.zeros(nb, dtype=np.int64)

    q = 0.0
    h = 0.0
    age = 1
    credit = 0.0
    attempts = 0
    violations = 0
    rows = [] if trace else None

    for t in range(T):
        w_t = w[t]
        f_t = w_t * q * q
        b = min(t // batch_len, nb - 1)
        batch_sums[b] += f_t
        batch_counts[b] += 1
        if thr is not None and abs(q) > thr[t]:
            violations += 1

        if policy == "adaptive":
            u = 1 if (w[t + 1] + theta) * p * q * q > v * h else 0
        elif policy == "periodic":
            credit += rho
            if credit >= 1.0 - 1e-12:
                credit -= 1.0
                u = 1
            else:
                u = 0
        elif policy == "random":
            u = 1 if coin.next() < rho else 0
        elif policy == "age-threshold":
            u = 1 if age >= age_m else 0
        else:  # rvi table, possibly randomized per state
            prob = _table_lookup(policy_table, widx, q, w_t, w[t + 1], age)
            u = 1 if prob >= 1.0 else (0 if prob <= 0.0 else int(coin.next() < prob))

        attempts += u
        delivered = u and s_good[t]
        if rows is not None:
            rows.append((t, h, q, f_t))
        q = inc[t] if delivered else q + inc[t]
        age = 1 if delivered else age + 1
        if policy == "adaptive":
            h = max(0.0, h - rho + u)

    total = float(batch_sums.sum())
    return SimResult(
        avg_uoi=total / T,
        batch_means=batch_sums / np.maximum(batch_counts, 1),
        update_freq=np.array([attempts / T]),
        violation_prob=(violations / T) if thr is not None else None,
        extras={"h_over_t": h / T if policy == "adaptive" else None,
                "final_h": h, "attempts": attempts},
        trace=rows,
    )


# --------------------------------------------------------------------------
# Fleet simulation.
# --------------------------------------------------------------------------


def _topk_ids(values: np.ndarray, k: int) -> np.ndarray:
    """Largest-k ids, ties to the lowest id (stable sort on descending value)."""
    return np.argsort(-values, kind="stable")[:k]


def run_fleet(fleet: FleetConfig, weights: list[WeightProcess], scheduler: str,
              pi: np.ndarray, horizon: int = 1_000_000,
              factory: StreamFactory | None = None,
              contention: csma_mod.ContentionConfig | None = None,
              delta_j: float | None = None,
              thresholds: dict[float, float] | None = None,
              n_batches: int = 10, block: int = 32768,
              trace: bool = False) -> SimResult:
    """Simulate N terminals under one scheduler for `horizon` slots.

    The csma scheduler stretches the slot to (1 + W/100) ms, so its error
    increments carry variance slot_scale * sigma2; all schedulers consume
    the same per-slot stream variates either way.
    """
    if scheduler not in FLEET_SCHEDULERS:
        raise ValueError(f"unknown scheduler {scheduler!r}")
    factory = factory or StreamFactory(0)
    T = int(horizon)
    n, k = fleet.n, fleet.k
    p = fleet.array("p")
    sigma2 = fleet.array("sigma2")
    omega_bar = fleet.array("omega_bar")

    slot_scale = 1.0
    if scheduler == "csma":
        if contention is None:
            raise ValueError("csma scheduling needs a ContentionConfig")
        if contention.k != k:
            raise ValueError("contention sub-channels must match fleet.k")
        slot_scale = contention.slot_scale
    inc_scale = math.sqrt(slot_scale)

    coefs = None
    if scheduler in ("centralized", "csma"):
        coefs = index_coefficients(fleet, pi)
    sched_coin = (BufferedUniforms(factory.stream("scheduler", 0))
                  if scheduler == "stationary" else None)
    backoffs = ([BufferedInts(factory.stream("backoff", i), contention.w) for i in range(n)]
                if scheduler == "csma" else None)
    if scheduler == "csma":
        if delta_j is None:
            delta_j = csma_mod.default_delta_j(omega_bar, sigma2 * slot_scale)
        th_state = csma_mod.ThresholdState(j_th=0.0, delta_j=delta_j)

    w_streams = [factory.stream("weight", i) for i in range(n)]
    a_streams = [factory.stream("increment", i) for i in range(n)]
    c_streams = [factory.stream("channel", i) for i in range(n)]
    incs = [GaussianIncrements(sigma2[i]) for i in range(n)]

    nb = max(1, n_batches)
    batch_len = max(1, T // nb)
    batch_sums = np.zeros(nb)
    batch_counts = np.zeros(nb, dtype=np.int64)

    q = np.zeros(n)
    delta = np.ones(n, dtype=np.int64)
    attempts = np.zeros(n, dtype=np.int64)
    violations = 0
    max_index = 0.0
    rows = [] if trace else None

    # Weight lookahead: keep a buffer covering slots [t0, t0 + nblk].
    w_buf = np.stack([weights[i].sample_block(w_streams[i], 0, min(block, T) + 1)
                      for i in range(n)])
    t0 = 0
    while t0 < T:
        nblk = min(block, T - t0)
        if t0 > 0:
            fresh = np.stack([weights[i].sample_block(w_streams[i], t0 + 1, nblk)
                              for i in range(n)])
            w_buf = np.concatenate([w_buf[:, -1:], fresh], axis=1)
        a_blk = np.stack([incs[i].sample_block(a_streams[i], t0, nblk) for i in range(n)])
        if slot_scale != 1.0:
            a_blk *= inc_scale
        s_blk = np.stack([sample_channel_block(c_streams[i], p[i], nblk) for i in range(n)])
        thr_blk = None
        if thresholds:
            thr_blk = np.full((n, nblk), np.inf)
            for value, bound in thresholds.items():
                thr_blk[w_buf[:, :nblk] == float(value)] = float(bound)

        for j in range(nblk):
            t = t0 + j
            w_t = w_buf[:, j]
            q2 = q * q
            f_slot = float(w_t @ q2) / n
            b = min(t // batch_len, nb - 1)
            batch_sums[b] += f_slot
            batch_counts[b] += 1
            if thr_blk is not None:
                violations += int(np.count_nonzero(np.abs(q) > thr_blk[:, j]))

            transmit = np.zeros(n, dtype=bool)
            eligible = None
            aux = 0.0
            if scheduler == "centralized":
                indices = (coefs + w_buf[:, j + 1]) * p * q2
                transmit[_topk_ids(indices, k)] = True
            elif scheduler == "aoi":
                scores = p * delta * (delta + 1.0)
                transmit[_topk_ids(scores, k)] = True
            elif scheduler == "round-robin":
                transmit[schedule_round_robin(t, n, k)] = True
            elif scheduler == "stationary":
                transmit[schedule_stationary(pi, sched_coin.next())] = True
            else:  # csma
                indices = (coefs + w_buf[:, j + 1]) * p * q2
                max_index = max(max_index, float(indices.max()))
                active = np.flatnonzero(indices > th_state.j_th).tolist()
                outcome = csma_mod.contend(
                    active, contention, lambda tid: backoffs[tid].next())
                winners = outcome.winners()
                transmit[winners] = True
                eligible = transmit.copy()
                transmit[list(outcome.collided)] = True  # data sent and wasted
                th_state = csma_mod.adapt_threshold(th_state, outcome, contention)
                aux = th_state.j_th

            attempts += transmit
            delivered = (transmit if eligible is None else eligible) & s_blk[:, j]
            if rows is not None:
                rows.append((t, aux, f_slot))
            q = np.where(delivered, 0.0, q) + a_blk[:, j]
            delta = np.where(delivered, 1, delta + 1)
        t0 += nblk

    total = float(batch_sums.sum())
    return SimResult(
        avg_uoi=total / T,
        batch_means=batch_sums / np.maximum(batch_counts, 1),
        update_freq=attempts / T,
        violation_prob=(violations / (n * T)) if thresholds else None,
        extras={"slot_scale": slot_scale,
                "wallclock_avg_uoi": total / T / slot_scale,
                "final_j_th": th_state.j_th if scheduler == "csma" else None,
                "max_index": max_index if scheduler == "csma" else None,
                "delta_j": delta_j if scheduler == "csma" else None},
        trace=rows,
    )


# --------------------------------------------------------------------------
# Remote tracking control.
# --------------------------------------------------------------------------


@dataclass
class TrackingResult:
    avg_track_cost: float          # mean w_t (x_t - y_t)^2
    avg_est_cost: float            # mean w_t (x_{t-1} - x_hat_{t-1})^2
    avg_uoi: float                 # mean w_t Q_t^2 of the embedded update system
    update_freq: float
    track_batches: np.ndarray
    est_batches: np.ndarray
    omega_bar: float
    noise_var: float


CONTROL_POLICIES = ("adaptive", "periodic", "random", "age-threshold")


def run_tracking(plant: LinearPlant, reference: ReferencePath,
                 weights: WeightProcess, policy: str, rho: float, v: float,
                 p_channel: float, horizon: int = 1_000_000,
                 factory: StreamFactory | None = None,
                 n_batches: int = 10) -> TrackingResult:
    """Drive the plant with certainty-equivalent control while the chosen
    policy decides when the terminal uplinks its true state."""
    if policy not in CONTROL_POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    factory = factory or StreamFactory(0)
    T = int(horizon)
    omega_bar = weights.mean

    w = weights.sample_block(factory.stream("weight", 0), 0, T + 1)
    noise = factory.stream("increment", 0).normal(T) * math.sqrt(plant.noise_var)
    s_good = sample_channel_block(factory.stream("channel", 0), p_channel, T)
    coin = BufferedUniforms(factory.stream("policy", 0))

    theta = omega_bar * (1.0 / (p_channel * rho) - 1.0)
    age_m = age_threshold_for_budget(p_channel, rho)

    nb = max(1, n_batches)
    batch_len = max(1, T // nb)
    track_sums = np.zeros(nb)
    est_sums = np.zeros(nb)
    batch_counts = np.zeros(nb, dtype=np.int64)

    state = plant
    h = 0.0
    age = 1
    credit = 0.0
    attempts = 0
    uoi_total = 0.0

    for t in range(T):
        w_t = w[t]
        b = min(t // batch_len, nb - 1)
        est_err = state.x - state.x_hat
        est_sums[b] += w_t * est_err * est_err
        batch_counts[b] += 1

        y_t = reference.at(t)
        v_t = optimal_control(state, y_t)
        state = step_plant_with_noise(state, v_t, 0, noise[t])
        track_err = state.x - y_t
        track_sums[b] += w_t * track_err * track_err

        q_pre = state.x - state.x_hat
        uoi_total += w_t * q_pre * q_pre
        if policy == "adaptive":
            u = 1 if (w[t + 1] + theta) * p_channel * q_pre * q_pre > v * h else 0
        elif policy == "periodic":
            credit += rho
            if credit >= 1.0 - 1e-12:
                credit -= 1.0
                u = 1
            else:
                u = 0
        elif policy == "random":
            u = 1 if coin.next() < rho else 0
        else:
            u = 1 if age >= age_m else 0

        attempts += u
        delivered = u and s_good[t]
        if delivered:
            state = replace(state, x_hat=state.x)
        age = 1 if delivered else age + 1
        if policy == "adaptive":
            h = max(0.0, h - rho + u)

    counts = np.maximum(batch_counts, 1)
    return TrackingResult(
        avg_track_cost=float(track_sums.sum()) / T,
        avg_est_cost=float(est_sums.sum()) / T,
        avg_uoi=uoi_total / T,
        update_freq=attempts / T,
        track_batches=track_sums / counts,
        est_batches=est_sums / counts,
        omega_bar=omega_bar,
        noise_var=plant.noise_var,
    )
