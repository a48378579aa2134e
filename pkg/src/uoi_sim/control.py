"""Remote tracking control of a scalar linear plant.

The controller steers x toward a reference y using certainty-equivalent
control computed from its estimate x_hat; the estimate is exact right
after an uplink delivery and otherwise propagated through the model.  The
achieved weighted tracking cost decomposes into the weighted estimation
error (scaled by a^2) plus an irreducible noise floor, so ranking update
policies by weighted estimation error ranks them by control performance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .rng import Stream


@dataclass(frozen=True)
class LinearPlant:
    """x' = a*x + b*v + r with r ~ N(0, noise_var)."""

    a: float
    b: float
    noise_var: float
    x: float = 0.0
    x_hat: float = 0.0

    def __post_init__(self):
        if self.b == 0.0:
            raise ValueError("control gain b must be nonzero")
        if self.noise_var <= 0.0:
            raise ValueError("noise_var must be positive")


@dataclass(frozen=True)
class ReferencePath:
    """Reference trajectory: constant level or a sinusoid."""

    kind: str = "constant"
    value: float = 0.0
    amplitude: float = 1.0
    period: float = 1000.0

    def __post_init__(self):
        if self.kind not in ("constant", "sinusoid"):
            raise ValueError(f"unknown reference kind {self.kind!r}")

    def at(self, t: int) -> float:
        if self.kind == "constant":
            return self.value
        return self.value + self.amplitude * math.sin(2.0 * math.pi * t / self.period)


def optimal_control(plant: LinearPlant, y_next: float) -> float:
    """v* = (y - a * x_hat) / b, the weighted-squared-error minimizer."""
    if plant.b == 0.0:
        raise ValueError("control gain b must be nonzero")
    return (y_next - plant.a * plant.x_hat) / plant.b


def step_plant(plant: LinearPlant, v: float, updated: int, stream: Stream) -> LinearPlant:
    """Advance the plant one slot and propagate (or correct) the estimate."""
    r = float(stream.normal(1)[0]) * math.sqrt(plant.noise_var)
    return step_plant_with_noise(plant, v, updated, r)


def step_plant_with_noise(plant: LinearPlant, v: float, updated: int, r: float) -> LinearPlant:
    x_new = plant.a * plant.x + plant.b * v + r
    x_hat_new = x_new if updated else plant.a * plant.x_hat + plant.b * v
    return replace(plant, x=x_new, x_hat=x_hat_new)
