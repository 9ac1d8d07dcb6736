"""Vehicle state propagation: double integrator or resistance-force model.

Plant updates are explicit Euler with the controller step so the QP
discretization and the plant stay consistent.  Noise enters per step: the
(w1, w2) pair perturbs the position and velocity rates respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform noise bounds; zero bounds give bit-exact deterministic runs.

    w_p and w_v corrupt the controller's measured snapshot, w_u the applied
    control.
    """

    w_p: float = 0.0
    w_v: float = 0.0
    w_u: float = 0.0

    def validate(self) -> None:
        if min(self.w_p, self.w_v, self.w_u) < 0:
            raise ValueError("noise bounds must be >= 0")

    @property
    def enabled(self) -> bool:
        return max(self.w_p, self.w_v, self.w_u) > 0


@dataclass(frozen=True)
class NonlinearParams:
    """Mass and resistance coefficients for F_r = a0*sgn(v) + a1*v + a2*v^2.

    Defaults are normalized (m = 1) so the control keeps acceleration units
    and the effort metric stays comparable with the double integrator.
    """

    m: float = 1.0
    alpha0: float = 0.1
    alpha1: float = 0.05
    alpha2: float = 0.0005

    def validate(self) -> None:
        if min(self.m, self.alpha0, self.alpha1, self.alpha2) <= 0:
            raise ValueError("nonlinear parameters must be > 0")


DOUBLE_INTEGRATOR = "double_integrator"
NONLINEAR = "nonlinear"


@dataclass
class CavState:
    """Kinematic state of one CAV along its own path."""

    id: int
    original_lane: str
    current_lane: str
    maneuver: str
    x: float
    v: float
    u_applied: float
    t0: float
    path: object = None  # PathSpec
    status: str = "InCZ"  # InCZ | Departed


def resistance_force(v: float, params: NonlinearParams) -> float:
    """F_r = a0*sgn(v) + a1*v + a2*v^2, with sgn(0) = 0."""
    sgn = 0.0 if v == 0.0 else math.copysign(1.0, v)
    return params.alpha0 * sgn + params.alpha1 * v + params.alpha2 * v * v


def step_double_integrator(
    state: CavState, u: float, dt: float, noise: tuple[float, float] = (0.0, 0.0)
) -> CavState:
    if dt <= 0:
        raise ValueError("dt must be > 0")
    w1, w2 = noise
    x = state.x + (state.v + w1) * dt
    v = max(state.v + (u + w2) * dt, 0.0)
    return replace(state, x=x, v=v, u_applied=u)


def step_nonlinear(
    state: CavState,
    u: float,
    dt: float,
    params: NonlinearParams,
    noise: tuple[float, float] = (0.0, 0.0),
) -> CavState:
    if dt <= 0:
        raise ValueError("dt must be > 0")
    w1, w2 = noise
    accel = (u - resistance_force(state.v, params)) / params.m
    x = state.x + (state.v + w1) * dt
    v = max(state.v + (accel + w2) * dt, 0.0)
    return replace(state, x=x, v=v, u_applied=u)


def drift_and_gain(v: float, kind: str, params: NonlinearParams | None = None) -> tuple[float, float]:
    """(drift acceleration, control gain) of v-dot for the chosen dynamics."""
    if kind == DOUBLE_INTEGRATOR:
        return 0.0, 1.0
    params = params or NonlinearParams()
    return -resistance_force(v, params) / params.m, 1.0 / params.m
