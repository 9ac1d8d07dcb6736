"""Analytic energy/time-optimal reference trajectories and lane-change placement.

The unconstrained optimum of  min  beta*(tm - t0) + int 1/2 u^2 dt  with
x(t0) = 0, v(t0) = v0, x(tm) = L and free terminal speed is cubic in
position:

    u*(t) = a t + b,   v*(t) = a t^2 / 2 + b t + c,
    x*(t) = a t^3 / 6 + b t^2 / 2 + c t + d,

with (a, b, c, d, tm) pinned by the five conditions: the two initial
conditions, the terminal distance, u*(tm) = 0, and the transversality
relation  beta - b^2/2 + a c = 0.

In shifted time tau = t - t0 the system reduces to a scalar equation in the
horizon T: substituting  a = 3 (v0 T - L) / T^3,  b = -a T,  c = v0,  d = 0
into the transversality relation.  A bracketed bisection plus Newton polish
solves it; shifting back yields absolute-time coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class NoSolution(RuntimeError):
    def __init__(self, msg: str, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


@dataclass(frozen=True)
class UnconstrainedPlan:
    a: float
    b: float
    c: float
    d: float
    t0: float
    tm: float
    L: float
    beta: float

    def residuals(self) -> tuple[float, float, float, float, float]:
        """The five defining equations evaluated at the stored coefficients."""
        a, b, c, d, t0, tm = self.a, self.b, self.c, self.d, self.t0, self.tm
        v0 = 0.5 * a * t0**2 + b * t0 + c
        return (
            0.5 * a * t0**2 + b * t0 + c - v0,  # identically zero by construction
            a * t0**3 / 6 + 0.5 * b * t0**2 + c * t0 + d,
            a * tm**3 / 6 + 0.5 * b * tm**2 + c * tm + d - self.L,
            a * tm + b,
            self.beta - 0.5 * b * b + a * c,
        )

    def residuals_given_v0(self, v0: float) -> tuple[float, ...]:
        a, b, c, d, t0, tm = self.a, self.b, self.c, self.d, self.t0, self.tm
        return (
            0.5 * a * t0**2 + b * t0 + c - v0,
            a * t0**3 / 6 + 0.5 * b * t0**2 + c * t0 + d,
            a * tm**3 / 6 + 0.5 * b * tm**2 + c * tm + d - self.L,
            a * tm + b,
            self.beta - 0.5 * b * b + a * c,
        )


def _transversality(T: float, v0: float, L: float, beta: float) -> float:
    a = 3.0 * (v0 * T - L) / T**3
    return beta - 0.5 * (a * T) ** 2 + a * v0


def solve_unconstrained(v0: float, t0: float, L: float, beta: float) -> UnconstrainedPlan:
    """Solve the five-equation system; see module docstring for the reduction."""
    if beta < 0:
        raise NoSolution("beta must be >= 0")
    if L <= 0:
        raise NoSolution("terminal distance must be > 0")
    if v0 < 0:
        raise NoSolution("entry speed must be >= 0")

    if beta == 0.0:
        if v0 <= 0:
            raise NoSolution("beta = 0 with zero entry speed never arrives")
        T = L / v0
        return _shift(0.0, 0.0, v0, 0.0, t0, T, L, beta)

    # bracket: g(T) -> -inf as T -> 0+, g at the coasting horizon equals beta > 0
    v_floor = max(v0, 0.1)
    hi = L / v_floor
    if _transversality(hi, v0, L, beta) <= 0.0:
        # near-zero entry speeds can need a longer horizon than the floor guess
        while _transversality(hi, v0, L, beta) <= 0.0 and hi < 1e7:
            hi *= 2.0
    lo = hi
    while _transversality(lo, v0, L, beta) > 0.0:
        lo *= 0.5
        if lo < 1e-9:
            raise NoSolution(
                "no bracket for the horizon equation",
                residuals=(_transversality(hi, v0, L, beta),),
            )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _transversality(mid, v0, L, beta) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-14 * max(hi, 1.0):
            break
    T = 0.5 * (lo + hi)

    # Newton polish
    for _ in range(8):
        g = _transversality(T, v0, L, beta)
        h = 1e-7 * max(T, 1.0)
        dg = (_transversality(T + h, v0, L, beta) - _transversality(T - h, v0, L, beta)) / (2 * h)
        if dg == 0.0:
            break
        step = g / dg
        if not math.isfinite(step):
            break
        T_new = T - step
        if T_new <= 0:
            break
        T = T_new

    a = 3.0 * (v0 * T - L) / T**3
    plan = _shift(a, -a * T, v0, 0.0, t0, T, L, beta)
    res = plan.residuals_given_v0(v0)
    if max(abs(x) for x in res) > 1e-8:
        raise NoSolution("root search failed to satisfy the optimality system", residuals=res)
    return plan


def _shift(a_s, b_s, c_s, d_s, t0, T, L, beta) -> UnconstrainedPlan:
    # polynomial shift tau = t - t0 back to absolute time
    a = a_s
    b = b_s - a_s * t0
    c = 0.5 * a_s * t0**2 - b_s * t0 + c_s
    d = -a_s * t0**3 / 6 + 0.5 * b_s * t0**2 - c_s * t0 + d_s
    return UnconstrainedPlan(a=a, b=b, c=c, d=d, t0=t0, tm=t0 + T, L=L, beta=beta)


def eval_plan(plan: UnconstrainedPlan, t: float) -> tuple[float, float, float, bool]:
    """(x*, v*, u*) at time t; clamps outside [t0, tm] and flags it."""
    clamped = False
    if t < plan.t0:
        t, clamped = plan.t0, True
    elif t > plan.tm:
        t, clamped = plan.tm, True
    a, b, c, d = plan.a, plan.b, plan.c, plan.d
    u = a * t + b
    v = 0.5 * a * t * t + b * t + c
    x = a * t**3 / 6 + 0.5 * b * t * t + c * t + d
    return x, v, u, clamped


def first_active_time(
    plan_i: UnconstrainedPlan,
    plan_ip: UnconstrainedPlan,
    phi: float,
    delta: float,
    dt_scan: float = 0.05,
) -> float | None:
    """Earliest t >= t0_i where the rear-end gap hits phi*v_i + delta.

    Scans the overlapping horizon for a sign change of
    g(t) = x_ip*(t) - x_i*(t) - phi*v_i*(t) - delta and bisects to 1e-6 s.
    """

    def g(t: float) -> float:
        xi, vi, _, _ = eval_plan(plan_i, t)
        xp, _, _, _ = eval_plan(plan_ip, t)
        return xp - xi - phi * vi - delta

    t_lo = plan_i.t0
    t_hi = min(plan_i.tm, plan_ip.tm)
    if t_hi <= t_lo:
        return None
    if g(t_lo) <= 0.0:
        return t_lo
    t = t_lo
    while t < t_hi:
        t_next = min(t + dt_scan, t_hi)
        if g(t_next) <= 0.0:
            lo, hi = t, t_next
            while hi - lo > 1e-6:
                mid = 0.5 * (lo + hi)
                if g(mid) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            return hi
        t = t_next
    return None


def place_lane_change_mp(
    plan_i: UnconstrainedPlan, t_a: float | None, L2: float, L3: float
) -> float:
    """Floating-MP distance: the planned position at activation, else L2+L3."""
    if t_a is None:
        L_ik = L2 + L3
    else:
        L_ik, _, _, _ = eval_plan(plan_i, t_a)
    return min(max(L_ik, L2), L2 + L3)
