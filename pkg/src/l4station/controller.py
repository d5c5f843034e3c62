"""Lyapunov feedback law for circular orbits about L4, with saturation.

The free gains of the general law are fixed to the values that make dV/dt
exactly -beta|e1|^2: the velocity cross term uses -2*omega (cancelling the
Coriolis acceleration) and the radial gain is -p.  Only beta, a, d, L_d and
u_max are configurable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    SpacecraftState,
    check_radius,
    natural_dynamics,
    p_scalar,
    z_vector,
)
from .geometry import ThreeBodySystem, norm
from .lyapunov import ControlObjective, momentum_error_e1


@dataclass(frozen=True)
class ControlOutput:
    u_raw: np.ndarray
    u_applied: np.ndarray
    saturated: bool | np.ndarray
    # radial gain is q = -p
    p: float | np.ndarray


def _radius_error_vector(r, rn, d):
    """e2 = (|r| - d) r / |r|^3."""
    return np.asarray((rn - d) / rn**3)[..., None] * r


def raw_control(sys: ThreeBodySystem, state: SpacecraftState, obj: ControlObjective) -> np.ndarray:
    r, v = state.r_cs, state.v_cs
    rn = check_radius(r)
    p = p_scalar(sys, state)
    e1 = momentum_error_e1(state, obj)
    return (
        -obj.beta * e1
        + np.cross(v, -2.0 * sys.omega)
        - np.asarray(p)[..., None] * r
        - obj.a * _radius_error_vector(r, rn, obj.d)
        - z_vector(sys, r)
    )


def saturate(u_raw, u_max: float) -> np.ndarray:
    """Scale ``u_raw`` onto the ball of radius ``u_max`` if it lies outside."""
    u = np.asarray(u_raw, dtype=np.float64)
    un = np.asarray(norm(u))
    over = un > u_max
    scale = np.where(over, u_max / np.where(over, un, 1.0), 1.0)
    out = u * scale[..., None]
    # rounding can leave |out| an ulp above u_max; shrink until inside so
    # that saturating twice is a no-op
    for _ in range(4):
        high = over & (np.asarray(norm(out)) > u_max)
        if not np.any(high):
            break
        scale = np.where(high, np.nextafter(scale, 0.0), scale)
        out = u * scale[..., None]
    return out


def compute_control(sys: ThreeBodySystem, state: SpacecraftState, obj: ControlObjective) -> ControlOutput:
    u_raw = raw_control(sys, state, obj)
    un = norm(u_raw)
    saturated = un > obj.u_max
    return ControlOutput(
        u_raw=u_raw,
        u_applied=saturate(u_raw, obj.u_max),
        saturated=bool(saturated) if np.ndim(saturated) == 0 else saturated,
        p=p_scalar(sys, state),
    )


def feedback_linearized_control(
    sys: ThreeBodySystem, state: SpacecraftState, obj: ControlObjective
) -> np.ndarray:
    """The same law written as dynamics cancellation plus desired dynamics.

    Differs from ``raw_control`` only by the second-order remainder of the
    binomial expansion hidden in ``z_vector``.
    """
    r, v = state.r_cs, state.v_cs
    rn = check_radius(r)
    speed2 = np.sum(np.square(v), axis=-1)
    return (
        -obj.beta * momentum_error_e1(state, obj)
        - obj.a * _radius_error_vector(r, rn, obj.d)
        - natural_dynamics(sys, state)
        - np.asarray(speed2 / rn**2)[..., None] * r
    )
