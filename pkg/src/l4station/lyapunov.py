"""Lyapunov function for the target circular orbit and its time derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SpacecraftState
from .errors import DegenerateRadiusError, InvalidParameterError
from .geometry import norm, vec3


def _dot(a, b):
    return np.sum(a * b, axis=-1)


@dataclass(frozen=True)
class ControlObjective:
    """Target orbit (radius ``d``, angular momentum ``L_d``) and gains.

    Units: d [m], L_d [m^2/s], beta [m^-2 s^-1], a [m^2 s^-2], u_max [m/s^2].
    """

    d: float
    L_d: np.ndarray
    beta: float
    a: float
    u_max: float

    def __post_init__(self):
        for name in ("d", "beta", "a", "u_max"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)
        L_d = vec3(self.L_d, "L_d")
        if L_d.shape != (3,) or norm(L_d) == 0.0:
            raise InvalidParameterError("L_d must be a single non-zero 3-vector")
        object.__setattr__(self, "L_d", L_d)

    @property
    def L_norm(self) -> float:
        return float(norm(self.L_d))

    @property
    def nominal_period(self) -> float:
        """Period of the target orbit, 2*pi*d^2/|L_d| (s)."""
        return 2.0 * math.pi * self.d**2 / self.L_norm

    @property
    def nominal_speed(self) -> float:
        return self.L_norm / self.d

    def target_state(self, phase: float = 0.0, t: float = 0.0) -> SpacecraftState:
        """A state lying exactly on the target orbit at the given phase angle."""
        n = self.L_d / self.L_norm
        seed = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = seed - _dot(seed, n) * n
        e1 /= norm(e1)
        e2 = np.cross(n, e1)
        r = self.d * (math.cos(phase) * e1 + math.sin(phase) * e2)
        v = np.cross(self.L_d, r) / self.d**2
        return SpacecraftState(r, v, t)


@dataclass(frozen=True)
class LyapunovAudit:
    """Lyapunov value, derivatives and limit-set distances at one state."""

    V: float
    dVdt_chain: float | None
    dVdt_ideal: float
    e1_norm: float
    radial_dot: float
    ang_mom_err: float
    radius_err_frac: float


def momentum_error_e1(state: SpacecraftState, obj: ControlObjective) -> np.ndarray:
    """v|r|^2 - L_d x r, which vanishes on every orbit of the target family."""
    r, v = state.r_cs, state.v_cs
    r2 = _dot(r, r)
    return v * np.asarray(r2)[..., None] - np.cross(obj.L_d, r)


def angular_momentum_error(state: SpacecraftState, obj: ControlObjective):
    return norm(np.cross(state.r_cs, state.v_cs) - obj.L_d)


def lyapunov_value(state: SpacecraftState, obj: ControlObjective):
    r, v = state.r_cs, state.v_cs
    radial = _dot(r, v)
    h_err = np.cross(r, v) - obj.L_d
    return 0.5 * (radial**2 + _dot(h_err, h_err)) + 0.5 * obj.a * (norm(r) - obj.d) ** 2


def dVdt_chain(state: SpacecraftState, accel, obj: ControlObjective):
    """Exact time derivative of V along a motion with acceleration ``accel``."""
    r, v = state.r_cs, state.v_cs
    acc = np.asarray(accel, dtype=np.float64)
    rn = norm(r)
    if np.any(rn == 0.0):
        raise DegenerateRadiusError("dV/dt is undefined at |r_cs| = 0")
    radial = _dot(r, v)
    h_err = np.cross(r, v) - obj.L_d
    return (
        radial * (_dot(v, v) + _dot(r, acc))
        + _dot(h_err, np.cross(r, acc))
        + obj.a * (rn - obj.d) * radial / rn
    )


def dVdt_ideal(state: SpacecraftState, obj: ControlObjective):
    """Closed-loop derivative under the unsaturated controller: -beta|e1|^2."""
    e1 = momentum_error_e1(state, obj)
    return -obj.beta * _dot(e1, e1)


def lasalle_metrics(state: SpacecraftState, obj: ControlObjective, accel=None) -> LyapunovAudit:
    """Distances of ``state`` from the invariant set of circular target orbits.

    ``dVdt_chain`` is only filled when the applied acceleration is supplied.
    """
    rn = norm(state.r_cs)
    if np.any(rn == 0.0):
        raise DegenerateRadiusError("limit-set metrics are undefined at |r_cs| = 0")
    e1 = momentum_error_e1(state, obj)
    return LyapunovAudit(
        V=lyapunov_value(state, obj),
        dVdt_chain=None if accel is None else dVdt_chain(state, accel, obj),
        dVdt_ideal=-obj.beta * _dot(e1, e1),
        e1_norm=norm(e1),
        radial_dot=_dot(state.r_cs, state.v_cs),
        ang_mom_err=angular_momentum_error(state, obj),
        radius_err_frac=(rn - obj.d) / obj.d,
    )
