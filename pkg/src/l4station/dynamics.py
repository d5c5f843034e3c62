"""Spacecraft motion relative to L4 in the synodic frame.

All functions broadcast over leading axes, so a SpacecraftState holding
``(N, 3)`` position/velocity arrays is evaluated sample-by-sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateRadiusError, SingularityError
from .geometry import ThreeBodySystem, coriolis_matrix_apply, norm, vec3

# Controller terms divide by |r_cs|; below this radius (m) they are not evaluated.
R_MIN = 1e-3


@dataclass(frozen=True)
class SpacecraftState:
    """Position and velocity relative to L4 (synodic frame, SI) at time t."""

    r_cs: np.ndarray
    v_cs: np.ndarray
    t: float | np.ndarray = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r_cs", vec3(self.r_cs, "r_cs"))
        object.__setattr__(self, "v_cs", vec3(self.v_cs, "v_cs"))
        if self.r_cs.shape != self.v_cs.shape:
            raise ValueError(f"r_cs and v_cs shapes differ: {self.r_cs.shape} vs {self.v_cs.shape}")
        t = np.asarray(self.t, dtype=np.float64)
        if not np.all(np.isfinite(t)):
            raise ValueError("t must be finite")
        object.__setattr__(self, "t", float(t) if t.ndim == 0 else t)

    @property
    def radius(self):
        return norm(self.r_cs)


class EpsilonPair(NamedTuple):
    """Relative change of the distance to each primary caused by r_cs."""

    eps1: float | np.ndarray
    eps2: float | np.ndarray


def relative_positions(sys: ThreeBodySystem, r_cs) -> tuple[np.ndarray, np.ndarray]:
    """Spacecraft position seen from m1 and from m2."""
    r_cs = np.asarray(r_cs, dtype=np.float64)
    return sys.r_1c + r_cs, sys.r_2c + r_cs


def epsilons(sys: ThreeBodySystem, r_cs) -> EpsilonPair:
    r_1s, r_2s = relative_positions(sys, r_cs)
    return EpsilonPair(
        norm(r_1s) / norm(sys.r_1c) - 1.0,
        norm(r_2s) / norm(sys.r_2c) - 1.0,
    )


def z_vector(sys: ThreeBodySystem, r_cs) -> np.ndarray:
    """First-order (binomial) correction to the primaries' pull near L4."""
    eps1, eps2 = epsilons(sys, r_cs)
    n1 = norm(sys.r_1c)
    n2 = norm(sys.r_2c)
    c1 = 3.0 * np.asarray(eps1)[..., None] * sys.mu1 / n1**3
    c2 = 3.0 * np.asarray(eps2)[..., None] * sys.mu2 / n2**3
    return c1 * sys.r_1c + c2 * sys.r_2c


def _gravity_coefficients(sys: ThreeBodySystem, r_cs):
    r_1s, r_2s = relative_positions(sys, r_cs)
    n1 = norm(r_1s)
    n2 = norm(r_2s)
    if np.any(n1 == 0.0) or np.any(n2 == 0.0):
        raise SingularityError("spacecraft coincides with a primary")
    return r_1s, r_2s, sys.mu1 / n1**3, sys.mu2 / n2**3


def natural_dynamics(sys: ThreeBodySystem, state: SpacecraftState) -> np.ndarray:
    """Uncontrolled acceleration of the spacecraft relative to L4 (m/s^2)."""
    r, v = state.r_cs, state.v_cs
    r_1s, r_2s, g1, g2 = _gravity_coefficients(sys, r)
    w2 = sys.phi_dot**2
    return (
        w2 * r
        + w2 * sys.r_c
        - 2.0 * coriolis_matrix_apply(sys, v)
        - np.asarray(g1)[..., None] * r_1s
        - np.asarray(g2)[..., None] * r_2s
    )


def controlled_dynamics(sys: ThreeBodySystem, state: SpacecraftState, u) -> np.ndarray:
    return natural_dynamics(sys, state) + np.asarray(u, dtype=np.float64)


def check_radius(r_cs) -> np.ndarray | float:
    """Return |r_cs|, raising DegenerateRadiusError below R_MIN."""
    rn = norm(r_cs)
    if np.any(rn < R_MIN):
        raise DegenerateRadiusError(
            f"|r_cs| = {np.min(rn):.3e} m is below the guard radius {R_MIN} m"
        )
    return rn


def p_scalar(sys: ThreeBodySystem, state: SpacecraftState):
    """Radial gain cancelling the centrifugal, tidal and speed terms (s^-2)."""
    rn = check_radius(state.r_cs)
    _, _, g1, g2 = _gravity_coefficients(sys, state.r_cs)
    speed2 = np.sum(np.square(state.v_cs), axis=-1)
    return sys.phi_dot**2 + speed2 / rn**2 - g1 - g2
