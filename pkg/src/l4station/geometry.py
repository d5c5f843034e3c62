"""Rotating-frame geometry of the circular restricted three-body problem.

The synodic frame has its origin at the barycenter of the two primaries and
rotates counterclockwise about +z at the mean motion.  The larger primary
sits on the negative x-axis, the smaller one on the positive x-axis, and the
L4 point at positive y, so the angular velocity is ``(0, 0, +phi_dot)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# Earth-Moon constants (SI).  The separation is the mean Earth-Moon distance.
K_GRAV = 6.673e-11
M_EARTH = 5.972e24
M_MOON = 7.34767e22
EARTH_MOON_DISTANCE = 3.844e8


def vec3(value, name: str = "vector") -> np.ndarray:
    """Coerce ``value`` to a read-only float64 array with trailing axis 3.

    Leading axes are allowed so that batched states flow through the same
    functions.  Raises InvalidParameterError on wrong shape or NaN/Inf.
    """
    arr = np.array(value, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise InvalidParameterError(f"{name} must have a trailing dimension of 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} has non-finite components: {arr}")
    arr.flags.writeable = False
    return arr


def norm(v: np.ndarray) -> np.ndarray | float:
    return np.sqrt(np.sum(np.square(v), axis=-1))


def _positive(value, name: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(x) or x <= 0.0:
        raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")
    return x


@dataclass(frozen=True)
class ThreeBodySystem:
    """Two primaries in mutual circular orbit, seen from the synodic frame.

    Only ``k``, ``m1``, ``m2`` and ``separation`` are inputs; everything else
    is derived once at construction and never recomputed.
    """

    k: float
    m1: float
    m2: float
    separation: float
    phi_dot: float = field(init=False)
    r_1b: np.ndarray = field(init=False, repr=False)
    r_2b: np.ndarray = field(init=False, repr=False)
    r_c: np.ndarray = field(init=False, repr=False)
    r_1c: np.ndarray = field(init=False, repr=False)
    r_2c: np.ndarray = field(init=False, repr=False)
    omega: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = _positive(self.k, "k")
        m1 = _positive(self.m1, "m1")
        m2 = _positive(self.m2, "m2")
        sep = _positive(self.separation, "separation")
        total = m1 + m2
        phi_dot = math.sqrt(k * total / sep**3)

        x1 = -m2 * sep / total
        x2 = m1 * sep / total
        r_1b = vec3([x1, 0.0, 0.0])
        r_2b = vec3([x2, 0.0, 0.0])
        r_c = vec3([x1 + 0.5 * sep, 0.5 * math.sqrt(3.0) * sep, 0.0])

        derived = {
            "k": k,
            "m1": m1,
            "m2": m2,
            "separation": sep,
            "phi_dot": phi_dot,
            "r_1b": r_1b,
            "r_2b": r_2b,
            "r_c": r_c,
            "r_1c": vec3(r_c - r_1b),
            "r_2c": vec3(r_c - r_2b),
            "omega": vec3([0.0, 0.0, phi_dot]),
        }
        for name, value in derived.items():
            object.__setattr__(self, name, value)

    @property
    def mu1(self) -> float:
        """Gravitational parameter k*m1."""
        return self.k * self.m1

    @property
    def mu2(self) -> float:
        return self.k * self.m2

    @property
    def l4_gravity_scale(self) -> float:
        """k(m1+m2)/D^2, the natural acceleration scale at L4."""
        return self.k * (self.m1 + self.m2) / self.separation**2


def build_system(k: float, m1: float, m2: float, separation: float) -> ThreeBodySystem:
    return ThreeBodySystem(k=k, m1=m1, m2=m2, separation=separation)


def earth_moon(separation: float = EARTH_MOON_DISTANCE) -> ThreeBodySystem:
    return build_system(K_GRAV, M_EARTH, M_MOON, separation)


def l4_identity_residual(sys: ThreeBodySystem, point=None) -> np.ndarray:
    """Net synodic-frame force per unit mass on a body at rest at ``point``.

    ``point`` is measured from the barycenter and defaults to L4, where the
    centrifugal and gravitational terms cancel and the result is ~0.
    """
    q = sys.r_c if point is None else vec3(point, "point")
    d1 = q - sys.r_1b
    d2 = q - sys.r_2b
    n1 = norm(d1)[..., None]
    n2 = norm(d2)[..., None]
    return sys.phi_dot**2 * q - sys.mu1 / n1**3 * d1 - sys.mu2 / n2**3 * d2


def coriolis_matrix_apply(sys: ThreeBodySystem, v) -> np.ndarray:
    """Return omega x v (the hat map of the frame angular velocity)."""
    return np.cross(sys.omega, v)


def _rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return c, s


def synodic_to_inertial(sys: ThreeBodySystem, r_b, t) -> np.ndarray:
    """Rotate synodic coordinates counterclockwise by phi_dot*t about z."""
    r_b = np.asarray(r_b, dtype=np.float64)
    c, s = _rotation(sys.phi_dot * np.asarray(t, dtype=np.float64))
    x, y, z = r_b[..., 0], r_b[..., 1], r_b[..., 2]
    return np.stack([c * x - s * y, s * x + c * y, z + 0.0 * c], axis=-1)


def inertial_to_synodic(sys: ThreeBodySystem, r_i, t) -> np.ndarray:
    r_i = np.asarray(r_i, dtype=np.float64)
    c, s = _rotation(sys.phi_dot * np.asarray(t, dtype=np.float64))
    x, y, z = r_i[..., 0], r_i[..., 1], r_i[..., 2]
    return np.stack([c * x + s * y, -s * x + c * y, z + 0.0 * c], axis=-1)
