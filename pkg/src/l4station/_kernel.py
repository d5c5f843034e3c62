"""Compiled closed-loop propagation.

A fused scalar transcription of ``controlled_dynamics(saturate(raw_control))``
used for the long runs; tests pin it against the array implementation.
"""

import math

import numpy as np
from numba import njit

OK = 0
GUARD = 1
SINGULAR = 2

# layout of the parameter vector passed to the kernel
(
    P_PHI_DOT, P_MU1, P_MU2,
    P_RCX, P_RCY, P_RCZ,
    P_R1X, P_R1Y, P_R1Z,
    P_R2X, P_R2Y, P_R2Z,
    P_N1C, P_N2C,
    P_BETA, P_A, P_D,
    P_LX, P_LY, P_LZ,
    P_UMAX, P_RMIN,
) = range(22)
N_PARAMS = 22

# columns of the record array
N_REC = 11


def pack_params(sys, obj, r_min):
    p = np.empty(N_PARAMS)
    p[P_PHI_DOT] = sys.phi_dot
    p[P_MU1] = sys.mu1
    p[P_MU2] = sys.mu2
    p[P_RCX:P_RCZ + 1] = sys.r_c
    p[P_R1X:P_R1Z + 1] = sys.r_1c
    p[P_R2X:P_R2Z + 1] = sys.r_2c
    p[P_N1C] = math.sqrt(sys.r_1c @ sys.r_1c)
    p[P_N2C] = math.sqrt(sys.r_2c @ sys.r_2c)
    p[P_BETA] = obj.beta
    p[P_A] = obj.a
    p[P_D] = obj.d
    p[P_LX:P_LZ + 1] = obj.L_d
    p[P_UMAX] = obj.u_max
    p[P_RMIN] = r_min
    return p


@njit(cache=True)
def closed_loop(rx, ry, rz, vx, vy, vz, P):
    """Return (ax, ay, az, ux, uy, uz, saturated, status)."""
    pd = P[P_PHI_DOT]
    w2 = pd * pd

    s1x = P[P_R1X] + rx
    s1y = P[P_R1Y] + ry
    s1z = P[P_R1Z] + rz
    s2x = P[P_R2X] + rx
    s2y = P[P_R2Y] + ry
    s2z = P[P_R2Z] + rz
    n1 = math.sqrt(s1x * s1x + s1y * s1y + s1z * s1z)
    n2 = math.sqrt(s2x * s2x + s2y * s2y + s2z * s2z)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, False, SINGULAR
    g1 = P[P_MU1] / (n1 * n1 * n1)
    g2 = P[P_MU2] / (n2 * n2 * n2)

    # natural dynamics; omega x v = (-pd*vy, pd*vx, 0)
    fx = w2 * rx + w2 * P[P_RCX] + 2.0 * pd * vy - g1 * s1x - g2 * s2x
    fy = w2 * ry + w2 * P[P_RCY] - 2.0 * pd * vx - g1 * s1y - g2 * s2y
    fz = w2 * rz + w2 * P[P_RCZ] - g1 * s1z - g2 * s2z

    rn2 = rx * rx + ry * ry + rz * rz
    rn = math.sqrt(rn2)
    if rn < P[P_RMIN]:
        return fx, fy, fz, 0.0, 0.0, 0.0, False, GUARD

    lx = P[P_LX]
    ly = P[P_LY]
    lz = P[P_LZ]
    e1x = vx * rn2 - (ly * rz - lz * ry)
    e1y = vy * rn2 - (lz * rx - lx * rz)
    e1z = vz * rn2 - (lx * ry - ly * rx)

    p = w2 + (vx * vx + vy * vy + vz * vz) / rn2 - g1 - g2
    c2 = P[P_A] * (rn - P[P_D]) / (rn2 * rn)

    n1c = P[P_N1C]
    n2c = P[P_N2C]
    k1 = 3.0 * (n1 / n1c - 1.0) * P[P_MU1] / (n1c * n1c * n1c)
    k2 = 3.0 * (n2 / n2c - 1.0) * P[P_MU2] / (n2c * n2c * n2c)
    zx = k1 * P[P_R1X] + k2 * P[P_R2X]
    zy = k1 * P[P_R1Y] + k2 * P[P_R2Y]
    zz = k1 * P[P_R1Z] + k2 * P[P_R2Z]

    beta = P[P_BETA]
    # v x (-2 omega) = (-2 pd vy, 2 pd vx, 0)
    ux = -beta * e1x - 2.0 * pd * vy - p * rx - c2 * rx - zx
    uy = -beta * e1y + 2.0 * pd * vx - p * ry - c2 * ry - zy
    uz = -beta * e1z - p * rz - c2 * rz - zz

    un = math.sqrt(ux * ux + uy * uy + uz * uz)
    umax = P[P_UMAX]
    sat = un > umax
    if sat:
        s = umax / un
        ux *= s
        uy *= s
        uz *= s
    return fx + ux, fy + uy, fz + uz, ux, uy, uz, sat, OK


@njit(cache=True)
def _record(rec, j, t, rx, ry, rz, vx, vy, vz, ux, uy, uz, sat):
    rec[j, 0] = t
    rec[j, 1] = rx
    rec[j, 2] = ry
    rec[j, 3] = rz
    rec[j, 4] = vx
    rec[j, 5] = vy
    rec[j, 6] = vz
    rec[j, 7] = ux
    rec[j, 8] = uy
    rec[j, 9] = uz
    rec[j, 10] = 1.0 if sat else 0.0


@njit(cache=True)
def propagate(x0, t0, P, h, n_steps, stride, rec):
    """Fixed-step RK4 of the saturated closed loop.

    Returns (n_recorded, status, failed_step, failed_stage, max_control_norm).
    Samples are taken every ``stride`` steps and at the final step.
    """
    rx, ry, rz, vx, vy, vz = x0[0], x0[1], x0[2], x0[3], x0[4], x0[5]
    j = 0
    umax_seen = 0.0
    hh = 0.5 * h
    for i in range(n_steps + 1):
        t = t0 + i * h
        a1x, a1y, a1z, ux, uy, uz, sat, st = closed_loop(rx, ry, rz, vx, vy, vz, P)
        if st != OK:
            return j, st, i, 1, umax_seen
        un = math.sqrt(ux * ux + uy * uy + uz * uz)
        if un > umax_seen:
            umax_seen = un
        if i % stride == 0 or i == n_steps:
            _record(rec, j, t, rx, ry, rz, vx, vy, vz, ux, uy, uz, sat)
            j += 1
        if i == n_steps:
            break

        b2x = rx + hh * vx
        b2y = ry + hh * vy
        b2z = rz + hh * vz
        w2x = vx + hh * a1x
        w2y = vy + hh * a1y
        w2z = vz + hh * a1z
        a2x, a2y, a2z, _, _, _, _, st = closed_loop(b2x, b2y, b2z, w2x, w2y, w2z, P)
        if st != OK:
            return j, st, i, 2, umax_seen

        b3x = rx + hh * w2x
        b3y = ry + hh * w2y
        b3z = rz + hh * w2z
        w3x = vx + hh * a2x
        w3y = vy + hh * a2y
        w3z = vz + hh * a2z
        a3x, a3y, a3z, _, _, _, _, st = closed_loop(b3x, b3y, b3z, w3x, w3y, w3z, P)
        if st != OK:
            return j, st, i, 3, umax_seen

        b4x = rx + h * w3x
        b4y = ry + h * w3y
        b4z = rz + h * w3z
        w4x = vx + h * a3x
        w4y = vy + h * a3y
        w4z = vz + h * a3z
        a4x, a4y, a4z, _, _, _, _, st = closed_loop(b4x, b4y, b4z, w4x, w4y, w4z, P)
        if st != OK:
            return j, st, i, 4, umax_seen

        h6 = h / 6.0
        rx += h6 * (vx + 2.0 * w2x + 2.0 * w3x + w4x)
        ry += h6 * (vy + 2.0 * w2y + 2.0 * w3y + w4y)
        rz += h6 * (vz + 2.0 * w2z + 2.0 * w3z + w4z)
        vx += h6 * (a1x + 2.0 * a2x + 2.0 * a3x + a4x)
        vy += h6 * (a1y + 2.0 * a2y + 2.0 * a3y + a4y)
        vz += h6 * (a1z + 2.0 * a2z + 2.0 * a3z + a4z)
    return j, OK, -1, 0, umax_seen
