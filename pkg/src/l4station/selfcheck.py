"""Numerical self-checks behind ``l4station validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .controller import compute_control, feedback_linearized_control, raw_control, saturate
from .dynamics import R_MIN, SpacecraftState, controlled_dynamics, epsilons, natural_dynamics
from .geometry import ThreeBodySystem, coriolis_matrix_apply, earth_moon, l4_identity_residual, norm
from .lyapunov import ControlObjective, dVdt_chain, dVdt_ideal, momentum_error_e1

TABLE_MEAN_MOTION = 2.66e-6


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def random_states(rng: np.random.Generator, n: int, r_lo=1e2, r_hi=1e5, v_hi=1e4) -> SpacecraftState:
    """Isotropic offsets with |r| log-uniform in [r_lo, r_hi] and |v| <= v_hi."""
    dirs = rng.normal(size=(n, 3))
    dirs /= norm(dirs)[:, None]
    radii = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), size=n))
    v = rng.uniform(-v_hi, v_hi, size=(n, 3)) / math.sqrt(3.0)
    return SpacecraftState(dirs * radii[:, None], v, 0.0)


def closed_loop_dvdt_tolerance(sys: ThreeBodySystem, state: SpacecraftState, obj: ControlObjective):
    """Allowance for the second-order gravity remainder dropped by the controller."""
    e1n = norm(momentum_error_e1(state, obj))
    eps1, eps2 = epsilons(sys, state.r_cs)
    eps = np.maximum(np.abs(eps1), np.abs(eps2))
    floor = obj.beta * e1n * sys.l4_gravity_scale * eps * norm(state.r_cs) ** 2
    return 1e-3 * np.maximum(np.abs(dVdt_ideal(state, obj)), floor)


def run_checks(sys: ThreeBodySystem | None = None, obj: ControlObjective | None = None, seed: int = 0) -> list[Check]:
    sys = sys or earth_moon()
    obj = obj or ControlObjective(d=1e4, L_d=[0.0, 0.0, 8e7], beta=1e-11, a=1e4, u_max=500.0)
    rng = np.random.default_rng(seed)
    checks = []

    res = float(norm(l4_identity_residual(sys)))
    bound = 1e-9 * sys.phi_dot**2 * float(norm(sys.r_c))
    checks.append(Check("L4 equilibrium identity", res <= bound, f"|residual| = {res:.3e} <= {bound:.3e}"))

    rel = max(abs(float(norm(sys.r_1c)) / sys.separation - 1), abs(float(norm(sys.r_2c)) / sys.separation - 1))
    checks.append(Check("equilateral L4 triangle", rel <= 1e-12, f"max relative side error {rel:.3e}"))

    bary = np.abs(sys.m1 * sys.r_1b + sys.m2 * sys.r_2b).max() / (sys.m1 * abs(sys.r_1b[0]))
    checks.append(Check("barycenter at origin", bary <= 1e-12, f"relative imbalance {bary:.3e}"))

    mm = abs(sys.phi_dot / TABLE_MEAN_MOTION - 1)
    checks.append(Check("mean motion vs 2.66e-6 rad/s", mm <= 0.01, f"phi_dot = {sys.phi_dot:.6e}, off by {mm:.3%}"))

    v = rng.normal(scale=1e4, size=(1000, 3))
    wv = coriolis_matrix_apply(sys, v)
    skew = float(np.max(np.abs(np.sum(v * wv, axis=1)) / (norm(v) ** 2 * sys.phi_dot)))
    cancel = float(np.max(norm(-2.0 * wv + np.cross(v, -2.0 * sys.omega))))
    checks.append(Check("Coriolis term skew and cancelled", skew <= 1e-15 and cancel == 0.0,
                        f"max |v.(w x v)|/(|v|^2 w) = {skew:.1e}, max cancellation residual {cancel:.1e}"))

    u = rng.normal(scale=2e3, size=(1000, 3))
    us = saturate(u, obj.u_max)
    cos = np.sum(u * us, axis=1) / (norm(u) * norm(us))
    sat_ok = bool(np.all(norm(us) <= obj.u_max * (1 + 1e-12)) and np.all(cos >= 1 - 1e-12))
    checks.append(Check("saturation bound and direction", sat_ok, f"max |u| = {norm(us).max():.6f}"))

    states = random_states(rng, 200)
    uc = raw_control(sys, states, obj)
    ufl = feedback_linearized_control(sys, states, obj)
    gap = float(np.max(norm(uc - ufl) / np.maximum(norm(uc), obj.a)))
    checks.append(Check("controller forms agree", gap <= 1e-6, f"max relative gap {gap:.3e}"))

    accel = controlled_dynamics(sys, states, uc)
    err = np.abs(dVdt_chain(states, accel, obj) - dVdt_ideal(states, obj))
    tol = closed_loop_dvdt_tolerance(sys, states, obj)
    checks.append(Check("closed-loop dV/dt = -beta|e1|^2", bool(np.all(err <= tol)),
                        f"max err/tol = {float(np.max(err / tol)):.3e}"))

    params = _kernel.pack_params(sys, obj, R_MIN)
    worst = 0.0
    for i in range(50):
        s = SpacecraftState(states.r_cs[i], states.v_cs[i])
        out = compute_control(sys, s, obj)
        ref = natural_dynamics(sys, s) + out.u_applied
        got = np.array(_kernel.closed_loop(*s.r_cs, *s.v_cs, params)[:3])
        scale = max(float(norm(out.u_applied)), float(norm(natural_dynamics(sys, s))))
        worst = max(worst, float(norm(got - ref)) / scale)
    checks.append(Check("compiled closed loop matches reference", worst <= 1e-12, f"max relative gap {worst:.3e}"))
    return checks
