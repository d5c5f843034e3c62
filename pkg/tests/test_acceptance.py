"""Acceptance suite: one test per numbered criterion.

Each test reports a PASS/FAIL line through the ``criterion`` fixture; the
lines are collected into the "acceptance criteria" section of the pytest
terminal summary.
"""

import math
import time

import numpy as np

from l4station import (
    IntegratorSettings,
    SpacecraftState,
    coriolis_matrix_apply,
    earth_moon,
    epsilons,
    feedback_linearized_control,
    l4_identity_residual,
    momentum_error_e1,
    raw_control,
    rk4_step,
    simulate,
)
from l4station.integrator import default_step
from l4station.selfcheck import random_states

TABLE_MEAN_MOTION = 2.66e-6
CASE1_CAPTURE_REFERENCE = 48600.0


def test_criterion_01_l4_identity(criterion):
    sys = earth_moon()
    res = float(np.linalg.norm(l4_identity_residual(sys)))
    bound = 1e-9 * sys.phi_dot**2 * float(np.linalg.norm(sys.r_c))
    n = 1000
    t0 = time.perf_counter()
    for _ in range(n):
        l4_identity_residual(sys)
    per_call = (time.perf_counter() - t0) / n
    ok = res <= bound and per_call < 1e-3
    criterion(1, ok, f"|residual| = {res:.3e} (bound {bound:.3e}), {per_call * 1e6:.1f} us per call")
    assert ok


def test_criterion_02_mean_motion(criterion):
    sys = earth_moon(separation=3.844e8)
    rel = abs(sys.phi_dot / TABLE_MEAN_MOTION - 1)
    ok = rel <= 0.01
    criterion(2, ok, f"phi_dot = {sys.phi_dot:.6e} rad/s, {rel:.3%} from 2.66e-6")
    assert ok


def test_criterion_03_coriolis_cancellation(criterion):
    sys = earth_moon()
    v = np.random.default_rng(3).normal(scale=1e4, size=(1000, 3))
    total = np.linalg.norm(-2.0 * coriolis_matrix_apply(sys, v) + np.cross(v, -2.0 * sys.omega), axis=1)
    scale = 2.0 * sys.phi_dot * np.linalg.norm(v, axis=1)
    worst = float(np.max(total / scale))
    ok = worst <= np.finfo(float).eps
    criterion(3, ok, f"max |residual| / (2 phi_dot |v|) = {worst:.1e} over 1000 vectors")
    assert ok


def test_criterion_04_closed_loop_vdot(criterion, case1_cfg):
    c = case1_cfg
    sys, obj = c.system, c.objective
    t0 = time.perf_counter()
    h = default_step(sys, obj)
    tr = simulate(sys, obj, c.initial_state, IntegratorSettings(h, 25.0, 1)).samples
    free = ~tr.saturated
    start = int(np.argmax(free))
    stop = int(np.searchsorted(tr.t, tr.t[start] + 10.0 + 2.5 * h, side="right"))
    idx = np.arange(start + 1, stop - 1)
    # central differences need both neighbours unsaturated as well
    idx = idx[free[idx - 1] & free[idx] & free[idx + 1]]
    fd = (tr.V[idx + 1] - tr.V[idx - 1]) / (tr.t[idx + 1] - tr.t[idx - 1])
    states = SpacecraftState(tr.r_cs[idx], tr.v_cs[idx])
    e1 = np.linalg.norm(momentum_error_e1(states, obj), axis=1)
    ideal = -obj.beta * e1**2
    eps1, eps2 = epsilons(sys, tr.r_cs[idx])
    floor = obj.beta * e1 * sys.l4_gravity_scale * np.maximum(np.abs(eps1), np.abs(eps2)) * np.linalg.norm(
        tr.r_cs[idx], axis=1) ** 2
    rel = np.abs(fd - ideal) / np.maximum(np.abs(ideal), floor)
    elapsed = time.perf_counter() - t0
    span = tr.t[idx[-1]] - tr.t[idx[0]] if len(idx) else 0.0
    ok = len(idx) > 0 and span >= 10.0 and float(rel.max()) <= 1e-3 and elapsed < 5.0
    criterion(4, ok, f"{len(idx)} unsaturated samples over {span:.2f} s from t = {tr.t[start]:.2f} s, "
                     f"max relative error {float(rel.max()):.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_05_case1_reproduction(criterion, case1_cfg):
    c = case1_cfg
    t0 = time.perf_counter()
    res = simulate(c.system, c.objective, c.initial_state, c.integrator)
    elapsed = time.perf_counter() - t0
    tr = res.samples
    early = tr.t <= 10.0
    parts = {
        "a": res.captured,
        "b": abs(res.final_radius_err_frac) <= 0.005,
        "c": res.captured and CASE1_CAPTURE_REFERENCE / 2 <= res.capture_time <= 2 * CASE1_CAPTURE_REFERENCE,
        "d": bool(np.isclose(tr.control_norm[early].max(), c.objective.u_max, rtol=1e-12)),
    }
    ok = all(parts.values()) and elapsed < 60.0
    flags = " ".join(f"({k}) {'ok' if v else 'FAIL'}" for k, v in parts.items())
    final_r = c.objective.d * (1 + res.final_radius_err_frac)
    criterion(5, ok, f"{flags}; capture_time = {res.capture_time}, final radius {final_r:.1f} m, "
                     f"max |u| in first 10 s = {tr.control_norm[early].max():.1f}, {elapsed:.1f} s")
    assert ok


def test_criterion_06_case2_reproduction(criterion, case2_cfg):
    c = case2_cfg
    res = simulate(c.system, c.objective, c.initial_state, c.integrator)
    ok = res.captured and abs(res.final_radius_err_frac) <= 0.005 and res.final_ang_mom_err_frac <= 0.01
    criterion(6, ok, f"capture_time = {res.capture_time}, final radius error {res.final_radius_err_frac:.2e}, "
                     f"final angular momentum error {res.final_ang_mom_err_frac:.2e}")
    assert ok


def test_criterion_07_monotonicity(criterion, case1_result, case2_result):
    counts = (case1_result.monotonicity_violations, case2_result.monotonicity_violations)
    ok = counts == (0, 0)
    criterion(7, ok, f"violations: case1 {counts[0]}, case2 {counts[1]}")
    assert ok


def _dwell_metrics(res, obj):
    tr = res.samples
    sel = tr.t >= tr.t[-1] - obj.nominal_period
    r, v = tr.r_cs[sel], tr.v_cs[sel]
    cos = np.abs(np.sum(r * v, axis=1)) / (np.linalg.norm(r, axis=1) * np.linalg.norm(v, axis=1))
    return float(cos.mean()), float((tr.ang_mom_err[sel] / obj.L_norm).mean())


def test_criterion_08_lasalle_limit_set(criterion, case1_result, case2_result, case1_obj, case2_obj):
    details, ok = [], True
    for name, res, obj in (("case1", case1_result, case1_obj), ("case2", case2_result, case2_obj)):
        if not res.captured:
            details.append(f"{name}: not captured, no dwell window")
            continue
        cos, ang = _dwell_metrics(res, obj)
        ok &= cos <= 1e-3 and ang <= 1e-2
        details.append(f"{name}: mean |cos(r,v)| {cos:.1e}, mean ang err {ang:.1e}")
    ok &= case2_result.captured
    criterion(8, ok, "; ".join(details))
    assert ok


def test_criterion_09_controller_forms(criterion, case1_obj):
    sys = earth_moon()
    states = random_states(np.random.default_rng(9), 100, r_lo=1e2, r_hi=1e5)
    uc = raw_control(sys, states, case1_obj)
    ufl = feedback_linearized_control(sys, states, case1_obj)
    ratio = np.linalg.norm(uc - ufl, axis=1) / np.maximum(np.linalg.norm(uc, axis=1), case1_obj.a)
    ok = float(ratio.max()) <= 1e-6
    criterion(9, ok, f"max |raw - linearized| / max(|raw|, a) = {float(ratio.max()):.2e} over 100 states")
    assert ok


def test_criterion_10_rk4_order(criterion):
    def err(n):
        h = 2 * math.pi / n
        s = SpacecraftState([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
        for _ in range(n):
            s = rk4_step(lambda st: -st.r_cs, s, h)
        return float(np.linalg.norm(s.r_cs - [1.0, 0.0, 0.0]))

    errs = [err(n) for n in (20, 40, 80, 160)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(12 <= r <= 20 for r in ratios)
    criterion(10, ok, "error ratios " + ", ".join(f"{r:.2f}" for r in ratios))
    assert ok


def test_criterion_11_orbit_hold(criterion, case2_obj):
    sys = earth_moon()
    obj = case2_obj
    init = obj.target_state(0.0)
    res = simulate(sys, obj, init, IntegratorSettings(default_step(sys, obj), 10 * obj.nominal_period, 1))
    tr = res.samples
    rad = float(np.abs(tr.radius_err_frac).max())
    ang = float((tr.ang_mom_err / obj.L_norm).max())
    ok = rad <= 1e-4 and ang <= 1e-4
    criterion(11, ok, f"max radius error {rad:.1e}, max angular momentum error {ang:.1e} over 10 periods")
    assert ok
