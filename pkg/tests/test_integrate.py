import math

import numpy as np
import pytest

from twofold.fields import (PiecewiseSmoothSystem, TwoFoldParams,
                            eval_combination, eval_piecewise,
                            normal_form_system, parse_field)
from twofold.integrate import (EJECT_PLUS, IntegratorOptions, eject_at,
                               integrate_blowup, integrate_filippov,
                               integrate_smooth, integrate_smoothed)
from twofold.sliding import sliding_lambda


def nf(a1, a2, b1, b2, alpha):
    return normal_form_system(TwoFoldParams(a1, a2, b1, b2, alpha))


# ------------------------------------------------------------ smooth core

def test_constant_field():
    traj = integrate_smooth(parse_field("0", "0", "1"), (0.0, 0.0, 0.0), (0.0, 1.0))
    assert traj.final_state == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)


def test_harmonic_oscillator_period():
    traj = integrate_smooth(parse_field("x2", "-x1", "0"), (1.0, 0.0, 0.0),
                            (0.0, 2 * math.pi))
    assert traj.final_state == pytest.approx((1.0, 0.0, 0.0), abs=1e-6)


def test_tolerance_halving_improves_harmonic_error():
    errs = []
    for k in range(4):
        tol = 2e-6 / 2 ** k
        traj = integrate_smooth(parse_field("x2", "-x1", "0"), (1.0, 0.0, 0.0),
                                (0.0, 2 * math.pi),
                                IntegratorOptions(rel_tol=tol, abs_tol=tol * 1e-2))
        x = traj.final_state
        errs.append(math.hypot(x[0] - 1.0, x[1]))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs


def test_backward_integration_reverses_forward():
    fld = nf(1, 1, -2.0, -2.0, 0.2).f_plus
    fwd = integrate_smooth(fld, (0.5, 1.0, 1.0), (0.0, 1.0))
    back = integrate_smooth(fld, fwd.final_state, (1.0, 0.0))
    assert back.final_state == pytest.approx((0.5, 1.0, 1.0), abs=1e-6)
    # dense output works on the reversed time axis too
    assert back.eval(0.5) == pytest.approx(fwd.eval(0.5), abs=1e-6)


def test_dense_output_matches_samples_and_is_continuous():
    traj = integrate_smooth(parse_field("x2", "-x1", "0"), (1.0, 0.0, 0.0), (0.0, 3.0))
    ts = traj.times
    mid = 0.5 * (ts[3] + ts[4])
    x = traj.eval(mid)
    assert x[0] == pytest.approx(math.cos(mid), abs=1e-7)
    assert traj.eval(ts[5]) == pytest.approx(traj.state(5), abs=1e-15)


# ------------------------------------------------------------ Filippov

def test_attracting_slide_reaches_two_fold_and_breaks_determinacy():
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.0, 1.0, 1.0), (0.0, 5.0))
    hits = traj.events_of("two-fold-hit")
    breaks = traj.events_of("determinacy-break")
    assert len(hits) == 1 and len(breaks) == 1
    # straight slide at lam = 0 covers distance 1 at speed 1/2 in each slot
    assert hits[0].t == pytest.approx(2.0, abs=1e-6)
    assert traj.final_state == pytest.approx((0.0, 0.0, 0.0), abs=1e-6)
    # sliding samples respect the surface and the sliding equation
    for i in range(len(traj)):
        if traj.mode(i) == "sliding":
            assert abs(traj.state(i)[0]) <= 1e-10
            lam = traj.lam(i)
            assert -1.0 <= lam <= 1.0
            assert abs(sys.f1_surface(traj.state(i)[1], traj.state(i)[2], lam)) <= 1e-9


def test_slide_lambda_matches_closed_form_alpha_zero():
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.0, 1.0, 2.0), (0.0, 1.0))
    for i in range(len(traj)):
        if traj.mode(i) == "sliding" and traj.times[i] > 0:
            _, x2, x3 = traj.state(i)
            assert traj.lam(i) == pytest.approx((x3 - x2) / (x3 + x2), abs=1e-9)


def test_single_crossing_event_accuracy():
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.1, 1.0, -1.0), (0.0, 0.5))
    crossings = traj.events_of("crossing")
    assert len(crossings) == 1
    e = crossings[0]
    assert abs(traj.eval(e.t)[0]) <= 1e-12
    assert abs(e.state[0]) <= 1e-12
    # after the crossing the run continues on the minus side
    assert traj.final_state[0] < 0


def test_visible_slide_exits_at_fold_line():
    sys = nf(-1, -1, 0.0, 0.0, 0.0)
    traj = integrate_filippov(sys, (0.0, 1.0, 2.0), (0.0, 3.0))
    exits = traj.events_of("slide-exit")
    assert len(exits) == 1
    e = exits[0]
    assert abs(e.state[1]) <= 1e-9          # fold line x2 = 0, where lam = +1
    assert traj.final_state[0] > 0          # tangential launch into x1 > 0
    modes = [traj.mode(i) for i in range(len(traj))]
    assert "sliding" in modes and "flow+" in modes


def test_invisible_slide_does_not_exit_at_fold_line():
    # same geometry but invisible curvature: the slide pushes x2 back up and
    # the boundary root grazes lam = +1 without lift-off
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.0, 0.2, 2.0), (0.0, 1.5))
    assert traj.events_of("slide-exit") == []
    assert all(traj.mode(i) == "sliding" for i in range(len(traj)))


def test_mode_changes_only_at_events():
    sys = nf(-1, -1, 0.0, 0.0, 0.0)
    traj = integrate_filippov(sys, (0.5, 1.0, 2.0), (0.0, 3.0))
    event_times = {e.t for e in traj.events}
    for i in range(1, len(traj)):
        if traj.mode(i) != traj.mode(i - 1):
            assert traj.times[i] in event_times


def test_event_log_reconstructs_mode_sequence():
    # replaying the event log must give exactly the observed mode runs:
    # crossing flips the flow side, slide-entry opens a sliding run,
    # slide-exit closes it into a flow run
    sys = nf(-1, -1, 0.0, 0.0, 0.0)
    traj = integrate_filippov(sys, (0.5, 1.0, 2.0), (0.0, 3.0))
    runs = []
    for i in range(len(traj)):
        if not runs or traj.mode(i) != runs[-1]:
            runs.append(traj.mode(i))
    replay = [traj.mode(0)]
    for e in traj.events:
        if e.kind == "crossing":
            replay.append("flow-" if replay[-1] == "flow+" else "flow+")
        elif e.kind == "slide-entry":
            replay.append("sliding")
        elif e.kind == "slide-exit":
            # destination side is the sign of x1 right after the exit sample
            idx = next(i for i in range(len(traj)) if traj.times[i] >= e.t)
            nxt = traj.state(min(idx + 1, len(traj) - 1))[0]
            replay.append("flow+" if nxt >= 0 else "flow-")
    assert replay == runs


def test_repelling_default_stays_sliding():
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.0, -1.0, -1.0), (0.0, 1.0))
    assert traj.events_of("slide-exit") == []
    assert traj.mode(len(traj) - 1) == "sliding"
    # repelling slide moves away from the two-fold
    assert traj.final_state[1] < -1.0


def test_repelling_eject_plus():
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    opts = IntegratorOptions(repelling_policy=EJECT_PLUS)
    traj = integrate_filippov(sys, (0.0, -1.0, -1.0), (0.0, 1.0), opts)
    assert traj.final_state[0] > 0


def test_repelling_eject_at_time():
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    opts = IntegratorOptions(repelling_policy=eject_at(0.25, side=-1))
    traj = integrate_filippov(sys, (0.0, -1.0, -1.0), (0.0, 1.0), opts)
    exits = traj.events_of("slide-exit")
    assert len(exits) == 1
    assert exits[0].t == pytest.approx(0.25, abs=1e-9)
    assert traj.final_state[0] < 0


def test_forward_only():
    with pytest.raises(ValueError):
        integrate_filippov(nf(1, 1, 0.0, 0.0, 0.0), (0.1, 1.0, 1.0), (1.0, 0.0))


# ------------------------------------------------------------ smoothed

def test_smoothed_field_matches_piecewise_outside_layer():
    sys = PiecewiseSmoothSystem(parse_field("-x2", "1+x1", "-7/5"),
                                parse_field("x3", "-9/10", "1-3/5*x1"),
                                parse_field("1/5", "0", "0"))
    eps = 1e-3
    rng = np.random.default_rng(42)
    for _ in range(200):
        x1 = rng.choice([-1, 1]) * rng.uniform(10 * eps, 1.0)
        x = (float(x1), float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)))
        lam = math.tanh(x[0] / eps)
        smooth = eval_combination(sys, x, lam)
        side = eval_piecewise(sys, x)
        for a, b in zip(smooth, side):
            assert abs(a - b) <= 1e-8 * max(1.0, abs(b))


def test_smoothed_tracks_filippov_slide():
    sys = nf(1, 1, -2.0, -2.0, 0.2)
    ref = integrate_filippov(sys, (0.0, 1.0, 1.0), (0.0, 1.2))
    errs = []
    for eps in (1e-2, 1e-3):
        traj = integrate_smoothed(sys, "tanh", eps, (0.0, 1.0, 1.0), (0.0, 1.2))
        ts = np.linspace(0.05, 1.2, 120)
        worst = 0.0
        for t in ts:
            a = traj.eval(float(t))
            b = ref.eval(float(t))
            worst = max(worst, math.dist(a, b))
        errs.append(worst)
    assert 5.0 <= errs[0] / errs[1] <= 20.0, errs


def test_smoothed_layer_mode_tagging():
    sys = nf(1, 1, -2.0, -2.0, 0.2)
    traj = integrate_smoothed(sys, "tanh", 1e-3, (0.1, 1.0, 1.0), (0.0, 1.0))
    saw_layer = saw_flow = False
    for i in range(len(traj)):
        x1 = traj.state(i)[0]
        if traj.mode(i) == "layer":
            saw_layer = True
            assert abs(x1) < 10e-3
            assert traj.lam(i) == pytest.approx(math.tanh(x1 / 1e-3), abs=1e-12)
        else:
            saw_flow = True
            assert traj.lam(i) != traj.lam(i)   # nan outside the layer
    assert saw_layer and saw_flow


def test_smoothed_sqrt_sigmoid_runs():
    sys = nf(1, 1, -2.0, -2.0, 0.2)
    traj = integrate_smoothed(sys, "sqrt", 1e-3, (0.0, 1.0, 1.0), (0.0, 0.5))
    assert traj.t_end == pytest.approx(0.5)


def test_smoothed_step_floor_is_reported():
    sys = nf(1, 1, -2.0, -2.0, 0.2)
    opts = IntegratorOptions(min_step=1e-4)
    traj = integrate_smoothed(sys, "tanh", 1e-7, (0.0, 1.0, 1.0), (0.0, 1.0), opts)
    assert traj.meta.get("aborted") == "step-floor"
    assert len(traj.events_of("step-floor")) == 1


# ------------------------------------------------------------ blow-up

def test_blowup_two_fold_point_freezes_lambda_initially():
    # at the two-fold of the unperturbed system f1 vanishes for every lam,
    # so lam barely moves over a short window regardless of its start
    p = TwoFoldParams(1, 1, -2.0, -2.0, 0.0)
    for lam0 in (-0.8, 0.0, 0.5):
        traj = integrate_blowup(p, 1e-3, (lam0, 0.0, 0.0), (0.0, 1e-4))
        assert abs(traj.lam(len(traj) - 1) - lam0) <= 1e-4
    # contrast: away from the two-fold lam relaxes fast
    traj = integrate_blowup(p, 1e-3, (0.5, 1.0, 1.0), (0.0, 1e-4))
    assert abs(traj.lam(len(traj) - 1) - 0.5) > 1e-2


def test_blowup_tracks_sliding_manifold():
    p = TwoFoldParams(1, 1, -2.0, -2.0, 0.2)
    sys = normal_form_system(p)
    eps = 1e-3
    lam0 = sliding_lambda(sys, 1.0, 1.0)[0].lam
    traj = integrate_blowup(p, eps, (lam0, 1.0, 1.0), (0.0, 1.0))
    for i in range(len(traj)):
        if traj.times[i] < 10 * eps:
            continue
        lam = traj.lam(i)
        _, x2, x3 = traj.state(i)
        defect = abs(sys.f1_surface(x2, x3, lam))
        slope = abs(sys.f1_surface_dlambda(x2, x3, lam))
        assert defect / max(slope, 1e-6) <= 20 * eps


def test_blowup_relaxation_rate():
    p = TwoFoldParams(1, 1, -2.0, -2.0, 0.2)
    sys = normal_form_system(p)
    eps = 1e-3
    traj = integrate_blowup(p, eps, (0.0, 1.0, 1.0), (0.0, 0.05))
    t_check = 0.02     # ~ eps * log(1/tol) / rate with rate ~ 1
    lam = None
    for i in range(len(traj)):
        if traj.times[i] >= t_check:
            lam = traj.lam(i)
            _, x2, x3 = traj.state(i)
            break
    target = sliding_lambda(sys, x2, x3)[0].lam
    # the quasi-steady lam lags the instantaneous root by O(eps)
    assert lam == pytest.approx(target, abs=5e-4)


def test_blowup_boundary_exit():
    p = TwoFoldParams(1, 1, -2.0, -2.0, 0.2)
    traj = integrate_blowup(p, 1e-3, (0.0, 1.0, -1.0), (0.0, 1.0))
    exits = traj.events_of("boundary-exit")
    assert len(exits) == 1
    assert traj.meta["boundary_exit"] == -1
    assert traj.lam(len(traj) - 1) == pytest.approx(-1.0, abs=1e-9)
    assert traj.t_end < 1.0


def test_blowup_rejects_bad_lambda():
    with pytest.raises(ValueError):
        integrate_blowup(TwoFoldParams(1, 1, 0.0, 0.0, 0.1), 1e-3,
                         (1.5, 0.0, 0.0), (0.0, 1.0))


# ------------------------------------------------------------ persistence

def test_trajectory_csv_format(tmp_path):
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.1, 1.0, -1.0), (0.0, 0.3))
    path = tmp_path / "run.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x1,x2,x3,mode,lambda"
    first = lines[1].split(",")
    assert first[4] == "flow+" and first[5] == ""
    # sliding/flow rows at the end carry the mode of their sample
    assert len(lines) == len(traj) + 1


def test_event_csv_format(tmp_path):
    sys = nf(1, 1, -2.0, -2.0, 0.0)
    traj = integrate_filippov(sys, (0.1, 1.0, -1.0), (0.0, 0.3))
    path = tmp_path / "run.events.csv"
    traj.events_to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,kind,x1,x2,x3"
    assert any("crossing" in ln for ln in lines[1:])


def test_blowup_csv_puts_lambda_in_lambda_column(tmp_path):
    p = TwoFoldParams(1, 1, -2.0, -2.0, 0.2)
    traj = integrate_blowup(p, 1e-3, (0.5, 1.0, 1.0), (0.0, 0.01))
    path = tmp_path / "layer.csv"
    traj.to_csv(path)
    row = path.read_text().splitlines()[1].split(",")
    assert float(row[1]) == 0.0            # x1 column: the run lives on x1 = 0
    assert float(row[5]) == 0.5            # lambda column carries lam
