"""Time integration engines.

One adaptive embedded Runge-Kutta core (Dormand-Prince 5(4), cubic-Hermite
dense output) drives four front ends:

  * integrate_smooth   -- a single smooth field, forward or backward;
  * integrate_filippov -- event-driven switching: half-space flows, surface
    crossings located by bisection on the dense output, sliding with the
    layer value of lam tracked in closed form, fold/two-fold exit events;
  * integrate_smoothed -- sigmoid regularization lam = phi(x1/eps);
  * integrate_blowup   -- the layer system itself, (lam' , x2., x3.) with
    lam' = eps dlam/dt, lam clamped to [-1, +1] by a boundary-exit event.

Sliding uses the fact that the surface component f1 is quadratic in lam for
every in-scope system (the hidden field does not depend on lam), so the slide
can hold one root branch of that quadratic in closed form: sigma = -1 labels
the attracting branch (df1/dlam = sigma sqrt(disc) there), sigma = +1 the
repelling one.  Branch loss (discriminant -> 0) is the fold of the sliding
manifold and ejects the orbit into the half space where f1 keeps its sign.
"""

from __future__ import annotations

import math
from array import array
from bisect import bisect_right
from dataclasses import dataclass

from .fields import PiecewiseSmoothSystem, SmoothField, TwoFoldParams

__all__ = [
    "IntegratorOptions", "RepellingPolicy", "Trajectory", "Event",
    "NonconvergentEventError",
    "STAY_SLIDING", "EJECT_PLUS", "EJECT_MINUS", "eject_at",
    "FLOW_PLUS", "FLOW_MINUS", "SLIDING", "LAYER",
    "CROSSING", "SLIDE_ENTRY", "SLIDE_EXIT", "TWO_FOLD_HIT",
    "DETERMINACY_BREAK", "STEP_FLOOR", "BOUNDARY_EXIT",
    "integrate_smooth", "integrate_filippov", "integrate_smoothed",
    "integrate_blowup",
]

NAN = float("nan")

# sample modes
FLOW_PLUS = "flow+"
FLOW_MINUS = "flow-"
SLIDING = "sliding"
LAYER = "layer"

# event kinds
CROSSING = "crossing"
SLIDE_ENTRY = "slide-entry"
SLIDE_EXIT = "slide-exit"
TWO_FOLD_HIT = "two-fold-hit"
DETERMINACY_BREAK = "determinacy-break"
STEP_FLOOR = "step-floor"
BOUNDARY_EXIT = "boundary-exit"

TWO_FOLD_TOL = 1e-8          # (|x2|, |x3|) below this is a two-fold hit
SURFACE_CAP_DIST = 0.01      # |x1| below this caps the step size ...
SURFACE_CAP_STEP = 1e-3      # ... at this value, so events sit on tight segments
DECISION_TOL = 1e-12


class NonconvergentEventError(RuntimeError):
    """Event bisection failed to converge within the iteration budget."""


@dataclass(frozen=True)
class RepellingPolicy:
    """What to do when the orbit lands on repelling sliding: keep sliding,
    eject immediately, or slide until a set time then eject."""

    kind: str                 # stay / eject-plus / eject-minus / eject-at
    time: float | None = None
    side: int = 1             # ejection side for eject-at

    def __post_init__(self):
        if self.kind not in ("stay", "eject-plus", "eject-minus", "eject-at"):
            raise ValueError(f"unknown repelling policy {self.kind!r}")
        if self.kind == "eject-at" and self.time is None:
            raise ValueError("eject-at needs a time")


STAY_SLIDING = RepellingPolicy("stay")
EJECT_PLUS = RepellingPolicy("eject-plus")
EJECT_MINUS = RepellingPolicy("eject-minus")


def eject_at(time: float, side: int = 1) -> RepellingPolicy:
    return RepellingPolicy("eject-at", time, side)


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf
    min_step: float = 1e-12
    event_tol: float = 1e-12
    repelling_policy: RepellingPolicy = STAY_SLIDING
    max_steps: int = 20_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.event_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    state: tuple[float, float, float]


class Trajectory:
    """Sampled run with cubic-Hermite dense output and an event log.

    Samples carry separate incoming/outgoing derivatives so dense output stays
    exact across mode switches (the derivative jumps there).  `meta['space']`
    is 'x' for runs in state space and 'layer' for blow-up runs, whose sample
    vectors are (lam, x2, x3).
    """

    def __init__(self, meta: dict | None = None):
        self._t = array("d")
        self._y = (array("d"), array("d"), array("d"))
        self._fi = (array("d"), array("d"), array("d"))   # incoming derivative
        self._fo = (array("d"), array("d"), array("d"))   # outgoing derivative
        self._lam = array("d")
        self._modes: list[str] = []
        self.events: list[Event] = []
        self.meta = meta if meta is not None else {}

    # -- construction ------------------------------------------------------

    def append(self, t, y, f_out, mode, lam=NAN, f_in=None):
        if self._t and not (t > self._t[-1] if self.meta.get("dir", 1) > 0
                            else t < self._t[-1]):
            raise ValueError(f"sample times must be strictly monotone, got {t}")
        f_in = f_in if f_in is not None else f_out
        self._t.append(t)
        for i in range(3):
            self._y[i].append(y[i])
            self._fi[i].append(f_in[i])
            self._fo[i].append(f_out[i])
        self._lam.append(lam)
        self._modes.append(mode)

    def add_event(self, t, kind, state):
        self.events.append(Event(t, kind, tuple(state)))

    # -- access ------------------------------------------------------------

    def __len__(self):
        return len(self._t)

    @property
    def times(self):
        return self._t

    def state(self, i: int) -> tuple[float, float, float]:
        return (self._y[0][i], self._y[1][i], self._y[2][i])

    def mode(self, i: int) -> str:
        return self._modes[i]

    def lam(self, i: int) -> float:
        return self._lam[i]

    @property
    def t_end(self):
        return self._t[-1]

    @property
    def final_state(self):
        return self.state(len(self._t) - 1)

    def eval(self, t: float) -> tuple[float, float, float]:
        """Dense output at time t (cubic Hermite on the covering segment)."""
        ts = self._t
        if not ts:
            raise ValueError("empty trajectory")
        if len(ts) == 1:
            return self.state(0)
        forward = self.meta.get("dir", 1) > 0
        if forward:
            i = bisect_right(ts, t) - 1
        else:
            # times are strictly decreasing; search on the reversed view
            lo, hi = 0, len(ts) - 1
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if ts[mid] >= t:
                    lo = mid
                else:
                    hi = mid - 1
            i = lo
        i = max(0, min(i, len(ts) - 2))
        t0, t1 = ts[i], ts[i + 1]
        if t == t0:
            return self.state(i)
        if t == t1:
            return self.state(i + 1)
        h = t1 - t0
        s = (t - t0) / h
        s2 = s * s
        h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
        h10 = s * (1.0 - s) ** 2
        h01 = s2 * (3.0 - 2.0 * s)
        h11 = s2 * (s - 1.0)
        return tuple(h00 * self._y[k][i] + h10 * h * self._fo[k][i]
                     + h01 * self._y[k][i + 1] + h11 * h * self._fi[k][i + 1]
                     for k in range(3))

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def sign_changes(self, component: int = 0) -> int:
        """Sign flips of one sampled component (zeros are skipped)."""
        col = self._y[component]
        count = 0
        last = 0.0
        for v in col:
            if v == 0.0:
                continue
            s = 1.0 if v > 0 else -1.0
            if last != 0.0 and s != last:
                count += 1
            last = s
        return count

    def sup_norm(self) -> float:
        return max(max(abs(v) for v in col) for col in self._y)

    # -- persistence ---------------------------------------------------------

    def to_csv(self, path) -> None:
        layer = self.meta.get("space") == "layer"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,x1,x2,x3,mode,lambda\n")
            for i in range(len(self._t)):
                lam = self._lam[i]
                lam_s = "" if lam != lam else repr(lam)
                x1 = 0.0 if layer else self._y[0][i]
                fh.write(f"{self._t[i]!r},{x1!r},{self._y[1][i]!r},"
                         f"{self._y[2][i]!r},{self._modes[i]},{lam_s}\n")

    def events_to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,kind,x1,x2,x3\n")
            for e in self.events:
                fh.write(f"{e.t!r},{e.kind},{e.state[0]!r},{e.state[1]!r},{e.state[2]!r}\n")


# ---------------------------------------------------------------- RK core

# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)


class _StepFloor(Exception):
    pass


class _Stepper:
    """One smooth piece: repeated accepted DP54 steps with error control.

    `rhs` maps a state tuple to a derivative tuple of the same length.
    Holds (t, y, f) of the last accepted point; `step` returns the segment
    (t0, y0, f0, t1, y1, f1) it just accepted.
    """

    __slots__ = ("rhs", "opts", "direction", "t", "y", "f", "h", "accepted")

    def __init__(self, rhs, t0, y0, opts: IntegratorOptions, direction=1, h0=None):
        self.rhs = rhs
        self.opts = opts
        self.direction = direction
        self.t = t0
        self.y = tuple(float(v) for v in y0)
        self.f = rhs(self.y)
        self.h = h0 if h0 is not None else min(opts.max_step, 1e-3)
        self.accepted = 0

    def set_state(self, t, y, f=None):
        self.t = t
        self.y = tuple(y)
        self.f = f if f is not None else self.rhs(self.y)

    def _attempt(self, h):
        rhs = self.rhs
        y = self.y
        k1 = self.f
        n = len(y)
        rng = range(n)
        k2 = rhs(tuple(y[i] + h * (_A21 * k1[i]) for i in rng))
        k3 = rhs(tuple(y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in rng))
        k4 = rhs(tuple(y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in rng))
        k5 = rhs(tuple(y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i]
                                   + _A54 * k4[i]) for i in rng))
        k6 = rhs(tuple(y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                   + _A64 * k4[i] + _A65 * k5[i]) for i in rng))
        y_new = tuple(y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                  + _B5 * k5[i] + _B6 * k6[i]) for i in rng)
        k7 = rhs(y_new)
        err = 0.0
        at, rt = self.opts.abs_tol, self.opts.rel_tol
        for i in rng:
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                     + _E6 * k6[i] + _E7 * k7[i])
            scale = at + rt * max(abs(y[i]), abs(y_new[i]))
            q = abs(e) / scale
            if q > err:
                err = q
        return y_new, k7, err

    def step(self, t_limit, h_cap=math.inf):
        """Advance one accepted step toward t_limit; raises _StepFloor."""
        opts = self.opts
        while True:
            h = min(self.h, h_cap, opts.max_step, abs(t_limit - self.t))
            if h < opts.min_step:
                raise _StepFloor
            y_new, f_new, err = self._attempt(h * self.direction)
            ok = err <= 1.0 and all(v == v for v in y_new)
            if ok:
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                seg = (self.t, self.y, self.f,
                       self.t + h * self.direction, y_new, f_new)
                self.t = seg[3]
                self.y = y_new
                self.f = f_new
                self.h = h * fac
                self.accepted += 1
                if self.accepted > opts.max_steps:
                    raise RuntimeError("step budget exhausted")
                return seg
            self.h = h * (0.2 if err != err else max(0.2, 0.9 * err ** -0.2))


def _hermite(seg, t):
    t0, y0, f0, t1, y1, f1 = seg
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s2 * (3.0 - 2.0 * s)
    h11 = s2 * (s - 1.0)
    return tuple(h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]
                 for i in range(len(y0)))


def _bisect_event(seg, scalar, max_iter=200):
    """Root of scalar(dense(t)) in the segment, assuming a sign change."""
    t_lo, t_hi = seg[0], seg[3]
    v_lo = scalar(seg[1])
    v_hi = scalar(seg[4])
    if v_lo == 0.0:
        return t_lo, seg[1]
    if v_hi == 0.0:
        return t_hi, seg[4]
    if (v_lo > 0.0) == (v_hi > 0.0):
        raise NonconvergentEventError("no sign change in event bracket")
    y_mid = seg[1]
    for _ in range(max_iter):
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid == t_lo or t_mid == t_hi:      # interval below float resolution
            return t_mid, _hermite(seg, t_mid)
        y_mid = _hermite(seg, t_mid)
        v_mid = scalar(y_mid)
        if v_mid == 0.0:
            return t_mid, y_mid
        if (v_mid > 0.0) == (v_lo > 0.0):
            t_lo, v_lo = t_mid, v_mid
        else:
            t_hi, v_hi = t_mid, v_mid
    raise NonconvergentEventError(f"event bisection did not converge ({max_iter} iterations)")


# ---------------------------------------------------------------- smooth runs

def _wrap3(fn):
    return lambda y: fn(y[0], y[1], y[2])


def integrate_smooth(fld: SmoothField, x0, t_span, opts: IntegratorOptions | None = None) -> Trajectory:
    """Adaptive integration of one smooth field; t_span may run backward."""
    opts = opts or IntegratorOptions()
    t0, t1 = t_span
    direction = 1 if t1 >= t0 else -1
    traj = Trajectory(meta={"kind": "smooth", "dir": direction})
    rhs = _wrap3(fld.fn)
    stepper = _Stepper(rhs, t0, tuple(map(float, x0)), opts, direction)
    mode0 = FLOW_PLUS if stepper.y[0] >= 0 else FLOW_MINUS
    traj.append(t0, stepper.y, stepper.f, mode0)
    while (t1 - stepper.t) * direction > 0:
        try:
            seg = stepper.step(t1)
        except _StepFloor:
            traj.add_event(stepper.t, STEP_FLOOR, stepper.y)
            traj.meta["aborted"] = STEP_FLOOR
            break
        y = seg[4]
        traj.append(seg[3], y, seg[5], FLOW_PLUS if y[0] >= 0 else FLOW_MINUS)
    return traj


def _sigmoid_source(sigmoid: str, eps: float) -> str:
    if sigmoid == "tanh":
        return f"_tanh(x1*{1.0 / eps!r})"
    if sigmoid == "sqrt":
        return f"x1/_sqrt({eps * eps!r}+x1*x1)"
    raise ValueError(f"unknown sigmoid {sigmoid!r} (use 'tanh' or 'sqrt')")


def _compile_smoothed(sys: PiecewiseSmoothSystem, sigmoid: str, eps: float):
    """One flat compiled function for the regularized field; the layer makes
    the right-hand side stiff, so per-call overhead matters."""
    p1, p2, p3 = (c.source() for c in sys.f_plus.components)
    m1, m2, m3 = (c.source() for c in sys.f_minus.components)
    g1, g2, g3 = (c.source() for c in sys.hidden.components)
    src = (
        "def rhs(x1, x2, x3):\n"
        f"    lam = {_sigmoid_source(sigmoid, eps)}\n"
        "    wp = 0.5*(1.0+lam); wm = 0.5*(1.0-lam); wh = 1.0-lam*lam\n"
        f"    return (wp*{p1}+wm*{m1}+wh*{g1},\n"
        f"            wp*{p2}+wm*{m2}+wh*{g2},\n"
        f"            wp*{p3}+wm*{m3}+wh*{g3})\n")
    ns = {"_tanh": math.tanh, "_sqrt": math.sqrt}
    exec(src, ns)
    return ns["rhs"]


def integrate_smoothed(sys: PiecewiseSmoothSystem, sigmoid: str, eps: float,
                       x0, t_span, opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate the sigmoid-regularized field lam = phi(x1/eps).

    Samples with |x1| < 10 eps are tagged as layer samples and carry the
    sigmoid value in the lambda column.  Step shrinkage inside the layer is
    expected; a step-floor event ends the run early rather than stalling.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    opts = opts or IntegratorOptions()
    t0, t1 = t_span
    if t1 <= t0:
        raise ValueError("smoothed runs integrate forward")
    traj = Trajectory(meta={"kind": "smoothed", "sigmoid": sigmoid, "eps": eps, "dir": 1})
    frhs = _compile_smoothed(sys, sigmoid, eps)
    rhs = _wrap3(frhs)
    if sigmoid == "tanh":
        phi = lambda u: math.tanh(u)
    else:
        phi = lambda u: u / math.sqrt(1.0 + u * u)
    band = 10.0 * eps

    def tag(y):
        x1 = y[0]
        if abs(x1) < band:
            return LAYER, phi(x1 / eps)
        return (FLOW_PLUS if x1 > 0 else FLOW_MINUS), NAN

    stepper = _Stepper(rhs, t0, tuple(map(float, x0)), opts, 1)
    mode, lam = tag(stepper.y)
    traj.append(t0, stepper.y, stepper.f, mode, lam)
    while stepper.t < t1:
        try:
            seg = stepper.step(t1)
        except _StepFloor:
            traj.add_event(stepper.t, STEP_FLOOR, stepper.y)
            traj.meta["aborted"] = STEP_FLOOR
            break
        mode, lam = tag(seg[4])
        traj.append(seg[3], seg[4], seg[5], mode, lam)
    return traj


# ---------------------------------------------------------------- blow-up runs

def integrate_blowup(p: TwoFoldParams, eps: float, y0, t_span,
                     opts: IntegratorOptions | None = None) -> Trajectory:
    """Layer dynamics on the switching surface in (lam, x2, x3).

    dlam/dt = f1(0, x2, x3; lam)/eps with (x2., x3.) = (f2, f3); hitting a
    lam boundary with outward flow stops the run with a boundary-exit event
    (the hand-off into the half space is the caller's business).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lam0 = y0[0]
    if not -1.0 <= lam0 <= 1.0:
        raise ValueError("lam0 must lie in [-1, 1]")
    opts = opts or IntegratorOptions()
    t0, t1 = t_span
    a1, a2, b1, b2, al = p.a1, p.a2, p.b1, p.b2, p.alpha
    inv = 1.0 / eps

    def rhs(y):
        lam, x2, x3 = y
        wp = 0.5 * (1.0 + lam)
        wm = 0.5 * (1.0 - lam)
        f1 = -wp * x2 + wm * x3 + al * (1.0 - lam * lam)
        return (f1 * inv, wp * a1 + wm * b2, wp * b1 + wm * a2)

    traj = Trajectory(meta={"kind": "blowup", "space": "layer", "eps": eps, "dir": 1})
    stepper = _Stepper(rhs, t0, tuple(map(float, y0)), opts, 1)
    traj.append(t0, stepper.y, stepper.f, LAYER, lam0)
    while stepper.t < t1:
        try:
            seg = stepper.step(t1)
        except _StepFloor:
            traj.add_event(stepper.t, STEP_FLOOR, stepper.y)
            traj.meta["aborted"] = STEP_FLOOR
            break
        y = seg[4]
        out = None
        if y[0] >= 1.0:
            out = _bisect_event(seg, lambda w: 1.0 - w[0])
        elif y[0] <= -1.0:
            out = _bisect_event(seg, lambda w: w[0] + 1.0)
        if out is not None:
            t_star, y_star = out
            if t_star > traj.times[-1]:
                traj.append(t_star, y_star, rhs(y_star), LAYER, y_star[0])
            traj.add_event(t_star, BOUNDARY_EXIT, (0.0, y_star[1], y_star[2]))
            traj.meta["boundary_exit"] = 1 if y_star[0] > 0 else -1
            break
        traj.append(seg[3], y, seg[5], LAYER, y[0])
    return traj


# ---------------------------------------------------------------- Filippov runs

def _quad_coeffs(sys: PiecewiseSmoothSystem, x2: float, x3: float):
    """f1(0, x2, x3; lam) = a lam^2 + b lam + c (exact: g is lam-independent)."""
    fp1 = sys.f_plus.fn(0.0, x2, x3)[0]
    fm1 = sys.f_minus.fn(0.0, x2, x3)[0]
    g1 = sys.hidden.fn(0.0, x2, x3)[0]
    return -g1, 0.5 * (fp1 - fm1), 0.5 * (fp1 + fm1) + g1


def _branch_lambda(sys, sigma, x2, x3):
    """Tracked root of the sliding quadratic.  sigma = -1 is the attracting
    branch, +1 the repelling one, 0 the linear (no hidden term) case.  The
    discriminant is clamped at zero so stage evaluations just past the branch
    fold stay finite; the fold itself is located by the disc monitor."""
    a, b, c = _quad_coeffs(sys, x2, x3)
    if a == 0.0 or sigma == 0:
        if b == 0.0:
            return 0.0
        return -c / b
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        disc = 0.0
    s = math.sqrt(disc)
    if b >= 0.0:
        q = -0.5 * (b + s)
        r_minus, r_plus = q / a, (c / q if q != 0.0 else -b / (2.0 * a))
    else:
        q = 0.5 * (s - b)
        r_plus, r_minus = q / a, (c / q if q != 0.0 else -b / (2.0 * a))
    return r_plus if sigma > 0 else r_minus


def _mix23(sys, x2, x3, lam):
    """(f2, f3) of the combination at (0, x2, x3); no lam range check, the
    tracked root may overshoot [-1, 1] by rounding during stages."""
    p = sys.f_plus.fn(0.0, x2, x3)
    m = sys.f_minus.fn(0.0, x2, x3)
    g = sys.hidden.fn(0.0, x2, x3)
    wp = 0.5 * (1.0 + lam)
    wm = 0.5 * (1.0 - lam)
    wh = 1.0 - lam * lam
    return (wp * p[1] + wm * m[1] + wh * g[1],
            wp * p[2] + wm * m[2] + wh * g[2])


def _lifts_off(sys, y, side):
    """Directional derivative of the side's surface component along its own
    flow: positive growth of x1 on the plus side (of -x1 on the minus side)
    means the grazing orbit curves away from the surface."""
    fld = sys.f_plus if side > 0 else sys.f_minus
    v = fld.fn(y[0], y[1], y[2])
    d = 1e-7
    up = fld.fn(y[0] + d * v[0], y[1] + d * v[1], y[2] + d * v[2])[0]
    dn = fld.fn(y[0] - d * v[0], y[1] - d * v[1], y[2] - d * v[2])[0]
    return (up - dn) / (2.0 * d) * (1 if side > 0 else -1) > 0.0


class _FilippovRun:
    def __init__(self, sys, opts, traj, t_end):
        self.sys = sys
        self.opts = opts
        self.traj = traj
        self.t_end = t_end
        self.done = False

    # -- surface decision --------------------------------------------------

    def decide_surface(self, t, y, f_in=None):
        """Entry point whenever the state sits on x1 = 0."""
        sys = self.sys
        fp = sys.f1_surface(y[1], y[2], 1.0)
        fm = sys.f1_surface(y[1], y[2], -1.0)
        tol = DECISION_TOL
        if abs(fp) <= tol and abs(fm) <= tol:
            # tangent from both sides: the two-fold itself
            self.traj.add_event(t, TWO_FOLD_HIT, (0.0, y[1], y[2]))
            self.traj.add_event(t, DETERMINACY_BREAK, (0.0, y[1], y[2]))
            self._record(t, y, f_in or (0.0, 0.0, 0.0), SLIDING, NAN, f_in)
            self.done = True
            return None
        if fp < -tol < tol < fm:
            return self.enter_sliding(t, y, attracting=True, f_in=f_in)
        if fm < -tol < tol < fp:
            policy = self.opts.repelling_policy
            if policy.kind == "eject-plus":
                self._record_event_sample(t, y, 1, f_in)
                return ("flow", 1)
            if policy.kind == "eject-minus":
                self._record_event_sample(t, y, -1, f_in)
                return ("flow", -1)
            return self.enter_sliding(t, y, attracting=False, f_in=f_in)
        if abs(fp) <= tol:
            # grazing contact of the plus field
            if _lifts_off(sys, y, 1):
                self._record_event_sample(t, y, 1, f_in)
                return ("flow", 1)
            return self.enter_sliding(t, y, attracting=fm > 0, f_in=f_in)
        if abs(fm) <= tol:
            if _lifts_off(sys, y, -1):
                self._record_event_sample(t, y, -1, f_in)
                return ("flow", -1)
            return self.enter_sliding(t, y, attracting=fp < 0, f_in=f_in)
        # transversal crossing: both components share one sign
        side = 1 if fp > 0 else -1
        self.traj.add_event(t, CROSSING, y)
        self._record_event_sample(t, y, side, f_in)
        return ("flow", side)

    def _record(self, t, y, f_out, mode, lam=NAN, f_in=None):
        # events located at the left end of a segment would duplicate the
        # previous sample; the log keeps them, the sample store skips them
        if self.traj.times and t <= self.traj.times[-1]:
            return
        if lam == lam:
            lam = min(1.0, max(-1.0, lam))
        self.traj.append(t, y, f_out, mode, lam, f_in)

    def _record_event_sample(self, t, y, side, f_in):
        fld = self.sys.f_plus if side > 0 else self.sys.f_minus
        f_out = fld.fn(y[0], y[1], y[2])
        self._record(t, y, f_out, FLOW_PLUS if side > 0 else FLOW_MINUS, NAN, f_in)

    def enter_sliding(self, t, y, attracting, f_in=None):
        # the attracting branch carries df1/dlam = -sqrt(disc), which is the
        # sigma = -1 root; this labelling continues through a == 0, where the
        # linear root inherits the branch with the matching slope sign
        sigma = -1 if attracting else 1
        lam = _branch_lambda(self.sys, sigma, y[1], y[2])
        f2, f3 = _mix23(self.sys, y[1], y[2], lam)
        self.traj.add_event(t, SLIDE_ENTRY, (0.0, y[1], y[2]))
        self._record(t, (y[0], y[1], y[2]), (0.0, f2, f3), SLIDING, lam, f_in)
        policy = self.opts.repelling_policy
        if not attracting and policy.kind == "eject-at":
            return ("slide", sigma, policy.time, policy.side)
        return ("slide", sigma, None, 0)

    # -- flow segments -------------------------------------------------------

    def run_flow(self, t, y, side):
        sys = self.sys
        opts = self.opts
        fld = sys.f_plus if side > 0 else sys.f_minus
        rhs = _wrap3(fld.fn)
        stepper = _Stepper(rhs, t, y, opts, 1)
        tol = opts.event_tol
        while stepper.t < self.t_end:
            h_cap = SURFACE_CAP_STEP if abs(stepper.y[0]) < SURFACE_CAP_DIST else math.inf
            try:
                seg = stepper.step(self.t_end, h_cap)
            except _StepFloor:
                self.traj.add_event(stepper.t, STEP_FLOOR, stepper.y)
                self.traj.meta["aborted"] = STEP_FLOOR
                self.done = True
                return None
            x1_old, x1_new = seg[1][0], seg[4][0]
            crossed = (x1_new <= -tol) if side > 0 else (x1_new >= tol)
            # require a genuine sign change: the segment may start a hair on
            # the far side of the surface after an earlier crossing cut
            if (crossed and (x1_old > 0.0) != (x1_new > 0.0)) or x1_new == 0.0:
                t_star, y_star = _bisect_event(seg, lambda w: w[0])
                f_star = rhs(y_star)
                return self.decide_surface(t_star, y_star, f_in=f_star)
            self._record(seg[3], seg[4], seg[5],
                         FLOW_PLUS if side > 0 else FLOW_MINUS, NAN)
        return None

    # -- sliding segments ----------------------------------------------------

    def run_slide(self, t, y, sigma, eject_time, eject_side):
        sys = self.sys
        opts = self.opts

        def lam_of(w):
            return _branch_lambda(sys, sigma, w[0], w[1])

        def rhs(w):
            return _mix23(sys, w[0], w[1], lam_of(w))

        def disc_of(w):
            a, b, c = _quad_coeffs(sys, w[0], w[1])
            return b * b - 4.0 * a * c if a != 0.0 else 1.0

        is_nf = sys.params is not None
        if eject_time is not None and eject_time <= t:
            st = (0.0, y[1], y[2])
            self.traj.add_event(t, SLIDE_EXIT, st)
            return ("flow", eject_side)
        if is_nf and max(abs(y[1]), abs(y[2])) <= TWO_FOLD_TOL:
            st = (0.0, y[1], y[2])
            self.traj.add_event(t, TWO_FOLD_HIT, st)
            self.traj.add_event(t, DETERMINACY_BREAK, st)
            self.done = True
            return None
        stepper = _Stepper(rhs, t, (y[1], y[2]), opts, 1)
        t_limit = self.t_end if eject_time is None else min(self.t_end, eject_time)

        def monitors(w):
            lam = lam_of(w)
            vals = [1.0 - lam, lam + 1.0, disc_of(w)]
            if is_nf:
                vals.append(max(abs(w[0]), abs(w[1])) - TWO_FOLD_TOL)
            return vals

        m_prev = monitors((y[1], y[2]))
        while stepper.t < t_limit:
            h_cap = math.inf
            if is_nf:
                # resolve the approach to the two-fold: halving steps keep the
                # endpoint monitor from jumping across the hit window
                dist = max(abs(stepper.y[0]), abs(stepper.y[1]))
                speed = math.hypot(stepper.f[0], stepper.f[1])
                if speed > 0.0 and dist > TWO_FOLD_TOL:
                    h_cap = max(0.5 * dist / speed, 10.0 * self.opts.min_step)
            try:
                seg = stepper.step(t_limit, h_cap)
            except _StepFloor:
                st = (0.0, stepper.y[0], stepper.y[1])
                self.traj.add_event(stepper.t, STEP_FLOOR, st)
                self.traj.meta["aborted"] = STEP_FLOOR
                self.done = True
                return None
            w = seg[4]
            m_new = monitors(w)
            fired = None
            for idx, (a_val, b_val) in enumerate(zip(m_prev, m_new)):
                if a_val > 0.0 >= b_val:
                    fired = idx
                    break
            if fired is not None:
                scalars = [lambda v: 1.0 - lam_of(v), lambda v: lam_of(v) + 1.0,
                           disc_of, lambda v: max(abs(v[0]), abs(v[1])) - TWO_FOLD_TOL]
                t_star, w_star = _bisect_event(seg, scalars[fired])
                return self._slide_event(fired, t_star, w_star, sigma)
            lam = lam_of(w)
            self._record(seg[3], (0.0, w[0], w[1]), (0.0, seg[5][0], seg[5][1]),
                         SLIDING, lam)
            m_prev = m_new
        if eject_time is not None and t_limit < self.t_end:
            # timed ejection off the repelling branch
            w = stepper.y
            st = (0.0, w[0], w[1])
            self.traj.add_event(t_limit, SLIDE_EXIT, st)
            self._record_event_sample(t_limit, st, eject_side,
                                      (0.0, stepper.f[0], stepper.f[1]))
            return ("flow", eject_side)
        return None

    def _slide_event(self, which, t_star, w_star, sigma):
        sys = self.sys
        st = (0.0, w_star[0], w_star[1])
        lam = _branch_lambda(sys, sigma, w_star[0], w_star[1])
        f2, f3 = _mix23(sys, w_star[0], w_star[1], lam)
        f_slide = (0.0, f2, f3)
        if which == 3:
            self.traj.add_event(t_star, TWO_FOLD_HIT, st)
            self.traj.add_event(t_star, DETERMINACY_BREAK, st)
            self._record(t_star, st, f_slide, SLIDING, lam, f_slide)
            self.done = True
            return None
        if which == 2:
            # branch fold: past it f1 keeps the sign of its lam^2 coefficient
            a, _, _ = _quad_coeffs(sys, w_star[0], w_star[1])
            side = 1 if a > 0 else -1
            self.traj.add_event(t_star, SLIDE_EXIT, st)
            self._record_event_sample(t_star, st, side, f_slide)
            return ("flow", side)
        side = 1 if which == 0 else -1
        if _lifts_off(sys, st, side):
            self.traj.add_event(t_star, SLIDE_EXIT, st)
            self._record_event_sample(t_star, st, side, f_slide)
            return ("flow", side)
        # the boundary root grazes lam = +-1 and returns: keep sliding
        self._record(t_star, st, f_slide, SLIDING, lam, f_slide)
        return ("slide", sigma, None, 0)


def integrate_filippov(sys: PiecewiseSmoothSystem, x0, t_span,
                       opts: IntegratorOptions | None = None) -> Trajectory:
    """Event-driven integration of the switched system (forward time).

    Off the surface the active half-space field is integrated; surface hits
    are located on the dense output to event_tol.  Transversal contacts cross
    or enter sliding by the signs of f1 on the two sides; sliding tracks the
    layer root of f1 in closed form and exits at the fold lines (lam = +-1,
    lift-off permitting), at a branch fold, or at the two-fold, which is a
    determinacy-breaking stop.  Repelling sliding follows the configured
    policy; staying on the branch is the (deterministic) default.
    """
    opts = opts or IntegratorOptions()
    t0, t1 = t_span
    if t1 <= t0:
        raise ValueError("Filippov runs integrate forward")
    traj = Trajectory(meta={"kind": "filippov", "dir": 1})
    run = _FilippovRun(sys, opts, traj, t1)
    y = tuple(map(float, x0))
    t = t0
    if abs(y[0]) <= opts.event_tol:
        action = run.decide_surface(t, (y[0], y[1], y[2]))
    else:
        side = 1 if y[0] > 0 else -1
        fld = sys.f_plus if side > 0 else sys.f_minus
        traj.append(t, y, fld.fn(*y), FLOW_PLUS if side > 0 else FLOW_MINUS)
        action = ("flow", side)
    while action is not None and not run.done:
        t = traj.times[-1]
        y = traj.final_state
        if t >= t1:
            break
        if action[0] == "flow":
            action = run.run_flow(t, y, action[1])
        else:
            action = run.run_slide(t, y, action[1], action[2], action[3])
    return traj
