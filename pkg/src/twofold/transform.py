"""Coordinate-change pipeline from the blown-up layer system onto the local
folded-singularity model, with a numerical order-of-accuracy verification.

The chain, applied around one folded singularity (lam_s, x2s, x3s):

  1. translation      y  = (lam - lam_s, x2 - x2s, x3 - x3s)
  2. rectification    z  = (y1 - y1L(y3), y2 - y2L(y3), y3)      (straightens L)
  3. corrective shift z2~ = z2 - eps f3s / (alpha (1 + lam_s)^2)
  4. scaling          x~ = (sqrt|alpha| z1, -sign(alpha) d1 z2~, -sign(alpha) z3)

together with the time reversal t~ = -sign(alpha) t.  In these variables the
layer system agrees with

    (eps/sqrt|alpha|) dx1~/dt~ = x2~ + x1~^2 + r1
                      dx2~/dt~ = b~ x3~ + c~ x1~ + r2
                      dx3~/dt~ = a~ + r3

where r1, r2 are quadratically small in the sample radius once eps is tied to
it, while r3 is only linearly small (the third row of the model keeps just
its constant part).  The residual check therefore measures rows 1 and 2 and
couples eps = h to the sphere radius h; their maximum must shrink like h^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fields import TwoFoldParams, normal_form_system
from .singularities import FoldedSingularity, folded_singularities

__all__ = [
    "TransformContext", "TransformDomainError",
    "to_y", "from_y", "curve_functions", "to_x_tilde", "from_x_tilde",
    "jacobian_to_x_tilde", "folded_normal_field", "pushforward",
    "equivalence_residual", "transform_check", "sphere_directions",
]


class TransformDomainError(ValueError):
    """Point outside the rectification domain (1+lam_s)^2 - y3/alpha >= 0."""


@dataclass(frozen=True)
class TransformContext:
    """Parameters, target singularity and the timescale ratio of one
    transform instance.  Immutable; all maps below are pure functions."""

    params: TwoFoldParams
    singularity: FoldedSingularity
    epsilon: float

    def __post_init__(self):
        if abs(self.params.alpha) <= 1e-9:
            raise ValueError("transform requires |alpha| > 1e-9")
        if abs(1.0 + self.singularity.lambda_s) <= 1e-9:
            raise ValueError("transform requires lam_s away from -1")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")

    @property
    def lam_s(self):
        return self.singularity.lambda_s

    @property
    def sign_alpha(self):
        return 1.0 if self.params.alpha > 0 else -1.0


def to_y(ctx: TransformContext, point):
    lam, x2, x3 = point
    s = ctx.singularity
    return (lam - s.lambda_s, x2 - s.x2s, x3 - s.x3s)


def from_y(ctx: TransformContext, y):
    s = ctx.singularity
    return (y[0] + s.lambda_s, y[1] + s.x2s, y[2] + s.x3s)


def curve_functions(ctx: TransformContext, y3: float):
    """(y1L, y2L, y1L', y2L') parameterizing the non-hyperbolic curve by y3.

    y1L(y3) = -1 - lam_s + sqrt((1+lam_s)^2 - y3/alpha) is the branch through
    the singularity (y1L(0) = 0); y2L = -y3 - 4 alpha y1L.
    """
    ls = ctx.lam_s
    al = ctx.params.alpha
    arg = (1.0 + ls) ** 2 - y3 / al
    scale = (1.0 + ls) ** 2 + abs(y3 / al)
    if arg < 0.0:
        if arg > -1e-12 * scale:     # rounding at the domain boundary
            arg = 0.0
        else:
            raise TransformDomainError(
                f"y3 = {y3} outside the rectification domain (argument {arg:.3e})")
    root = math.sqrt(arg)
    y1l = -1.0 - ls + root
    y2l = -y3 - 4.0 * al * y1l
    denom = 1.0 + ls + y1l            # equals the square root above
    if denom == 0.0:
        # chart boundary: the parameterization by y3 turns vertical
        y1lp = math.copysign(math.inf, -al)
        y2lp = math.copysign(math.inf, 1.0 - ls - y1l)
    else:
        y1lp = (-1.0 / (2.0 * al)) / denom
        y2lp = (1.0 - ls - y1l) / denom
    return (y1l, y2l, y1lp, y2lp)


def _shift(ctx: TransformContext) -> float:
    s = ctx.singularity
    return ctx.epsilon * s.f3s / (ctx.params.alpha * (1.0 + s.lambda_s) ** 2)


def to_x_tilde(ctx: TransformContext, point):
    """Full chain (lam, x2, x3) -> (x1~, x2~, x3~)."""
    y1, y2, y3 = to_y(ctx, point)
    y1l, y2l, _, _ = curve_functions(ctx, y3)
    z1 = y1 - y1l
    z2t = y2 - y2l - _shift(ctx)
    sgn = ctx.sign_alpha
    d1 = ctx.singularity.d1
    return (math.sqrt(abs(ctx.params.alpha)) * z1, -sgn * d1 * z2t, -sgn * y3)


def from_x_tilde(ctx: TransformContext, xt):
    """Inverse chain on the rectification domain."""
    sgn = ctx.sign_alpha
    d1 = ctx.singularity.d1
    z1 = xt[0] / math.sqrt(abs(ctx.params.alpha))
    z2t = xt[1] / (-sgn * d1)
    y3 = -sgn * xt[2]
    y1l, y2l, _, _ = curve_functions(ctx, y3)
    y = (z1 + y1l, z2t + _shift(ctx) + y2l, y3)
    return from_y(ctx, y)


def jacobian_to_x_tilde(ctx: TransformContext, point):
    """3x3 Jacobian of to_x_tilde wrt (lam, x2, x3) as row tuples."""
    _, _, y3 = to_y(ctx, point)
    _, _, y1lp, y2lp = curve_functions(ctx, y3)
    sq = math.sqrt(abs(ctx.params.alpha))
    sgn = ctx.sign_alpha
    d1 = ctx.singularity.d1
    return ((sq, 0.0, -sq * y1lp),
            (0.0, -sgn * d1, sgn * d1 * y2lp),
            (0.0, 0.0, -sgn))


def folded_normal_field(a_tilde: float, b_tilde: float, c_tilde: float,
                        eps: float, xt, time: str = "fast"):
    """Truncated local model (x1~' , x2~., x3~.) at x~.

    `time='fast'` returns the first component in primed form x1~' = eps dx1~/dt~;
    `time='slow'` divides it by eps so all three rows are d/dt~ rates.
    """
    x1t, x2t, x3t = xt
    fast = x2t + x1t * x1t
    if time == "slow":
        fast = fast / eps
    elif time != "fast":
        raise ValueError("time must be 'fast' or 'slow'")
    return (fast, b_tilde * x3t + c_tilde * x1t, a_tilde)


def pushforward(ctx: TransformContext, point):
    """Layer vector field pushed to x~ coordinates, as d/dt~ rates.

    The layer field is (dlam/dt, dx2/dt, dx3/dt) = (F1/eps, F2, F3); the rows
    returned here are J . V with the time reversal t~ = -sign(alpha) t applied.
    """
    sys = normal_form_system(ctx.params)
    lam, x2, x3 = point
    F1 = sys.f1_surface(x2, x3, lam)
    _, F2, F3 = sys.combination((0.0, x2, x3), lam)
    _, _, y3 = to_y(ctx, point)
    _, _, y1lp, y2lp = curve_functions(ctx, y3)
    sq = math.sqrt(abs(ctx.params.alpha))
    sgn = ctx.sign_alpha
    d1 = ctx.singularity.d1
    dx1 = sq * (F1 / ctx.epsilon - y1lp * F3)
    dx2 = -sgn * d1 * (F2 - y2lp * F3)
    dx3 = -sgn * F3
    return (-sgn * dx1, -sgn * dx2, -sgn * dx3)


def sphere_directions(n: int):
    """Deterministic unit directions (Fibonacci lattice on the sphere)."""
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    dirs = []
    for k in range(n):
        z = 1.0 - (2.0 * k + 1.0) / n
        r = math.sqrt(max(0.0, 1.0 - z * z))
        phi = 2.0 * math.pi * k / golden
        dirs.append((r * math.cos(phi), r * math.sin(phi), z))
    return dirs


def equivalence_residual(ctx: TransformContext, h: float, n_dirs: int = 40) -> float:
    """Max residual of rows 1 and 2 over a sphere of radius h around the
    singularity.

    Row 1 is compared in primed form: the pushed-forward dx1~/dt~ times
    eps/sqrt|alpha| against x2~ + x1~^2 (the sqrt|alpha| absorbs the constant
    the scaling stage leaves in front of the fast row).  Row 3 is excluded:
    the model keeps only its constant term, so its defect is first order by
    construction and carries no information about the match.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    s = ctx.singularity
    sq = math.sqrt(abs(ctx.params.alpha))
    worst = 0.0
    for u in sphere_directions(n_dirs):
        point = (s.lambda_s + h * u[0], s.x2s + h * u[1], s.x3s + h * u[2])
        xt = to_x_tilde(ctx, point)          # raises TransformDomainError outside
        w1, w2, _ = pushforward(ctx, point)
        model = folded_normal_field(s.a_tilde, s.b_tilde, s.c_tilde,
                                    ctx.epsilon, xt, time="fast")
        r1 = (ctx.epsilon / sq) * w1 - model[0]
        r2 = w2 - model[1]
        worst = max(worst, abs(r1), abs(r2))
    return worst


DEFAULT_H_VALUES = (1e-1, 1e-2, 1e-3, 1e-4)
SLOPE_TARGET = 2.0
SLOPE_TOL = 0.1


def transform_check(p: TwoFoldParams, singularity: FoldedSingularity | None = None,
                    h_values=DEFAULT_H_VALUES, n_dirs: int = 40) -> dict:
    """Order study of the residual with eps coupled to the sample radius.

    Returns a report dict per checked singularity: h_values, residuals, the
    log-log slope, and pass = |slope - 2| <= 0.1.
    """
    sings = [singularity] if singularity is not None else folded_singularities(p)
    reports = []
    for s in sings:
        residuals = []
        for h in h_values:
            ctx = TransformContext(p, s, epsilon=h)
            residuals.append(equivalence_residual(ctx, h, n_dirs))
        lx = [math.log10(h) for h in h_values]
        ly = [math.log10(r) for r in residuals]
        mx = sum(lx) / len(lx)
        my = sum(ly) / len(ly)
        slope = (sum((a - mx) * (b - my) for a, b in zip(lx, ly))
                 / sum((a - mx) ** 2 for a in lx))
        reports.append({
            "params": {"a1": p.a1, "a2": p.a2, "b1": p.b1, "b2": p.b2,
                       "alpha": p.alpha},
            "lambda_s": s.lambda_s,
            "h_values": list(h_values),
            "residuals": residuals,
            "slope": slope,
            "pass": abs(slope - SLOPE_TARGET) <= SLOPE_TOL,
        })
    return {"checks": reports, "pass": all(r["pass"] for r in reports)}
