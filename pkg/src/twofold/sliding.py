"""Dynamics inside the switching surface x1 = 0.

Blowing the jump up into a layer variable lam in [-1, +1] turns the surface
dynamics into the fast subsystem lam' = f1(0, x2, x3; lam).  Its equilibria
form the sliding manifold; where an equilibrium exists the surface carries
sliding motion (x2', x3') = (f2, f3) at the pinned lam.  The branches of the
manifold lose normal hyperbolicity on the curve where both f1 = 0 and
df1/dlam = 0; for the normal form that curve has the closed form
x2 = alpha (lam-1)^2, x3 = -alpha (lam+1)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .fields import PiecewiseSmoothSystem, TwoFoldParams

__all__ = [
    "SlidingSolution", "CurveL", "DegeneracyReport", "ContractViolation",
    "sliding_lambda", "region_classify", "sliding_vector",
    "curve_L", "degeneracy_report",
    "RESIDUAL_TOL", "CLASSIFY_TOL", "CONTRACT_TOL",
]

# tolerance hierarchy: solver residuals, sign classification, precondition checks
RESIDUAL_TOL = 1e-12
CLASSIFY_TOL = 1e-12
CONTRACT_TOL = 1e-9

ATTRACTING = "attracting"
REPELLING = "repelling"


class ContractViolation(ValueError):
    pass


@dataclass(frozen=True)
class SlidingSolution:
    """One root lam of f1(0, x2, x3; lam) = 0 with the slide it generates."""

    lam: float
    slide_vector: tuple[float, float]
    stability: str                # 'attracting' iff df1/dlam < 0
    double_root: bool = False     # discriminant within tolerance of zero


@dataclass(frozen=True)
class CurveL:
    """Sampled non-hyperbolic curve: points (lam, x2, x3) with tangents."""

    points: tuple[tuple[float, float, float], ...]
    tangents: tuple[tuple[float, float, float], ...]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("lambda,x2,x3,tx_lambda,tx_x2,tx_x3\n")
            for (l, x2, x3), (t1, t2, t3) in zip(self.points, self.tangents):
                fh.write(f"{l!r},{x2!r},{x3!r},{t1!r},{t2!r},{t3!r}\n")


@dataclass(frozen=True)
class DegeneracyReport:
    is_degenerate: bool
    d2f1_dlambda2: float          # constant along the curve: -2 alpha
    alpha: float


def _slide_vector_at(sys: PiecewiseSmoothSystem, x2: float, x3: float, lam: float):
    f = sys.combination((0.0, x2, x3), lam)
    return (f[1], f[2])


def _solution(sys, x2, x3, lam, double=False) -> SlidingSolution:
    stab = ATTRACTING if sys.f1_surface_dlambda(x2, x3, lam) < 0.0 else REPELLING
    return SlidingSolution(lam, _slide_vector_at(sys, x2, x3, lam), stab, double)


def _normal_form_roots(p: TwoFoldParams, x2: float, x3: float):
    """Roots in [-1, 1] of  alpha l^2 + (x2+x3)/2 l + (x2-x3)/2 - alpha = 0,
    which is f1 = 0 expanded for the normal form."""
    a = p.alpha
    b = 0.5 * (x2 + x3)
    c = 0.5 * (x2 - x3) - p.alpha
    if a == 0.0:
        if b == 0.0:
            # c == 0 means f1 vanishes identically in lam (the degenerate
            # two-fold point); there is no isolated root to report
            return []
        return [(-c / b, False)]
    disc = b * b - 4.0 * a * c
    if disc < -RESIDUAL_TOL * max(1.0, b * b):
        return []
    if disc <= RESIDUAL_TOL * max(1.0, b * b):
        return [(-b / (2.0 * a), True)]
    s = math.sqrt(disc)
    # Citardauq on one root avoids cancellation
    if b >= 0.0:
        r1 = (-b - s) / (2.0 * a)
        r2 = (2.0 * c) / (-b - s)
    else:
        r1 = (-b + s) / (2.0 * a)
        r2 = (2.0 * c) / (-b + s)
    return [(r1, False), (r2, False)]


SCAN_SAMPLES = 200
BISECT_TOL = 1e-13


def _bisect(f, lo, hi, flo):
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_roots(sys: PiecewiseSmoothSystem, x2: float, x3: float):
    """Bracketing scan over lam in [-1, 1]; total for any in-scope system."""
    f = lambda lam: sys.f1_surface(x2, x3, lam)
    roots = []
    prev_l = -1.0
    prev_f = f(prev_l)
    for k in range(1, SCAN_SAMPLES + 1):
        cur_l = -1.0 + 2.0 * k / SCAN_SAMPLES
        cur_f = f(cur_l)
        if prev_f == 0.0:
            roots.append((prev_l, False))
        elif cur_f != 0.0 and (prev_f > 0.0) != (cur_f > 0.0):
            roots.append((_bisect(f, prev_l, cur_l, prev_f), False))
        prev_l, prev_f = cur_l, cur_f
    if prev_f == 0.0:
        roots.append((prev_l, False))
    # de-duplicate brackets that straddle the same root
    out = []
    for lam, dbl in roots:
        if not out or abs(lam - out[-1][0]) > 10 * BISECT_TOL:
            out.append((lam, dbl))
    return out


def sliding_lambda(sys: PiecewiseSmoothSystem, x2: float, x3: float) -> list[SlidingSolution]:
    """All sliding values of lam at (0, x2, x3), sorted ascending.

    An empty list is the regular answer in crossing regions.
    """
    if sys.params is not None:
        raw = _normal_form_roots(sys.params, x2, x3)
    else:
        raw = _scan_roots(sys, x2, x3)
    sols = []
    for lam, dbl in raw:
        if -1.0 - RESIDUAL_TOL <= lam <= 1.0 + RESIDUAL_TOL:
            lam = min(1.0, max(-1.0, lam))
            if abs(sys.f1_surface(x2, x3, lam)) <= max(RESIDUAL_TOL,
                                                       RESIDUAL_TOL * (abs(x2) + abs(x3))):
                sols.append(_solution(sys, x2, x3, lam, dbl))
    sols.sort(key=lambda s: s.lam)
    return sols


CROSSING = "crossing"
ATTRACTING_SLIDING = "attracting-sliding"
REPELLING_SLIDING = "repelling-sliding"
TANGENCY = "tangency"


def region_classify(sys: PiecewiseSmoothSystem, x2: float, x3: float) -> str:
    """Classify the surface point by the signs of f1 on the two sides."""
    fp = sys.f1_surface(x2, x3, 1.0)
    fm = sys.f1_surface(x2, x3, -1.0)
    if abs(fp) <= CLASSIFY_TOL or abs(fm) <= CLASSIFY_TOL:
        return TANGENCY
    if fp < 0.0 < fm:
        return ATTRACTING_SLIDING
    if fm < 0.0 < fp:
        return REPELLING_SLIDING
    return CROSSING


def sliding_vector(sys: PiecewiseSmoothSystem, x2: float, x3: float, lam: float) -> tuple[float, float]:
    """(x2', x3') on the surface at a sliding solution lam.

    Contract: lam must actually solve f1 = 0 there (|f1| <= 1e-9).
    """
    resid = sys.f1_surface(x2, x3, lam)
    if abs(resid) > CONTRACT_TOL:
        raise ContractViolation(
            f"lam={lam} is not a sliding solution at ({x2}, {x3}); |f1|={abs(resid):.3e}")
    return _slide_vector_at(sys, x2, x3, lam)


def curve_L(p: TwoFoldParams, n: int) -> CurveL:
    """Sample the non-hyperbolic curve of the normal form over lam in [-1, 1].

    Each point satisfies f1 = 0 and df1/dlam = 0; the tangent is the exact
    derivative (1, 2 alpha (lam-1), -2 alpha (lam+1)) of the closed form.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    pts = []
    tans = []
    a = p.alpha
    for k in range(n):
        lam = -1.0 + 2.0 * k / (n - 1)
        pts.append((lam, a * (lam - 1.0) ** 2, -a * (lam + 1.0) ** 2))
        tans.append((1.0, 2.0 * a * (lam - 1.0), -2.0 * a * (lam + 1.0)))
    return CurveL(tuple(pts), tuple(tans))


def degeneracy_report(p: TwoFoldParams) -> DegeneracyReport:
    """Second lam-derivative of f1 along the non-hyperbolic curve.

    It equals -2 alpha everywhere, so the layer problem is degenerate exactly
    when alpha = 0: then f1 vanishes identically in lam at the two-fold and
    every higher lam-derivative is zero as well.
    """
    return DegeneracyReport(is_degenerate=(p.alpha == 0.0),
                            d2f1_dlambda2=-2.0 * p.alpha,
                            alpha=p.alpha)
