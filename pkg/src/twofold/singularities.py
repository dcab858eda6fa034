"""Two-fold flavours, folded singularities and their classification.

The layer problem of the normal form pins folded singularities at parameter
values lam_s solving

    (a1 - a2 + b1 - b2) l^2 + 2 (a1 + a2) l + (a1 - a2) - (b1 - b2) = 0

restricted to [-1, +1]; working with the cleared-denominator quadratic keeps
the operation total at b1 = b2 (where the leading coefficient vanishes and
the equation degrades to a linear one).  Each root carries the derived
constants of the local slow-fast model

    eps x1~' = x2~ + x1~^2,   x2~' = b~ x3~ + c~ x1~,   x3~' = a~

whose projection onto the critical manifold x2~ = -x1~^2 is, after dropping
the singular prefactor 1/(-2 x1~), the linear map [[c~, b~], [-2 a~, 0]]:
trace c~, determinant 2 a~ b~, eigenvalues (c~ +- sqrt(c~^2 - 8 a~ b~))/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .fields import TwoFoldParams

__all__ = [
    "TwoFoldFlavor", "FoldedSingularity", "FoldedConstants",
    "AlphaZeroError", "BoundarySingularityError", "DegenerateTypeError",
    "PrefactorSingularError",
    "classify_two_fold", "folded_singularities", "folded_constants",
    "folded_type", "slow_projection_field", "singularity_lambdas",
]

ALPHA_FLOOR = 1e-9
BOUNDARY_TOL = 1e-9

VISIBLE = "visible"
INVISIBLE = "invisible"
MIXED = "mixed"

FOLDED_SADDLE = "folded-saddle"
FOLDED_NODE = "folded-node"
FOLDED_FOCUS = "folded-focus"

CANARD = "canard"
FAUX_CANARD = "faux-canard"
NEUTRAL = "neutral"


class AlphaZeroError(ValueError):
    """Folded-singularity constants need a nonzero hidden coefficient."""


class BoundarySingularityError(ValueError):
    """lam_s too close to -1; the derived constants divide by 1 + lam_s."""


class DegenerateTypeError(ValueError):
    """Classification boundary hit exactly (a~ b~ = 0 or 8 a~ b~ = c~^2)."""


class PrefactorSingularError(ValueError):
    """Slow projection requested on the fold line x1~ = 0."""


@dataclass(frozen=True)
class TwoFoldFlavor:
    tag: str                      # visible / invisible / mixed
    determinacy_breaking: bool


def classify_two_fold(p: TwoFoldParams) -> TwoFoldFlavor:
    """Flavour by the fold curvatures, determinacy breaking by the drift.

    The mixed-case condition is stated for the orientation a1 = -1, a2 = +1;
    the opposite orientation is its mirror under the relabelling
    (x1, x2, x3) -> (-x1, x3, x2), which swaps (a1, b1) with (a2, b2).
    """
    a1, a2, b1, b2 = p.a1, p.a2, p.b1, p.b2
    if a1 == a2 == -1:
        tag = VISIBLE
        db = (b1 < 0.0) or (b2 < 0.0) or (b1 * b2 < 1.0)
    elif a1 == a2 == 1:
        tag = INVISIBLE
        db = (b1 < 0.0) and (b2 < 0.0) and (b1 * b2 > 1.0)
    else:
        tag = MIXED
        c1, c2 = (b1, b2) if (a1, a2) == (-1, 1) else (b2, b1)
        db = ((c1 < 0.0 < c2) and (c1 * c2 < -1.0)) or \
             ((c1 + c2 < 0.0) and (c1 - c2 < -2.0))
    return TwoFoldFlavor(tag, db)


def singularity_lambdas(p: TwoFoldParams) -> list[float]:
    """Roots lam_s in [-1, +1] of the existence quadratic, ascending.

    For a1 = a2 there is exactly one; for mixed curvatures there are two when
    the oriented drift difference exceeds 2 in magnitude and none otherwise
    (at the exact threshold the pair merges into a double root, returned once).
    """
    a1, a2, b1, b2 = p.a1, p.a2, p.b1, p.b2
    A = (a1 - a2) + (b1 - b2)
    B = 2.0 * (a1 + a2)
    C = (a1 - a2) - (b1 - b2)
    if A == 0.0:
        roots = [-C / B] if B != 0.0 else []
    else:
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            roots = []
        elif disc == 0.0:
            roots = [-B / (2.0 * A)]
        else:
            s = math.sqrt(disc)
            if B >= 0.0:
                r1 = (-B - s) / (2.0 * A)
                r2 = (2.0 * C) / (-B - s)
            else:
                r1 = (-B + s) / (2.0 * A)
                r2 = (2.0 * C) / (-B + s)
            roots = [r1, r2]
    return sorted(l + 0.0 for l in roots if -1.0 <= l <= 1.0)   # +0.0 folds -0.0


@dataclass(frozen=True)
class FoldedConstants:
    f2s: float
    f3s: float
    c: float
    b: float
    d1: float
    a_tilde: float
    b_tilde: float
    c_tilde: float


def folded_constants(p: TwoFoldParams, lambda_s: float) -> FoldedConstants:
    """Derived constants of the slow-fast model at one folded singularity.

    With f2s, f3s the slow components at the singularity and f2l, f3l their
    lam-derivatives:

        c  = f2l - (1-ls)/(1+ls) f3l
        c~ = -((ls+1) f2l + (ls-1) f3l) / (2 sqrt|alpha|)
        b~ = -(f2s + f3s - 2 c~ sqrt|alpha|) / (4 |alpha| (1 + ls))
        b  = 2 |alpha| b~ / (1 + ls)
        a~ = f3s,   d1 = -(1 + ls)/2
    """
    if abs(p.alpha) <= ALPHA_FLOOR:
        raise AlphaZeroError(f"|alpha| = {abs(p.alpha)} below {ALPHA_FLOOR}")
    if abs(1.0 + lambda_s) <= BOUNDARY_TOL:
        raise BoundarySingularityError(f"lam_s = {lambda_s} within {BOUNDARY_TOL} of -1")
    ls = lambda_s
    a1, a2, b1, b2 = p.a1, p.a2, p.b1, p.b2
    f2s = 0.5 * (a1 + b2) + 0.5 * (a1 - b2) * ls
    f3s = 0.5 * (b1 + a2) + 0.5 * (b1 - a2) * ls
    f2l = 0.5 * (a1 - b2)
    f3l = 0.5 * (b1 - a2)
    sq = math.sqrt(abs(p.alpha))
    c = f2l - (1.0 - ls) / (1.0 + ls) * f3l
    c_t = -((ls + 1.0) * f2l + (ls - 1.0) * f3l) / (2.0 * sq)
    b_t = -(f2s + f3s - 2.0 * c_t * sq) / (4.0 * abs(p.alpha) * (1.0 + ls))
    b = 2.0 * abs(p.alpha) * b_t / (1.0 + ls)
    d1 = -0.5 * (1.0 + ls)
    return FoldedConstants(f2s, f3s, c, b, d1, f3s, b_t, c_t)


def folded_type(a_tilde: float, b_tilde: float, c_tilde: float):
    """Classify by the projected slow flow: saddle if a~ b~ < 0, node if
    0 < 8 a~ b~ < c~^2, focus if c~^2 < 8 a~ b~.  Exact boundaries are not
    classified.  Returns (type, canard_flag, eigenvalues, trace, det)."""
    prod = a_tilde * b_tilde
    det = 2.0 * prod
    disc = c_tilde * c_tilde - 8.0 * prod
    if prod == 0.0 or disc == 0.0:
        raise DegenerateTypeError(
            f"classification boundary: a~ b~ = {prod}, c~^2 - 8 a~ b~ = {disc}")
    if prod < 0.0:
        kind = FOLDED_SADDLE
    elif disc > 0.0:
        kind = FOLDED_NODE
    else:
        kind = FOLDED_FOCUS
    root = cmath.sqrt(complex(disc, 0.0))
    eigenvalues = (0.5 * (c_tilde + root), 0.5 * (c_tilde - root))
    if c_tilde > 0.0:
        canard = CANARD
    elif c_tilde < 0.0:
        canard = FAUX_CANARD
    else:
        canard = NEUTRAL
    return kind, canard, eigenvalues, c_tilde, det


@dataclass(frozen=True)
class FoldedSingularity:
    """Location, derived constants and type of one folded singularity."""

    lambda_s: float
    x2s: float
    x3s: float
    f2s: float
    f3s: float
    c: float
    b: float
    d1: float
    a_tilde: float
    b_tilde: float
    c_tilde: float
    folded_type: str              # folded-saddle / folded-node / folded-focus / degenerate
    canard: str                   # canard / faux-canard / neutral (slow-fast model time)
    canard_original_time: str     # same flag mapped back through t~ = -sign(alpha) t
    eigenvalues: tuple[complex, complex]
    trace: float
    det: float

    def to_json_dict(self) -> dict:
        return {
            "lambda_s": self.lambda_s, "x2s": self.x2s, "x3s": self.x3s,
            "f2s": self.f2s, "f3s": self.f3s, "c": self.c, "b": self.b,
            "d1": self.d1, "a_tilde": self.a_tilde, "b_tilde": self.b_tilde,
            "c_tilde": self.c_tilde, "type": self.folded_type,
            "canard": self.canard,
            "canard_original_time": self.canard_original_time,
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "trace": self.trace, "det": self.det,
        }


_FLIP = {CANARD: FAUX_CANARD, FAUX_CANARD: CANARD, NEUTRAL: NEUTRAL}


def _build_singularity(p: TwoFoldParams, ls: float) -> FoldedSingularity:
    k = folded_constants(p, ls)
    try:
        kind, canard, eig, trace, det = folded_type(k.a_tilde, k.b_tilde, k.c_tilde)
    except DegenerateTypeError:
        kind, canard = "degenerate", NEUTRAL if k.c_tilde == 0.0 else (
            CANARD if k.c_tilde > 0.0 else FAUX_CANARD)
        disc = k.c_tilde ** 2 - 8.0 * k.a_tilde * k.b_tilde
        root = cmath.sqrt(complex(disc, 0.0))
        eig = (0.5 * (k.c_tilde + root), 0.5 * (k.c_tilde - root))
        trace, det = k.c_tilde, 2.0 * k.a_tilde * k.b_tilde
    # the model lives in reversed time when alpha > 0
    canard_orig = _FLIP[canard] if p.alpha > 0 else canard
    return FoldedSingularity(
        lambda_s=ls,
        x2s=p.alpha * (ls - 1.0) ** 2,
        x3s=-p.alpha * (ls + 1.0) ** 2,
        f2s=k.f2s, f3s=k.f3s, c=k.c, b=k.b, d1=k.d1,
        a_tilde=k.a_tilde, b_tilde=k.b_tilde, c_tilde=k.c_tilde,
        folded_type=kind, canard=canard, canard_original_time=canard_orig,
        eigenvalues=eig, trace=trace, det=det)


def folded_singularities(p: TwoFoldParams) -> list[FoldedSingularity]:
    """All folded singularities of the normal form with hidden coefficient
    alpha, ascending in lam_s.  Empty when the existence quadratic has no
    admissible root (the focal-type sliding portraits)."""
    if abs(p.alpha) <= ALPHA_FLOOR:
        raise AlphaZeroError(f"|alpha| = {abs(p.alpha)} below {ALPHA_FLOOR}")
    return [_build_singularity(p, ls) for ls in singularity_lambdas(p)]


def slow_projection_field(a_tilde: float, b_tilde: float, c_tilde: float,
                          x1t: float, x3t: float):
    """Projected slow flow on the critical manifold at (x1~, x3~).

    Returns (linear_part, prefactor) with linear_part the image of
    [[c~, b~], [-2 a~, 0]] and prefactor 1/(-2 x1~); dropping the prefactor
    desingularizes the flow, reversing time on the repelling branch.
    """
    if x1t == 0.0:
        raise PrefactorSingularError("projection undefined on the fold line x1~ = 0")
    linear = (c_tilde * x1t + b_tilde * x3t, -2.0 * a_tilde * x1t)
    return linear, 1.0 / (-2.0 * x1t)
