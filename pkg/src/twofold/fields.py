"""Smooth and piecewise-smooth vector fields on R^3 with a switching surface
at x1 = 0.

A piecewise-smooth system holds two smooth fields f_plus (active for x1 > 0)
and f_minus (x1 < 0) together with a hidden field g that only acts inside the
switching layer.  Off the surface the combined field

    f(x; lam) = (1+lam)/2 f_plus(x) + (1-lam)/2 f_minus(x) + (1-lam^2) g(x)

with lam = sign(x1) reproduces the two half-space fields exactly: the convex
weights are exactly 0/1 at lam = +-1 and the (1-lam^2) factor kills g there.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expr, Var, Neg, num, parse_expr

__all__ = [
    "SmoothField", "PiecewiseSmoothSystem", "TwoFoldParams",
    "parse_field", "field_from_exprs", "eval_combination", "eval_piecewise",
    "normal_form_system",
]


class SmoothField:
    """Three expression trees plus a compiled evaluator.

    Immutable after construction; evaluation is pure and reentrant.
    """

    __slots__ = ("components", "_fn")

    def __init__(self, components: tuple[Expr, Expr, Expr]):
        self.components = tuple(components)
        src = "lambda x1, x2, x3: ({}, {}, {})".format(
            *(c.source() for c in self.components))
        self._fn = eval(src, {"__builtins__": {}})  # source generated from our own AST

    def __call__(self, x) -> tuple[float, float, float]:
        return self._fn(x[0], x[1], x[2])

    def evaluate(self, x1: float, x2: float, x3: float) -> tuple[float, float, float]:
        return self._fn(x1, x2, x3)

    @property
    def fn(self):
        """Compiled (x1, x2, x3) -> (f1, f2, f3); the fast path for integrators."""
        return self._fn

    def expressions(self) -> tuple[str, str, str]:
        """Canonical printed form; reparsing gives an identical tree."""
        return tuple(str(c) for c in self.components)

    def __repr__(self):
        return "SmoothField({!r}, {!r}, {!r})".format(*self.expressions())

    def __eq__(self, other):
        return isinstance(other, SmoothField) and self.components == other.components

    def __hash__(self):
        return hash(self.components)


def parse_field(expr1: str, expr2: str, expr3: str) -> SmoothField:
    """Build a field from three expression strings in x1, x2, x3."""
    return SmoothField(tuple(parse_expr(e) for e in (expr1, expr2, expr3)))


def field_from_exprs(c1: Expr, c2: Expr, c3: Expr) -> SmoothField:
    return SmoothField((c1, c2, c3))


ZERO_FIELD_EXPRS = ("0", "0", "0")


@dataclass(frozen=True)
class TwoFoldParams:
    """Constants of the local normal form: a1, a2 in {-1, +1} set the fold
    curvatures, b1, b2 the transversal drift, alpha the hidden-term size."""

    a1: int
    a2: int
    b1: float
    b2: float
    alpha: float

    def __post_init__(self):
        if self.a1 not in (-1, 1) or self.a2 not in (-1, 1):
            raise ValueError(f"a1 and a2 must be +-1, got ({self.a1}, {self.a2})")


class PiecewiseSmoothSystem:
    """Pair (f_plus, f_minus) with hidden field g; switching coordinate is x1.

    `params` is set when the system is a normal-form instance, which lets
    downstream code use closed forms (sliding roots, two-fold detection).
    """

    __slots__ = ("f_plus", "f_minus", "hidden", "params")
    switching_index = 1

    def __init__(self, f_plus: SmoothField, f_minus: SmoothField,
                 hidden: SmoothField | None = None,
                 params: TwoFoldParams | None = None):
        self.f_plus = f_plus
        self.f_minus = f_minus
        self.hidden = hidden if hidden is not None else parse_field(*ZERO_FIELD_EXPRS)
        self.params = params

    def combination(self, x, lam: float) -> tuple[float, float, float]:
        """Combined field at x for lam in [-1, +1]."""
        if not -1.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [-1, 1], got {lam}")
        if lam == 1.0:
            return self.f_plus(x)
        if lam == -1.0:
            return self.f_minus(x)
        p = self.f_plus(x)
        m = self.f_minus(x)
        g = self.hidden(x)
        wp = 0.5 * (1.0 + lam)
        wm = 0.5 * (1.0 - lam)
        wh = 1.0 - lam * lam
        return (wp * p[0] + wm * m[0] + wh * g[0],
                wp * p[1] + wm * m[1] + wh * g[1],
                wp * p[2] + wm * m[2] + wh * g[2])

    def piecewise(self, x) -> tuple[float, float, float]:
        """Half-space field by the sign of x1; x1 = 0 is ambiguous and rejected."""
        if x[0] > 0.0:
            return self.f_plus(x)
        if x[0] < 0.0:
            return self.f_minus(x)
        raise ValueError("x1 = 0 lies on the switching surface; use the sliding layer")

    # -- surface helpers used by the sliding layer ------------------------

    def f1_surface(self, x2: float, x3: float, lam: float) -> float:
        """First component of the combination at (0, x2, x3)."""
        wp = 0.5 * (1.0 + lam)
        wm = 0.5 * (1.0 - lam)
        return (wp * self.f_plus.fn(0.0, x2, x3)[0]
                + wm * self.f_minus.fn(0.0, x2, x3)[0]
                + (1.0 - lam * lam) * self.hidden.fn(0.0, x2, x3)[0])

    def f1_surface_dlambda(self, x2: float, x3: float, lam: float) -> float:
        """d f1/d lambda at (0, x2, x3); exact since g does not depend on lambda."""
        return (0.5 * (self.f_plus.fn(0.0, x2, x3)[0] - self.f_minus.fn(0.0, x2, x3)[0])
                - 2.0 * lam * self.hidden.fn(0.0, x2, x3)[0])

    def __repr__(self):
        return (f"PiecewiseSmoothSystem(f_plus={self.f_plus!r}, "
                f"f_minus={self.f_minus!r}, hidden={self.hidden!r})")


def eval_combination(sys: PiecewiseSmoothSystem, x, lam: float):
    return sys.combination(x, lam)


def eval_piecewise(sys: PiecewiseSmoothSystem, x):
    return sys.piecewise(x)


def normal_form_system(p: TwoFoldParams) -> PiecewiseSmoothSystem:
    """Local normal form: f_plus = (-x2, a1, b1), f_minus = (x3, b2, a2),
    hidden g = (alpha, 0, 0)."""
    f_plus = field_from_exprs(Neg(Var(2)), num(p.a1), num(p.b1))
    f_minus = field_from_exprs(Var(3), num(p.b2), num(p.a2))
    hidden = field_from_exprs(num(p.alpha), num(0), num(0))
    return PiecewiseSmoothSystem(f_plus, f_minus, hidden, params=p)
