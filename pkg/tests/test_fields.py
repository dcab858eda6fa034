import random

import pytest

from twofold.fields import (PiecewiseSmoothSystem, TwoFoldParams,
                            eval_combination, eval_piecewise,
                            normal_form_system, parse_field)


def test_parse_field_example_system():
    f = parse_field("-x2", "1+x1", "-7/5")
    assert f.evaluate(0.0, 1.0, 0.0) == (-1.0, 1.0, -1.4)


def test_parse_field_zero():
    z = parse_field("0", "0", "0")
    assert z.evaluate(3.0, -2.0, 7.0) == (0.0, 0.0, 0.0)


def test_parse_field_direct_substitution():
    f = parse_field("x1*x2", "-x3", "2")
    assert f.evaluate(1.0, 2.0, 3.0) == (2.0, -3.0, 2.0)


def _random_system(rng):
    coeffs = lambda: "+".join(
        f"{rng.randint(-4, 4)}/{rng.randint(1, 5)}*{v}" for v in ("x1", "x2", "x3"))
    return PiecewiseSmoothSystem(
        parse_field(coeffs(), coeffs(), coeffs()),
        parse_field(coeffs(), coeffs(), coeffs()),
        parse_field(coeffs(), coeffs(), coeffs()))


def test_combination_endpoints_recover_sides_exactly():
    rng = random.Random(7)
    for _ in range(50):
        sys = _random_system(rng)
        x = tuple(rng.uniform(-2, 2) for _ in range(3))
        assert eval_combination(sys, x, 1.0) == sys.f_plus(x)
        assert eval_combination(sys, x, -1.0) == sys.f_minus(x)


def test_combination_midpoint_includes_hidden():
    rng = random.Random(8)
    for _ in range(20):
        sys = _random_system(rng)
        x = tuple(rng.uniform(-2, 2) for _ in range(3))
        p, m, g = sys.f_plus(x), sys.f_minus(x), sys.hidden(x)
        got = eval_combination(sys, x, 0.0)
        for i in range(3):
            assert got[i] == pytest.approx((p[i] + m[i]) / 2 + g[i], abs=1e-15)


def test_combination_rejects_lambda_outside_range():
    sys = _random_system(random.Random(9))
    with pytest.raises(ValueError):
        eval_combination(sys, (0.0, 0.0, 0.0), 1.5)


def test_piecewise_uses_sign_of_x1():
    rng = random.Random(10)
    sys = _random_system(rng)
    xp = (0.5, 1.0, -1.0)
    xm = (-0.5, 1.0, -1.0)
    assert eval_piecewise(sys, xp) == sys.f_plus(xp)
    assert eval_piecewise(sys, xm) == sys.f_minus(xm)
    with pytest.raises(ValueError):
        eval_piecewise(sys, (0.0, 1.0, 1.0))


def test_piecewise_ignores_hidden_term():
    # the (1 - lam^2) factor removes g off the surface
    rng = random.Random(11)
    for _ in range(30):
        sys = _random_system(rng)
        bare = PiecewiseSmoothSystem(sys.f_plus, sys.f_minus)
        x = (rng.choice([-1, 1]) * rng.uniform(1e-9, 2), rng.uniform(-2, 2),
             rng.uniform(-2, 2))
        assert eval_piecewise(sys, x) == eval_piecewise(bare, x)


def test_normal_form_fields():
    p = TwoFoldParams(1, 1, -2.0, -2.0, 0.2)
    sys = normal_form_system(p)
    # hand-substituted midpoint: first component -1/2*1 + 1/2*1 + 0.2
    got = eval_combination(sys, (0.0, 1.0, 1.0), 0.0)
    assert got[0] == pytest.approx(0.2, abs=1e-15)

    sys2 = normal_form_system(TwoFoldParams(-1, -1, 0.0, 0.0, 0.0))
    assert eval_combination(sys2, (0.0, 3.0, 5.0), 1.0) == (-3.0, -1.0, 0.0)

    sys3 = normal_form_system(TwoFoldParams(1, -1, 1.0, 1.0, 0.0))
    assert eval_combination(sys3, (0.0, 0.0, 1.0), -1.0) == (1.0, 1.0, -1.0)


def test_normal_form_piecewise_example():
    sys = normal_form_system(TwoFoldParams(1, 1, 0.0, 0.0, 0.0))
    assert eval_piecewise(sys, (-1.0, 2.0, 3.0)) == (3.0, 0.0, 1.0)


def test_normal_form_reproduces_combination_componentwise():
    rng = random.Random(12)
    for _ in range(50):
        p = TwoFoldParams(rng.choice([-1, 1]), rng.choice([-1, 1]),
                          rng.uniform(-3, 3), rng.uniform(-3, 3),
                          rng.uniform(-1, 1))
        sys = normal_form_system(p)
        lam = rng.uniform(-1, 1)
        x = (0.0, rng.uniform(-2, 2), rng.uniform(-2, 2))
        wp, wm, wh = (1 + lam) / 2, (1 - lam) / 2, 1 - lam * lam
        expect = (wp * -x[1] + wm * x[2] + wh * p.alpha,
                  wp * p.a1 + wm * p.b2,
                  wp * p.b1 + wm * p.a2)
        got = eval_combination(sys, x, lam)
        for a, b in zip(got, expect):
            assert a == pytest.approx(b, abs=1e-14)


def test_params_validation():
    with pytest.raises(ValueError):
        TwoFoldParams(2, 1, 0.0, 0.0, 0.1)


def test_field_expression_strings_round_trip():
    f = parse_field("-x2+1/10*x1", "x1-6/5", "x1-2")
    again = parse_field(*f.expressions())
    assert again == f
