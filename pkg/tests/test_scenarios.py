import json
import random
from fractions import Fraction

import pytest

from twofold.expr import Num
from twofold.fields import TwoFoldParams
from twofold.integrate import integrate_filippov
from twofold.scenarios import (ConfigError, builtin, builtin_names,
                               load_config, save_config, save_run,
                               scenario_to_config)
from twofold.singularities import classify_two_fold, folded_singularities


def test_builtin_names_cover_examples_and_normal_forms():
    names = builtin_names()
    for want in ("example-i", "example-ii", "example-iii",
                 "visible-nf", "invisible-nf", "mixed-nf"):
        assert want in names


def test_unknown_name_rejected():
    with pytest.raises(ValueError, match="unknown scenario"):
        builtin("example-iv")


def test_example_ii_field_values():
    sc = builtin("example-ii")
    assert sc.system.f_plus.evaluate(0.0, 1.0, 0.0) == (-1.0, 1.0, -7 / 5)


def test_example_iii_field_values():
    sc = builtin("example-iii")
    assert sc.system.f_minus.evaluate(0.0, 0.0, 0.0) == (0.0, 23 / 100, 1.0)


def test_example_coefficients_are_exact_rationals():
    # stored coefficients carry no decimal-entry drift
    sc = builtin("example-i")
    c3 = sc.system.f_plus.components[2]     # 3/10*x2 - 1/5*x2*x3 - 2/5
    nums = []

    def walk(e):
        if isinstance(e, Num):
            nums.append(e.value)
        for attr in ("arg", "left", "right", "base"):
            child = getattr(e, attr, None)
            if child is not None:
                walk(child)

    walk(c3)
    assert Fraction(3, 10) in nums and Fraction(1, 5) in nums and Fraction(2, 5) in nums
    assert sc.system.hidden.evaluate(0.0, 0.0, 0.0) == (0.2, 0.0, 0.0)


def test_normal_form_scenarios_satisfy_their_conditions():
    for name, tag in (("visible-nf", "visible"), ("invisible-nf", "invisible"),
                      ("mixed-nf", "mixed")):
        sc = builtin(name)
        flavor = classify_two_fold(sc.params)
        assert flavor.tag == tag
        assert flavor.determinacy_breaking
        assert sc.params.alpha == 0.2


def test_invisible_nf_classification():
    sc = builtin("invisible-nf")
    f = classify_two_fold(sc.params)
    assert f.tag == "invisible" and f.determinacy_breaking


def test_mixed_nf_has_saddle_node_pair():
    sc = builtin("mixed-nf")
    pair = folded_singularities(sc.params)
    assert len(pair) == 2
    assert sorted(s.folded_type for s in pair) == ["folded-node", "folded-saddle"]
    assert pair[0].det * pair[1].det < 0


# ------------------------------------------------------------ config i/o

def test_params_only_config_expands_to_normal_form():
    sc = load_config({"params": {"a1": 1, "a2": 1, "b1": -2, "b2": -2, "alpha": 0.2}})
    assert sc.params == TwoFoldParams(1, 1, -2.0, -2.0, 0.2)
    assert sc.system.f_plus.evaluate(0.0, 3.0, 0.0) == (-3.0, 1.0, -2.0)


def test_missing_f_minus_is_located():
    with pytest.raises(ConfigError) as err:
        load_config({"f_plus": ["0", "0", "0"]})
    assert err.value.pointer == "/f_minus"


def test_both_sources_rejected():
    with pytest.raises(ConfigError) as err:
        load_config({"f_plus": ["0", "0", "0"], "f_minus": ["0", "0", "0"],
                     "params": {"a1": 1, "a2": 1, "b1": 0, "b2": 0, "alpha": 0}})
    assert err.value.pointer == "/params"


def test_bad_expression_is_located():
    with pytest.raises(ConfigError) as err:
        load_config({"f_plus": ["0", "0", "x4"], "f_minus": ["0", "0", "0"]})
    assert err.value.pointer == "/f_plus"


def test_bad_sim_options_are_located():
    base = {"params": {"a1": 1, "a2": 1, "b1": 0, "b2": 0, "alpha": 0.1}}
    with pytest.raises(ConfigError) as err:
        load_config({**base, "sim": {"epsilon": -1}})
    assert err.value.pointer == "/sim/epsilon"
    with pytest.raises(ConfigError) as err:
        load_config({**base, "sim": {"x0": [1, 2]}})
    assert err.value.pointer == "/sim/x0"
    with pytest.raises(ConfigError) as err:
        load_config({**base, "sim": {"sigmoid": "smoothstep"}})
    assert err.value.pointer == "/sim/sigmoid"
    with pytest.raises(ConfigError) as err:
        load_config({**base, "sim": {"dt": 0.1}})
    assert err.value.pointer == "/sim/dt"


def test_round_trip_is_exact(tmp_path):
    for name in builtin_names():
        sc = builtin(name)
        path = tmp_path / f"{name}.json"
        save_config(sc, path)
        back = load_config(path)
        assert back.name == sc.name
        assert back.epsilon == sc.epsilon
        assert back.t_end == sc.t_end
        assert back.x0 == sc.x0
        assert back.sigmoid == sc.sigmoid
        assert back.system.f_plus == sc.system.f_plus
        assert back.system.f_minus == sc.system.f_minus
        assert back.system.hidden == sc.system.hidden
        assert back.params == sc.params


def test_config_echo_evaluates_identically():
    sc = builtin("example-i")
    doc = scenario_to_config(sc)
    again = load_config(doc)
    rng = random.Random(123)
    for _ in range(100):
        x = tuple(rng.uniform(-2, 2) for _ in range(3))
        for fld in ("f_plus", "f_minus", "hidden"):
            a = getattr(sc.system, fld)(x)
            b = getattr(again.system, fld)(x)
            for u, v in zip(a, b):
                assert u == v or abs(u - v) <= 1e-14 * abs(u)


def test_save_run_writes_events_file(tmp_path):
    sc = builtin("invisible-nf")
    traj = integrate_filippov(sc.system, (0.1, 1.0, -1.0), (0.0, 0.3))
    out = tmp_path / "run.csv"
    save_run(traj, out)
    assert out.exists()
    assert (tmp_path / "run.events.csv").exists()


def test_config_from_file_object(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"name": "z",
                                "params": {"a1": -1, "a2": 1, "b1": 0.5,
                                           "b2": 0.25, "alpha": 0.3}}))
    with open(path) as fh:
        sc = load_config(fh)
    assert sc.name == "z"
    assert sc.params.alpha == 0.3
