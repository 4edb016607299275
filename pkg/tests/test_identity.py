import json
import math
import warnings

import pytest

import oracles
from contour_forge.contour import Contour, HalfEllipse, Line, make_family
from contour_forge.errors import ConditioningLimit, EndpointMismatch, InputError
from contour_forge.expr import EntiretyTag, parse_expr
from contour_forge.identity import (
    RLadder, arc_vanishing_check, builtin_catalog, get_record, limit_study, path_equivalence,
    small_circle_check, strange_vs_segment,
)
from contour_forge.quadrature import Tolerance

GAUSS = parse_expr("exp(-z^2)")
SCHEMA = {"identity", "orientation", "R_values", "residuals", "conditioning_floors", "limit_estimate",
          "target", "limit_residual", "pass", "notes", "wall_time_ms"}


def check_pass_invariant(rep):
    if rep.passed:
        for res, tol in zip(rep.residuals, rep.tolerances):
            if tol is not None:
                assert res <= tol
        if rep.limit_tol is not None:
            assert rep.limit_residual <= rep.limit_tol


# ------------------------------------------------------- catalog


def test_catalog_contents():
    cat = builtin_catalog()
    assert [r.name for r in cat] == ["eq1_gaussian_semicircle", "eq3_sinc_semicircle", "parabola_gaussian",
                                     "small_circle_sinc_exp", "jordan_arc_exp"]
    assert get_record("eq1_gaussian_semicircle").target == oracles.SQRT_PI
    assert get_record("eq3_sinc_semicircle").target == math.pi
    assert get_record("small_circle_sinc_exp").target == -1j * math.pi
    assert get_record("jordan_arc_exp").target == 0
    assert all(r.notes for r in cat)
    with pytest.raises(InputError):
        get_record("nope")


# ------------------------------------------------ path equivalence


def test_parabola_vs_segment():
    a = Contour((Line(-2, 2),))
    b = make_family("parabola_closure")(2).reverse()
    rep = path_equivalence(GAUSS, a, b, entirety=EntiretyTag.ENTIRE)
    assert rep.passed and rep.residuals[0] < 1e-8


def test_semicircle_vs_segment():
    a = Contour((Line(-3, 3),))
    b = make_family("semicircle_closure")(3).reverse()
    rep = path_equivalence(GAUSS, a, b, entirety=EntiretyTag.ENTIRE)
    assert rep.passed and rep.residuals[0] < 1e-10
    assert abs(rep.values[0] - oracles.gauss_segment(3)) < 1e-10


def test_cubic_half_ellipse_vs_segment():
    a = Contour((Line(-1, 1),))
    b = Contour((HalfEllipse(0, 1, 2, 0, math.pi),)).reverse()
    rep = path_equivalence(parse_expr("z^3"), a, b, entirety=EntiretyTag.ENTIRE)
    assert rep.residuals[0] < 1e-12


def test_endpoint_mismatch():
    with pytest.raises(EndpointMismatch):
        path_equivalence(GAUSS, Line(-2, 2), make_family("parabola_closure")(2), entirety=EntiretyTag.ENTIRE)


def test_unknown_entirety_warns():
    with pytest.warns(UserWarning):
        path_equivalence(GAUSS, Line(-1, 1), make_family("semicircle_closure")(1).reverse())


def test_path_equivalence_conditioning_guard():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ConditioningLimit):
            path_equivalence(GAUSS, Line(-4, 4), make_family("parabola_closure")(4).reverse())


# ------------------------------------------------ strange vs segment


def test_sinc_finite_R():
    rec = get_record("eq3_sinc_semicircle")
    for R, tol in ((5.0, 1e-8), (2.0, 1e-10)):
        rep = strange_vs_segment(rec, R)
        strange, segment = rep.values
        assert abs(-strange.real - oracles.sinc_segment(R)) < tol
        assert abs(strange.imag) < tol
        assert rep.passed and rep.residuals[0] < tol
        check_pass_invariant(rep)


def test_gaussian_finite_R():
    rep = strange_vs_segment(get_record("eq1_gaussian_semicircle"), 3.0)
    strange, _ = rep.values
    assert abs(strange.real + oracles.gauss_segment(3.0)) < 1e-8
    assert abs(strange.imag) < 1e-8
    assert rep.passed
    assert any("printed form" in n and "(match)" in n for n in rep.notes)


def test_parabola_finite_R_and_notes():
    rep = strange_vs_segment(get_record("parabola_gaussian"), 2.0)
    assert rep.passed and rep.residuals[0] < 1e-8
    assert any("MISMATCH" in n for n in rep.notes)
    assert any("derived form" in n and "(match)" in n for n in rep.notes)


@pytest.mark.parametrize("name, R", [("parabola_gaussian", 4.0), ("eq1_gaussian_semicircle", 9.0),
                                     ("parabola_gaussian", 3.0)])
def test_conditioning_limit(name, R):
    with pytest.raises(ConditioningLimit) as info:
        strange_vs_segment(get_record(name), R)
    assert info.value.floor > 1e-6 and "floor" in str(info.value)


def test_floors_non_decreasing_in_R():
    for name in ("eq1_gaussian_semicircle", "eq3_sinc_semicircle", "parabola_gaussian"):
        rec = get_record(name)
        floors = [strange_vs_segment(rec, R).conditioning_floors[0] for R in (0.5, 1.0, 1.5, 2.0)]
        assert floors == sorted(floors)


def test_strange_rejects_non_closure_records():
    with pytest.raises(InputError):
        strange_vs_segment(get_record("jordan_arc_exp"), 3.0)


# ---------------------------------------------------- limits


def test_gaussian_limit():
    rep = limit_study(get_record("eq1_gaussian_semicircle"), RLadder.explicit(range(1, 7)))
    assert rep.passed and rep.ladder_converged
    assert abs(rep.limit_estimate - oracles.SQRT_PI) < 1e-10
    check_pass_invariant(rep)


def test_sinc_limit():
    rec = get_record("eq3_sinc_semicircle")
    rep = limit_study(rec, RLadder.explicit([25, 50, 100, 200], rec.ladder_tol))
    assert rep.passed and abs(rep.limit_estimate - math.pi) < 1e-2
    assert abs(rep.values[-1] - oracles.sinc_segment(200)) < 1e-9


def test_truncated_ladder_not_converged():
    rep = limit_study(get_record("eq1_gaussian_semicircle"), RLadder.explicit([0.1, 0.2]))
    assert not rep.passed and rep.ladder_converged is False
    assert "LadderNotConverged" in rep.notes


def test_limit_consistent_with_finite_R():
    rec = get_record("eq1_gaussian_semicircle")
    lim = limit_study(rec, RLadder.explicit([1, 2, 3]))
    fin = strange_vs_segment(rec, 3.0)
    assert abs(lim.values[-1] + fin.values[0]) <= fin.tolerances[0]


def test_ladder_parsing():
    assert RLadder.parse("1:6:1").values == (1, 2, 3, 4, 5, 6)
    assert RLadder.parse("25,50,100,200").values == (25, 50, 100, 200)
    assert RLadder.parse("0.5:1.5:0.5").values == (0.5, 1.0, 1.5)
    assert RLadder.geometric(1, 2, 4).values == (1, 2, 4, 8)
    for bad in ("", "3,2", "1:2:0", "a,b", "-1,2"):
        with pytest.raises(InputError):
            RLadder.parse(bad)


# ---------------------------------------------- small circle / arc


def test_small_circle():
    rep = small_circle_check([1e-2, 1e-3, 1e-4])
    assert rep.passed
    for eps, res in zip(rep.R_values, rep.residuals):
        assert res < 5 * eps
    for a, b in zip(rep.residuals, rep.residuals[1:]):
        assert 8 <= a / b <= 12


def test_small_circle_tiny_eps():
    rep = small_circle_check([1e-5, 1e-6])
    assert rep.residuals[-1] < 5e-6


def test_small_circle_input_checks():
    with pytest.raises(InputError):
        small_circle_check([1e-3, 1e-2])
    with pytest.raises(InputError):
        small_circle_check([2.0])


def test_arc_vanishing():
    rep = arc_vanishing_check([1, 10, 50, 100])
    assert rep.passed
    assert rep.residuals[0] <= 1.5 * math.pi
    assert rep.residuals[1] <= 0.48 and rep.residuals[3] <= 0.048
    with pytest.raises(InputError):
        arc_vanishing_check([0.5])


# ------------------------------------------------------ reports


def test_report_json_schema():
    rep = strange_vs_segment(get_record("eq3_sinc_semicircle"), 5.0)
    d = rep.to_json_dict()
    assert set(d) == SCHEMA
    assert set(d["limit_estimate"]) == {"re", "im"} and isinstance(d["pass"], bool)
    json.dumps(d)


def test_reports_are_deterministic():
    rec = get_record("parabola_gaussian")
    a, b = strange_vs_segment(rec, 2.0), strange_vs_segment(rec, 2.0)
    assert a.values == b.values and a.residuals == b.residuals


def test_tolerance_override_respected():
    rep = strange_vs_segment(get_record("eq3_sinc_semicircle"), 2.0, Tolerance(1e-13, 0))
    assert rep.tolerances == [1e-13] and rep.passed
