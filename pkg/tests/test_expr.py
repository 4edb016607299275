import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contour_forge.errors import ArityError, DivisionNearZero, ExprSyntaxError, UnboundVariable, UnknownIdentifier
from contour_forge.expr import (
    I, Add, Const, Cos, Cosh, Div, Exp, IntPow, Mul, Neg, Sin, Sinc, Sinh, Var, depth, eval_expr,
    format_expr, free_vars, parse_expr, sinc,
)

z = Var("z")


def test_parse_gaussian():
    assert parse_expr("exp(-z^2)") == Exp(Neg(IntPow(z, 2)))


def test_parse_sinc():
    assert parse_expr("sinc(z)") == Sinc(z)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("sin(z)/z + )")
    assert info.value.position == 12
    assert "offset 12" in str(info.value)


def test_premature_end_points_past_input():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("sin(")
    assert info.value.position == 5
    assert "'('" in info.value.expected


@pytest.mark.parametrize("src, cls", [
    ("foo(z)", UnknownIdentifier), ("z + I", UnknownIdentifier), ("2*j", UnknownIdentifier),
    ("sin()", ArityError), ("sin(z, z)", ArityError), ("exp z", ArityError),
    ("z^-1", ExprSyntaxError), ("z^1.5", ExprSyntaxError), ("z $ 2", ExprSyntaxError), ("", ExprSyntaxError),
])
def test_rejects(src, cls):
    with pytest.raises(cls):
        parse_expr(src)


def test_variable_restriction():
    with pytest.raises(UnknownIdentifier):
        parse_expr("t + 1", variables=("z",))
    assert free_vars(parse_expr("t * theta + z")) == {"t", "theta", "z"}


def test_precedence():
    assert parse_expr("1 + 2 * z^3") == Add(Const(1), Mul(Const(2), IntPow(z, 3)))
    assert parse_expr("-z*z") == Mul(Neg(z), z)
    assert parse_expr("z - i") == Add(z, Neg(I))
    assert parse_expr("z/z/z") == Div(Div(z, z), z)
    assert parse_expr("(z^2)^3") == IntPow(IntPow(z, 2), 3)


def test_eval_sinc_at_zero_is_one():
    assert eval_expr(Sinc(z), {"z": 0}) == 1 + 0j


def test_eval_euler():
    assert abs(eval_expr(Exp(z), {"z": 1j * math.pi}) - (-1)) < 1e-15


def test_eval_gaussian_at_one_plus_i():
    # -(1+i)^2 = -2i, so the value is cos 2 - i sin 2
    got = eval_expr(Exp(Neg(IntPow(z, 2))), {"z": 1 + 1j})
    oracle = complex(math.cos(2.0), -math.sin(2.0))
    assert abs(got - oracle) < 1e-15
    assert abs(got - (-0.4161468 - 0.9092974j)) < 1e-7


def test_eval_errors():
    with pytest.raises(UnboundVariable):
        eval_expr(z, {})
    with pytest.raises(DivisionNearZero):
        eval_expr(Div(Const(1), z), {"z": 0})


def test_sinc_series_branch_is_continuous():
    for w in (1e-3 * (1 - 1e-12), 1e-3 * 1j * (1 - 1e-12), 0.7e-3 * cmath.exp(0.3j)):
        # series truncation is O(|w|^6) ~ 1e-22; the bound is rounding in the reference
        exact = cmath.sin(w) / w
        assert abs(sinc(w) - exact) <= 4 * 2.0 ** -52
    # across the switch radius
    lo, hi = sinc(1e-3 * (1 - 1e-9)), sinc(1e-3 * (1 + 1e-9))
    assert abs(lo - hi) < 1e-15


def test_intpow_validates():
    with pytest.raises(ValueError):
        IntPow(z, -1)


def test_format_examples():
    assert format_expr(Exp(Neg(IntPow(z, 2)))) == "exp(-(z^2))"
    assert format_expr(Sinc(z), "latex") == r"\mathrm{sinc}(z)"
    assert format_expr(Add(Const(1 + 0j), z)) == "1 + z"


def test_format_subtraction_and_constants():
    assert format_expr(parse_expr("z - 2*i")) == "z - 2 * i"
    assert format_expr(Const(-3.0)) == "(-3)"
    assert format_expr(Const(2 - 1j)) == "(2 - 1 * i)"
    assert format_expr(Div(z, Mul(z, z))) == "z / (z * z)"


def test_noncanonical_constant_roundtrips_by_value():
    e = Mul(Const(2.5 - 0.5j), Exp(z))
    back = parse_expr(format_expr(e))
    for w in (0.3, 1 + 2j, -0.7j):
        assert abs(eval_expr(back, {"z": w}) - eval_expr(e, {"z": w})) <= 1e-15 * abs(eval_expr(e, {"z": w}))


def test_depth_and_walk():
    e = parse_expr("sin(z) + z^2")
    assert depth(e) == 3


# ---------------------------------------------------------- round-trip

_leaves = st.one_of(
    st.just(z), st.just(Var("t")), st.just(I),
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False).map(lambda x: Const(complex(x))),
    st.integers(0, 99).map(lambda n: Const(complex(n))),
)
_funcs = (Exp, Sin, Cos, Sinh, Cosh, Sinc)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: Add(*p)),
        st.tuples(children, children).map(lambda p: Mul(*p)),
        st.tuples(children, children).map(lambda p: Div(*p)),
        children.map(Neg),
        st.tuples(children, st.integers(0, 6)).map(lambda p: IntPow(*p)),
        st.tuples(st.sampled_from(_funcs), children).map(lambda p: p[0](p[1])),
    )


trees = st.recursive(_leaves, _extend, max_leaves=12)


@settings(max_examples=1000, deadline=None)
@given(trees)
def test_parse_format_roundtrip(e):
    assert parse_expr(format_expr(e)) == e


@settings(max_examples=200, deadline=None)
@given(trees)
def test_latex_is_nonempty_and_balanced(e):
    s = format_expr(e, "latex")
    assert s and s.count("{") == s.count("}")
