import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reprolab.expr import Expression, ExpressionError

finite = st.floats(-3, 3)


@given(finite, finite)
def test_matches_python_arithmetic(s, t):
    e = Expression("exp(-s) * cosh(t) + sinh(t) / (1 + s*s) - 2*pi", ("s", "t"))
    assert e(s=s, t=t) == pytest.approx(math.exp(-s) * math.cosh(t) + math.sinh(t) / (1 + s * s) - 2 * math.pi)


def test_broadcasts_over_arrays():
    x = np.linspace(-1, 1, 5)
    assert np.allclose(Expression("cos(x) * sin(x) + sqrt(abs(x)) + e", ("x",))(x=x),
                       np.cos(x) * np.sin(x) + np.sqrt(np.abs(x)) + np.e)


def test_constants_without_variables():
    assert Expression("-3", ())() == -3


@pytest.mark.parametrize("src", ["x ** 2", "__import__('os')", "x.real", "foo(x)", "y + 1", "[x]", "x if x else 1"])
def test_rejects_unsupported_syntax(src):
    with pytest.raises(ExpressionError):
        Expression(src, ("x",))


def test_syntax_error_reports_column():
    with pytest.raises(ExpressionError) as info:
        Expression("exp(x +", ("x",))
    assert info.value.column is not None


def test_missing_variable_value():
    with pytest.raises(ExpressionError):
        Expression("x + y", ("x", "y"))(x=1.0)
