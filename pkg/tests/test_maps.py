import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fixpoint.errors import SchemaError
from fixpoint.maps import Expr, build_map, compile_components, parse_expr


def ev(node, *args, slots=None, dim=None):
    arrs = [np.atleast_1d(np.asarray(a, dtype=float)) for a in args]
    slots = slots or max(1, len(arrs))
    dim = dim or (arrs[0].size if arrs else 1)
    return parse_expr(node, slots, dim)(arrs)


def test_constants():
    assert ev(3.5, [0.0]) == 3.5
    assert ev({"const": -2}, [0.0]) == -2.0


def test_var_forms():
    assert ev({"var": 1}, [4.0, 5.0]) == 5.0
    assert ev({"var": [1, 0]}, [4.0], [7.0], slots=2, dim=1) == 7.0


def test_operators():
    x = [2.0, 3.0]
    assert ev({"add": [{"var": 0}, {"var": 1}, 1]}, x) == 6.0
    assert ev({"mul": [{"var": 0}, {"var": 1}]}, x) == 6.0
    assert ev({"min": [{"var": 0}, {"var": 1}]}, x) == 2.0
    assert ev({"max": [{"var": 0}, {"var": 1}]}, x) == 3.0


@pytest.mark.parametrize("node", [
    True,
    "x",
    {"var": 5},
    {"var": [3, 0]},
    {"var": 1.5},
    {"add": []},
    {"pow": [1, 2]},
    {"add": [1], "mul": [2]},
    {"const": "a"},
])
def test_rejects(node):
    with pytest.raises(SchemaError):
        parse_expr(node, 2, 2)


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-100, 100))
def test_tree_matches_python(a, b, c):
    node = {"add": [{"mul": [a, {"var": 0}]}, {"max": [{"var": 1}, c]}, {"min": [b, {"var": 0}]}]}
    x = [b, c]
    assert ev(node, x) == pytest.approx(a * b + max(c, c) + min(b, b))


def test_compile_components():
    f = compile_components([parse_expr({"var": [1, 0]}, 2, 1), parse_expr(2.0, 2, 1)])
    assert f(np.array([1.0]), np.array([9.0])).tolist() == [9.0, 2.0]


def test_expr_is_frozen():
    e = Expr("const", 1.0)
    with pytest.raises(AttributeError):
        e.value = 2.0


class TestFamilies:
    def test_linear(self):
        T, n = build_map({"family": "linear", "A": [[0.5, 0.0], [0.0, 0.5]], "b": [1, 2]})
        assert n == 2 and T(np.array([2.0, 2.0])).tolist() == [2.0, 3.0]

    def test_saturated(self):
        T, n = build_map({"family": "affine_saturated", "A": [[1.0]], "b": [0.0], "lower": [0.0], "upper": [1.0]})
        assert T(np.array([5.0])).tolist() == [1.0]
        assert T(np.array([-5.0])).tolist() == [0.0]

    def test_expression(self):
        T, n = build_map({"family": "expression", "components": [{"var": 1}, {"var": 0}]})
        assert n == 2 and T(np.array([1.0, 2.0])).tolist() == [2.0, 1.0]

    @pytest.mark.parametrize("desc", [
        {"family": "linear", "A": [[1.0, 0.0]], "b": [0.0]},
        {"family": "linear", "A": [[1.0]], "b": [0.0, 1.0]},
        {"family": "affine_saturated", "A": [[1.0]], "b": [0.0], "lower": [2.0], "upper": [1.0]},
        {"family": "expression", "components": []},
        {"family": "spline"},
    ])
    def test_bad_descriptions(self, desc):
        with pytest.raises(SchemaError):
            build_map(desc)

    def test_expression_dimension(self):
        with pytest.raises(SchemaError):
            build_map({"family": "expression", "components": [1.0]}, dim=2)
