import random
from fractions import Fraction

import pytest

from lrd_quadforms.errors import ParameterError
from lrd_quadforms.power_counting import (
    Exponent,
    PowerCountingProblem,
    exact_rank,
    max_d_inf,
    padded_flats,
    power_counting_d_inf,
    product_bound_problem,
    two_line_problem,
)

DAMPING = range(8, 16)


def test_exponent_arithmetic():
    e = Exponent.symbol("a", 2) + Exponent.const(1) + Exponent.symbol("a", -2) + 3 * Exponent.symbol("b")
    assert e == Exponent.const(1) + Exponent.symbol("b", 3)
    assert e.evaluate({"b": Fraction(1, 3)}) == 2
    assert str(Exponent.const(0)) == "0"
    with pytest.raises(ParameterError):
        Exponent.symbol("a").evaluate({})


def test_exact_rank():
    assert exact_rank([[1, 2], [2, 4]]) == 1
    assert exact_rank([[1, 0], [0, 1], [1, 1]]) == 2
    assert exact_rank([[Fraction(1, 3), Fraction(2, 3)], [1, 2]]) == 1
    assert exact_rank([]) == 0


def test_two_line_damping_subset_symbolic():
    problem = two_line_problem(0, 1)
    assert problem.size == 16
    assert problem.rank() == 8
    assert problem.rank(DAMPING) == 6
    expected = (
        Exponent.const(2)
        + Exponent.symbol("alpha_p", 4)
        + Exponent.symbol("alpha_q", 4)
        + Exponent.symbol("beta", 4)
    )
    assert power_counting_d_inf(problem, DAMPING) == expected
    assert problem.indices(*[f"L{k}" for k in range(9, 17)]) == frozenset(DAMPING)


def test_two_line_damping_subset_at_random_parameters():
    rand = random.Random(7)
    problem = two_line_problem(2, -1)
    for _ in range(10):
        ap, aq, beta = (Fraction(rand.randint(-49, 0), 100) for _ in range(3))
        value = power_counting_d_inf(problem, DAMPING, {"alpha_p": ap, "alpha_q": aq, "beta": beta})
        assert value == 2 + 4 * ap + 4 * aq + 4 * beta


def test_whole_set_and_numeric_example():
    problem = two_line_problem(0, 1)
    values = {"alpha_p": -0.3, "alpha_q": -0.3, "beta": 0}
    assert power_counting_d_inf(problem, range(16), values) == 0
    assert power_counting_d_inf(problem, DAMPING, values) == Fraction(-2, 5)


def test_subset_outside_T_is_rejected():
    problem = two_line_problem(0, 1)
    with pytest.raises(IndexError):
        power_counting_d_inf(problem, [3, 16])
    with pytest.raises(IndexError):
        problem.indices("L17")


def test_problem_validation():
    with pytest.raises(ParameterError):
        PowerCountingProblem(((1, 0),), (), ("x", "y"))
    with pytest.raises(ParameterError):
        PowerCountingProblem(((1,),), (Exponent.const(1),), ("x", "y"))


def test_closure_and_padding():
    problem = product_bound_problem(1)
    # x + t, y - t, x + s, y - s are dependent: (x + t) + (y - t) = (x + s) + (y - s)
    damping = problem.indices("L5", "L6", "L7", "L8")
    assert problem.closure(damping) == damping
    assert problem.is_padded(damping)
    assert not problem.is_padded(problem.indices("L1", "L3"))


def test_padded_flats_of_product_problem():
    problem = product_bound_problem(1)
    flats = padded_flats(problem)
    assert frozenset() in flats
    assert frozenset(range(problem.size)) in flats
    assert problem.indices("L5", "L6", "L7", "L8") in flats
    assert all(problem.closure(f) == f and problem.is_padded(f) for f in flats)


def test_padded_flats_size_limit():
    with pytest.raises(ParameterError):
        padded_flats(two_line_problem(0, 1), max_size=10)


@pytest.mark.parametrize("alpha,beta,sign", [(-0.35, 0.0, -1), (-0.1, 0.0, 1), (-0.2, -0.1, -1), (-0.1, -0.1, 1)])
def test_product_bound_sign_matches_region(alpha, beta, sign):
    _, worst = max_d_inf(product_bound_problem(1), {"alpha": alpha, "beta": beta})
    assert (worst < 0) == (sign < 0)
    assert worst == 1 + 4 * Fraction(alpha).limit_denominator(100) + 4 * Fraction(beta).limit_denominator(100)
