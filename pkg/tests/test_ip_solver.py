import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from manymatch.errors import InfeasibleProgramError, InvalidInputError
from manymatch.ip_solver import IntegerProgram, enumerate_ip, solve_ip


def random_covering_program(rng, max_vars=6, max_bound=4, max_rows=5):
    n = int(rng.integers(1, max_vars + 1))
    upper = rng.integers(1, max_bound + 1, size=n)
    rows = int(rng.integers(1, max_rows + 1))
    A = rng.integers(0, 3, size=(rows, n)) * (rng.random((rows, n)) < 0.6)
    cap = A @ upper
    rhs = np.minimum(rng.integers(0, 6, size=rows), cap)
    c = rng.integers(0, 20, size=n)
    return IntegerProgram.build(c, A, rhs, np.zeros(n, int), upper)


def test_small_example():
    prog = IntegerProgram.build([1, 2], [[1, 1]], [2], [0, 0], [3, 3])
    for solver in (solve_ip, enumerate_ip):
        sol = solver(prog)
        assert list(sol.values) == [2, 0]
        assert sol.objective == 2


def test_zero_variable_program():
    prog = IntegerProgram.build([], np.zeros((0, 0)), [], [], [])
    assert solve_ip(prog).objective == 0
    assert enumerate_ip(prog).objective == 0


def test_single_variable():
    prog = IntegerProgram.build([4], [[1]], [3], [0], [5])
    sol = enumerate_ip(prog)
    assert list(sol.values) == [3] and sol.objective == 12
    assert solve_ip(prog).objective == 12


def test_infeasible_program_raises():
    prog = IntegerProgram.build([1], [[1]], [3], [0], [2])
    with pytest.raises(InfeasibleProgramError):
        solve_ip(prog)
    with pytest.raises(InfeasibleProgramError):
        enumerate_ip(prog)


def test_enumeration_cap():
    prog = IntegerProgram.build([1] * 8, [[1] * 8], [1], [0] * 8, [9] * 8)
    with pytest.raises(InvalidInputError):
        enumerate_ip(prog, cap=1000)


def test_negative_constraint_coefficient_rejected():
    with pytest.raises(InvalidInputError):
        IntegerProgram.build([1], [[-1]], [0], [0], [1])


def test_matches_enumeration_on_random_programs():
    rng = np.random.default_rng(11)
    for _ in range(20):
        prog = random_covering_program(rng)
        assert solve_ip(prog).objective == enumerate_ip(prog).objective


def test_branch_and_bound_path_matches_enumeration():
    # force every block through the LP-based search
    rng = np.random.default_rng(5)
    for _ in range(40):
        prog = random_covering_program(rng)
        sol = solve_ip(prog, block_enum_limit=0)
        assert prog.is_feasible(sol.values)
        assert sol.objective == enumerate_ip(prog).objective


def test_enumerated_blocks_give_lexicographic_minimum():
    # x0 + x1 >= 1 with equal costs: both (1,0) and (0,1) are optimal
    prog = IntegerProgram.build([3, 3], [[1, 1]], [1], [0, 0], [1, 1])
    assert list(solve_ip(prog).values) == [0, 1]
    assert list(enumerate_ip(prog).values) == [0, 1]


def test_float_objective():
    prog = IntegerProgram.build([0.5, 0.25, 0.3], [[1, 1, 0], [0, 1, 1]], [1, 1], [0] * 3, [1] * 3)
    assert solve_ip(prog, block_enum_limit=0).objective == pytest.approx(0.25)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_relaxing_rhs_never_increases_optimum(seed):
    rng = np.random.default_rng(seed)
    prog = random_covering_program(rng)
    k = int(rng.integers(prog.n_rows))
    rhs = prog.rhs.copy()
    rhs[k] = max(0, rhs[k] - 1)
    relaxed = IntegerProgram(prog.objective, prog.A, rhs, prog.lower, prog.upper)
    assert solve_ip(relaxed).objective <= solve_ip(prog).objective


def test_nonzero_lower_bounds():
    prog = IntegerProgram.build([2, 1], [[1, 1]], [5], [1, 2], [4, 2])
    for solver in (solve_ip, enumerate_ip):
        sol = solver(prog)
        assert list(sol.values) == [3, 2] and sol.objective == 8
    assert solve_ip(prog, block_enum_limit=0).objective == 8


def test_branch_and_bound_agrees_with_mixed_integer_solver():
    # two independent exact routes on programs too large to enumerate
    rng = np.random.default_rng(21)
    for _ in range(15):
        prog = random_covering_program(rng, max_vars=30, max_bound=3, max_rows=12)
        bnb = solve_ip(prog, block_enum_limit=0, exact_var_limit=10**6)
        mip = solve_ip(prog, block_enum_limit=0, exact_var_limit=0)
        assert prog.is_feasible(bnb.values) and prog.is_feasible(mip.values)
        assert bnb.objective == mip.objective == prog.value(bnb.values)


def test_relaxed_mode_is_feasible_and_flags_proof():
    rng = np.random.default_rng(22)
    for _ in range(30):
        prog = random_covering_program(rng, max_vars=20, max_bound=3, max_rows=10)
        exact = solve_ip(prog)
        relaxed = solve_ip(prog, exact=False)
        assert prog.is_feasible(relaxed.values)
        assert relaxed.objective >= exact.objective
        if relaxed.proven:
            assert relaxed.objective == exact.objective


def test_integer_objective_is_exact_python_int():
    big = 10**15
    prog = IntegerProgram.build([big, big + 1], [[1, 1]], [3], [0, 0], [3, 3])
    sol = solve_ip(prog)
    assert sol.objective == 3 * big and isinstance(sol.objective, int)
