import itertools
import json

import numpy as np
import pytest

from rspin.errors import InvalidInput, PolynomialVanishesAtPole, SolverExhausted
from rspin.numerics import DEFAULT_POLICY, equilibrate, numeric_rank
from rspin.rational_forms import FactoredRationalForm, residue_simple
from rspin.residue_system import Configuration
from rspin.spin_solver import (
    ProblemSolution,
    SpinData,
    condition2_matrix,
    merged,
    recertify,
    solve,
    solve_d0,
    solve_d1,
    solve_general,
    to_irreducible_nodal,
)
from rspin.nodal_curves import certify


def independent_residual(sd, sol):
    """Condition (i) from a freshly built form including ``P^r``."""
    c = sol.config
    zeros = [(z, k) for z, k in zip(c.z, sd.m)] + [(q, sd.r) for q in sol.p_roots]
    f = FactoredRationalForm.build(zeros, [(v, 1) for v in c.x + c.y])
    worst = 0.0
    for xj, yj in zip(c.x, c.y):
        a, b = residue_simple(f, xj), residue_simple(f, yj)
        worst = max(worst, abs(a + b) / max(abs(a), abs(b)))
    return worst


def sweep_rank(M, cutoff=1e-8):
    """Rank from an exhaustive sweep of all square minors."""
    M = np.asarray(M)
    M = M / np.max(np.abs(M))
    for k in range(min(M.shape), 0, -1):
        for ri in itertools.combinations(range(M.shape[0]), k):
            for ci in itertools.combinations(range(M.shape[1]), k):
                if abs(np.linalg.det(M[np.ix_(ri, ci)])) > cutoff:
                    return k
    return 0


def test_spin_data_identity():
    assert SpinData(4, 3, (1, 2)).d == 1
    with pytest.raises(InvalidInput):
        SpinData(2, 3, (1,))
    with pytest.raises(InvalidInput):
        SpinData(2, 2, (), d=2)
    sd = SpinData(5, 4, (2, 2))
    assert SpinData.from_json(sd.to_json()) == sd


def test_d0_trivial_g1():
    sd = SpinData(1, 3, (0, 0, 0))
    sol = solve_d0(sd)
    assert sol.cond1_residual == 0
    assert sol.p_roots == () and sol.cond2_rank == sol.cond2_required == 0


def test_d0_g2():
    sd = SpinData(2, 3, (2,))
    sol = solve_d0(sd)
    assert independent_residual(sd, sol) <= 1e-10


def test_d0_g3_four_points():
    sd = SpinData(3, 5, (1, 1, 1, 1))
    sol = solve_d0(sd)
    assert independent_residual(sd, sol) <= 1e-10
    z = sol.config.z
    for a, b in itertools.combinations(z, 2):
        assert abs(a - b) >= DEFAULT_POLICY.distinct_margin * max(1, abs(a), abs(b))


def test_d1_examples():
    sd = SpinData(2, 2, ())
    sol = solve_d1(sd)
    assert independent_residual(sd, sol) <= 1e-10
    assert sol.cond2_rank == 1
    sd5 = SpinData(5, 4, (2, 2))
    sol5 = solve_d1(sd5)
    assert independent_residual(sd5, sol5) <= 1e-10
    w, _ = merged(sd5, sol5)
    assert sum(w.weights) == sum(sd5.m) + sd5.r == 2 * sd5.g - 2


def test_d1_condition2_closed_form():
    sd = SpinData(3, 2, (2,))
    sol = solve_d1(sd)
    (q,) = sol.p_roots
    M = condition2_matrix(sol)
    for j, (xj, yj) in enumerate(zip(sol.config.x, sol.config.y)):
        expected = (yj - xj) / ((xj - q) * (yj - q))
        assert abs(M[j, 0] - expected) <= 1e-12 * abs(expected)
        assert M[j, 0] != 0


def test_condition2_d0_empty():
    sol = solve_d0(SpinData(2, 2, (2,)))
    assert condition2_matrix(sol).shape == (2, 0)


def test_condition2_random_minor_sweep(rng):
    for _ in range(10):
        pts = rng.uniform(-2, 2, (10, 2)) @ np.array([1, 1j])
        x, y, roots = tuple(pts[:4]), tuple(pts[4:8]), tuple(pts[8:])
        sol = ProblemSolution(Configuration(x, y, ()), roots, 0.0, 0, 2)
        M = condition2_matrix(sol)
        rank, _ = numeric_rank(equilibrate(M))
        assert rank == sweep_rank(M) == 2


def test_condition2_vanishing_P():
    sol = ProblemSolution(Configuration((1.0, 2.0), (-1.0, -2.0), ()), (1.0 + 1e-9,), 0.0, 0, 1)
    with pytest.raises(PolynomialVanishesAtPole):
        condition2_matrix(sol)


def test_general_d2():
    sd = SpinData(3, 2, (), 2)
    sol = solve_general(sd, seed=0)
    assert sol.cond1_residual <= DEFAULT_POLICY.residual_tol
    assert sol.cond2_rank == 2
    assert independent_residual(sd, sol) <= DEFAULT_POLICY.residual_tol
    assert recertify(sd, sol) == (True, True)


def test_general_colliding_start_consumes_budget():
    sd = SpinData(3, 2, (), 2)
    x = (100.0, 10.0, 1.0)
    bad = ProblemSolution(Configuration(x, (-100.0, -10.0, -1.0), ()), (10.0, 0.01), 0.0, 0, 2)
    with pytest.raises(SolverExhausted) as info:
        solve_general(sd, budget=1, start=bad)
    assert "DegenerateConfiguration" in info.value.attempts[0]
    # with budget left the retry recovers
    sol = solve_general(sd, budget=4, start=bad)
    assert sol.attempts >= 2


def test_general_rejects_small_d():
    with pytest.raises(InvalidInput):
        solve_general(SpinData(2, 2, ()))


def test_recertify_matches():
    for sd in [SpinData(3, 2, (2, 2)), SpinData(4, 3, (2, 1))]:
        sol = solve(sd)
        assert recertify(sd, sol) == (True, True)


def test_determinism():
    sd = SpinData(4, 2, (3, 1, 2))
    a = json.dumps(solve(sd, seed=7).to_json())
    b = json.dumps(solve(sd, seed=7).to_json())
    assert a == b


def test_irreducible_nodal():
    sd = SpinData(2, 2, ())
    sol = solve_d1(sd)
    curve = to_irreducible_nodal(sol, sd)
    assert len(curve.components) == 1 and len(curve.nodes) == 2
    assert certify(curve, sd).passed
    sd0 = SpinData(3, 4, (3, 1))
    c0 = to_irreducible_nodal(solve_d0(sd0), sd0)
    assert c0.divisor == () or len(c0.divisor) == 0
    assert certify(c0, sd0).genus_computed == 3


def test_irreducible_nodal_collision():
    sd = SpinData(2, 3, (1, 1))
    c = Configuration((10.0, 1.0), (-10.0, -1.0), (10.0, 0.2))
    sol = ProblemSolution(c, (), 0.0, 0, 0)
    with pytest.raises(InvalidInput):
        to_irreducible_nodal(sol, sd)
