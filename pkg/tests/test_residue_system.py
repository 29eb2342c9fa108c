import numpy as np
import pytest

from rspin.errors import DegenerateConfiguration, DegenerateTarget, InvalidBaseParameters, InvalidInput
from rspin.numerics import DEFAULT_POLICY, TolerancePolicy, numeric_rank
from rspin.rational_forms import residue_at_infinity, residues
from rspin.residue_system import (
    Configuration,
    StratumWeights,
    base_point,
    choose_gauge,
    choose_x,
    column_sum_defect,
    continue_to,
    fd_agreement,
    fd_jacobian,
    jacobian_analytic,
    lineareq_matrix,
    newton_polish,
    relative_residual,
    residue_form,
    residue_system_report,
    system_F,
    tangenteq_matrix,
)

from helpers import random_configuration, random_weights


def test_weights_validation():
    with pytest.raises(InvalidInput):
        StratumWeights((1, 1), 3)
    with pytest.raises(InvalidInput):
        StratumWeights((-1, 3), 2)
    assert StratumWeights((), 1).n == 0


def test_g1_system_vanishes(rng):
    for w in [StratumWeights((), 1), StratumWeights((0, 0), 1)]:
        for _ in range(10):
            c = random_configuration(rng, w)
            assert np.all(system_F(w, c) == 0)
            Jy, Jz = jacobian_analytic(w, c)
            assert np.all(Jy == 0) and np.all(Jz == 0)


def test_base_point_examples():
    w = StratumWeights((2,), 2)
    c = base_point(w, [1, 2])
    assert c.y == (-1, -2) and c.z == (0,)
    assert np.max(np.abs(system_F(w, c))) <= 1e-13
    w3 = StratumWeights((2, 2), 3)
    c3 = base_point(w3, [1, 2, 4])
    assert np.max(np.abs(system_F(w3, c3))) <= 1e-13
    with pytest.raises(InvalidBaseParameters):
        base_point(w, [1, -1])
    with pytest.raises(InvalidBaseParameters):
        base_point(w, [0, 1])


def test_sum_of_F_is_total_residue(rng):
    w = StratumWeights((2, 2), 3)
    for _ in range(20):
        c = random_configuration(rng, w)
        F = system_F(w, c)
        assert np.max(np.abs(F)) > 1e-6
        f = residue_form(w, c)
        # oracle: every finite residue of R, plus the one at infinity
        total = sum(r for _, r in residues(f)) + residue_at_infinity(f)
        scale = sum(abs(r) for _, r in residues(f))
        assert abs(total) <= 1e-12 * scale
        assert abs(F.sum()) <= 1e-12 * scale


def test_sum_of_F_random_weights(rng):
    for _ in range(50):
        g = int(rng.integers(2, 7))
        w = random_weights(rng, g)
        c = random_configuration(rng, w, radius=3, min_gap=0.2)
        A = np.abs(system_F(w, c))
        f = residue_form(w, c)
        scale = sum(abs(r) for _, r in residues(f))
        assert abs(system_F(w, c).sum()) <= 1e-11 * scale


def test_jacobian_fd_g2(rng):
    w = StratumWeights((1, 1), 2)
    c = random_configuration(rng, w)
    Jy, Jz = jacobian_analytic(w, c)
    Ny, Nz = fd_jacobian(w, c, step=1e-6)
    assert fd_agreement(Jy, Ny) <= 1e-6
    assert fd_agreement(Jz, Nz) <= 1e-6


def test_jacobian_column_sums(rng):
    for _ in range(30):
        g = int(rng.integers(2, 7))
        w = random_weights(rng, g)
        c = random_configuration(rng, w, radius=3, min_gap=0.2)
        Jy, Jz = jacobian_analytic(w, c)
        assert column_sum_defect(Jy, Jz) <= 1e-11


def test_jacobian_rejects_degenerate():
    w = StratumWeights((1, 1), 2)
    c = Configuration((1, 2), (1, 3), (0.5, 0.7))
    with pytest.raises(DegenerateConfiguration):
        jacobian_analytic(w, c)
    with pytest.raises(DegenerateConfiguration):
        system_F(w, c)


def test_zero_weight_points_may_coincide():
    w = StratumWeights((2, 0, 0), 2)
    c = Configuration((1, 2), (-1.1, -2.2), (0.1, 0.1, 0.1))
    system_F(w, c)


def test_choose_x():
    assert choose_x(1) == [1]
    assert choose_x(3) == [100, 10, 1]
    with pytest.raises(InvalidInput):
        choose_x(2, spread=1)
    w = StratumWeights((2, 2, 2, 2), 5)
    assert choose_gauge(w, choose_x(5)).condition < 1e8


def test_lineareq_matrix():
    assert np.array_equal(lineareq_matrix([1.0], 1), np.zeros((1, 1)))
    M = lineareq_matrix([10, 1], 2)
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    assert a == pytest.approx(10 / 9 - 2) and b == pytest.approx(-10 / 9)
    assert c == pytest.approx(1 / 9) and d == pytest.approx(-1 / 9 - 2)
    # cofactor determinant by hand: (-8/9)(-19/9) + (10/9)(1/9) = 162/81
    assert a * d - b * c == pytest.approx(2.0, rel=1e-14)
    for x in ([10, 1], choose_x(4), [3, 1j, -2, 0.5 + 2j, 7]):
        g = len(x)
        M = lineareq_matrix(x)
        assert np.allclose(M @ np.ones(g), -(2 * g - 2) * np.ones(g), rtol=0, atol=1e-12)


def test_tangenteq_blocks():
    w = StratumWeights((3, 1, 2), 4)
    x = choose_x(4)
    T = tangenteq_matrix(w, x)
    assert T.shape == (4, 7)
    for row in T:
        assert np.array_equal(row[:3], [6, 2, 4])
    assert np.array_equal(T[:, 3:], lineareq_matrix(x, 4))


def test_report_contents():
    w = StratumWeights((2, 2), 3)
    x = choose_x(3)
    rep = residue_system_report(w, x)
    assert rep.empirical_rank_y == 2
    assert rep.fd_agreement <= 1e-6
    assert rep.column_sum_max <= 1e-10
    assert rep.lineareq_rank == 3
    assert np.isfinite(rep.tangenteq_discrepancy)
    js = rep.to_json()
    assert js["empirical_rank_y"] == 2
    ranks = {residue_system_report(w, x, TolerancePolicy(fd_step=h)).empirical_rank_y
             for h in (1e-5, 1e-6, 1e-7)}
    assert ranks == {2}


def test_continue_g1_returns_base_point():
    w = StratumWeights((), 1)
    c = continue_to(w, [1.0], [])
    assert c == base_point(w, [1.0])


def test_continue_g2():
    w = StratumWeights((1, 1), 2)
    c = continue_to(w, choose_x(2), [0.03, -0.05j])
    assert c.z == (0.03, -0.05j)
    # fresh evaluation through the factored form
    f = residue_form(w, Configuration(c.x, c.y, c.z))
    from rspin.rational_forms import residue_simple
    F = [residue_simple(f, xj) + residue_simple(f, yj) for xj, yj in zip(c.x, c.y)]
    scale = max(abs(residue_simple(f, xj)) for xj in c.x)
    assert max(abs(v) for v in F) <= 1e-10 * scale


def test_continue_g4_statistics(rng):
    w = StratumWeights((2, 2, 1, 1), 4)
    x = choose_x(4)
    wins = 0
    for _ in range(20):
        z = 0.05 * (rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4))
        try:
            c = continue_to(w, x, z)
        except Exception:
            continue
        wins += relative_residual(w, c) <= DEFAULT_POLICY.residual_tol
    assert wins >= 18


def test_continue_deterministic():
    w = StratumWeights((3, 1), 3)
    z = [0.02 + 0.01j, -0.03j]
    assert continue_to(w, choose_x(3), z) == continue_to(w, choose_x(3), z)


def test_continue_degenerate_target():
    w = StratumWeights((1, 1), 2)
    with pytest.raises(DegenerateTarget):
        continue_to(w, choose_x(2), [0.01, 0.01])
    with pytest.raises(InvalidInput):
        continue_to(w, choose_x(2), [0.01])


def test_newton_polish_keeps_solution():
    w = StratumWeights((2, 1, 1), 3)
    c = continue_to(w, choose_x(3), [0.02, -0.01j, 0.015 - 0.02j])
    p = newton_polish(w, c)
    assert relative_residual(w, p) <= relative_residual(w, c) + 1e-15
