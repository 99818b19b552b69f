import random

import pytest

from logcrystal.frobenius import FrobLift, chi_transport, frobenius_matrix, pullback_form
from logcrystal.linalg import smat_identity, smat_is_zero, smat_mul, smat_sub, smat_zero
from logcrystal.logdiff import dlog, exterior_d
from logcrystal.series import SeriesRing
from logcrystal.synth import random_unit_series, random_weight1_seed, synth_weight1
from logcrystal.witt import WittRing, log_unit
from test_series import random_series


def ring(m=1, r=1, D=5, p=5, N=5):
    return SeriesRing(WittRing(p, 1, N), m, r, D)


def test_apply_examples():
    R = ring()
    t = R.gen(0)
    assert FrobLift.standard_lift(R).apply(t) == t**5
    R0 = ring(r=0)
    x = R0.gen(0)
    assert FrobLift.standard_lift(R0).apply(x) == (x + 1) ** 5 - 1
    phi = FrobLift(R, [R(6)])
    assert phi.apply(t) == t**5 * 6


def test_rejects_factor_not_one_mod_p():
    R = ring()
    with pytest.raises(ValueError):
        FrobLift(R, [R(2)])


def test_pullback_of_dlog():
    R = ring()
    assert pullback_form(FrobLift.standard_lift(R), dlog(R, 0)).coeffs[0] == R(5)
    assert pullback_form(FrobLift(R, [R(6)]), dlog(R, 0)).coeffs[0] == R(5)


def test_pullback_commutes_with_d():
    R = ring(m=2, r=1, D=4)
    rng = random.Random(3)
    phi = FrobLift(R, [random_unit_series(R, rng) for _ in range(2)])
    g = random_series(R, 11)
    lhs = pullback_form(phi, exterior_d(g))
    rhs = exterior_d(phi.apply(g))
    assert (lhs - rhs).is_zero(below_degree=R.D - 1)


def tate_connection(R):
    M = smat_zero(R, 2, 2)
    M[0][1] = R.one()
    return [M]


def test_chi_examples():
    R = ring()
    psi = FrobLift.standard_lift(R)
    phi = FrobLift(R, [R(6)])
    conn = tate_connection(R)
    assert smat_is_zero(smat_sub(chi_transport(conn, phi, phi), smat_identity(R, 2)))
    assert smat_is_zero(smat_sub(chi_transport([smat_zero(R, 2, 2)], psi, phi), smat_identity(R, 2)))
    X = chi_transport(conn, psi, phi)
    assert X[1][1] == R.one() and X[0][0] == R.one() and X[1][0].is_zero()
    # all D_n survive for a log variable: the sum is (1 + x)^N = 1 + N log(1 + x)
    assert X[0][1] == R(R.W(0) - log_unit(R.W(6)))
    assert X[0][1].constant().equal_mod(-R.W.from_fraction(5, 6), 2)


def test_frobenius_change_of_lifting():
    rng = random.Random(5)
    seed, _ = random_weight1_seed(5, 1, 5, 4, 1, 1, rng)
    X = synth_weight1(seed)
    R = X.ring
    phi1 = FrobLift(R, [random_unit_series(R, rng)])
    phi2 = FrobLift(R, [random_unit_series(R, rng)])
    F1, F2 = frobenius_matrix(X, phi1), frobenius_matrix(X, phi2)
    assert smat_is_zero(smat_sub(F1, smat_mul(F2, chi_transport(X.connection, phi1, phi2))))
