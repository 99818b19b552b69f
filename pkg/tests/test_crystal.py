import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logcrystal.crystal import (
    HodgeFCrystal,
    check_axioms,
    hodge_polygon,
    in_basis,
    is_ordinary,
    newton_polygon,
    slope_filtration,
    unit_root_basis,
    unit_root_basis_of,
    verify_slope_filtration,
)
from logcrystal.frobenius import FrobLift
from logcrystal.linalg import smat_const, smat_identity, smat_is_zero, smat_mul, smat_sub, smat_zero, wmat_inv
from logcrystal.logpoint import connection_to_nilpotents, pullback, augmentation
from logcrystal.series import SeriesRing
from logcrystal.synth import random_cy3_seed, random_weight1_seed, synth_cy3, synth_cy3_q_chart, synth_weight1
from logcrystal.witt import WittRing


def ring(p=5, N=5, m=1, r=1, D=4, s=1):
    return SeriesRing(WittRing(p, s, N), m, r, D)


def tate(R, fil1=(1,)):
    M = smat_zero(R, 2, 2)
    M[0][1] = R.one()
    Phi = smat_zero(R, 2, 2)
    Phi[0][0], Phi[1][1] = R.one(), R(R.W.p)
    return HodgeFCrystal(R, [M], Phi, [[0, 1], list(fil1)])


def constant_crystal(R, F0, fil1):
    n = len(F0)
    Phi = [[R(x) for x in row] for row in F0]
    return HodgeFCrystal(R, [smat_zero(R, n, n) for _ in range(R.m)], Phi, [list(range(n)), list(fil1)])


def test_axioms_examples():
    R = ring()
    trivial = HodgeFCrystal(R, [smat_zero(R, 1, 1)], smat_identity(R, 1), [[0], []])
    assert check_axioms(trivial).ok
    assert check_axioms(tate(R)).ok
    rep = check_axioms(tate(R, fil1=(0,)))
    assert not rep.ok
    assert "p_divisibility" in rep.failures()
    assert "Phi e_0" in rep.failures()["p_divisibility"]


def test_axioms_detect_broken_horizontality():
    R = ring()
    X = tate(R)
    bad = [row[:] for row in X.frobenius]
    bad[0][1] = R.gen(0) * 5
    assert not check_axioms(X.with_data(frobenius=bad)).ok


def test_polygons():
    R = ring()
    W = R.W
    assert newton_polygon(tate(R)).slopes == (0, 1)
    ss = constant_crystal(R, [[W(0), W(-5)], [W(1), W(0)]], [1])
    assert newton_polygon(ss).slopes == (Fraction(1, 2), Fraction(1, 2))
    assert hodge_polygon(ss).slopes == (0, 1)
    assert newton_polygon(constant_crystal(R, [[W(1)]], [])).slopes == (0,)


def test_ordinarity():
    R = ring()
    W = R.W
    assert is_ordinary(tate(R))
    assert not is_ordinary(constant_crystal(R, [[W(0), W(-5)], [W(1), W(0)]], [1]))
    assert is_ordinary(constant_crystal(R, [[W(1), W(0)], [W(0), W(2)]], []))


def test_slope_filtration_tate():
    X = tate(ring())
    sf = slope_filtration(X)
    assert verify_slope_filtration(X, sf).ok
    h0, h1 = sf.pieces
    assert [row[0].constant().to_int() for row in h0] == [1, 0]
    assert h1[0][0].is_zero() and h1[1][0] == X.ring.one()


def test_slope_filtration_unit_root():
    R = ring()
    W = R.W
    X = constant_crystal(R, [[W(1), W(0)], [W(0), W(1)]], [])
    sf = slope_filtration(X)
    assert len(sf.pieces) == 1 and len(sf.pieces[0][0]) == 2


def test_slope_filtration_rejects_supersingular():
    R = ring()
    W = R.W
    with pytest.raises(ValueError, match="not ordinary"):
        slope_filtration(constant_crystal(R, [[W(0), W(-5)], [W(1), W(0)]], [1]))


def test_slope_filtration_recovers_cy3_blocks():
    seed = random_cy3_seed(5, 1, 5, 4, 1, random.Random(2))
    X = synth_cy3_q_chart(seed)
    sf = slope_filtration(X)
    assert verify_slope_filtration(X, sf).ok
    T = sf.change_of_basis
    # in the generating basis U_i is spanned by the first i + 1 vectors
    for i, blk in enumerate(sf.blocks):
        for col in blk:
            assert all(T[row][col].is_zero() for row in range(i + 1, 4))
            assert T[i][col].constant().is_unit()


def test_unit_root_basis_identity():
    R = ring()
    X = HodgeFCrystal(R, [smat_zero(R, 2, 2)], smat_identity(R, 2), [[0, 1], []])
    assert smat_is_zero(smat_sub(unit_root_basis(X), smat_identity(R, 2)))


def test_unit_root_basis_rank_one_product():
    R = ring(D=6, N=6)
    psi = FrobLift.standard_lift(R)
    phi_entry = R.gen(0) * 5 + 1
    prod, term = R.one(), phi_entry
    for _ in range(R.W.N + R.D):
        prod = prod * term
        term = psi.apply(term)
    conn = [[[R.zero() - prod.theta(0) * prod.inverse()]]]
    B = unit_root_basis_of([[phi_entry]], conn, R)
    assert B[0][0] == prod


def test_unit_root_basis_random_perturbation():
    R = ring(m=1, r=0, D=4, N=5)
    g = random.Random(1)
    Phi = [[(R.one() if i == j else R.zero()) + R.from_dict({n: R.W(g.randrange(25)) for n in R.monomials[1:]}).mul_p(1) for j in range(2)] for i in range(2)]
    B = unit_root_basis_of(Phi, [], R)
    psi = FrobLift.standard_lift(R)
    assert smat_is_zero(smat_sub(smat_mul(Phi, psi.apply_matrix(B)), B))
    wmat_inv(smat_const(B))


def test_lang_obstruction_reported():
    R = ring()
    W = R.W
    X = constant_crystal(R, [[W(0), W(1)], [W(1), W(0)]], [])
    with pytest.raises(ValueError, match="degree 2"):
        unit_root_basis(X)
    X = constant_crystal(R, [[W(2)]], [])
    with pytest.raises(ValueError, match="extend residue field"):
        unit_root_basis(X)


def test_lang_obstruction_disappears_over_extension():
    R = ring(s=2)
    W = R.W
    X = constant_crystal(R, [[W(0), W(1)], [W(1), W(0)]], [])
    B = unit_root_basis(X)
    assert smat_is_zero(smat_sub(smat_mul(X.frobenius, FrobLift.standard_lift(R).apply_matrix(B)), B))


@given(st.integers(0, 10**6), st.sampled_from([(5, 1, 1, 1), (3, 1, 2, 1), (5, 2, 2, 2)]))
def test_synth_weight1_crystals_satisfy_axioms(seed, shape):
    p, s, m, r = shape
    sd, _ = random_weight1_seed(p, s, 4, 3, m, r, random.Random(seed))
    X = synth_weight1(sd)
    assert check_axioms(X).ok
    assert is_ordinary(X)
    sf = slope_filtration(X)
    assert verify_slope_filtration(X, sf).ok


@given(st.integers(0, 10**6))
def test_synth_cy3_axioms_and_pullback_nilpotence(seed):
    X = synth_cy3(random_cy3_seed(5, 1, 5, 3, 1, random.Random(seed)))
    assert check_axioms(X).ok
    sf = slope_filtration(X)
    assert verify_slope_filtration(X, sf).ok
    # weight 3: N^4 vanishes on the pullback to the augmentation
    R = X.ring
    Y = pullback(X, augmentation(R), FrobLift.standard_lift(R))
    N = Y.nilpotents[0]
    P = N
    for _ in range(3):
        P = [[sum((P[i][k] * N[k][j] for k in range(4)), R.W(0)) for j in range(4)] for i in range(4)]
    assert all(x.is_zero() for row in P for x in row)


def test_serialization_roundtrip():
    X = synth_cy3(random_cy3_seed(3, 2, 4, 3, 1, random.Random(0)))
    Y = HodgeFCrystal.from_json(X.to_json())
    assert Y.to_json() == X.to_json()
    assert smat_is_zero(smat_sub(Y.frobenius, X.frobenius))
