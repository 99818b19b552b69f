import random

from hypothesis import given, settings
from hypothesis import strategies as st

from logcrystal.cy3 import symplectic_frame
from logcrystal.instanton import (
    KElem,
    build_kappa,
    check_ksv,
    dwork_integrality,
    extract_instanton,
    integrality_report,
    ksv_potential,
    mobius,
)
from logcrystal.series import SeriesRing, exp_series
from logcrystal.synth import random_cy3_seed, synth_cy3, telescoped_kappa
from logcrystal.witt import WittElem, WittRing


def ring(p=5, N=5, m=1, D=6, s=1):
    return SeriesRing(WittRing(p, s, N), m, m, D)


def geometric(R, k):
    """q^k / (1 - q^k) truncated."""
    return R.from_dict({(k * j,): R.W(1) for j in range(1, R.D) if k * j < R.D})


def eps_int(e: KElem) -> int:
    assert e.den == 0
    return e.numerator.to_int()


def test_mobius():
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_extract_examples():
    R = ring()
    ex = extract_instanton(geometric(R, 1), (0, 0, 0))
    assert eps_int(ex.eps[(1,)]) == 1
    assert all(eps_int(ex.eps[(n,)]) == 0 for n in range(2, R.D))
    ex = extract_instanton(R(7), (0, 0, 0))
    assert ex.eps0.numerator == R.W(7)
    assert all(e.is_known_zero() for e in ex.eps.values())
    kappa = geometric(R, 1) + geometric(R, 2) * 8
    assert kappa.coeff((1,)).to_int() == 1 and kappa.coeff((2,)).to_int() == 9
    ex = extract_instanton(kappa, (0, 0, 0))
    assert eps_int(ex.eps[(1,)]) == 1 and eps_int(ex.eps[(2,)]) == 1


def test_indeterminate_exponents():
    R = SeriesRing(WittRing(5, 1, 4), 2, 2, 4)
    ex = extract_instanton(R.gen(0) + R.gen(0) * R.gen(1), (0, 0, 1))
    assert (1, 0) in ex.indeterminate and (0, 1) in ex.indeterminate
    assert (1, 1) in ex.eps


def test_integrality_examples():
    R = ring()
    ex = extract_instanton(geometric(R, 1), (0, 0, 0))
    assert integrality_report(ex).ok
    ex.eps[(2,)] = KElem.from_witt(R.W(1), 1)
    rep = integrality_report(ex)
    assert not rep.ok and rep.failures() == [(2,)]


@given(st.lists(st.integers(0, 5**4 - 1), min_size=5, max_size=5), st.integers(0, 5**4))
def test_build_extract_roundtrip(values, e0):
    R = ring(N=4)
    eps = {(n,): KElem.from_witt(R.W(v)) for n, v in zip(range(1, R.D), values)}
    kappa = build_kappa(R, (0, 0, 0), KElem.from_witt(R.W(e0)), eps)
    ex = extract_instanton(kappa, (0, 0, 0))
    for n, e in eps.items():
        got = ex.eps[n]
        # division by n^3 costs v_p(n^3) digits of the numerator
        assert got.numerator.equal_mod(e.numerator, got.prec - got.den)


@given(st.integers(0, 10**6))
def test_build_extract_roundtrip_two_variables(seed):
    g = random.Random(seed)
    R = SeriesRing(WittRing(5, 2, 4), 2, 2, 4)
    eps = {}
    for n in R.monomials:
        if n[0] and n[1]:
            eps[n] = KElem.from_witt(WittElem(R.W, (g.randrange(625), g.randrange(625))))
    kappa = build_kappa(R, (0, 0, 1), KElem.from_witt(R.W(3)), eps)
    ex = extract_instanton(kappa, (0, 0, 1))
    for n, e in eps.items():
        assert ex.eps[n].numerator.equal_mod(e.numerator, ex.eps[n].prec - ex.eps[n].den)


def test_ksv_examples():
    R = ring()
    assert check_ksv(R(5), R.zero(), (0, 0, 0))
    seed = random_cy3_seed(5, 1, 5, 6, 1, random.Random(1))
    kappa = telescoped_kappa(seed, 0, 0, 0)
    f = seed.potential
    assert check_ksv(kappa, f, (0, 0, 0))
    assert not check_ksv(kappa + R.gen(0) ** 2, f, (0, 0, 0))
    rec = ksv_potential(kappa, (0, 0, 0))
    assert rec is not None and (rec - (f - R(f.constant()))).is_zero()


@settings(max_examples=8)
@given(st.integers(0, 10**6), st.sampled_from([(5, 1), (5, 2), (7, 1)]))
def test_ksv_pairs_from_crystals_are_integral(seed, shape):
    p, s = shape
    sd = random_cy3_seed(p, s, 5, 4, 1, random.Random(seed))
    fr = symplectic_frame(synth_cy3(sd))
    R = fr.crystal_q.ring
    kappa = fr.kappa[(0, 0, 0)]
    f = (fr.c - R(fr.c.constant())) * R.W.from_fraction(1, 2)
    assert check_ksv(kappa, f, (0, 0, 0))
    rep = integrality_report(extract_instanton(kappa, (0, 0, 0)))
    assert rep.ok and rep.eps0_integral


def test_dwork_examples():
    R = ring(p=5, N=5, D=7)
    t = R.gen(0)
    assert dwork_integrality(R.one())
    assert dwork_integrality(exp_series(t * 5))
    assert not dwork_integrality(exp_series(t))
