"""Frobenius liftings and the transport between the Frobenius structures they define."""

from __future__ import annotations

from itertools import product

from .linalg import smat_add, smat_map, smat_mul, smat_scale, smat_zero
from .logdiff import LogOneForm
from .series import SeriesRing, Substitution, TruncatedSeries, log_series
from .witt import vp_factorial


class FrobLift:
    """phi(t'_i) = t'_i^p * f_i with f_i = 1 mod p, sigma on coefficients."""

    def __init__(self, ring: SeriesRing, f=None):
        self.ring = ring
        W = ring.W
        self.standard = f is None
        if f is None:
            f = [ring.one() for _ in range(ring.m)]
        f = [fi.normalize() for fi in f]
        for fi in f:
            if fi.den or not (fi - 1).is_zero(upto=1):
                raise ValueError("lifting factor must be 1 mod p")
        self.f = f
        images = []
        for i in range(ring.m):
            tp = ring.tprime(i)
            img = (tp**W.p) * f[i]
            images.append(img if i < ring.r else img - 1)
        self.images = images
        self._subst = None

    @classmethod
    def standard_lift(cls, ring: SeriesRing) -> "FrobLift":
        return cls(ring)

    @property
    def substitution(self) -> Substitution:
        if self._subst is None:
            self._subst = Substitution(self.images, self.ring)
        return self._subst

    def apply(self, g: TruncatedSeries) -> TruncatedSeries:
        return self.substitution.apply(g, sigma_power=1)

    def apply_matrix(self, A):
        return smat_map(self.apply, A)

    def dlog_coefficients(self):
        """c[j][i] with phi^*(d log t'_j) = sum_i c[j][i] d log t'_i."""
        R = self.ring
        p = R.W.p
        out = []
        for j in range(R.m):
            inv = self.f[j].inverse()
            row = []
            for i in range(R.m):
                v = self.f[j].theta(i) * inv
                if i == j:
                    v = v + p
                row.append(v)
            out.append(row)
        return out

    def to_json(self):
        return [fi.to_json() for fi in self.f]

    @classmethod
    def from_json(cls, ring: SeriesRing, data) -> "FrobLift":
        return cls(ring, [TruncatedSeries.from_json(ring, x) for x in data])


def apply(phi: FrobLift, g: TruncatedSeries) -> TruncatedSeries:
    return phi.apply(g)


def pullback_form(phi: FrobLift, eta: LogOneForm) -> LogOneForm:
    """phi^* of a log 1-form."""
    c = phi.dlog_coefficients()
    R = phi.ring
    imgs = [phi.apply(x) for x in eta.coeffs]
    out = []
    for i in range(R.m):
        acc = R.zero()
        for j in range(R.m):
            acc = acc + imgs[j] * c[j][i]
        out.append(acc)
    return LogOneForm(out)


def series_divided_power(x: TruncatedSeries, n: int) -> TruncatedSeries:
    """x^n / n! for x in pA."""
    R = x.ring
    if n == 0:
        return R.one()
    y = x.normalize()
    if y.den or not y.is_zero(upto=1):
        raise ArithmeticError("divided power undefined: argument not divisible by p")
    p = R.W.p
    y = y.div_p(1)
    vfact = vp_factorial(n, p)
    unit = 1
    for k in range(2, n + 1):
        unit *= k
    unit //= p**vfact
    return ((y**n) * R.W.from_fraction(1, unit)).mul_p(n - vfact)


def transport_terms(ring: SeriesRing, N: int, p: int):
    """Multi-indices n whose divided-power weight sum(n_i - v_p(n_i!)) stays below N."""
    bound = []
    for _ in range(ring.m):
        k = 0
        while (k + 1) - vp_factorial(k + 1, p) < N:
            k += 1
        bound.append(k)
    out = []
    for n in product(*(range(b + 1) for b in bound)):
        if sum(x - vp_factorial(x, p) for x in n) < N:
            out.append(n)
    out.sort(key=lambda n: (sum(n), n))
    return out


def connection_operators(connection, indices):
    """D_n = prod_i prod_{j < n_i} (nabla(theta_i) - j), as coordinate matrices."""
    R = connection[0][0][0].ring
    rank = len(connection[0])
    m = R.m
    ident = [[R.one() if i == j else R.zero() for j in range(rank)] for i in range(rank)]
    table = {(0,) * m: ident}
    for n in indices:
        if n in table:
            continue
        i = max(k for k, x in enumerate(n) if x)
        prev = tuple(x - 1 if k == i else x for k, x in enumerate(n))
        if prev not in table:
            table.update(connection_operators(connection, [prev]))
        Dp = table[prev]
        Mi = connection[i]
        th = smat_map(lambda a: a.theta(i), Dp)
        nxt = smat_add(th, smat_mul(Mi, Dp))
        k = prev[i]
        if k:
            nxt = smat_add(nxt, smat_scale(Dp, -k))
        table[n] = nxt
    return table


def chi_transport(connection, phi1: FrobLift, phi2: FrobLift):
    """Matrix of chi(phi1, phi2): phi1^*H -> phi2^*H in the pulled-back standard bases.

    ``connection`` is the list of m connection matrices.  Satisfies
    Phi(phi1) = Phi(phi2) * chi(phi1, phi2).
    """
    R = phi1.ring
    W = R.W
    rank = len(connection[0])
    ratio = [(phi1.f[i] * phi2.f[i].inverse()) - 1 for i in range(R.m)]
    indices = transport_terms(R, W.N, W.p)
    table = connection_operators(connection, indices)
    gam = [{} for _ in range(R.m)]
    out = smat_zero(R, rank, rank)
    for n in indices:
        coeff = R.one()
        for i, k in enumerate(n):
            if k:
                if k not in gam[i]:
                    gam[i][k] = series_divided_power(ratio[i], k)
                coeff = coeff * gam[i][k]
        if coeff.is_zero() and min(coeff.pr) >= W.N:
            continue
        img = phi2.apply_matrix(table[n])
        out = smat_add(out, smat_scale(img, coeff))
    return out


def frobenius_matrix(crystal, phi: FrobLift):
    """Phi(phi) = Phi(psi) * chi(phi, psi)."""
    if phi.standard:
        return crystal.frobenius
    psi = FrobLift.standard_lift(phi.ring)
    X = chi_transport(crystal.connection, phi, psi)
    return smat_mul(crystal.frobenius, X)


def log_factors(phi: FrobLift):
    """log f_i, used for the residual of the primitive functional equation."""
    return [log_series(fi) for fi in phi.f]
