"""Crystals over the log point, Teichmuller points and pullbacks along them."""

from __future__ import annotations

from dataclasses import dataclass, field

from .crystal import HodgeFCrystal
from .frobenius import FrobLift, connection_operators, frobenius_matrix, transport_terms
from .linalg import (
    wmat_add,
    wmat_identity,
    wmat_inv,
    wmat_is_zero,
    wmat_mul,
    wmat_sigma,
    wmat_sub,
    wmat_zero,
)
from .series import SeriesRing
from .witt import WittRing, divided_power, sigma, sigma_inv, teichmuller


@dataclass
class LogPointFCrystal:
    """W-module with commuting nilpotent operators N_i and sigma-semilinear Frobenius F."""

    W: WittRing
    nilpotents: list
    frobenius: list
    filtration: list | None = None

    @property
    def rank(self) -> int:
        return len(self.frobenius)

    def commutators_vanish(self) -> bool:
        N = self.nilpotents
        return all(
            wmat_is_zero(wmat_sub(wmat_mul(N[i], N[j]), wmat_mul(N[j], N[i])))
            for i in range(len(N))
            for j in range(i + 1, len(N))
        )

    def nilpotent(self) -> bool:
        """Each N_i^rank vanishes mod p (quasi-nilpotence on the residue field)."""
        for Ni in self.nilpotents:
            P = wmat_identity(self.W, self.rank)
            for _ in range(self.rank):
                P = wmat_mul(P, Ni)
            if not wmat_is_zero(P, upto=1):
                return False
        return True

    def frobenius_relation_defect(self, i: int):
        """N_i F - p F sigma(N_i)."""
        N, F = self.nilpotents[i], self.frobenius
        lhs = wmat_mul(N, F)
        rhs = [[x.mul_p(1) for x in row] for row in wmat_mul(F, wmat_sigma(N))]
        return wmat_sub(lhs, rhs)

    def check(self) -> dict:
        return {
            "commuting": self.commutators_vanish(),
            "nilpotent": self.nilpotent(),
            "frobenius_relation": all(wmat_is_zero(self.frobenius_relation_defect(i)) for i in range(len(self.nilpotents))),
        }

    def conjugate(self, Y):
        """The same structure after the change of basis v -> Y v (Y invertible over W)."""
        Yinv = wmat_inv(Y)
        N = [wmat_mul(Y, wmat_mul(Ni, Yinv)) for Ni in self.nilpotents]
        F = wmat_mul(Y, wmat_mul(self.frobenius, wmat_sigma(Yinv)))
        return LogPointFCrystal(self.W, N, F, self.filtration)

    def to_json(self) -> dict:
        mat = lambda A: [[x.to_json() for x in row] for row in A]  # noqa: E731
        return {
            "nilpotents": [mat(Ni) for Ni in self.nilpotents],
            "frobenius": mat(self.frobenius),
            "filtration": self.filtration,
        }


def connection_to_nilpotents(X: HodgeFCrystal) -> LogPointFCrystal:
    """A crystal over the log point (degree-1 truncation, all variables logarithmic)."""
    R = X.ring
    if R.D != 1 or R.r != R.m:
        raise ValueError("expected a crystal over the log point (D = 1, r = m)")
    N = [[[a.constant() for a in row] for row in M] for M in X.connection]
    F = [[a.constant() for a in row] for row in X.frobenius]
    return LogPointFCrystal(R.W, N, F, [list(x) for x in X.filtration])


def nilpotents_to_connection(Y: LogPointFCrystal) -> HodgeFCrystal:
    l = len(Y.nilpotents)
    R = SeriesRing(Y.W, l, l, 1)
    conn = [[[R(x) for x in row] for row in Ni] for Ni in Y.nilpotents]
    Phi = [[R(x) for x in row] for row in Y.frobenius]
    flag = Y.filtration if Y.filtration is not None else [list(range(Y.rank))]
    return HodgeFCrystal(R, conn, Phi, flag)


@dataclass
class LogWPointMap:
    """A W-point of the base: t_i -> 0 with unit x_i (i < r), t_i -> eps_i in pW (i >= r).

    ``monoid[i]`` is the image of the generator of t_i in N^l (default: the i-th basis vector).
    """

    W: WittRing
    units: list
    eps: list
    monoid: list = field(default_factory=list)

    def __post_init__(self):
        if not self.monoid:
            r = len(self.units)
            self.monoid = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
        for v in self.monoid:
            if not any(v):
                raise ValueError("monoid map sends a generator to 0")

    @property
    def values(self) -> list:
        """Coordinates t_i at the point (0 for log variables)."""
        return [self.W(0)] * len(self.units) + list(self.eps)

    def twisted_values(self) -> list:
        """t'_i at the point, with the unit x_i standing in for the log variables."""
        return list(self.units) + [e + 1 for e in self.eps]

    def to_json(self) -> dict:
        return {
            "units": [x.to_json() for x in self.units],
            "eps": [x.to_json() for x in self.eps],
            "monoid": self.monoid,
        }


def augmentation(R: SeriesRing, residues=None) -> LogWPointMap:
    """Residue data of the point t = 0: Teichmuller representatives g0 for the log units."""
    W = R.W
    residues = residues if residues is not None else [1] * R.r
    units = [teichmuller(W, g) for g in residues]
    return LogWPointMap(W, units, [W(0)] * (R.m - R.r))


def teichmuller_point(phi: FrobLift, e0: LogWPointMap) -> LogWPointMap:
    """The unique lifting e of e0 with e o phi = sigma o e."""
    R = phi.ring
    W = R.W
    r, m = R.r, R.m
    eps = [W(0)] * (m - r)
    for _ in range(W.N + 2):
        pt = [W(0)] * r + eps
        new = []
        for k in range(r, m):
            val = phi.f[k].evaluate(pt)
            new.append(sigma_inv((eps[k - r] + 1) ** W.p * val - 1))
        if all(a == b and a.prec == b.prec for a, b in zip(new, eps)):
            break
        eps = new
    pt = [W(0)] * r + eps
    units = []
    for i in range(r):
        gamma = phi.f[i].evaluate(pt)
        x = e0.units[i]
        for _ in range(W.N + 2):
            x = sigma_inv(x**W.p * gamma)
        units.append(x)
    return LogWPointMap(W, units, eps, [list(v) for v in e0.monoid])


def frobenius_defect(phi: FrobLift, e: LogWPointMap) -> list:
    """e o phi - sigma o e on the twisted coordinates (all zero for a Teichmuller point)."""
    R = phi.ring
    W = R.W
    pt = e.values
    tw = e.twisted_values()
    out = []
    for i in range(R.m):
        lhs = tw[i] ** W.p * phi.f[i].evaluate(pt)
        out.append(lhs - sigma(tw[i]))
    return out


def pullback(X: HodgeFCrystal, e: LogWPointMap, phi: FrobLift) -> LogPointFCrystal:
    R = X.ring
    W = R.W
    pt = e.values
    Mvals = [[[a.evaluate(pt) for a in row] for row in X.connection[nu]] for nu in range(R.r)]
    l = len(e.monoid[0]) if e.monoid else 0
    N = []
    for mu in range(l):
        acc = wmat_zero(W, X.rank, X.rank)
        for nu in range(R.r):
            k = e.monoid[nu][mu]
            if k:
                acc = wmat_add(acc, [[x * k for x in row] for row in Mvals[nu]])
        N.append(acc)
    Phi = frobenius_matrix(X, phi)
    F = [[a.evaluate(pt) for a in row] for row in Phi]
    return LogPointFCrystal(W, N, F, [list(x) for x in X.filtration])


def compare_pullbacks(X: HodgeFCrystal, e0: LogWPointMap, phi1: FrobLift, phi2: FrobLift):
    """Matrix Y of the identification e1^*H -> e2^*H; Y conjugates the first pullback to the second."""
    R = X.ring
    W = R.W
    e1 = teichmuller_point(phi1, e0)
    e2 = teichmuller_point(phi2, e0)
    v1, v2 = e1.twisted_values(), e2.twisted_values()
    diff = [a * b.inverse() - 1 for a, b in zip(v1, v2)]
    indices = transport_terms(R, W.N, W.p)
    table = connection_operators(X.connection, indices)
    pt = e2.values
    Y = wmat_zero(W, X.rank, X.rank)
    for n in indices:
        coeff = W(1)
        for i, k in enumerate(n):
            if k:
                coeff = coeff * divided_power(diff[i], k)
        if coeff.is_zero():
            continue
        D = [[a.evaluate(pt) for a in row] for row in table[n]]
        Y = wmat_add(Y, [[x * coeff for x in row] for row in D])
    return Y, pullback(X, e1, phi1), pullback(X, e2, phi2)
