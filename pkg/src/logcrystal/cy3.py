"""Ordinary crystals of Calabi-Yau type of weight 3: symplectic frame, Yukawa couplings, mirror map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .cancoord import CanonicalCoordinates, canonical_coordinates, weight1_frame
from .chart import change_chart
from .crystal import AxiomReport, HodgeFCrystal, in_basis, slope_filtration
from .frobenius import FrobLift
from .linalg import smat_block, smat_hstack, smat_inv, smat_mul, smat_transpose, wmat_inv


@dataclass
class CY3Frame:
    """Basis u0, u1^(i), u2^(i), u3 of the crystal in canonical coordinates.

    ``basis`` holds the columns in the order above; kappa is keyed by (i, j, l).
    """

    crystal_q: HodgeFCrystal
    coordinates: CanonicalCoordinates
    basis: list
    connection: list
    frobenius: list
    kappa: dict
    a: list
    b: list
    c: object

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def q(self) -> list:
        return self.coordinates.q

    def to_json(self) -> dict:
        m = self.m
        return {
            "q": [x.to_json() for x in self.q],
            "kappa": [
                {"index": [i, j, l], "value": self.kappa[(i, j, l)].to_json()}
                for i in range(m)
                for j in range(m)
                for l in range(m)
            ],
            "a": [x.to_json() for x in self.a],
            "b": [[x.to_json() for x in row] for row in self.b],
            "c": self.c.to_json(),
        }


def _pair(J, v, w):
    """<v, w> = v^T J w for column vectors given as lists of series."""
    n = len(J)
    acc = None
    for i in range(n):
        for j in range(n):
            t = v[i] * J[i][j] * w[j]
            acc = t if acc is None else acc + t
    return acc


def _column(M, k):
    return [row[k] for row in M]


def _weight1_part(X: HodgeFCrystal, cancel=None):
    """Slope pieces and the ordinary weight-1 sub-crystal spanned by the first two."""
    sf = slope_filtration(X, cancel)
    if len(sf.pieces) != 4 or len(sf.pieces[0][0]) != 1 or len(sf.pieces[3][0]) != 1:
        raise ValueError("not of Calabi-Yau type: Hodge numbers must be (1, m, m, 1)")
    T = sf.change_of_basis
    PhiT, connT = in_basis(X, T)
    k = 1 + len(sf.pieces[1][0])
    idx = list(range(k))
    U = HodgeFCrystal(
        X.ring,
        [smat_block(M, idx, idx) for M in connT],
        smat_block(PhiT, idx, idx),
        [idx, idx[1:]],
    )
    return sf, U


def symplectic_frame(X: HodgeFCrystal, cancel: Callable[[], bool] | None = None) -> CY3Frame:
    R = X.ring
    m = R.m
    if X.pairing is None:
        raise ValueError("a pairing is required")
    if X.rank != 2 * m + 2:
        raise ValueError("rank must be 2m + 2")
    if R.r != m:
        raise ValueError("Calabi-Yau frames are built with all variables logarithmic")
    _, U = _weight1_part(X, cancel)
    qc = canonical_coordinates(U, cancel)
    Xq = change_chart(X, qc.chart)
    sf, Uq = _weight1_part(Xq, cancel)
    fr = weight1_frame(Uq, cancel)
    # normalize so that nabla u1^(i) = d log q_i (x) u0
    E = [[fr.eta[i][0].coeffs[k].constant() for k in range(m)] for i in range(m)]
    try:
        Einv = wmat_inv(E)
    except ZeroDivisionError:
        raise ValueError("Gr nabla not an isomorphism at this precision") from None
    b = [[sum((row[l] * R(Einv[i][l]) for l in range(m)), R.zero()) for i in range(m)] for row in fr.b]
    V = smat_hstack(sf.pieces[0], sf.pieces[1])
    u0 = smat_mul(V, fr.a)
    u1 = smat_mul(V, b)
    J = Xq.pairing
    h2 = sf.pieces[2]
    G = [[_pair(J, _column(u1, i), _column(h2, j)) for j in range(m)] for i in range(m)]
    try:
        Ginv = smat_inv(G)
    except ZeroDivisionError:
        raise ValueError("pairing not perfect at this precision") from None
    u2 = smat_mul(h2, Ginv)
    h3 = sf.pieces[3]
    norm = _pair(J, _column(u0, 0), _column(h3, 0))
    try:
        inv = norm.inverse()
    except (ZeroDivisionError, ArithmeticError):
        raise ValueError("pairing not perfect at this precision") from None
    u3 = [[x * inv for x in row] for row in h3]
    basis = smat_hstack(u0, u1, u2, u3)
    PhiT, connT = in_basis(Xq, basis)
    i0, i1, i2, i3 = 0, list(range(1, m + 1)), list(range(m + 1, 2 * m + 1)), 2 * m + 1
    kappa = {(i, j, l): connT[l][i1[j]][i2[i]] for i in range(m) for j in range(m) for l in range(m)}
    a = [PhiT[i0][i2[i]].div_p(2) for i in range(m)]
    bmat = [[PhiT[i1[j]][i2[i]].div_p(2) for j in range(m)] for i in range(m)]
    c = PhiT[i0][i3].div_p(3)
    return CY3Frame(Xq, qc, basis, connT, PhiT, kappa, a, bmat, c)


def verify_cy3_frame(fr: CY3Frame) -> AxiomReport:
    """Pairing normalization, connection and Frobenius shape, and the flatness relations."""
    R = fr.crystal_q.ring
    W = R.W
    p = W.p
    m = fr.m
    i0, i1, i2, i3 = 0, list(range(1, m + 1)), list(range(m + 1, 2 * m + 1)), 2 * m + 1
    n = 2 * m + 2
    rep = AxiomReport()
    Jb = smat_mul(smat_transpose(fr.basis), smat_mul(fr.crystal_q.pairing, fr.basis))
    want = [[R.zero() for _ in range(n)] for _ in range(n)]
    want[i0][i3], want[i3][i0] = R.one(), -R.one()
    for i in range(m):
        want[i1[i]][i2[i]], want[i2[i]][i1[i]] = R.one(), -R.one()
    ok = all((Jb[i][j] - want[i][j]).is_zero() for i in range(n) for j in range(n))
    rep.record("symplectic", ok, "" if ok else "pairing matrix not standard")
    # connection: columns are images of basis vectors
    conn_want = []
    for l in range(m):
        M = [[R.zero() for _ in range(n)] for _ in range(n)]
        M[i0][i1[l]] = R.one()
        for i in range(m):
            for j in range(m):
                M[i1[j]][i2[i]] = fr.kappa[(i, j, l)]
        M[i2[l]][i3] = -R.one()
        conn_want.append(M)
    ok = all((fr.connection[l][i][j] - conn_want[l][i][j]).is_zero() for l in range(m) for i in range(n) for j in range(n))
    rep.record("connection_shape", ok, "" if ok else "connection not in normal form")
    F = [[R.zero() for _ in range(n)] for _ in range(n)]
    F[i0][i0] = R.one()
    for i in range(m):
        F[i1[i]][i1[i]] = R(p)
        F[i0][i2[i]] = fr.a[i].scale_int(p**2)
        for j in range(m):
            F[i1[j]][i2[i]] = fr.b[i][j].scale_int(p**2)
        F[i2[i]][i2[i]] = R(p**2)
        F[i1[i]][i3] = fr.a[i].scale_int(p**3)
    F[i0][i3] = fr.c.scale_int(p**3)
    F[i3][i3] = R(p**3)
    ok = all((fr.frobenius[i][j] - F[i][j]).is_zero() for i in range(n) for j in range(n))
    rep.record("frobenius_shape", ok, "" if ok else "Frobenius not in normal form")
    for name, res in abck_residuals(fr).items():
        ok = all(x.is_zero() for x in res)
        rep.record(name, ok, "" if ok else f"{name} residual nonzero")
    return rep


def abck_residuals(fr: CY3Frame) -> dict:
    """theta_i c + 2 a_i, theta_l a_i + b_il, theta_l b_ij - (phi kappa_ijl - kappa_ijl)."""
    R = fr.crystal_q.ring
    m = fr.m
    psi = FrobLift.standard_lift(R)
    c_rel = [fr.c.theta(i) + fr.a[i].scale_int(2) for i in range(m)]
    a_rel = [fr.a[i].theta(l) + fr.b[i][l] for i in range(m) for l in range(m)]
    b_rel = [
        fr.b[i][j].theta(l) - (psi.apply(fr.kappa[(i, j, l)]) - fr.kappa[(i, j, l)])
        for i in range(m)
        for j in range(m)
        for l in range(m)
    ]
    return {"c_relation": c_rel, "a_relation": a_rel, "b_relation": b_rel}


def mirror_map(fr: CY3Frame) -> list:
    """q~_i = q_i / (t_i^{-1} q_i)(0) for the log variables; integral by construction."""
    qc = fr.coordinates
    R = qc.q[0].ring
    out = []
    for j, q in enumerate(qc.q):
        if j < R.r:
            lead = qc.units[j].constant()
            if not lead.is_unit():
                raise ArithmeticError("leading coefficient of q is not a unit")
            qt = q.scale(lead.inverse())
        else:
            qt = q
        if not qt.normalize().is_integral():
            raise ArithmeticError("mirror map not integral")
        out.append(qt)
    return out
