"""Hodge F-crystals over the truncated log base.

A crystal of rank n is given in a fixed A-basis e_1..e_n by

* connection matrices M_i: nabla(theta_i) v = theta_i(v) + M_i v on coordinates,
* the Frobenius matrix Phi of the standard lifting psi: F(psi) psi^* v = Phi psi(v),
* an adapted Hodge flag, index sets I_0 ⊇ I_1 ⊇ ... with Fil^i = span(e_k : k in I_i),
* optionally a pairing matrix J: <v, w> = v^T J w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .frobenius import FrobLift, connection_operators
from .linalg import (
    charpoly,
    smat_add,
    smat_block,
    smat_const,
    smat_identity,
    smat_inv,
    smat_is_zero,
    smat_map,
    smat_mul,
    smat_scale,
    smat_sub,
    smat_transpose,
    smat_zero,
    wmat_add,
    wmat_identity,
    wmat_inv,
    wmat_is_zero,
    wmat_mul,
    wmat_sigma,
    wmat_sub,
    wmat_zero,
    zp_kernel,
)
from .series import SeriesRing, TruncatedSeries
from .witt import PrecisionError, WittElem, WittRing, vp_factorial


class Cancelled(Exception):
    """Raised when a cancellation callback asks a long computation to stop."""


def _poll(cancel: Callable[[], bool] | None):
    if cancel is not None and cancel():
        raise Cancelled("computation cancelled")


@dataclass
class HodgeFCrystal:
    ring: SeriesRing
    connection: list  # m matrices
    frobenius: list  # Phi for the standard lifting
    filtration: list  # [I_0, I_1, ..., I_rho] as sorted index lists
    pairing: list | None = None

    @property
    def rank(self) -> int:
        return len(self.frobenius)

    @property
    def weight(self) -> int:
        w = 0
        for i, idx in enumerate(self.filtration):
            if idx:
                w = i
        return w

    def fil(self, i: int) -> list:
        if i <= 0:
            return list(range(self.rank))
        if i >= len(self.filtration):
            return []
        return list(self.filtration[i])

    def with_data(self, **kw) -> "HodgeFCrystal":
        data = dict(
            ring=self.ring,
            connection=self.connection,
            frobenius=self.frobenius,
            filtration=self.filtration,
            pairing=self.pairing,
        )
        data.update(kw)
        return HodgeFCrystal(**data)

    # -- serialization ------------------------------------------------------------
    def to_json(self) -> dict:
        R = self.ring
        W = R.W

        def mat(A):
            return [[a.to_json() for a in row] for row in A]

        out = {
            "prime": W.p,
            "s": W.s,
            "N": W.N,
            "D": R.D,
            "m": R.m,
            "r": R.r,
            "rank": self.rank,
            "weight": self.weight,
            "connection": [mat(M) for M in self.connection],
            "frobenius": mat(self.frobenius),
            "filtration": [list(x) for x in self.filtration],
        }
        if self.pairing is not None:
            out["pairing"] = mat(self.pairing)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "HodgeFCrystal":
        W = WittRing(int(data["prime"]), int(data.get("s", 1)), int(data["N"]))
        R = SeriesRing(W, int(data["m"]), int(data["r"]), int(data["D"]))

        def mat(A):
            return [[TruncatedSeries.from_json(R, a) for a in row] for row in A]

        X = cls(
            ring=R,
            connection=[mat(M) for M in data["connection"]],
            frobenius=mat(data["frobenius"]),
            filtration=[list(x) for x in data["filtration"]],
            pairing=mat(data["pairing"]) if data.get("pairing") is not None else None,
        )
        n = int(data["rank"])
        if len(X.frobenius) != n or any(len(row) != n for row in X.frobenius):
            raise ValueError("frobenius matrix does not match rank")
        if len(X.connection) != R.m:
            raise ValueError("need one connection matrix per variable")
        return X


# -- axioms -------------------------------------------------------------------------


@dataclass
class AxiomReport:
    results: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool, witness: str = ""):
        self.results[name] = (ok, witness)

    @property
    def ok(self) -> bool:
        return all(v[0] for v in self.results.values())

    def failures(self) -> dict:
        return {k: w for k, (ok, w) in self.results.items() if not ok}

    def to_json(self) -> dict:
        return {k: {"pass": ok, "witness": w} for k, (ok, w) in self.results.items()}


def _first_nonzero(A, upto=None, below_degree=None):
    for i, row in enumerate(A):
        for j, a in enumerate(row):
            if not a.is_zero(upto=upto, below_degree=below_degree):
                return (i, j)
    return None


def integrability_defect(X: HodgeFCrystal, i: int, j: int):
    Mi, Mj = X.connection[i], X.connection[j]
    t1 = smat_sub(smat_map(lambda a: a.theta(i), Mj), smat_map(lambda a: a.theta(j), Mi))
    return smat_add(t1, smat_sub(smat_mul(Mi, Mj), smat_mul(Mj, Mi)))


def horizontality_defect(X: HodgeFCrystal, Phi, phi: FrobLift, i: int):
    """theta_i(Phi) + M_i Phi - Phi * sum_j c_ji phi(M_j)."""
    R = X.ring
    c = phi.dlog_coefficients()
    lhs = smat_add(smat_map(lambda a: a.theta(i), Phi), smat_mul(X.connection[i], Phi))
    inner = smat_zero(R, X.rank, X.rank)
    for j in range(R.m):
        inner = smat_add(inner, smat_scale(phi.apply_matrix(X.connection[j]), c[j][i]))
    return smat_sub(lhs, smat_mul(Phi, inner))


def quasi_nilpotence_index(N: int, p: int, rank: int) -> int:
    """A length n at which prod_{j<n}(nabla(theta) - j) must vanish mod p^N."""
    n = 1
    while vp_factorial(n - 1, p) - rank * (len(_digits(n, p)) + 1) < N:
        n += 1
    return n


def _digits(n, p):
    out = []
    while n:
        out.append(n % p)
        n //= p
    return out


def check_axioms(X: HodgeFCrystal, quasi_nilpotence: bool = True) -> AxiomReport:
    R = X.ring
    W = R.W
    n = X.rank
    rep = AxiomReport()
    lim = R.D - 1  # derivations of ordinary variables lose the top degree

    # flag
    fil = X.filtration
    ok = bool(fil) and sorted(fil[0]) == list(range(n))
    wit = "" if ok else "Fil^0 must be the whole module"
    for a, b in zip(fil, fil[1:]):
        if not set(b) <= set(a):
            ok, wit = False, f"flag not decreasing: {b} not inside {a}"
    rep.record("filtration", ok, wit)

    # integrability
    ok, wit = True, ""
    for i in range(R.m):
        for j in range(i + 1, R.m):
            pos = _first_nonzero(integrability_defect(X, i, j), below_degree=lim)
            if pos is not None:
                ok, wit = False, f"[nabla(theta_{i+1}), nabla(theta_{j+1})] has nonzero entry {pos}"
                break
    rep.record("integrability", ok, wit)

    # Griffiths transversality
    ok, wit = True, ""
    for k in range(1, len(fil)):
        src, tgt = X.fil(k), set(X.fil(k - 1))
        for i, M in enumerate(X.connection):
            for col in src:
                for row in range(n):
                    if row not in tgt and not M[row][col].is_zero():
                        ok, wit = False, f"nabla(theta_{i+1}) e_{col} leaves Fil^{k-1} (row {row})"
    rep.record("transversality", ok, wit)

    # p-divisibility
    ok, wit = True, ""
    for k in range(1, len(fil)):
        for col in X.fil(k):
            for row in range(n):
                a = X.frobenius[row][col].normalize()
                if a.den or not a.is_zero(upto=k):
                    ok, wit = False, f"Phi e_{col} not in p^{k} H (row {row})"
                    break
    rep.record("p_divisibility", ok, wit)

    # horizontality of Frobenius
    ok, wit = True, ""
    psi = FrobLift.standard_lift(R)
    for i in range(R.m):
        pos = _first_nonzero(horizontality_defect(X, X.frobenius, psi, i), below_degree=lim)
        if pos is not None:
            ok, wit = False, f"Frobenius not horizontal for theta_{i+1} at entry {pos}"
            break
    rep.record("frobenius_horizontal", ok, wit)

    if quasi_nilpotence:
        ok, wit = True, ""
        n0 = quasi_nilpotence_index(W.N, W.p, n)
        for i in range(R.m):
            idx = tuple(n0 if k == i else 0 for k in range(R.m))
            table = connection_operators(X.connection, [idx])
            pos = _first_nonzero(table[idx])
            if pos is not None:
                ok, wit = False, f"prod_(j<{n0})(nabla(theta_{i+1}) - j) nonzero at entry {pos}"
                break
        rep.record("quasi_nilpotence", ok, wit)

    if X.pairing is not None:
        _check_pairing(X, rep, lim)
    return rep


def _check_pairing(X: HodgeFCrystal, rep: AxiomReport, lim: int):
    R = X.ring
    W = R.W
    J = X.pairing
    rho = X.weight
    sign = -1 if rho % 2 else 1
    JT = smat_transpose(J)
    pos = _first_nonzero(smat_sub(JT, smat_scale(J, sign)))
    rep.record("pairing_symmetry", pos is None, "" if pos is None else f"entry {pos}")
    ok, wit = True, ""
    for i, M in enumerate(X.connection):
        d = smat_add(smat_map(lambda a: a.theta(i), J), smat_add(smat_mul(smat_transpose(M), J), smat_mul(J, M)))
        pos = _first_nonzero(d, below_degree=lim)
        if pos is not None:
            ok, wit = False, f"pairing not horizontal for theta_{i+1} at {pos}"
            break
    rep.record("pairing_horizontal", ok, wit)
    psi = FrobLift.standard_lift(R)
    lhs = smat_mul(smat_mul(smat_transpose(X.frobenius), J), X.frobenius)
    rhs = smat_scale(psi.apply_matrix(J), W.p**rho)
    pos = _first_nonzero(smat_sub(lhs, rhs))
    rep.record("pairing_frobenius", pos is None, "" if pos is None else f"entry {pos}")
    J0 = smat_const(J)
    try:
        wmat_inv(J0)
        rep.record("pairing_perfect", True)
    except ZeroDivisionError:
        rep.record("pairing_perfect", False, "pairing matrix not invertible at t = 0")
    ok, wit = True, ""
    for i in range(rho + 2):
        for a in X.fil(i):
            for b in X.fil(rho + 1 - i):
                if not J[a][b].is_zero():
                    ok, wit = False, f"<e_{a}, e_{b}> nonzero with e_{a} in Fil^{i}"
    rep.record("pairing_orthogonality", ok, wit)


# -- polygons ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polygon:
    slopes: tuple  # sorted Fractions, repeated by multiplicity

    def multiplicities(self) -> dict:
        out = {}
        for s in self.slopes:
            out[s] = out.get(s, 0) + 1
        return out

    def to_json(self):
        return [str(s) for s in self.slopes]


def hodge_polygon(X: HodgeFCrystal) -> Polygon:
    slopes = []
    for i in range(len(X.filtration)):
        k = len(X.fil(i)) - len(X.fil(i + 1))
        slopes += [Fraction(i)] * k
    return Polygon(tuple(sorted(slopes)))


def _lower_hull(points):
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_polygon_of(F0, s: int | None = None) -> Polygon:
    """Slopes of the sigma-semilinear map v -> F0 sigma(v) on W^n."""
    W = F0[0][0].ring
    s = W.s if s is None else s
    P = F0
    for j in range(1, s):
        P = wmat_mul(P, wmat_sigma(F0, j))
    cp = charpoly(P)
    n = len(F0)
    exact, bounds = [], []
    for k, c in enumerate(cp):
        v = c.valuation()
        if v < c.prec:
            exact.append((k, Fraction(v)))
        else:
            bounds.append((k, Fraction(c.prec)))
    if exact[-1][0] != n:
        raise PrecisionError("raise N: determinant of Frobenius vanishes at this precision")
    hull = _lower_hull(exact)

    def hull_at(x):
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= x <= x2:
                return y1 + (y2 - y1) * Fraction(x - x1, x2 - x1)
        return hull[-1][1]

    for k, b in bounds:
        if b < hull_at(k):
            raise PrecisionError("raise N: slopes not separated at this precision")
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = (y2 - y1) / (x2 - x1) / s
        slopes += [slope] * (x2 - x1)
    return Polygon(tuple(sorted(slopes)))


def newton_polygon(X: HodgeFCrystal, frobenius_at_point=None) -> Polygon:
    """Newton polygon at the augmentation (t = 0, standard lifting) unless a fiber is given.

    When the characteristic polynomial is not resolved at this precision, an
    ordinary fiber (detected by the Hodge block criterion) still has its
    Newton polygon equal to the Hodge polygon.
    """
    F0 = frobenius_at_point if frobenius_at_point is not None else smat_const(X.frobenius)
    try:
        return newton_polygon_of(F0)
    except PrecisionError:
        flag = [list(range(X.rank))] + [X.fil(i) for i in range(1, X.weight + 1)]
        if hodge_blocks_ordinary(F0, flag):
            return hodge_polygon(X)
        raise


def hodge_blocks_ordinary(F0, flag) -> bool:
    """Newton = Hodge test needing one digit per Hodge level.

    The block of F0 on the complement of Fil^1 must be invertible mod p; the graph
    of the unit-root part is then solved and the test recurses on the quotient
    divided by p.
    """
    W = F0[0][0].ring
    n = len(F0)
    B = list(flag[1]) if len(flag) > 1 else []
    C = [k for k in range(n) if k not in set(B)]
    if not C:
        return False
    FCC = [[F0[i][j] for j in C] for i in C]
    if not _full_column_rank_mod_p(FCC):
        return False
    if not B:
        return True
    FCB = [[F0[i][j] for j in B] for i in C]
    FBC = [[F0[i][j] for j in C] for i in B]
    FBB = [[F0[i][j] for j in B] for i in B]
    G = wmat_zero(W, len(B), len(C))
    for _ in range(W.N + 2):
        sG = wmat_sigma(G)
        top = wmat_add(FCC, wmat_mul(FCB, sG))
        G = wmat_mul(wmat_add(FBC, wmat_mul(FBB, sG)), wmat_inv(top))
    Q = wmat_sub(FBB, wmat_mul(G, FCB))
    if not all(x.valuation() >= 1 for row in Q for x in row):
        return False
    if min(x.prec for row in Q for x in row) <= 1:
        return False
    Q = [[x.div_p(1) for x in row] for row in Q]
    pos = {k: b for b, k in enumerate(B)}
    sub = [list(range(len(B)))] + [[pos[k] for k in I] for I in flag[2:]]
    return hodge_blocks_ordinary(Q, sub)


def is_ordinary(X: HodgeFCrystal) -> bool:
    return newton_polygon(X) == hodge_polygon(X)


# -- slope filtration ---------------------------------------------------------------------


@dataclass
class SlopeFiltration:
    """Pieces H^(i) (column bases in e-coordinates) of the slope decomposition.

    U_i is spanned by the columns of H^(0), ..., H^(i); H^(i) lies in Fil^i.
    """

    pieces: list
    change_of_basis: list  # T = [H^(0) | H^(1) | ...]
    blocks: list  # column ranges of each piece inside T

    def U(self, i: int):
        cols = []
        for piece in self.pieces[: i + 1]:
            cols.append(piece)
        return [sum((list(P[k]) for P in cols), []) for k in range(len(self.change_of_basis))]


def _graph_fixed_point(Phi, R: SeriesRing, C, B, psi: FrobLift, cancel=None):
    """X with span[I_C; X] stable under v -> Phi psi(v)."""
    W = R.W
    PCC, PCB = smat_block(Phi, C, C), smat_block(Phi, C, B)
    PBC, PBB = smat_block(Phi, B, C), smat_block(Phi, B, B)
    X = smat_zero(R, len(B), len(C))
    if not B:
        return X
    try:
        wmat_inv(smat_const(PCC))
    except ZeroDivisionError:
        raise ValueError("crystal is not ordinary: unit-root block not invertible") from None
    for _ in range(W.N + R.D + 4):
        _poll(cancel)
        pX = psi.apply_matrix(X)
        G = smat_add(PCC, smat_mul(PCB, pX))
        Xn = smat_mul(smat_add(PBC, smat_mul(PBB, pX)), smat_inv(G))
        if all((a - b).is_zero() and a.pr == b.pr for ra, rb in zip(Xn, X) for a, b in zip(ra, rb)):
            return Xn
        X = Xn
    raise PrecisionError("precision exhausted: slope filtration did not stabilize")


def _slope_pieces(Phi, conn, flag, R: SeriesRing, psi: FrobLift, cancel=None):
    """Recursive slope decomposition in the local coordinates 0..len(Phi)-1."""
    n = len(Phi)
    C = [k for k in range(n) if k not in set(flag[1] if len(flag) > 1 else [])]
    B = [k for k in range(n) if k not in set(C)]
    X = _graph_fixed_point(Phi, R, C, B, psi, cancel)
    first = smat_zero(R, n, len(C))
    for a, k in enumerate(C):
        first[k][a] = R.one()
    for b, k in enumerate(B):
        for a in range(len(C)):
            first[k][a] = X[b][a]
    if not B:
        return [first]
    PBB, PCB = smat_block(Phi, B, B), smat_block(Phi, C, B)
    quotPhi = smat_map(lambda a: a.div_p(1), smat_sub(PBB, smat_mul(X, PCB)))
    quotConn = [smat_sub(smat_block(M, B, B), smat_mul(X, smat_block(M, C, B))) for M in conn]
    pos = {k: b for b, k in enumerate(B)}
    quotFlag = [[pos[k] for k in I] for I in flag[1:]]
    quotFlag[0] = list(range(len(B)))
    sub = _slope_pieces(quotPhi, quotConn, quotFlag, R, psi, cancel)
    out = [first]
    for P in sub:
        lifted = smat_zero(R, n, len(P[0]))
        for b, k in enumerate(B):
            lifted[k] = list(P[b])
        out.append(lifted)
    return out


def slope_filtration(X: HodgeFCrystal, cancel: Callable[[], bool] | None = None) -> SlopeFiltration:
    if not is_ordinary(X):
        raise ValueError("crystal is not ordinary")
    R = X.ring
    psi = FrobLift.standard_lift(R)
    flag = [list(range(X.rank))] + [X.fil(i) for i in range(1, X.weight + 1)]
    pieces = _slope_pieces(X.frobenius, X.connection, flag, R, psi, cancel)
    T = [sum((list(P[k]) for P in pieces), []) for k in range(X.rank)]
    blocks, start = [], 0
    for P in pieces:
        w = len(P[0]) if P else 0
        blocks.append(list(range(start, start + w)))
        start += w
    return SlopeFiltration(pieces, T, blocks)


def in_basis(X: HodgeFCrystal, T):
    """Connection and Frobenius matrices in the basis given by the columns of T."""
    R = X.ring
    psi = FrobLift.standard_lift(R)
    Tinv = smat_inv(T)
    Phi = smat_mul(Tinv, smat_mul(X.frobenius, psi.apply_matrix(T)))
    conn = [smat_mul(Tinv, smat_add(smat_map(lambda a: a.theta(i), T), smat_mul(M, T))) for i, M in enumerate(X.connection)]
    return Phi, conn


def verify_slope_filtration(X: HodgeFCrystal, sf: SlopeFiltration) -> AxiomReport:
    R = X.ring
    lim = R.D - 1
    rep = AxiomReport()
    try:
        Phi, conn = in_basis(X, sf.change_of_basis)
        rep.record("direct_sum", True)
    except ZeroDivisionError:
        rep.record("direct_sum", False, "H is not the direct sum of the pieces")
        return rep
    ok, wit = True, ""
    for i, blk in enumerate(sf.blocks):
        later = [k for b in sf.blocks[i + 1 :] for k in b]
        for row in later:
            for col in blk:
                if not Phi[row][col].is_zero():
                    ok, wit = False, f"U_{i} not Frobenius-stable (entry {row},{col})"
                for j, M in enumerate(conn):
                    if not M[row][col].is_zero(below_degree=lim):
                        ok, wit = False, f"U_{i} not stable under nabla(theta_{j+1})"
    rep.record("sub_crystals", ok, wit)
    ok, wit = True, ""
    for i, blk in enumerate(sf.blocks):
        D = smat_block(Phi, blk, blk)
        if any(not a.normalize().is_zero(upto=i) for row in D for a in row):
            ok, wit = False, f"graded piece {i} not divisible by p^{i}"
            continue
        D0 = [[a.normalize().div_p(i).constant() if i else a.constant() for a in row] for row in D]
        try:
            wmat_inv(D0)
        except ZeroDivisionError:
            ok, wit = False, f"graded piece {i} not unit-root after dividing by p^{i}"
    rep.record("unit_root_quotients", ok, wit)
    ok, wit = True, ""
    for i, P in enumerate(sf.pieces):
        allowed = set(X.fil(i))
        for row in range(X.rank):
            if row not in allowed and any(not a.is_zero() for a in P[row]):
                ok, wit = False, f"H^({i}) not inside Fil^{i}"
    rep.record("pieces_in_hodge", ok, wit)
    ok, wit = True, ""
    for i in range(len(sf.pieces)):
        U = sf.U(i)
        F = X.fil(i + 1)
        M = [list(U[k]) + [R.one() if k == f else R.zero() for f in F] for k in range(X.rank)]
        if len(M[0]) != X.rank:
            ok, wit = False, f"rank of U_{i} + Fil^{i+1} is not the rank of H"
            continue
        try:
            wmat_inv(smat_const(M))
        except ZeroDivisionError:
            ok, wit = False, f"H != U_{i} + Fil^{i+1}"
    rep.record("hodge_splitting", ok, wit)
    return rep


# -- unit-root crystals ------------------------------------------------------------------


def _residue_extension_degree(F0, max_mult: int = 4):
    """Smallest multiple k*s (k <= max_mult) over which F0 sigma is trivial mod p."""
    W = F0[0][0].ring
    n = len(F0)
    ident = [[tuple([1 if i == j else 0] + [0] * (W.s - 1)) for j in range(n)] for i in range(n)]
    P = F0
    for j in range(1, W.s):
        P = wmat_mul(P, wmat_sigma(F0, j))
    acc = P
    for k in range(1, max_mult + 1):
        if [[x.residue() for x in row] for row in acc] == ident:
            return k * W.s
        acc = wmat_mul(acc, P)
    return None


def _constant_fixed_basis(F0):
    """B0 in GL_n(W) with B0 = F0 sigma(B0), or an error naming the obstruction."""
    W = F0[0][0].ring
    n = len(F0)
    ident = wmat_identity(W, n)
    if wmat_is_zero(wmat_sub(F0, ident)):
        return ident
    s, p, N = W.s, W.p, W.N
    # Z_p-linear map v -> v - F0 sigma(v) on W^n = Z_p^(n s)
    cols = []
    for i in range(n):
        for k in range(s):
            coords = [0] * s
            coords[k] = 1
            v = [W(0)] * n
            v[i] = WittElem(W, coords)
            sv = [WittElem(W, W.raw_sigma(x.coords, 1)) for x in v]
            img = [v[a] - sum((F0[a][b] * sv[b] for b in range(n)), W(0)) for a in range(n)]
            cols.append([c for x in img for c in x.coords])
    A = [list(row) for row in zip(*cols)]
    ker = zp_kernel(A, p, N)
    chosen = []
    for vec in ker:
        cand = chosen + [[WittElem(W, vec[i * s : (i + 1) * s]) for i in range(n)]]
        M = [[c[row] for c in cand] for row in range(n)]
        if _full_column_rank_mod_p(M):
            chosen = cand
        if len(chosen) == n:
            break
    if len(chosen) < n:
        deg = _residue_extension_degree(F0)
        if deg is None:
            hint = f"no extension of degree <= {4 * s} suffices mod p"
        elif deg == s:
            hint = "trivial mod p but not modulo p^N; an infinite extension is required"
        else:
            hint = f"minimal residue field extension degree {deg}"
        raise ValueError(f"extend residue field: Frobenius at t = 0 is not trivializable over F_{p}^{s} ({hint})")
    return [[chosen[j][i] for j in range(n)] for i in range(n)]


def _full_column_rank_mod_p(M):
    """Column rank over the residue field equals the number of columns."""
    W = M[0][0].ring
    rows = [[x.residue() for x in row] for row in M]
    W1 = W.with_precision(1)
    A = [[WittElem(W1, x) for x in row] for row in rows]
    ncol = len(A[0])
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(A)) if A[i][c].is_unit()), None)
        if piv is None:
            return False
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][c].inverse()
        for i in range(len(A)):
            if i != r and not A[i][c].is_zero():
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
    return True


def unit_root_basis_of(Phi, conn, R: SeriesRing, cancel: Callable[[], bool] | None = None):
    """Columns B with Phi psi(B) = B and nabla(B) = 0 for a unit-root crystal."""
    W = R.W
    psi = FrobLift.standard_lift(R)
    F0 = smat_const(Phi)
    try:
        wmat_inv(F0)
    except ZeroDivisionError:
        raise ValueError("not unit-root: Frobenius not invertible") from None
    B0 = _constant_fixed_basis(F0)
    B = [[R(x) for x in row] for row in B0]
    for _ in range(W.N + R.D + 4):
        _poll(cancel)
        Bn = smat_mul(Phi, psi.apply_matrix(B))
        if all((a - b).is_zero() and a.pr == b.pr for ra, rb in zip(Bn, B) for a, b in zip(ra, rb)):
            B = Bn
            break
        B = Bn
    else:
        raise PrecisionError("precision exhausted: unit-root basis did not converge")
    for i, M in enumerate(conn):
        d = smat_add(smat_map(lambda a: a.theta(i), B), smat_mul(M, B))
        if not smat_is_zero(d, below_degree=R.D - 1):
            raise ArithmeticError("unit-root basis is not horizontal: input is not a crystal")
    return B


def unit_root_basis(X: HodgeFCrystal, cancel: Callable[[], bool] | None = None):
    if X.weight != 0:
        raise ValueError("unit_root_basis needs a crystal with trivial Hodge flag")
    return unit_root_basis_of(X.frobenius, X.connection, X.ring, cancel)
