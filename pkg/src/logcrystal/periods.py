"""W-valued log points of the base, their periods and the group law on them."""

from __future__ import annotations

from dataclasses import dataclass

from .crystal import HodgeFCrystal
from .frobenius import connection_operators, transport_terms
from .linalg import wmat_add, wmat_inv, wmat_mul, wmat_sigma, wmat_sub, wmat_zero
from .witt import WittRing, divided_power, log_unit


@dataclass
class LogWPoint:
    """beta_j in 1 + pW: the unit of t_j (log variables) or the value of t'_j."""

    beta: list

    def __post_init__(self):
        for b in self.beta:
            if (b - 1).valuation() < 1:
                raise ValueError("point coordinates must be 1 mod p")

    def to_json(self) -> list:
        return [b.to_json() for b in self.beta]


def add_points(x: LogWPoint, y: LogWPoint) -> LogWPoint:
    return LogWPoint([a * b for a, b in zip(x.beta, y.beta)])


def neutral(W: WittRing, m: int) -> LogWPoint:
    return LogWPoint([W(1)] * m)


def _normal_form_blocks(X: HodgeFCrystal):
    """Index lists (A, B) of the unit-root and Fil^1 basis vectors, after checking the shape."""
    R = X.ring
    p = R.W.p
    B = X.fil(1)
    A = [k for k in range(X.rank) if k not in set(B)]
    for i in range(X.rank):
        for j in range(X.rank):
            want = 1 if (i == j and i in A) else (p if i == j else 0)
            if not (X.frobenius[i][j] - want).is_zero():
                raise ValueError("X not in normal form: Frobenius is not diag(1, p)")
    for M in X.connection:
        for i in range(X.rank):
            for j in range(X.rank):
                e = M[i][j]
                if i in A and j in B:
                    if not (e - e.constant()).is_zero():
                        raise ValueError("X not in normal form: connection not constant")
                elif not e.is_zero():
                    raise ValueError("X not in normal form: connection outside the (a, b) block")
    return A, B


def transport_matrix(X: HodgeFCrystal, chi: LogWPoint):
    """Identification of the fiber at chi with the fiber at the neutral point."""
    R = X.ring
    W = R.W
    diff = [b - 1 for b in chi.beta]
    indices = transport_terms(R, W.N, W.p)
    table = connection_operators(X.connection, indices)
    zero = [W(0)] * R.m
    Y = wmat_zero(W, X.rank, X.rank)
    for n in indices:
        coeff = W(1)
        for i, k in enumerate(n):
            if k:
                coeff = coeff * divided_power(diff[i], k)
        if coeff.is_zero():
            continue
        D = [[a.evaluate(zero) for a in row] for row in table[n]]
        Y = wmat_add(Y, [[x * coeff for x in row] for row in D])
    return Y


def periods(X: HodgeFCrystal, chi: LogWPoint):
    """varpi[j][i]: the transported Fil^1 is spanned by b_j + sum_i varpi_ji a_i."""
    A, B = _normal_form_blocks(X)
    Y = transport_matrix(X, chi)
    Ybb = [[Y[i][j] for j in B] for i in B]
    Yab = [[Y[i][j] for j in B] for i in A]
    G = wmat_mul(Yab, wmat_inv(Ybb))  # graph over the b coordinates
    return [[G[i][j] for i in range(len(A))] for j in range(len(B))]


def expected_periods(X: HodgeFCrystal, chi: LogWPoint):
    """sum_k (residue of d log t_k in eta_ji) * log beta_k."""
    A, B = _normal_form_blocks(X)
    R = X.ring
    logs = [log_unit(b) for b in chi.beta]
    out = []
    for j in B:
        row = []
        for i in A:
            acc = R.W(0)
            for k in range(R.m):
                acc = acc + X.connection[k][i][j].constant() * logs[k]
            row.append(acc)
        out.append(row)
    return out


def slope_complement(F0, A, B):
    """Graph Z (rows A, columns B) of the F-stable submodule of slope >= 1 in a fiber."""
    W = F0[0][0].ring
    Faa = [[F0[i][j] for j in A] for i in A]
    Fab = [[F0[i][j] for j in B] for i in A]
    Fba = [[F0[i][j] for j in A] for i in B]
    Fbb = [[F0[i][j] for j in B] for i in B]
    Faa_inv = wmat_inv(Faa)
    Z = wmat_zero(W, len(A), len(B))
    for _ in range(W.N + 2):
        sZ = wmat_sigma(Z)
        K = wmat_add(wmat_mul(Fba, sZ), Fbb)
        Z = wmat_sigma(wmat_mul(Faa_inv, wmat_sub(wmat_mul(Z, K), Fab)), -1)
    return Z


def hodge_equals_slope(X: HodgeFCrystal, chi: LogWPoint) -> bool:
    """The transported Hodge flag at chi coincides with the slope flag of the neutral fiber."""
    A, B = _normal_form_blocks(X)
    F0 = [[a.constant() for a in row] for row in X.frobenius]
    Z = slope_complement(F0, A, B)
    varpi = periods(X, chi)
    return all(varpi[j][i] == Z[i][j] for i in range(len(A)) for j in range(len(B)))


def period_check(X: HodgeFCrystal, chi: LogWPoint) -> tuple:
    got = periods(X, chi)
    want = expected_periods(X, chi)
    ok = all(a == b for ra, rb in zip(got, want) for a, b in zip(ra, rb))
    return got, want, ok
