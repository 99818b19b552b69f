"""Matrices over W and over truncated series rings (plain lists of rows)."""

from __future__ import annotations

from .series import SeriesRing, TruncatedSeries
from .witt import WittElem, WittRing, sigma

# -- matrices over W ------------------------------------------------------------


def wmat_identity(W: WittRing, n: int):
    return [[W(1) if i == j else W(0) for j in range(n)] for i in range(n)]


def wmat_zero(W: WittRing, rows: int, cols: int):
    return [[W(0) for _ in range(cols)] for _ in range(rows)]


def wmat_mul(A, B):
    W = (A[0][0] if A and A[0] else B[0][0]).ring
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = W(0)
            for l in range(k):
                acc = acc + A[i][l] * B[l][j]
            row.append(acc)
        out.append(row)
    return out


def wmat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def wmat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def wmat_sigma(A, j: int = 1):
    return [[sigma(a, j) for a in row] for row in A]


def wmat_transpose(A):
    return [list(col) for col in zip(*A)]


def wmat_inv(A):
    """Inverse over W by Gauss-Jordan with unit pivots."""
    n = len(A)
    if n == 0:
        return []
    W = A[0][0].ring
    M = [list(row) + [W(1) if i == j else W(0) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col].is_unit()), None)
        if piv is None:
            raise ZeroDivisionError("matrix not invertible over W")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


def wmat_is_zero(A, upto: int | None = None) -> bool:
    for row in A:
        for a in row:
            if upto is None:
                if not a.is_zero():
                    return False
            elif not a.equal_mod(0, min(upto, a.prec)):
                return False
    return True


def charpoly(A):
    """Characteristic polynomial det(x I - A), coefficients from x^n down.

    Division-free (Berkowitz), so it is valid over any commutative ring.
    """
    n = len(A)
    W = A[0][0].ring
    poly = [W(1)]
    for k in range(n):
        # leading k x k block has char poly `poly`; extend by row/column k
        R = [A[k][j] for j in range(k)]
        C = [A[i][k] for i in range(k)]
        a = A[k][k]
        Ak = [row[:k] for row in A[:k]]
        # Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        col = [W(1), -a]
        vec = C
        for _ in range(k):
            col.append(-sum((R[j] * vec[j] for j in range(k)), W(0)))
            vec = [sum((Ak[i][j] * vec[j] for j in range(k)), W(0)) for i in range(k)]
        new = []
        for i in range(k + 2):
            acc = W(0)
            for j in range(k + 1):
                if 0 <= i - j < len(col):
                    acc = acc + col[i - j] * poly[j]
            new.append(acc)
        poly = new
    return poly


def wmat_det(A):
    n = len(A)
    cp = charpoly(A)
    return cp[-1] if n % 2 == 0 else -cp[-1]


# -- matrices over series ---------------------------------------------------------


def smat_identity(R: SeriesRing, n: int):
    return [[R.one() if i == j else R.zero() for j in range(n)] for i in range(n)]


def smat_zero(R: SeriesRing, rows: int, cols: int):
    return [[R.zero() for _ in range(cols)] for _ in range(rows)]


def smat_from_w(R: SeriesRing, A):
    return [[R(a) for a in row] for row in A]


def smat_mul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    R = B[0][0].ring if m else A[0][0].ring
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for l in range(k):
                t = A[i][l] * B[l][j]
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else R.zero())
        out.append(row)
    return out


def smat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def smat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def smat_scale(A, x):
    return [[a * x for a in row] for row in A]


def smat_map(f, A):
    return [[f(a) for a in row] for row in A]


def smat_theta(A, i: int):
    return smat_map(lambda a: a.theta(i), A)


def smat_sigma(A, j: int = 1):
    return smat_map(lambda a: a.sigma(j), A)


def smat_substitute(A, images, target=None):
    return smat_map(lambda a: a.substitute(images, target), A)


def smat_const(A):
    return [[a.constant() for a in row] for row in A]


def smat_transpose(A):
    return [list(col) for col in zip(*A)]


def smat_block(A, rows, cols):
    return [[A[i][j] for j in cols] for i in rows]


def smat_hstack(*blocks):
    return [sum((list(b[i]) for b in blocks), []) for i in range(len(blocks[0]))]


def smat_vstack(*blocks):
    out = []
    for b in blocks:
        out.extend(list(r) for r in b)
    return out


def smat_is_zero(A, upto: int | None = None, below_degree: int | None = None) -> bool:
    return all(a.is_zero(upto=upto, below_degree=below_degree) for row in A for a in row)


def smat_min_precision(A, below_degree: int | None = None) -> int:
    return min(a.min_precision(below_degree) for row in A for a in row)


def smat_normalize(A):
    return smat_map(lambda a: a.normalize(), A)


def smat_inv(A):
    """Inverse over the local ring A = W[[t]]: pivots need unit constant terms."""
    n = len(A)
    if n == 0:
        return []
    R = A[0][0].ring
    M = [list(row) + [R.one() if i == j else R.zero() for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            e = M[r][col].normalize()
            if e.den == 0 and WittElem(R.W, e.c[0], e.pr[0]).is_unit():
                piv = r
                break
        if piv is None:
            raise ZeroDivisionError("matrix not invertible over the series ring")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col:
                f = M[r][col]
                if f.is_zero() and min(f.pr) >= R.W.N:
                    continue
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


# -- integer matrices modulo p^N --------------------------------------------------------


def zp_kernel(A, p: int, N: int):
    """Vectors spanning the saturated kernel of an integer matrix over Z_p.

    Diagonalizes A modulo p^N by row and column operations with pivots of minimal
    valuation; kernel vectors come from the columns whose invariant factor is 0 at
    this precision.
    """
    mod = p**N
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [[x % mod for x in row] for row in A]
    Q = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]  # column ops
    r = 0

    def val(x):
        if x % mod == 0:
            return N
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    while r < min(rows, cols):
        best = None
        for i in range(r, rows):
            for j in range(r, cols):
                v = val(M[i][j])
                if v < N and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        M[r], M[i] = M[i], M[r]
        for row in M:
            row[r], row[j] = row[j], row[r]
        for row in Q:
            row[r], row[j] = row[j], row[r]
        piv = M[r][r]
        unit = piv // p**v
        uinv = pow(unit, -1, mod)
        for i2 in range(rows):
            if i2 != r and M[i2][r] % mod:
                f = (M[i2][r] // p**v) * uinv % mod
                M[i2] = [(a - f * b) % mod for a, b in zip(M[i2], M[r])]
        for j2 in range(r + 1, cols):
            if M[r][j2] % mod:
                f = (M[r][j2] // p**v) * uinv % mod
                for row in M:
                    row[j2] = (row[j2] - f * row[r]) % mod
                for row in Q:
                    row[j2] = (row[j2] - f * row[r]) % mod
        r += 1
    return [[Q[i][j] % mod for i in range(cols)] for j in range(r, cols)]
