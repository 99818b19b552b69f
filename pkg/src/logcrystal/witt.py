"""Truncated Witt vectors W(F_{p^s}) mod p^N with capped absolute precision.

Elements are stored on the power basis 1, z, ..., z^{s-1} of a Teichmuller
generator z (a primitive (p^s - 1)-th root of unity), so the Frobenius acts by
z -> z^p and Teichmuller representatives are exact.

Two layers live here.  ``WittRing`` exposes raw arithmetic on coordinate
tuples (used in the inner loops of the series code) and ``WittElem`` is the
user-facing immutable element carrying its own absolute precision.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

from sympy import isprime

Coords = tuple


class PrecisionError(ArithmeticError):
    """Raised when a computation needs digits that are not known."""


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _ilog(n: int, p: int) -> int:
    k = 0
    while p ** (k + 1) <= n:
        k += 1
    return k


def vp_factorial(n: int, p: int) -> int:
    v, q = 0, p
    while q <= n:
        v += n // q
        q *= p
    return v


def _poly_mulmod_p(a, b, f, p):
    """Multiply polynomials (low-first coefficient lists) mod (f, p); f monic."""
    s = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(len(prod) - 1, s - 1, -1):
        c = prod[k]
        if c:
            for i in range(s + 1):
                prod[k - s + i] = (prod[k - s + i] - c * f[i]) % p
    prod = prod[:s] + [0] * max(0, s - len(prod))
    return prod


def _is_irreducible_mod_p(f, p):
    from sympy import Poly
    from sympy.abc import x

    poly = Poly(list(reversed(f)), x, modulus=p)
    return poly.degree() == len(f) - 1 and poly.is_irreducible


@lru_cache(maxsize=None)
def _primitive_poly(p: int, s: int) -> tuple:
    """Smallest monic irreducible degree-s polynomial mod p with a primitive root."""
    q = p**s
    order = q - 1
    from sympy import factorint

    prime_factors = list(factorint(order))
    for code in range(p**s):
        low = []
        c = code
        for _ in range(s):
            low.append(c % p)
            c //= p
        f = low + [1]
        if f[0] == 0:
            continue
        if not _is_irreducible_mod_p(f, p):
            continue
        # x must have order exactly q - 1 in F_p[x]/(f)
        ok = True
        for ell in prime_factors:
            e = order // ell
            acc, base = [1] + [0] * (s - 1), [0, 1] + [0] * (s - 2)
            while e:
                if e & 1:
                    acc = _poly_mulmod_p(acc, base, f, p)
                base = _poly_mulmod_p(base, base, f, p)
                e >>= 1
            if acc == [1] + [0] * (s - 1):
                ok = False
                break
        if ok:
            return tuple(f)
    raise ValueError(f"no primitive polynomial of degree {s} mod {p}")


class WittRing:
    """The ring W(F_{p^s}) / p^N.

    ``N`` is the precision cap: no element is ever known beyond p^N.
    """

    def __init__(self, p: int, s: int = 1, N: int = 10):
        if not isinstance(p, int) or not isprime(p) or p == 2:
            raise ValueError(f"p must be an odd prime, got {p!r}")
        if s < 1 or N < 1:
            raise ValueError("need s >= 1 and N >= 1")
        self.p, self.s, self.N = p, s, N
        self.q = p**s
        self.mod = p**N
        self.zero = (0,) * s
        self.one = (1,) + (0,) * (s - 1)
        if s == 1:
            self.minpoly = (self.mod - 1, 1)  # basis {1}; generator data kept trivial
        else:
            self.minpoly = self._teichmuller_minpoly()
            # reduction of z^k, s <= k <= 2s-2, on the power basis
            self._red = {}
            cur = [(-c) % self.mod for c in self.minpoly[:s]]
            self._red[s] = tuple(cur)
            for k in range(s + 1, 2 * s - 1):
                # z * cur
                top = cur[-1]
                nxt = [0] + cur[:-1]
                nxt = [(nxt[i] + top * self._red[s][i]) % self.mod for i in range(s)]
                self._red[k] = tuple(nxt)
                cur = nxt
        self._sigma_mats = [self._sigma_power_matrix(j) for j in range(s)]

    # -- construction helpers -------------------------------------------------
    def _teichmuller_minpoly(self):
        p, s, mod = self.p, self.s, self.mod
        f = list(_primitive_poly(p, s))
        # arithmetic in Z/p^N[x]/(f) with f lifted naively
        def mulf(a, b):
            prod = [0] * (2 * s - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        prod[i + j] += x * y
            for k in range(2 * s - 2, s - 1, -1):
                c = prod[k] % mod
                if c:
                    for i in range(s + 1):
                        prod[k - s + i] -= c * f[i]
            return [c % mod for c in prod[:s]]

        def powf(a, e):
            acc = [1] + [0] * (s - 1)
            while e:
                if e & 1:
                    acc = mulf(acc, a)
                a = mulf(a, a)
                e >>= 1
            return acc

        z = [0, 1] + [0] * (s - 2)
        for _ in range(self.N):
            z = powf(z, self.q)
        # express z^s in terms of 1, z, ..., z^{s-1}: solve sum c_i z^i = z^s
        cols = [[1] + [0] * (s - 1)]
        for _ in range(1, s + 1):
            cols.append(mulf(cols[-1], z))
        A = [[cols[j][i] for j in range(s)] for i in range(s)]
        rhs = [cols[s][i] for i in range(s)]
        sol = _solve_mod(A, rhs, p, mod)
        return tuple([(-c) % mod for c in sol] + [1])

    def _sigma_power_matrix(self, j):
        # column i = coordinates of z^{i p^j}
        if self.s == 1:
            return None
        cols = []
        for i in range(self.s):
            cols.append(self.raw_pow_z(i * self.p**j))
        return cols

    def raw_pow_z(self, k: int) -> Coords:
        if self.s == 1:
            return self.one
        k %= self.q - 1
        base = (0, 1) + (0,) * (self.s - 2)
        return self.raw_pow(base, k)

    # -- raw coordinate arithmetic -------------------------------------------
    def reduce(self, a: Iterable[int], modulus: int | None = None) -> Coords:
        m = self.mod if modulus is None else modulus
        return tuple(x % m for x in a)

    def raw_add(self, a, b):
        m = self.mod
        return tuple((x + y) % m for x, y in zip(a, b))

    def raw_sub(self, a, b):
        m = self.mod
        return tuple((x - y) % m for x, y in zip(a, b))

    def raw_neg(self, a):
        m = self.mod
        return tuple((-x) % m for x in a)

    def raw_scale(self, a, n: int):
        m = self.mod
        return tuple((x * n) % m for x in a)

    def raw_mul(self, a, b):
        m = self.mod
        if self.s == 1:
            return ((a[0] * b[0]) % m,)
        s = self.s
        prod = [0] * (2 * s - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        out = prod[:s]
        for k in range(s, 2 * s - 1):
            c = prod[k]
            if c:
                red = self._red[k]
                for i in range(s):
                    out[i] += c * red[i]
        return tuple(x % m for x in out)

    def raw_pow(self, a, e: int):
        acc = self.one
        while e:
            if e & 1:
                acc = self.raw_mul(acc, a)
            a = self.raw_mul(a, a)
            e >>= 1
        return acc

    def raw_sigma(self, a, j: int = 1):
        j %= self.s
        if self.s == 1 or j == 0:
            return tuple(a)
        cols = self._sigma_mats[j]
        out = [0] * self.s
        for i, x in enumerate(a):
            if x:
                col = cols[i]
                for k in range(self.s):
                    out[k] += x * col[k]
        return tuple(x % self.mod for x in out)

    def raw_inv(self, a):
        """Inverse of a unit (all digits, mod p^N)."""
        p, m = self.p, self.mod
        if self.s == 1:
            if a[0] % p == 0:
                raise ZeroDivisionError("not a unit")
            return (pow(a[0], -1, m),)
        abar = tuple(x % p for x in a)
        if not any(abar):
            raise ZeroDivisionError("not a unit")
        # inverse mod p as a^{q-2}, then Newton lifting
        y = self.raw_pow(a, self.q - 2)
        y = tuple(x % p for x in y)
        prec = 1
        two = self.raw_scale(self.one, 2)
        while prec < self.N:
            y = self.raw_mul(y, self.raw_sub(two, self.raw_mul(a, y)))
            prec *= 2
        return y

    def raw_valuation(self, a, prec: int | None = None) -> int:
        cap = self.N if prec is None else prec
        v = cap
        p = self.p
        for x in a:
            x %= p**cap if cap > 0 else 1
            if x:
                w = vp_int(x, p)
                if w < v:
                    v = w
        return v

    def raw_is_unit(self, a) -> bool:
        return any(x % self.p for x in a)

    def raw_div_p(self, a, k: int = 1):
        """Exact division of coordinates by p^k (caller checks divisibility)."""
        pk = self.p**k
        return tuple((x % self.mod) // pk for x in a)

    # -- element constructors -------------------------------------------------
    def __call__(self, value=0, prec: int | None = None) -> "WittElem":
        if isinstance(value, WittElem):
            return WittElem(self, value.coords, value.prec if prec is None else min(prec, value.prec))
        if isinstance(value, int):
            coords = (value,) + (0,) * (self.s - 1)
        else:
            coords = tuple(int(x) for x in value)
            if len(coords) != self.s:
                raise ValueError(f"expected {self.s} coordinates")
        return WittElem(self, coords, self.N if prec is None else prec)

    def from_fraction(self, num: int, den: int) -> "WittElem":
        """The p-adic integer num/den (den must be prime to p)."""
        if den % self.p == 0:
            raise ZeroDivisionError("denominator divisible by p")
        return self((num * pow(den, -1, self.mod)) % self.mod)

    def gen(self) -> "WittElem":
        """The Teichmuller generator z."""
        if self.s == 1:
            raise ValueError("s = 1 has no nontrivial generator")
        return self((0, 1) + (0,) * (self.s - 2))

    def __eq__(self, other):
        return isinstance(other, WittRing) and (self.p, self.s, self.N) == (other.p, other.s, other.N)

    def __hash__(self):
        return hash((self.p, self.s, self.N))

    def __repr__(self):
        return f"WittRing(p={self.p}, s={self.s}, N={self.N})"

    def with_precision(self, N: int) -> "WittRing":
        return WittRing(self.p, self.s, N)

    # -- residue field --------------------------------------------------------
    def residue_elements(self):
        """All elements of F_{p^s} as coordinate tuples mod p."""
        out = []
        for code in range(self.q):
            t = []
            for _ in range(self.s):
                t.append(code % self.p)
                code //= self.p
            out.append(tuple(t))
        return out


def _solve_mod(A, b, p, mod):
    """Solve A x = b over Z/mod for A invertible mod p (Gauss with unit pivots)."""
    n = len(A)
    M = [list(row) + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] % p)
        M[col], M[piv] = M[piv], M[col]
        inv = pow(M[col][col], -1, mod)
        M[col] = [(x * inv) % mod for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] % mod:
                f = M[r][col]
                M[r] = [(x - f * y) % mod for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


class WittElem:
    """Immutable element of W mod p^prec (prec <= ring.N)."""

    __slots__ = ("ring", "coords", "prec")

    def __init__(self, ring: WittRing, coords: Sequence[int], prec: int | None = None):
        prec = ring.N if prec is None else max(0, min(prec, ring.N))
        pk = ring.p**prec
        self.ring = ring
        self.coords = tuple(int(x) % pk for x in coords)
        self.prec = prec

    # -- basic queries --------------------------------------------------------
    def valuation(self) -> int:
        """Valuation; equals ``prec`` for an element indistinguishable from 0."""
        return self.ring.raw_valuation(self.coords, self.prec)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_unit(self) -> bool:
        return self.prec > 0 and self.ring.raw_is_unit(self.coords)

    def residue(self) -> tuple:
        return tuple(x % self.ring.p for x in self.coords)

    def to_int(self) -> int:
        """The Z_p-coordinate (only meaningful for elements of the prime subring)."""
        return self.coords[0]

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def _coerce(self, other) -> "WittElem":
        if isinstance(other, WittElem):
            if other.ring.p != self.ring.p or other.ring.s != self.ring.s:
                raise TypeError("incompatible Witt rings")
            return other
        if isinstance(other, int):
            return WittElem(self.ring, (other,) + (0,) * (self.ring.s - 1))
        return NotImplemented

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return WittElem(self.ring, self.ring.raw_add(self.coords, other.coords), min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return WittElem(self.ring, self.ring.raw_neg(self.coords), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return WittElem(self.ring, self.ring.raw_sub(self.coords, other.coords), min(self.prec, other.prec))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prec = min(self.prec + other.valuation(), other.prec + self.valuation())
        return WittElem(self.ring, self.ring.raw_mul(self.coords, other.coords), prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        acc = WittElem(self.ring, self.ring.one)
        base = self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def inverse(self) -> "WittElem":
        if not self.is_unit():
            raise ZeroDivisionError("element is not a unit at its precision")
        return WittElem(self.ring, self.ring.raw_inv(self.coords), self.prec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def mul_p(self, k: int = 1) -> "WittElem":
        r = self.ring
        return WittElem(r, r.raw_scale(self.coords, r.p**k), self.prec + k)

    def div_p(self, k: int = 1) -> "WittElem":
        """Exact division by p^k; the element must be divisible."""
        if self.valuation() < k:
            raise ArithmeticError("element not divisible by p^%d" % k)
        return WittElem(self.ring, self.ring.raw_div_p(self.coords, k), self.prec - k)

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, WittElem) else other
        if other is NotImplemented:
            return NotImplemented
        prec = min(self.prec, other.prec)
        pk = self.ring.p**prec
        return all((x - y) % pk == 0 for x, y in zip(self.coords, other.coords))

    def __hash__(self):
        return hash((self.coords, self.prec))

    def equal_mod(self, other, n: int) -> bool:
        other = self._coerce(other)
        pk = self.ring.p**n
        return all((x - y) % pk == 0 for x, y in zip(self.coords, other.coords))

    def __repr__(self):
        if self.ring.s == 1:
            return f"{self.coords[0]} + O({self.ring.p}^{self.prec})"
        return f"{list(self.coords)} + O({self.ring.p}^{self.prec})"

    def to_json(self) -> dict:
        return {"coordinates": [str(x) for x in self.coords], "precision": self.prec}

    @classmethod
    def from_json(cls, ring: WittRing, data: dict) -> "WittElem":
        return cls(ring, [int(x) for x in data["coordinates"]], int(data["precision"]))


# -- operations ---------------------------------------------------------------

def teichmuller(ring: WittRing, a) -> WittElem:
    """Teichmuller representative of a residue-field element.

    ``a`` is an int (s = 1) or a tuple of s residues mod p on the basis 1, z, ...
    Returns 0 for a = 0.
    """
    if isinstance(a, int):
        a = (a,) + (0,) * (ring.s - 1)
    a = tuple(x % ring.p for x in a)
    if not any(a):
        return ring(0)
    x = a
    for _ in range(ring.N):
        x = ring.raw_pow(x, ring.q)
    return WittElem(ring, x)


def sigma(x: WittElem, j: int = 1) -> WittElem:
    """Frobenius automorphism (z -> z^p), applied j times (j may be negative)."""
    return WittElem(x.ring, x.ring.raw_sigma(x.coords, j), x.prec)


def sigma_inv(x: WittElem) -> WittElem:
    return sigma(x, -1)


def vee(x: WittElem) -> WittElem:
    """V(x) = p * sigma^{-1}(x)."""
    return sigma_inv(x).mul_p(1)


def divided_power(x: WittElem, n: int) -> WittElem:
    """x^n / n! for x in pW, computed without loss of precision."""
    if n < 0:
        raise ValueError("n must be >= 0")
    ring = x.ring
    if n == 0:
        return ring(1)
    if x.valuation() < 1:
        raise ArithmeticError("divided power undefined: argument not divisible by p")
    p = ring.p
    e = n - vp_factorial(n, p)
    y = x.div_p(1)
    unit = 1
    for k in range(2, n + 1):
        unit *= k
    unit //= p ** vp_factorial(n, p)
    return (y**n).mul_p(e) * ring.from_fraction(1, unit)


def log_unit(u: WittElem) -> WittElem:
    """p-adic logarithm of u in 1 + pW."""
    ring = u.ring
    x = u - 1
    if x.valuation() < 1:
        raise ArithmeticError("log_unit needs u = 1 mod p")
    p = ring.p
    acc = ring(0)
    fact = 1  # (n-1)!
    # x^n/n has valuation >= n - log_p(n)
    nmax = ring.N + 2
    while nmax - _ilog(nmax, p) < ring.N:
        nmax += 1
    nmax += _ilog(nmax, p) + 1
    for n in range(1, nmax + 1):
        term = divided_power(x, n) * (fact if n % 2 == 1 else -fact)
        acc = acc + term
        fact *= n
    return WittElem(ring, acc.coords, min(acc.prec, u.prec))


def exp_p(x: WittElem) -> WittElem:
    """p-adic exponential of x in pW (p odd)."""
    ring = x.ring
    if x.valuation() < 1:
        raise ArithmeticError("exp_p needs x = 0 mod p")
    p = ring.p
    acc = ring(1)
    n = 1
    # n - v_p(n!) is not monotone; bound it below by n - (n - 1)/(p - 1)
    while (n * (p - 2) + 1) < ring.N * (p - 1):
        acc = acc + divided_power(x, n)
        n += 1
    return WittElem(ring, acc.coords, min(acc.prec, x.prec))


def trace(x: WittElem) -> WittElem:
    """Sum of the s conjugates; lands in Z_p."""
    acc = x
    for j in range(1, x.ring.s):
        acc = acc + sigma(x, j)
    return acc
