"""Truncated multivariate power series over a Witt ring.

A series lives in ``SeriesRing(W, m, r, D)``: m variables t_1..t_m, the first
r of which carry the log structure, and all monomials of total degree < D.
Storage is dense in graded-lex order.  Every coefficient carries its own
absolute precision; a single power of p may be factored out of the whole
series (``den``) so that elements of K[[t]] with bounded denominators fit the
same type.  The value of coefficient k is ``c[k] / p^den`` and its numerator is
known modulo ``p^pr[k]``.

Derivatives lose the top degree (it would need the unknown degree-D terms),
and substitutions with constants in pW lose precision near the truncation
edge.  Both losses are recorded in ``pr`` rather than hidden.
"""

from __future__ import annotations

from itertools import product
from typing import Sequence

from .witt import WittElem, WittRing, vp_int

# K-element triples used by the recursions: (coords, numerator prec, den)


def _kelem_normalize(W: WittRing, c, pr, den):
    p = W.p
    while den > 0 and W.raw_valuation(c, pr) >= 1 and pr >= 1:
        c = W.raw_div_p(tuple(x % (p**pr) for x in c), 1)
        pr -= 1
        den -= 1
    return c, pr, den


class SeriesRing:
    """Truncation of W[[t_1..t_m]] at total degree D, with r log variables."""

    def __init__(self, W: WittRing, m: int, r: int, D: int):
        if not 0 <= r <= m:
            raise ValueError("need 0 <= r <= m")
        if D < 1:
            raise ValueError("need D >= 1")
        self.W, self.m, self.r, self.D = W, m, r, D
        mons = [n for n in product(range(D), repeat=m) if sum(n) < D]
        mons.sort(key=lambda n: (sum(n), tuple(-x for x in n)))
        self.monomials = mons
        self.index = {n: k for k, n in enumerate(mons)}
        self.degrees = [sum(n) for n in mons]
        self.size = len(mons)
        pi, pj = [], []
        for n in mons:
            li, lj = [], []
            for a in product(*(range(x + 1) for x in n)):
                b = tuple(x - y for x, y in zip(n, a))
                li.append(self.index[a])
                lj.append(self.index[b])
            pi.append(li)
            pj.append(lj)
        self._pi, self._pj = pi, pj

    def __eq__(self, other):
        return isinstance(other, SeriesRing) and (self.W, self.m, self.r, self.D) == (
            other.W,
            other.m,
            other.r,
            other.D,
        )

    def __hash__(self):
        return hash((self.W, self.m, self.r, self.D))

    def __repr__(self):
        return f"SeriesRing({self.W!r}, m={self.m}, r={self.r}, D={self.D})"

    # -- constructors ---------------------------------------------------------
    def zero(self) -> "TruncatedSeries":
        z = self.W.zero
        return TruncatedSeries(self, [z] * self.size, [self.W.N] * self.size)

    def one(self) -> "TruncatedSeries":
        return self(1)

    def __call__(self, value=0) -> "TruncatedSeries":
        if isinstance(value, TruncatedSeries):
            return value
        if isinstance(value, int):
            value = self.W(value)
        out = self.zero()
        out.c[0] = value.coords
        out.pr[0] = value.prec
        return out

    def gen(self, i: int) -> "TruncatedSeries":
        """The variable t_i (0-based)."""
        return self.monomial(tuple(1 if k == i else 0 for k in range(self.m)))

    def tprime(self, i: int) -> "TruncatedSeries":
        """t'_i: t_i for log variables, 1 + t_i otherwise."""
        g = self.gen(i)
        return g if i < self.r else g + 1

    def monomial(self, n: Sequence[int], coeff=1) -> "TruncatedSeries":
        out = self.zero()
        n = tuple(n)
        if sum(n) < self.D:
            w = coeff if isinstance(coeff, WittElem) else self.W(coeff)
            out.c[self.index[n]] = w.coords
            out.pr[self.index[n]] = w.prec
        return out

    def from_dict(self, terms: dict) -> "TruncatedSeries":
        out = self.zero()
        for n, v in terms.items():
            n = tuple(n) if not isinstance(n, int) else (n,)
            if sum(n) >= self.D:
                continue
            w = v if isinstance(v, WittElem) else self.W(v)
            k = self.index[n]
            out.c[k] = w.coords
            out.pr[k] = w.prec
        return out

    def from_kelems(self, elems) -> "TruncatedSeries":
        """Build from per-coefficient (coords, numerator prec, den) triples."""
        W = self.W
        den = max((e[2] for e in elems), default=0)
        c, pr = [], []
        for coords, p_, d in elems:
            shift = den - d
            c.append(W.raw_scale(coords, W.p**shift) if shift else coords)
            pr.append(min(p_ + shift, W.N))
        return TruncatedSeries(self, c, pr, den).normalize()


class TruncatedSeries:
    """Immutable-by-convention truncated series; see module docstring."""

    __slots__ = ("ring", "c", "pr", "den")

    def __init__(self, ring: SeriesRing, c, pr, den: int = 0):
        self.ring = ring
        self.c = list(c)
        self.pr = [min(x, ring.W.N) for x in pr]
        self.den = den

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, self.c, self.pr, self.den)

    # -- inspection -----------------------------------------------------------
    def _vals(self):
        W = self.ring.W
        return [W.raw_valuation(c, p) for c, p in zip(self.c, self.pr)]

    def coeff(self, n) -> WittElem:
        """Coefficient of t^n as a WittElem (series must be integral)."""
        if isinstance(n, int):
            n = (n,)
        n = tuple(n)
        s = self.normalize()
        if s.den:
            raise ArithmeticError("series has p-power denominators")
        if sum(n) >= self.ring.D:
            raise IndexError("monomial beyond truncation")
        k = self.ring.index[n]
        return WittElem(self.ring.W, s.c[k], s.pr[k])

    def kcoeff(self, n):
        """Coefficient of t^n as (coords, numerator prec, den), normalized."""
        k = self.ring.index[tuple(n)]
        return _kelem_normalize(self.ring.W, self.c[k], self.pr[k], self.den)

    def constant(self) -> WittElem:
        return self.coeff((0,) * self.ring.m)

    def terms(self):
        """Nonzero (exponent, coords) pairs at known precision."""
        out = []
        p = self.ring.W.p
        for n, c, pr in zip(self.ring.monomials, self.c, self.pr):
            pk = p**pr
            cc = tuple(x % pk for x in c)
            if any(cc):
                out.append((n, cc))
        return out

    def min_precision(self, below_degree: int | None = None) -> int:
        """Smallest absolute precision of the *values* (numerator prec - den)."""
        lim = self.ring.D if below_degree is None else below_degree
        vals = [p for p, d in zip(self.pr, self.ring.degrees) if d < lim]
        return min(vals) - self.den if vals else self.ring.W.N

    def valuation(self) -> int:
        """Lower bound for the valuation of the values (can be negative)."""
        return min(self._vals()) - self.den

    def is_zero(self, upto: int | None = None, below_degree: int | None = None) -> bool:
        """True if every coefficient vanishes at its known precision.

        ``upto`` caps the comparison at value precision p^upto.
        """
        W = self.ring.W
        lim = self.ring.D if below_degree is None else below_degree
        for c, p_, d in zip(self.c, self.pr, self.ring.degrees):
            if d >= lim:
                continue
            pk = p_ if upto is None else min(p_, upto + self.den)
            if pk <= 0:
                continue
            m = W.p**pk
            if any(x % m for x in c):
                return False
        return True

    def is_integral(self) -> bool:
        return self.normalize().den == 0

    def __repr__(self):
        W = self.ring.W
        parts = []
        for n, cc in self.terms()[:8]:
            v = cc[0] if W.s == 1 else list(cc)
            mon = "*".join(f"t{i+1}^{e}" if e > 1 else f"t{i+1}" for i, e in enumerate(n) if e)
            parts.append(f"{v}*{mon}" if mon else f"{v}")
        tail = " + ..." if len(self.terms()) > 8 else ""
        d = f" / {W.p}^{self.den}" if self.den else ""
        return f"({' + '.join(parts) or '0'}{tail}){d} [prec>={self.min_precision()}, D={self.ring.D}]"

    # -- normalization --------------------------------------------------------
    def normalize(self) -> "TruncatedSeries":
        if self.den == 0:
            return self
        W = self.ring.W
        s = self
        while s.den > 0:
            if not all(p_ <= 0 or W.raw_valuation(c, p_) >= 1 for c, p_ in zip(s.c, s.pr)):
                break
            c = [W.raw_div_p(tuple(x % (W.p ** max(p_, 0)) for x in cc), 1) if p_ > 0 else W.zero for cc, p_ in zip(s.c, s.pr)]
            s = TruncatedSeries(s.ring, c, [max(p_ - 1, 0) for p_ in s.pr], s.den - 1)
        return s

    def _with_den(self, den: int) -> "TruncatedSeries":
        shift = den - self.den
        if shift == 0:
            return self
        if shift < 0:
            raise ValueError("cannot lower den by scaling")
        W = self.ring.W
        pk = W.p**shift
        return TruncatedSeries(
            self.ring, [W.raw_scale(c, pk) for c in self.c], [p_ + shift for p_ in self.pr], den
        )

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        if isinstance(other, (int, WittElem)):
            return self.ring(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        den = max(self.den, other.den)
        a, b = self._with_den(den), other._with_den(den)
        W = self.ring.W
        return TruncatedSeries(
            self.ring,
            [W.raw_add(x, y) for x, y in zip(a.c, b.c)],
            [min(x, y) for x, y in zip(a.pr, b.pr)],
            den,
        )

    __radd__ = __add__

    def __neg__(self):
        W = self.ring.W
        return TruncatedSeries(self.ring, [W.raw_neg(x) for x in self.c], self.pr, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale_int(other)
        if isinstance(other, WittElem):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return _series_mul(self, other)

    __rmul__ = __mul__

    def scale_int(self, n: int) -> "TruncatedSeries":
        W = self.ring.W
        if n == 0:
            return self.ring.zero()
        v = vp_int(n, W.p)
        return TruncatedSeries(self.ring, [W.raw_scale(x, n) for x in self.c], [p_ + v for p_ in self.pr], self.den)

    def scale(self, x: WittElem) -> "TruncatedSeries":
        W = self.ring.W
        vx = x.valuation()
        vals = self._vals()
        return TruncatedSeries(
            self.ring,
            [W.raw_mul(c, x.coords) for c in self.c],
            [min(p_ + vx, x.prec + v) for p_, v in zip(self.pr, vals)],
            self.den,
        )

    def mul_p(self, k: int = 1) -> "TruncatedSeries":
        if self.den >= k:
            return TruncatedSeries(self.ring, self.c, self.pr, self.den - k)
        s = self
        if s.den:
            k -= s.den
            s = TruncatedSeries(s.ring, s.c, s.pr, 0)
        return s.scale_int(self.ring.W.p**k)

    def div_p(self, k: int = 1) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, self.c, self.pr, self.den + k).normalize()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        acc = self.ring.one()
        base = self
        while e:
            if e & 1:
                acc = acc * base
            e >>= 1
            if e:
                base = base * base
        return acc

    def inverse(self) -> "TruncatedSeries":
        """Inverse of a series whose constant term is a unit of W."""
        s = self.normalize()
        c, p_, d = _kelem_normalize(s.ring.W, s.c[0], s.pr[0], s.den)
        c0 = WittElem(s.ring.W, c, p_)
        if d or not c0.is_unit():
            raise ZeroDivisionError("constant term not a unit")
        inv0 = c0.inverse()
        # u = c0 (1 - y) with y in (t); u^{-1} = c0^{-1} sum y^k
        y = self.ring(1) - s.scale(inv0)
        y.c[0], y.pr[0] = s.ring.W.zero, s.ring.W.N
        acc = self.ring.one()
        term = self.ring.one()
        for _ in range(1, self.ring.D):
            term = term * y
            acc = acc + term
        return acc.scale(inv0).normalize()

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        if isinstance(other, WittElem):
            return self.scale(other.inverse())
        if isinstance(other, int):
            W = self.ring.W
            v = vp_int(other, W.p)
            u = other // W.p**v
            return self.scale(W.from_fraction(1, u)).div_p(v) if v else self.scale(W.from_fraction(1, u))
        return NotImplemented

    def equal_mod(self, other, n: int | None = None) -> bool:
        return (self - other).is_zero(upto=n)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    # -- coefficient maps -----------------------------------------------------
    def sigma(self, j: int = 1) -> "TruncatedSeries":
        W = self.ring.W
        if W.s == 1 or j % W.s == 0:
            return self
        return TruncatedSeries(self.ring, [W.raw_sigma(c, j) for c in self.c], self.pr, self.den)

    def truncate(self, D: int) -> "TruncatedSeries":
        """Mark coefficients of degree >= D as unknown."""
        pr = [p_ if d < D else 0 for p_, d in zip(self.pr, self.ring.degrees)]
        return TruncatedSeries(self.ring, self.c, pr, self.den)

    def cap_precision(self, n: int) -> "TruncatedSeries":
        """Forget value digits beyond p^n."""
        return TruncatedSeries(self.ring, self.c, [min(p_, n + self.den) for p_ in self.pr], self.den)

    # -- derivations ----------------------------------------------------------
    def partial(self, i: int) -> "TruncatedSeries":
        """d/dt_i; the top degree becomes unknown."""
        R = self.ring
        W = R.W
        if not 0 <= i < R.m:
            raise IndexError("variable index out of range")
        c, pr = [], []
        for n in R.monomials:
            up = tuple(x + 1 if k == i else x for k, x in enumerate(n))
            if sum(up) >= R.D:
                c.append(W.zero)
                pr.append(0)
                continue
            k = R.index[up]
            e = up[i]
            c.append(W.raw_scale(self.c[k], e))
            pr.append(self.pr[k] + vp_int(e, W.p))
        return TruncatedSeries(R, c, pr, self.den)

    def times_var(self, i: int) -> "TruncatedSeries":
        """Multiply by t_i (exact shift)."""
        R = self.ring
        W = R.W
        c = [W.zero] * R.size
        pr = [W.N] * R.size
        for k, n in enumerate(R.monomials):
            if n[i] == 0:
                continue
            down = tuple(x - 1 if j == i else x for j, x in enumerate(n))
            kk = R.index[down]
            c[k] = self.c[kk]
            pr[k] = self.pr[kk]
        return TruncatedSeries(R, c, pr, self.den)

    def theta(self, i: int) -> "TruncatedSeries":
        """theta_i = t'_i d/dt_i."""
        R = self.ring
        if not 0 <= i < R.m:
            raise IndexError("variable index out of range")
        if i < R.r:
            W = R.W
            c, pr = [], []
            for n, cc, p_ in zip(R.monomials, self.c, self.pr):
                e = n[i]
                if e == 0:
                    c.append(W.zero)
                    pr.append(W.N)
                else:
                    c.append(W.raw_scale(cc, e))
                    pr.append(p_ + vp_int(e, W.p))
            return TruncatedSeries(R, c, pr, self.den)
        d = self.partial(i)
        return d + d.times_var(i)

    def delta(self, i: int) -> "TruncatedSeries":
        """delta_i = d/dt'_i (= d/dt_i)."""
        return self.partial(i)

    def euler(self) -> "TruncatedSeries":
        """sum_i t_i d/dt_i: multiplies t^n by |n| (exact)."""
        R = self.ring
        W = R.W
        c, pr = [], []
        for d, cc, p_ in zip(R.degrees, self.c, self.pr):
            if d == 0:
                c.append(W.zero)
                pr.append(W.N)
            else:
                c.append(W.raw_scale(cc, d))
                pr.append(p_ + vp_int(d, W.p))
        return TruncatedSeries(R, c, pr, self.den)

    # -- substitution ---------------------------------------------------------
    def substitute(self, images: Sequence["TruncatedSeries"], target: SeriesRing | None = None) -> "TruncatedSeries":
        """Evaluate at t_i = images[i].

        Each image must be integral with constant term in pW.  Images may live in
        another series ring ``target`` with the same Witt ring.
        """
        return Substitution(images, target).apply(self)

    def evaluate(self, values: Sequence[WittElem]) -> WittElem:
        """Value at a point with coordinates in pW (0 allowed)."""
        R = self.ring
        pt = SeriesRing(R.W, R.m, R.r, 1)
        imgs = [pt(v) for v in values]
        out = self.substitute(imgs, target=pt).normalize()
        if out.den:
            raise ArithmeticError("value not integral")
        return WittElem(R.W, out.c[0], out.pr[0])

    # -- serialization --------------------------------------------------------
    def to_json(self) -> list:
        """Records {exponent, coordinates, precision} in graded-lex order."""
        W = self.ring.W
        out = []
        for n, c, p_ in zip(self.ring.monomials, self.c, self.pr):
            pk = W.p ** max(p_, 0)
            cc = [x % pk for x in c]
            if any(cc) or p_ < W.N:
                rec = {"exponent": list(n), "coordinates": [str(x) for x in cc], "precision": p_}
                out.append(rec)
        if self.den:
            return {"den": self.den, "terms": out}
        return out

    @classmethod
    def from_json(cls, ring: SeriesRing, data) -> "TruncatedSeries":
        den = 0
        if isinstance(data, dict):
            den = int(data.get("den", 0))
            data = data["terms"]
        s = ring.zero()
        for rec in data:
            n = tuple(rec["exponent"])
            if sum(n) >= ring.D:
                continue
            k = ring.index[n]
            s.c[k] = tuple(int(x) for x in rec["coordinates"])
            s.pr[k] = int(rec["precision"])
        return TruncatedSeries(ring, s.c, s.pr, den)


class Substitution:
    """A reusable ring map t_i -> images[i], caching the images of monomials."""

    def __init__(self, images: Sequence[TruncatedSeries], target: SeriesRing | None = None):
        self.target = T = target or images[0].ring
        self.images = [im.normalize() for im in images]
        W = T.W
        vmin = None
        for im in self.images:
            if im.den:
                raise ArithmeticError("substitution needs integral images")
            c0 = WittElem(W, im.c[0], im.pr[0])
            v = c0.valuation()
            if v < 1:
                raise ArithmeticError("substitution divergent: constant term not in pW")
            if v < c0.prec:
                vmin = v if vmin is None else min(vmin, v)
        self.vmin = vmin
        mono = [_as_pure_monomial(im) for im in self.images]
        self.monomial_map = mono if all(x is not None for x in mono) else None
        self._cache = {}
        self._pows = None

    def _power(self, i, k):
        if self._pows is None:
            self._pows = [[self.target.one()] for _ in self.images]
        lst = self._pows[i]
        while len(lst) <= k:
            lst.append(lst[-1] * self.images[i])
        return lst[k]

    def _mono_val(self, n):
        val = self._cache.get(n)
        if val is not None:
            return val
        nz = [i for i, x in enumerate(n) if x]
        if not nz:
            val = self.target.one()
        elif len(nz) == 1:
            val = self._power(nz[0], n[nz[0]])
        else:
            last = nz[-1]
            rest = tuple(x if i != last else 0 for i, x in enumerate(n))
            val = self._mono_val(rest) * self._power(last, n[last])
        self._cache[n] = val
        return val

    def apply(self, g: TruncatedSeries, sigma_power: int = 0) -> TruncatedSeries:
        """Image of g; with ``sigma_power`` the coefficients are first hit by sigma."""
        R = g.ring
        T = self.target
        W = R.W
        if len(self.images) != R.m:
            raise ValueError("need one image per variable")
        if sigma_power:
            g = g.sigma(sigma_power)
        if self.monomial_map is not None:
            c = [W.zero] * T.size
            pr = [W.N] * T.size
            for n, cc, p_ in zip(R.monomials, g.c, g.pr):
                e = [0] * T.m
                for ni, ex in zip(n, self.monomial_map):
                    for k in range(T.m):
                        e[k] += ni * ex[k]
                e = tuple(e)
                if sum(e) < T.D:
                    k = T.index[e]
                    c[k] = cc
                    pr[k] = p_
            return TruncatedSeries(T, c, pr, g.den)
        acc = TruncatedSeries(T, [W.zero] * T.size, [W.N] * T.size, g.den)
        for n, cc, p_ in zip(R.monomials, g.c, g.pr):
            if p_ >= W.N and not any(cc):
                continue
            term = self._mono_val(n).scale(WittElem(W, cc, p_))
            acc = acc + TruncatedSeries(T, term.c, term.pr, g.den)
        if self.vmin is not None:
            # unknown terms of degree >= D contribute valuation >= (D - d) * vmin
            acc = TruncatedSeries(
                T,
                acc.c,
                [min(p_, (R.D - d) * self.vmin + g.den) for p_, d in zip(acc.pr, T.degrees)],
                acc.den,
            )
        return acc


def _as_pure_monomial(s: TruncatedSeries):
    """Exponent e if s == t^e exactly (coefficient 1, everything known)."""
    W = s.ring.W
    if s.den:
        return None
    found = None
    for n, c, p_ in zip(s.ring.monomials, s.c, s.pr):
        if p_ < W.N:
            return None
        if any(c):
            if c != W.one or found is not None:
                return None
            found = n
    if found is None or sum(found) == 0:
        return None
    return found


def _series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    R = a.ring
    W = R.W
    cap = W.N
    mod = W.mod
    va, vb = a._vals(), b._vals()
    pa, pb = a.pr, b.pr
    out_c, out_p = [], []
    if W.s == 1:
        ac = [x[0] for x in a.c]
        bc = [x[0] for x in b.c]
        for li, lj in zip(R._pi, R._pj):
            acc = 0
            pr = cap
            for i, j in zip(li, lj):
                acc += ac[i] * bc[j]
                t = va[i] + pb[j]
                if t < pr:
                    pr = t
                t = pa[i] + vb[j]
                if t < pr:
                    pr = t
            out_c.append((acc % mod,))
            out_p.append(pr)
    else:
        s = W.s
        for li, lj in zip(R._pi, R._pj):
            acc = [0] * (2 * s - 1)
            pr = cap
            for i, j in zip(li, lj):
                x, y = a.c[i], b.c[j]
                for u, xu in enumerate(x):
                    if xu:
                        for w, yw in enumerate(y):
                            acc[u + w] += xu * yw
                t = va[i] + pb[j]
                if t < pr:
                    pr = t
                t = pa[i] + vb[j]
                if t < pr:
                    pr = t
            out = acc[:s]
            for k in range(s, 2 * s - 1):
                ck = acc[k]
                if ck:
                    red = W._red[k]
                    for u in range(s):
                        out[u] += ck * red[u]
            out_c.append(tuple(x % mod for x in out))
            out_p.append(pr)
    return TruncatedSeries(R, out_c, out_p, a.den + b.den)


# -- exp / log ----------------------------------------------------------------

def _k_div_int(W, c, pr, den, n):
    v = vp_int(n, W.p)
    u = n // W.p**v
    c = W.raw_mul(c, W.from_fraction(1, u).coords)
    return _kelem_normalize(W, c, pr, den + v)


def _integrate_euler(w: TruncatedSeries, constant: WittElem) -> TruncatedSeries:
    """The series L with euler(L) = w (w without constant term) and L(0) = constant."""
    R = w.ring
    W = R.W
    elems = []
    for k, d in enumerate(R.degrees):
        if d == 0:
            elems.append((constant.coords, constant.prec, 0))
        else:
            elems.append(_k_div_int(W, w.c[k], w.pr[k], w.den, d))
    return R.from_kelems(elems)


def exp_series(x: TruncatedSeries) -> TruncatedSeries:
    """exp(x) for x with constant term in pW (x may have p-power denominators)."""
    R = x.ring
    W = R.W
    x = x.normalize()
    c0, p0, d0 = _kelem_normalize(W, x.c[0], x.pr[0], x.den)
    if d0 or W.raw_valuation(c0, p0) < 1:
        raise ArithmeticError("exp undefined: constant term not in pW")
    from .witt import exp_p

    e0 = exp_p(WittElem(W, c0, p0))
    y = x.copy()
    y.c[0], y.pr[0] = W.zero, W.N
    ey = y.euler().normalize()
    # recursion |n| g_n = sum_{m < n} g_m * ey_{n-m}, on K-element triples
    g = [None] * R.size
    g[0] = (W.one, W.N, 0)
    for k, n in enumerate(R.monomials):
        if k == 0:
            continue
        d = R.degrees[k]
        acc_terms = []
        for i, j in zip(R._pi[k], R._pj[k]):
            if j == 0:
                continue  # ey has no constant term
            gi = g[i]
            acc_terms.append(_k_mul(W, gi, (ey.c[j], ey.pr[j], ey.den)))
        tot = _k_sum(W, acc_terms)
        g[k] = _k_div_int(W, tot[0], tot[1], tot[2], d)
    gs = R.from_kelems(g)
    return gs.scale(e0)


def _k_mul(W, a, b):
    ca, pa, da = a
    cb, pb, db = b
    va = W.raw_valuation(ca, pa)
    vb = W.raw_valuation(cb, pb)
    return (W.raw_mul(ca, cb), min(pa + vb, pb + va, W.N), da + db)


def _k_sum(W, items):
    if not items:
        return (W.zero, W.N, 0)
    den = max(d for _, _, d in items)
    acc = W.zero
    pr = W.N
    for c, p_, d in items:
        sh = den - d
        acc = W.raw_add(acc, W.raw_scale(c, W.p**sh) if sh else c)
        pr = min(pr, p_ + sh)
    return _kelem_normalize(W, acc, min(pr, W.N), den)


def log_series(u: TruncatedSeries) -> TruncatedSeries:
    """log(u) for u = 1 mod (p, t)."""
    from .witt import log_unit

    R = u.ring
    u = u.normalize()
    if u.den:
        raise ArithmeticError("log_series needs an integral series")
    u0 = WittElem(R.W, u.c[0], u.pr[0])
    if (u0 - 1).valuation() < 1:
        raise ArithmeticError("log undefined: u not 1 mod (p, t)")
    z = u.scale(u0.inverse())
    w = z.euler() * z.inverse()
    return _integrate_euler(w, log_unit(u0))


# -- coordinate inversion -----------------------------------------------------

def invert_coordinates(q: Sequence[TruncatedSeries]) -> list:
    """Series t_k(x) with x_j = q_j (j < r) and x_j = q_j - 1 (j >= r).

    Returns the tuple of old coordinates expressed in the new ones, in the same
    series ring.  Raises if the leading Jacobian is not invertible over W.
    """
    from .linalg import wmat_inv

    R = q[0].ring
    W = R.W
    m, r = R.m, R.r
    Q = [qq - 1 if j >= r else qq for j, qq in enumerate(q)]
    zero_exp = (0,) * m
    const = []
    for j, Qj in enumerate(Q):
        c0 = Qj.coeff(zero_exp)
        if j < r and not c0.is_zero():
            raise ArithmeticError("not a coordinate system: log coordinate with constant term")
        if c0.valuation() < 1:
            raise ArithmeticError("not a coordinate system: constant term not in pW")
        const.append(c0)
    L = [[Q[j].coeff(tuple(1 if i == k else 0 for i in range(m))) if R.D > 1 else W(0) for k in range(m)] for j in range(m)]
    try:
        Linv = wmat_inv(L)
    except ZeroDivisionError:
        raise ArithmeticError("not a coordinate system: Jacobian not invertible") from None
    x = [R.gen(i) for i in range(m)]
    H = []
    for j in range(m):
        lin = R(const[j])
        for k in range(m):
            lin = lin + R.gen(k).scale(L[j][k])
        H.append(Q[j] - lin)
    rhs0 = [x[j] - const[j] for j in range(m)]

    def apply_Linv(vec):
        return [sum((vec[k].scale(Linv[j][k]) for k in range(m)), R.zero()) for j in range(m)]

    T = apply_Linv(rhs0)
    for _ in range(W.N + R.D + 2):
        HT = [h.substitute(T, target=R) for h in H]
        newT = apply_Linv([rhs0[j] - HT[j] for j in range(m)])
        if all((a - b).is_zero() and a.pr == b.pr for a, b in zip(newT, T)):
            T = newT
            break
        T = newT
    return T
