"""Instanton-number extraction from Yukawa couplings and the integrality tests around it."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import gcd

from .frobenius import FrobLift
from .series import SeriesRing, TruncatedSeries, _kelem_normalize
from .witt import WittElem, WittRing, trace, vp_int


@dataclass(frozen=True)
class KElem:
    """numerator / p^den with the numerator known modulo p^prec."""

    W: WittRing
    coords: tuple
    prec: int
    den: int = 0

    @classmethod
    def from_witt(cls, x: WittElem, den: int = 0) -> "KElem":
        c, pr, d = _kelem_normalize(x.ring, x.coords, x.prec, den)
        return cls(x.ring, tuple(c), pr, d)

    @property
    def numerator(self) -> WittElem:
        return WittElem(self.W, self.coords, self.prec)

    def valuation(self) -> int:
        """Valuation, or prec - den if the numerator vanishes at its precision."""
        return self.numerator.valuation() - self.den

    def is_known_zero(self) -> bool:
        return self.numerator.is_zero()

    def div_int(self, k: int) -> "KElem":
        """Exact division by a nonzero integer."""
        v = vp_int(k, self.W.p)
        unit = k // self.W.p**v
        num = self.numerator * self.W.from_fraction(1, unit)
        return KElem.from_witt(num, self.den + v)

    def trace(self) -> "KElem":
        return KElem.from_witt(trace(self.numerator), self.den)

    def to_fraction_str(self) -> str:
        num = self.numerator
        if self.W.s == 1:
            n = num.to_int()
            return f"{n}/{self.W.p}^{self.den}" if self.den else str(n)
        coords = ",".join(str(x) for x in num.coords)
        return f"[{coords}]/{self.W.p}^{self.den}" if self.den else f"[{coords}]"

    def to_json(self) -> dict:
        return {
            "coordinates": [str(x) for x in self.coords],
            "precision": self.prec,
            "den": self.den,
            "valuation": self.valuation(),
        }


def mobius(n: int) -> int:
    if n == 1:
        return 1
    out, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            out = -out
        k += 1
    if n > 1:
        out = -out
    return out


def _vec_gcd(n) -> int:
    g = 0
    for x in n:
        g = gcd(g, x)
    return g


def _kcoeff(kappa: TruncatedSeries, n) -> KElem:
    c, pr, den = kappa.kcoeff(n)
    return KElem(kappa.ring.W, tuple(c), pr, den)


def _kadd(a: KElem, b: KElem, sign: int = 1) -> KElem:
    W = a.W
    den = max(a.den, b.den)
    ca = W.raw_scale(a.coords, W.p ** (den - a.den)) if den > a.den else a.coords
    cb = W.raw_scale(b.coords, W.p ** (den - b.den)) if den > b.den else b.coords
    if sign < 0:
        cb = W.raw_neg(cb)
    pr = min(a.prec + den - a.den, b.prec + den - b.den, W.N)
    c, pr, d = _kelem_normalize(W, W.raw_add(ca, cb), pr, den)
    return KElem(W, tuple(c), pr, d)


@dataclass
class InstantonExpansion:
    triple: tuple
    eps0: KElem
    eps: dict = field(default_factory=dict)  # exponent -> KElem
    indeterminate: list = field(default_factory=list)
    ring: SeriesRing | None = None

    def to_json(self) -> dict:
        return {
            "triple": list(self.triple),
            "eps0": self.eps0.to_json(),
            "eps": [{"n": list(n), "value": e.to_json()} for n, e in sorted(self.eps.items())],
            "indeterminate": [list(n) for n in self.indeterminate],
        }


def extract_instanton(kappa: TruncatedSeries, triple) -> InstantonExpansion:
    """eps(n) n_i n_j n_l = sum_{k | gcd(n)} mu(k) c(n / k), eps0 = kappa(0)."""
    R = kappa.ring
    kappa = kappa.normalize()
    i, j, l = triple
    zero = (0,) * R.m
    eps0 = _kcoeff(kappa, zero)
    eps, indet = {}, []
    for n in R.monomials:
        if n == zero:
            continue
        g = _vec_gcd(n)
        acc = KElem(R.W, R.W.zero, R.W.N, 0)
        for k in range(1, g + 1):
            if g % k == 0:
                mu = mobius(k)
                if mu:
                    acc = _kadd(acc, _kcoeff(kappa, tuple(x // k for x in n)), mu)
        weight = n[i] * n[j] * n[l]
        if weight == 0:
            indet.append(n)
            continue
        eps[n] = acc.div_int(weight)
    return InstantonExpansion(tuple(triple), eps0, eps, indet, R)


def build_kappa(R: SeriesRing, triple, eps0: KElem, eps: dict) -> TruncatedSeries:
    """eps0 + sum_n eps(n) n_i n_j n_l q^n / (1 - q^n), truncated below degree D."""
    i, j, l = triple
    zero = (0,) * R.m
    coeffs = {zero: eps0}
    for n, e in eps.items():
        weight = n[i] * n[j] * n[l]
        if weight == 0:
            continue
        scaled = KElem.from_witt(e.numerator * weight, e.den)
        k = 1
        while sum(n) * k < R.D:
            key = tuple(x * k for x in n)
            coeffs[key] = _kadd(coeffs[key], scaled) if key in coeffs else scaled
            k += 1
    elems = []
    for n in R.monomials:
        e = coeffs.get(n)
        elems.append((R.W.zero, R.W.N, 0) if e is None else (e.coords, e.prec, e.den))
    return R.from_kelems(elems)


@dataclass
class IntegralityReport:
    verdicts: dict  # exponent -> (passes, trace valuation)
    eps0_integral: bool
    indeterminate: list

    @property
    def ok(self) -> bool:
        return all(v for v, _ in self.verdicts.values())

    def failures(self) -> list:
        return sorted(n for n, (v, _) in self.verdicts.items() if not v)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "eps0_integral": self.eps0_integral,
            "verdicts": [{"n": list(n), "ok": v, "trace_valuation": val} for n, (v, val) in sorted(self.verdicts.items())],
            "indeterminate": [list(n) for n in self.indeterminate],
        }


def integrality_report(exp: InstantonExpansion) -> IntegralityReport:
    verdicts = {}
    for n, e in exp.eps.items():
        tr = e.trace()
        v = tr.valuation()
        verdicts[n] = (v >= 0, v)
    return IntegralityReport(verdicts, exp.eps0.valuation() >= 0, list(exp.indeterminate))


def _theta_multi(g: TruncatedSeries, directions) -> TruncatedSeries:
    for i in directions:
        g = g.theta(i)
    return g


def check_ksv(kappa: TruncatedSeries, f: TruncatedSeries, directions) -> bool:
    """phi(kappa) - kappa == theta_{i_1} ... theta_{i_s} f for the standard lifting."""
    psi = FrobLift.standard_lift(kappa.ring)
    lhs = psi.apply(kappa) - kappa
    return (lhs - _theta_multi(f, directions)).is_zero()


def ksv_potential(kappa: TruncatedSeries, directions) -> TruncatedSeries | None:
    """Experimental converse: the f with phi(kappa) - kappa = theta^s f, or None if none is integral.

    Coefficients of phi(kappa) - kappa are divided by prod n_i; a nonzero
    coefficient where the product vanishes, or a denominator, means no f exists.
    """
    R = kappa.ring
    psi = FrobLift.standard_lift(R)
    g = (psi.apply(kappa) - kappa).normalize()
    if g.den:
        return None
    elems = []
    for n in R.monomials:
        c = g.coeff(n)
        weight = 1
        for i in directions:
            weight *= n[i]
        if weight == 0:
            if not c.is_zero():
                return None
            elems.append((R.W.zero, R.W.N, 0))
            continue
        e = KElem.from_witt(c).div_int(weight)
        elems.append((e.coords, e.prec, e.den))
    f = R.from_kelems(elems)
    return f if f.is_integral() else None


def dwork_integrality(g: TruncatedSeries, phi: FrobLift | None = None) -> bool:
    """phi(g) / g^p lies in 1 + p (t) W[[t]]."""
    R = g.ring
    W = R.W
    phi = phi or FrobLift.standard_lift(R)
    g = g.normalize()
    c0, pr0, d0 = g.kcoeff((0,) * R.m)
    if d0 or not WittElem(W, c0, pr0) == W(1):
        raise ValueError("dwork_integrality needs constant term 1")
    if g.den:
        # numerators capped at N would swallow the powers of p in g^p
        g, phi = _widen(g, W.p * g.den + 2), _widen_lift(phi, W.p * g.den + 2)
    ratio = (phi.apply(g) * (g**W.p).inverse() - 1).normalize()
    if ratio.den:
        return False
    if not ratio.constant().is_zero():
        return False
    return ratio.is_zero(upto=1)


def _widen(g: TruncatedSeries, extra: int) -> TruncatedSeries:
    R = g.ring
    R2 = SeriesRing(R.W.with_precision(R.W.N + extra), R.m, R.r, R.D)
    return TruncatedSeries(R2, g.c, g.pr, g.den)


def _widen_lift(phi: FrobLift, extra: int) -> FrobLift:
    if phi.standard:
        return FrobLift.standard_lift(_widen(phi.ring.one(), extra).ring)
    return FrobLift(_widen(phi.f[0], extra).ring, [_widen(f, extra) for f in phi.f])


def kappa_instanton_table(kappa: dict, m: int) -> dict:
    """Extraction for every sorted triple of a coupling table keyed by (i, j, l)."""
    out = {}
    for t in product(range(m), repeat=3):
        if tuple(sorted(t)) == t:
            out[t] = extract_instanton(kappa[t], t)
    return out
