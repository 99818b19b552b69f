"""Log differential forms on the base and their integration.

A 1-form is stored by its coefficients on the basis d log t'_1, ..., d log t'_m,
so the exterior derivative of a function g has coefficients theta_i(g).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .series import SeriesRing, TruncatedSeries, _k_div_int
from .witt import WittElem


@dataclass
class LogOneForm:
    coeffs: list  # m TruncatedSeries

    @property
    def ring(self) -> SeriesRing:
        return self.coeffs[0].ring

    def __add__(self, other: "LogOneForm") -> "LogOneForm":
        return LogOneForm([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "LogOneForm") -> "LogOneForm":
        return LogOneForm([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "LogOneForm":
        return LogOneForm([-a for a in self.coeffs])

    def scale(self, x) -> "LogOneForm":
        return LogOneForm([a * x for a in self.coeffs])

    def is_zero(self, upto: int | None = None, below_degree: int | None = None) -> bool:
        return all(a.is_zero(upto=upto, below_degree=below_degree) for a in self.coeffs)

    def to_json(self):
        return [a.to_json() for a in self.coeffs]


@dataclass
class LogTwoForm:
    matrix: list  # antisymmetric m x m matrix of series

    def first_nonzero(self, upto: int | None = None, below_degree: int | None = None):
        m = len(self.matrix)
        for i in range(m):
            for j in range(i + 1, m):
                if not self.matrix[i][j].is_zero(upto=upto, below_degree=below_degree):
                    return (i, j)
        return None

    def is_zero(self, upto: int | None = None, below_degree: int | None = None) -> bool:
        return self.first_nonzero(upto, below_degree) is None


@dataclass
class LogPrimitive:
    """tau = sum_l logpart[l] * log t_l + analytic."""

    logpart: list  # r WittElems
    analytic: TruncatedSeries

    def differential(self) -> LogOneForm:
        R = self.analytic.ring
        d = exterior_d(self.analytic)
        coeffs = list(d.coeffs)
        for l, c in enumerate(self.logpart):
            coeffs[l] = coeffs[l] + R(c)
        return LogOneForm(coeffs)

    def to_json(self):
        return {"logpart": [c.to_json() for c in self.logpart], "analytic": self.analytic.to_json()}


def dlog(R: SeriesRing, i: int) -> LogOneForm:
    """The basis form d log t'_i."""
    return LogOneForm([R.one() if k == i else R.zero() for k in range(R.m)])


def zero_form(R: SeriesRing) -> LogOneForm:
    return LogOneForm([R.zero() for _ in range(R.m)])


def exterior_d(x):
    """d of a function (-> LogOneForm) or of a LogOneForm (-> LogTwoForm)."""
    if isinstance(x, TruncatedSeries):
        return LogOneForm([x.theta(i) for i in range(x.ring.m)])
    if isinstance(x, LogOneForm):
        m = len(x.coeffs)
        R = x.ring
        mat = [[R.zero() for _ in range(m)] for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                v = x.coeffs[j].theta(i) - x.coeffs[i].theta(j)
                mat[i][j] = v
                mat[j][i] = -v
        return LogTwoForm(mat)
    raise TypeError("exterior_d expects a series or a LogOneForm")


def _integrate_in(h: TruncatedSeries, k: int) -> TruncatedSeries:
    """F with t_k dF/dt_k = h (log variable) or dF/dt_k = h (ordinary), F|_{t_k=0} = 0."""
    R = h.ring
    W = R.W
    log_var = k < R.r
    elems = []
    for n in R.monomials:
        if n[k] == 0:
            elems.append((W.zero, W.N, 0))
            continue
        src = n if log_var else tuple(x - 1 if j == k else x for j, x in enumerate(n))
        idx = R.index[src]
        elems.append(_k_div_int(W, h.c[idx], h.pr[idx], h.den, n[k]))
    return R.from_kelems(elems)


def poincare_integrate(eta: LogOneForm) -> LogPrimitive:
    """A primitive of a closed log 1-form, with analytic part vanishing at 0."""
    R = eta.ring
    # the top degree of theta_i is unknown for ordinary variables
    closed = exterior_d(eta).first_nonzero(below_degree=R.D - 1)
    if closed is not None:
        i, j = closed
        raise ArithmeticError(f"form not closed: d(eta) has nonzero entry ({i}, {j})")
    zero_exp = (0,) * R.m
    logpart = []
    zeta = []
    for l, c in enumerate(eta.coeffs):
        c = c.normalize()
        if l < R.r:
            kc, kp, kd = c.kcoeff(zero_exp)
            if kd:
                raise ArithmeticError("residue not integral")
            res = WittElem(R.W, kc, kp)
            logpart.append(res)
            c = c - R(res)
        zeta.append(c)
    tau = R.zero()
    for k in range(R.m):
        resid = zeta[k] - tau.theta(k)
        if k >= R.r:
            resid = resid * (R.one() + R.gen(k)).inverse()
        tau = tau + _integrate_in(resid, k)
    return LogPrimitive(logpart, tau)
