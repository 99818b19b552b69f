"""Known-answer crystals built backwards from the data the pipelines should recover."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .chart import Chart, change_chart
from .crystal import HodgeFCrystal
from .frobenius import FrobLift
from .linalg import smat_zero
from .series import SeriesRing, TruncatedSeries, log_series
from .witt import WittElem, WittRing, sigma, teichmuller


@dataclass
class Weight1Seed:
    """tau[i][j] = sum_l residues[i][j][l] log t_l + analytic[i][j] (h x g)."""

    ring: SeriesRing
    residues: list
    analytic: list

    @property
    def g(self) -> int:
        return len(self.analytic[0])

    @property
    def h(self) -> int:
        return len(self.analytic)

    def to_json(self) -> dict:
        R = self.ring
        W = R.W
        return {
            "prime": W.p,
            "s": W.s,
            "N": W.N,
            "D": R.D,
            "m": R.m,
            "r": R.r,
            "residues": [[[c.to_json() for c in cell] for cell in row] for row in self.residues],
            "analytic": [[a.to_json() for a in row] for row in self.analytic],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Weight1Seed":
        W = WittRing(int(data["prime"]), int(data.get("s", 1)), int(data["N"]))
        R = SeriesRing(W, int(data["m"]), int(data["r"]), int(data["D"]))
        res = [[[WittElem.from_json(W, c) for c in cell] for cell in row] for row in data["residues"]]
        an = [[TruncatedSeries.from_json(R, a) for a in row] for row in data["analytic"]]
        return cls(R, res, an)


def seed_from_coordinates(ring: SeriesRing, units: list) -> Weight1Seed:
    """g = 1 seed whose canonical coordinates are q_j = t_j units[j] (j < r), units[j] (j >= r)."""
    W = ring.W
    res, an = [], []
    for j, v in enumerate(units):
        res.append([[W(1) if l == j else W(0) for l in range(ring.r)]])
        an.append([log_series(v)])
    return Weight1Seed(ring, res, an)


def _tau_theta(seed: Weight1Seed, i: int, j: int, k: int) -> TruncatedSeries:
    R = seed.ring
    v = seed.analytic[i][j].theta(k)
    if k < R.r:
        v = v + R(seed.residues[i][j][k])
    return v


def synth_weight1(seed: Weight1Seed) -> HodgeFCrystal:
    """Crystal with basis (a_1..a_g, b_1..b_h), nabla b_i = sum_j d tau_ij a_j, F b = p b + p u a."""
    R = seed.ring
    W = R.W
    g, h = seed.g, seed.h
    n = g + h
    psi = FrobLift.standard_lift(R)
    for row in seed.residues:
        for cell in row:
            for c in cell:
                if not _in_zp(c):
                    raise ValueError("seed incompatible: residues must lie in Z_p")
    conn = []
    for k in range(R.m):
        M = smat_zero(R, n, n)
        for i in range(h):
            for j in range(g):
                v = _tau_theta(seed, i, j, k).normalize()
                if v.den:
                    raise ValueError("seed incompatible: d tau has denominators")
                M[j][g + i] = v
        conn.append(M)
    Phi = smat_zero(R, n, n)
    for j in range(g):
        Phi[j][j] = R.one()
    for i in range(h):
        Phi[g + i][g + i] = R(W.p)
        for j in range(g):
            t = seed.analytic[i][j]
            pu = (psi.apply(t) - t.scale_int(W.p)).normalize()
            if pu.den:
                raise ValueError("seed incompatible: psi^*tau - p tau not integral")
            if not pu.is_zero(upto=1):
                raise ValueError("seed incompatible: psi^*tau - p tau not divisible by p")
            Phi[j][g + i] = pu
    return HodgeFCrystal(R, conn, Phi, [list(range(n)), list(range(g, n))])


def _in_zp(c: WittElem) -> bool:
    return sigma(c) == c


def random_unit_series(ring: SeriesRing, rng: random.Random, divisible: bool = True, density: float = 0.6):
    """1 + p * (random integral series without constant term), or a random unit constant."""
    W = ring.W
    terms = {}
    for n in ring.monomials[1:]:
        if rng.random() < density:
            coords = tuple(rng.randrange(W.p**2) for _ in range(W.s))
            terms[n] = WittElem(W, coords)
    w = ring.from_dict(terms)
    return ring.one() + (w.scale_int(W.p) if divisible else w)


def random_weight1_seed(
    p: int, s: int, N: int, D: int, m: int, r: int, rng: random.Random, constant_shift: bool = True
) -> tuple:
    """A normalized g = 1 seed together with its forward units (the expected q)."""
    W = WittRing(p, s, N)
    R = SeriesRing(W, m, r, D)
    units = []
    for j in range(m):
        u = random_unit_series(R, rng)
        if constant_shift:
            c = WittElem(W, tuple(rng.randrange(W.p**N) for _ in range(s))).mul_p(1)
            u = u * (R.one() + R(c))
        if j >= r:
            u = u * R.tprime(j)
        units.append(u)
    return seed_from_coordinates(R, units), units


# -- weight 3 ----------------------------------------------------------------------------


@dataclass
class CY3Seed:
    """q-seed units, potential f in W[[q]], constant part eps0 of kappa, c(0)."""

    ring: SeriesRing
    units: list
    potential: TruncatedSeries
    eps0: dict = field(default_factory=dict)  # sorted index triple -> WittElem
    c0: WittElem | None = None

    def eps(self, i, j, l) -> WittElem:
        key = tuple(sorted((i, j, l)))
        return self.eps0.get(key, self.ring.W(0))

    def to_json(self) -> dict:
        R = self.ring
        W = R.W
        return {
            "prime": W.p,
            "s": W.s,
            "N": W.N,
            "D": R.D,
            "m": R.m,
            "r": R.r,
            "units": [u.to_json() for u in self.units],
            "potential": self.potential.to_json(),
            "eps0": [{"index": list(k), "value": v.to_json()} for k, v in sorted(self.eps0.items())],
            "c0": (self.c0 or W(0)).to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CY3Seed":
        W = WittRing(int(data["prime"]), int(data.get("s", 1)), int(data["N"]))
        R = SeriesRing(W, int(data["m"]), int(data["r"]), int(data["D"]))
        units = [TruncatedSeries.from_json(R, u) for u in data["units"]]
        f = TruncatedSeries.from_json(R, data["potential"])
        eps = {tuple(e["index"]): WittElem.from_json(W, e["value"]) for e in data.get("eps0", [])}
        c0 = WittElem.from_json(W, data["c0"]) if "c0" in data else None
        return cls(R, units, f, eps, c0)


def theta_multi(g: TruncatedSeries, idx) -> TruncatedSeries:
    for i in idx:
        g = g.theta(i)
    return g


def telescoped_kappa(seed: CY3Seed, i: int, j: int, l: int) -> TruncatedSeries:
    """kappa_ijl = eps0 - sum_{k >= 0} psi^k(theta_i theta_j theta_l f)."""
    R = seed.ring
    psi = FrobLift.standard_lift(R)
    g = theta_multi(seed.potential, (i, j, l))
    acc = R(seed.eps(i, j, l))
    term = g
    for _ in range(R.W.N + R.D + 2):
        if term.is_zero() and min(term.pr) >= R.W.N:
            break
        acc = acc - term
        term = psi.apply(term)
    return acc


def synth_cy3_q_chart(seed: CY3Seed) -> HodgeFCrystal:
    """The crystal of Calabi-Yau type written in its canonical coordinates.

    Basis order: u0, u1^(1..m), u2^(1..m), u3.
    """
    R = seed.ring
    W = R.W
    m = R.m
    p = W.p
    n = 2 * m + 2
    u0, u1, u2, u3 = 0, list(range(1, m + 1)), list(range(m + 1, 2 * m + 1)), 2 * m + 1
    f = seed.potential - R(seed.potential.constant())
    kappa = {}
    for i in range(m):
        for j in range(m):
            for l in range(m):
                key = tuple(sorted((i, j, l)))
                if key not in kappa:
                    kappa[key] = telescoped_kappa(seed, i, j, l)
    a = [-(f.theta(i)) for i in range(m)]
    b = [[f.theta(i).theta(j) for j in range(m)] for i in range(m)]
    c = f.scale_int(2) + R(seed.c0 or W(0))
    conn = []
    for l in range(m):
        M = smat_zero(R, n, n)
        M[u0][u1[l]] = R.one()
        for i in range(m):
            for j in range(m):
                M[u1[j]][u2[i]] = kappa[tuple(sorted((i, j, l)))]
        M[u2[l]][u3] = -R.one()
        conn.append(M)
    Phi = smat_zero(R, n, n)
    Phi[u0][u0] = R.one()
    for i in range(m):
        Phi[u1[i]][u1[i]] = R(p)
        Phi[u0][u2[i]] = a[i].scale_int(p**2)
        for j in range(m):
            Phi[u1[j]][u2[i]] = b[i][j].scale_int(p**2)
        Phi[u2[i]][u2[i]] = R(p**2)
        Phi[u1[i]][u3] = a[i].scale_int(p**3)
    Phi[u0][u3] = c.scale_int(p**3)
    Phi[u3][u3] = R(p**3)
    J = smat_zero(R, n, n)
    J[u0][u3], J[u3][u0] = R.one(), -R.one()
    for i in range(m):
        J[u1[i]][u2[i]], J[u2[i]][u1[i]] = R.one(), -R.one()
    flag = [list(range(n)), u1 + u2 + [u3], u2 + [u3], [u3]]
    return HodgeFCrystal(R, conn, Phi, flag, J)


def synth_cy3(seed: CY3Seed) -> HodgeFCrystal:
    """The CY-type crystal moved to the t-chart in which q_j = t_j * units[j]."""
    Xq = synth_cy3_q_chart(seed)
    chart = Chart.from_units(seed.ring, seed.units)
    return change_chart(Xq, chart.inverse())


def random_cy3_seed(p: int, s: int, N: int, D: int, m: int, rng: random.Random, twist: bool | None = None) -> CY3Seed:
    """Random seed; the chart twist defaults to on only for p > 3.

    For p <= 3 the divided powers in the change of lifting cost a digit on Fil^3,
    so a twisted crystal need not be divisible by p^3 for the standard lifting.
    """
    if twist is None:
        twist = p > 3
    W = WittRing(p, s, N)
    R = SeriesRing(W, m, m, D)
    units = []
    for _ in range(m):
        if not twist:
            units.append(R.one())
            continue
        c = WittElem(W, tuple(rng.randrange(p**N) for _ in range(s))).mul_p(1)
        units.append(random_unit_series(R, rng) * (R.one() + R(c)))
    terms = {}
    for n in R.monomials[1:]:
        if rng.random() < 0.7:
            terms[n] = WittElem(W, tuple(rng.randrange(p**3) for _ in range(s)))
    f = R.from_dict(terms)
    eps = {}
    for i in range(m):
        for j in range(i, m):
            for l in range(j, m):
                eps[(i, j, l)] = W(rng.randrange(1, p**2))
    c0 = W(rng.randrange(p**2))
    return CY3Seed(R, units, f, eps, c0)


def teichmuller_unit(W: WittRing, residue) -> WittElem:
    return teichmuller(W, residue)
