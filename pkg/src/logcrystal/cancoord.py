"""Canonical coordinates of ordinary crystals of weight 1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .chart import Chart, change_chart
from .crystal import (
    AxiomReport,
    HodgeFCrystal,
    _graph_fixed_point,
    in_basis,
    is_ordinary,
    unit_root_basis_of,
)
from .frobenius import FrobLift, frobenius_matrix, log_factors, pullback_form
from .linalg import (
    smat_add,
    smat_block,
    smat_hstack,
    smat_inv,
    smat_map,
    smat_mul,
    smat_sub,
    smat_zero,
    wmat_inv,
)
from .logdiff import LogOneForm, LogPrimitive, exterior_d, poincare_integrate
from .series import SeriesRing, TruncatedSeries, exp_series
from .witt import PrecisionError, WittElem, sigma, vee, vp_factorial


@dataclass
class Weight1Frame:
    """a: unit-root basis (n x g columns), b: Fil^1 basis (n x h columns).

    eta[i][j] and u[i][j] (h x g) with nabla b_i = sum_j eta_ij a_j and
    F psi^* b_i = p b_i + p sum_j u_ij a_j.
    """

    crystal: HodgeFCrystal
    a: list
    b: list
    eta: list
    u: list

    @property
    def g(self) -> int:
        return len(self.a[0])

    @property
    def h(self) -> int:
        return len(self.b[0])

    def basis(self):
        return smat_hstack(self.a, self.b)

    def to_json(self) -> dict:
        mat = lambda A: [[x.to_json() for x in row] for row in A]  # noqa: E731
        return {
            "a": mat(self.a),
            "b": mat(self.b),
            "eta": [[e.to_json() for e in row] for row in self.eta],
            "u": mat(self.u),
        }


def _check_weight1(X: HodgeFCrystal):
    if X.weight != 1:
        raise ValueError("expected a crystal of weight 1")
    if not is_ordinary(X):
        raise ValueError("crystal is not ordinary")


def weight1_frame(X: HodgeFCrystal, cancel: Callable[[], bool] | None = None) -> Weight1Frame:
    """Unit-root basis a of U and Frobenius-fixed lift b in Fil^1 of the twisted quotient."""
    _check_weight1(X)
    R = X.ring
    n = X.rank
    B = X.fil(1)
    C = [k for k in range(n) if k not in set(B)]
    psi = FrobLift.standard_lift(R)
    Phi = X.frobenius
    graph = _graph_fixed_point(Phi, R, C, B, psi, cancel)
    PCC, PCB = smat_block(Phi, C, C), smat_block(Phi, C, B)
    PBB = smat_block(Phi, B, B)
    G = smat_add(PCC, smat_mul(PCB, psi.apply_matrix(graph)))
    MU = [smat_add(smat_block(M, C, C), smat_mul(smat_block(M, C, B), graph)) for M in X.connection]
    BU = unit_root_basis_of(G, MU, R, cancel)
    g, h = len(C), len(B)
    a = smat_zero(R, n, g)
    top = BU
    bottom = smat_mul(graph, BU)
    for r, k in enumerate(C):
        a[k] = list(top[r])
    for r, k in enumerate(B):
        a[k] = list(bottom[r])
    quotPhi = smat_map(lambda x: x.div_p(1), smat_sub(PBB, smat_mul(graph, PCB)))
    quotConn = [smat_sub(smat_block(M, B, B), smat_mul(graph, smat_block(M, C, B))) for M in X.connection]
    CB = unit_root_basis_of(quotPhi, quotConn, R, cancel)
    b = smat_zero(R, n, h)
    for r, k in enumerate(B):
        b[k] = list(CB[r])
    return _frame_from_basis(X, a, b)


def _frame_from_basis(X: HodgeFCrystal, a, b) -> Weight1Frame:
    R = X.ring
    g, h = len(a[0]), len(b[0])
    PhiT, connT = in_basis(X, smat_hstack(a, b))
    u = [[PhiT[j][g + i].div_p(1) for j in range(g)] for i in range(h)]
    eta = [[LogOneForm([connT[k][j][g + i] for k in range(R.m)]) for j in range(g)] for i in range(h)]
    return Weight1Frame(X, a, b, eta, u)


def verify_frame(fr: Weight1Frame) -> AxiomReport:
    """Horizontality of a, shape of nabla b, Frobenius shape, closedness and the eta/u relation."""
    X = fr.crystal
    R = X.ring
    p = R.W.p
    g, h = fr.g, fr.h
    PhiT, connT = in_basis(X, fr.basis())
    top = R.D - 1
    rep = AxiomReport()
    ok = all(connT[k][i][j].is_zero(below_degree=top) for k in range(R.m) for i in range(g + h) for j in range(g))
    rep.record("a_horizontal", ok, "" if ok else "nabla a != 0")
    ok = all(connT[k][g + i][g + j].is_zero(below_degree=top) for k in range(R.m) for i in range(h) for j in range(h))
    rep.record("nabla_b_in_U", ok, "" if ok else "nabla b has a Fil^1 component")
    ok = True
    for i in range(g + h):
        for j in range(g + h):
            expect = R.one() if (i == j and i < g) else (R(p) if i == j else R.zero())
            if j >= g and i < g:
                continue
            if not (PhiT[i][j] - expect).is_zero():
                ok = False
    ok = ok and all(PhiT[j][g + i].is_zero(upto=1) for i in range(h) for j in range(g))
    rep.record("frobenius_shape", ok, "" if ok else "F psi^* not of the form (1, p b + p u a)")
    psi = FrobLift.standard_lift(R)
    ok_closed, ok_heart = True, True
    for i in range(h):
        for j in range(g):
            e = fr.eta[i][j]
            if not exterior_d(e).is_zero(below_degree=top):
                ok_closed = False
            lhs = pullback_form(psi, e)
            du = exterior_d(fr.u[i][j])
            rhs = e.scale(R.W(p)) + du.scale(R.W(p))
            if not (lhs - rhs).is_zero(below_degree=top):
                ok_heart = False
    rep.record("eta_closed", ok_closed, "" if ok_closed else "d eta != 0")
    rep.record("eta_frobenius", ok_heart, "" if ok_heart else "psi^* eta != p eta + p du")
    return rep


# -- primitives --------------------------------------------------------------------


@dataclass
class TauData:
    """tau[i][j] as LogPrimitive, normalized by the Frobenius-compatible constant."""

    tau: list

    def analytic(self, i: int, j: int) -> TruncatedSeries:
        return self.tau[i][j].analytic

    def residues(self, i: int, j: int) -> list:
        return self.tau[i][j].logpart

    def to_json(self) -> dict:
        return {"tau": [[t.to_json() for t in row] for row in self.tau]}


def v_series_constant(u0: WittElem) -> WittElem:
    """sum_{n >= 1} V^n(u0): the c with sigma(c) - p c = p u0."""
    acc = u0.ring(0)
    term = u0
    for _ in range(u0.ring.N + 1):
        term = vee(term)
        if term.is_zero():
            break
        acc = acc + term
    return acc


def tau_from_frame(fr: Weight1Frame) -> TauData:
    R = fr.crystal.ring
    out = []
    for i in range(fr.h):
        row = []
        for j in range(fr.g):
            prim = poincare_integrate(fr.eta[i][j])
            for c in prim.logpart:
                if not sigma(c) == c:
                    raise ValueError("not a crystal datum: residue not in Z_p")
            const = v_series_constant(fr.u[i][j].constant())
            row.append(LogPrimitive(prim.logpart, prim.analytic + R(const)))
        out.append(row)
    return TauData(out)


def u_for_lift(fr: Weight1Frame, phi: FrobLift):
    """u(phi) (h x g) read off F(phi) phi^* in the frame basis."""
    X = fr.crystal
    g, h = fr.g, fr.h
    T = fr.basis()
    Phi = frobenius_matrix(X, phi)
    M = smat_mul(smat_inv(T), smat_mul(Phi, phi.apply_matrix(T)))
    return [[M[j][g + i].div_p(1) for j in range(g)] for i in range(h)]


def verify_club(fr: Weight1Frame, tau: TauData, phi: FrobLift):
    """Residual phi^* tau - p tau - p u(phi), as an h x g matrix of series."""
    R = fr.crystal.ring
    p = R.W.p
    u = u_for_lift(fr, phi)
    logs = log_factors(phi)
    out = []
    for i in range(fr.h):
        row = []
        for j in range(fr.g):
            prim = tau.tau[i][j]
            acc = phi.apply(prim.analytic) - prim.analytic.scale_int(p) - u[i][j].scale_int(p)
            for l, c in enumerate(prim.logpart):
                acc = acc + logs[l].scale(c)
            row.append(acc)
        out.append(row)
    return out


def qprime(tau: TauData):
    """q'_ij = exp(tau'_ij); must be integral for data coming from a crystal."""
    out = []
    for row in tau.tau:
        qrow = []
        for prim in row:
            try:
                q = exp_series(prim.analytic).normalize()
            except ArithmeticError as exc:
                raise ArithmeticError(f"input not from a crystal: {exc}") from None
            if q.den:
                raise ArithmeticError("input not from a crystal: exp(tau') not integral")
            qrow.append(q)
        out.append(qrow)
    return out


# -- coordinates -------------------------------------------------------------------------


@dataclass
class CanonicalCoordinates:
    q: list  # q_j as series in t
    units: list  # q'_j: q_j = t_j q'_j (j < r), q_j = q'_j (j >= r)
    inverse: list  # t_k as series in the new coordinates
    chart: Chart
    frame: Weight1Frame
    tau: TauData

    def to_json(self) -> dict:
        return {
            "q": [x.to_json() for x in self.q],
            "inverse": [x.to_json() for x in self.inverse],
            "frame": self.frame.to_json(),
            "tau": self.tau.to_json(),
        }


def _completion(res, p: int):
    """Indices of standard vectors completing the columns of res to a basis mod p."""
    m = len(res)
    r = len(res[0]) if res else 0
    cols = [[int(res[i][l].to_int()) % p for i in range(m)] for l in range(r)]
    chosen = []
    basis = []

    def reduce(v):
        v = list(v)
        for piv, w in basis:
            if v[piv]:
                f = v[piv]
                v = [(x - f * y) % p for x, y in zip(v, w)]
        return v

    def add(v):
        v = reduce(v)
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = pow(v[piv], -1, p)
        v = [x * inv % p for x in v]
        for k, (pv, w) in enumerate(basis):
            if w[piv]:
                f = w[piv]
                basis[k] = (pv, [(x - f * y) % p for x, y in zip(w, v)])
        basis.append((piv, v))
        return True

    for v in cols:
        if not add(v):
            raise ValueError("Gr nabla not an isomorphism at this precision: residue matrix degenerate mod p")
    for k in range(m):
        e = [1 if i == k else 0 for i in range(m)]
        if len(basis) == m:
            break
        if add(e):
            chosen.append(k)
    return chosen


def canonical_coordinates(X: HodgeFCrystal, cancel: Callable[[], bool] | None = None) -> CanonicalCoordinates:
    """Coordinates q in which F(phi_q) fixes b up to p (needs g = 1 and Gr nabla iso)."""
    R = X.ring
    W = R.W
    check_precision(R)
    fr = weight1_frame(X, cancel)
    if fr.g != 1:
        raise ValueError("canonical coordinates need g = 1")
    if fr.h != R.m:
        raise ValueError("Gr nabla not an isomorphism at this precision: h != m")
    tau = tau_from_frame(fr)
    m, r = R.m, R.r
    res = [[tau.tau[i][0].logpart[l] for l in range(r)] for i in range(m)]
    extra = _completion(res, W.p)
    full = [list(res[i]) + [W(1) if i == k else W(0) for k in extra] for i in range(m)]
    try:
        G = wmat_inv(full)
    except ZeroDivisionError:
        raise ValueError("Gr nabla not an isomorphism at this precision") from None
    # new b_i = sum_k G_ik b_k; tau and u transform the same way
    b_new = [[sum((fr.b[row][k] * R(G[i][k]) for k in range(m)), R.zero()) for i in range(m)] for row in range(X.rank)]
    fr2 = _frame_from_basis(X, fr.a, b_new)
    tau2 = tau_from_frame(fr2)
    for i in range(m):
        for l in range(r):
            want = W(1) if i == l else W(0)
            if not tau2.tau[i][0].logpart[l] == want:
                raise ValueError("Gr nabla not an isomorphism at this precision: residue normalization failed")
    units = [row[0] for row in qprime(tau2)]
    for j, v in enumerate(units):
        if not (v.constant() - 1).valuation() >= 1:
            raise ArithmeticError("input not from a crystal: q'(0) not 1 mod p")
    q = [units[j].times_var(j) if j < r else units[j] for j in range(m)]
    try:
        chart = Chart.from_units(R, units)
    except ArithmeticError as exc:
        raise ValueError(f"Gr nabla not an isomorphism at this precision: {exc}") from None
    return CanonicalCoordinates(q, units, chart.old_coordinates(), chart, fr2, tau2)


def to_q_chart(X: HodgeFCrystal, qc: CanonicalCoordinates) -> HodgeFCrystal:
    return change_chart(X, qc.chart)


def q_chart_defect(Xq: HodgeFCrystal) -> AxiomReport:
    """In canonical coordinates u vanishes and eta_j = d log q'_j."""
    R = Xq.ring
    fr = weight1_frame(Xq)
    rep = AxiomReport()
    top = R.D - 1
    ok_u = all(x.is_zero(below_degree=top) for row in fr.u for x in row)
    rep.record("u_vanishes", ok_u, "" if ok_u else "u(phi_q) != 0")
    ok_eta = True
    if fr.g == 1 and fr.h == R.m:
        # the frame is only unique up to GL(Z_p); normalize by the constant matrix
        E = [[fr.eta[i][0].coeffs[k].constant() for k in range(R.m)] for i in range(R.m)]
        try:
            Einv = wmat_inv(E)
        except ZeroDivisionError:
            ok_eta = False
            Einv = None
        if Einv is not None:
            for i in range(R.m):
                for k in range(R.m):
                    acc = sum((fr.eta[l][0].coeffs[k].scale(Einv[i][l]) for l in range(R.m)), R.zero())
                    want = R.one() if i == k else R.zero()
                    if not (acc - want).is_zero(below_degree=top):
                        ok_eta = False
    rep.record("eta_dlog", ok_eta, "" if ok_eta else "eta not d log q")
    return rep


def required_precision(p: int, D: int) -> int:
    """Digits consumed by the exp/log and divided-power steps at degree D."""
    return 2 + vp_factorial(max(D, 1), p)


def check_precision(R: SeriesRing):
    need = required_precision(R.W.p, R.D)
    if R.W.N < need:
        raise PrecisionError(f"raise N: canonical coordinates need N >= {need} at degree {R.D}")


def canonical_form(X: HodgeFCrystal, cancel: Callable[[], bool] | None = None) -> HodgeFCrystal:
    """X in canonical coordinates and the frame basis: nabla b_j = d log q_j (x) a, F b = p b."""
    qc = canonical_coordinates(X, cancel)
    Xq = to_q_chart(X, qc)
    fr = weight1_frame(Xq, cancel)
    R = Xq.ring
    m = R.m
    E = [[fr.eta[i][0].coeffs[k].constant() for k in range(m)] for i in range(m)]
    Einv = wmat_inv(E)
    b = [[sum((row[l] * R(Einv[i][l]) for l in range(m)), R.zero()) for i in range(m)] for row in fr.b]
    PhiT, connT = in_basis(Xq, smat_hstack(fr.a, b))
    n = 1 + m
    return HodgeFCrystal(R, connT, PhiT, [list(range(n)), list(range(1, n))])
