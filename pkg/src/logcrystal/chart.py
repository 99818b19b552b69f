"""Changes of coordinates on the log base and the induced change of crystal chart.

A chart is stored through unit factors so that no division by a variable (which
would lose the top degree) is ever needed:

* ``forward[j]``: for j < r the unit v_j with x_j = t_j v_j(t); for j >= r the unit x'_j(t) = 1 + x_j(t);
* ``backward[k]``: for k < r the unit u_k with t_k = x_k u_k(x); for k >= r the unit t'_k(x).
"""

from __future__ import annotations

from dataclasses import dataclass

from .frobenius import FrobLift, frobenius_matrix
from .linalg import smat_add, smat_map, smat_scale, smat_zero
from .series import SeriesRing, Substitution, TruncatedSeries, invert_coordinates


@dataclass
class Chart:
    ring: SeriesRing
    forward: list
    backward: list

    def new_coordinates(self) -> list:
        """x_j as series in t."""
        R = self.ring
        return [self.forward[j].times_var(j) if j < R.r else self.forward[j] - 1 for j in range(R.m)]

    def old_coordinates(self) -> list:
        """t_k as series in x."""
        R = self.ring
        return [self.backward[k].times_var(k) if k < R.r else self.backward[k] - 1 for k in range(R.m)]

    def inverse(self) -> "Chart":
        return Chart(self.ring, self.backward, self.forward)

    @classmethod
    def from_units(cls, ring: SeriesRing, forward: list) -> "Chart":
        """Build the chart from the forward units, inverting the coordinate map."""
        q = [forward[j].times_var(j) if j < ring.r else forward[j] for j in range(ring.m)]
        T = invert_coordinates(q)
        sub = Substitution(T, ring)
        backward = []
        for k in range(ring.m):
            if k < ring.r:
                backward.append(sub.apply(forward[k]).inverse())
            else:
                backward.append(T[k] + 1)
        return cls(ring, forward, backward)


def _twisted_jacobian(chart: Chart):
    """J[k][j] = theta^x_j(t'_k) / t'_k, expressed in x."""
    R = chart.ring
    J = []
    for k in range(R.m):
        u = chart.backward[k]
        inv = u.inverse()
        row = []
        for j in range(R.m):
            v = u.theta(j) * inv
            if k < R.r and j == k:
                v = v + 1
            row.append(v)
        J.append(row)
    return J


def pulled_back_lift(chart: Chart) -> FrobLift:
    """The lifting of the t-chart that is standard in the x-chart (x'_j -> x'_j^p)."""
    R = chart.ring
    p = R.W.p
    v = chart.forward
    imgs = []
    for j in range(R.m):
        if j < R.r:
            imgs.append(_times_var_power(v[j] ** p, j, p))
        else:
            imgs.append(v[j] ** p - 1)
    sub = Substitution(imgs, R)
    f = []
    for k in range(R.m):
        back = sub.apply(chart.backward[k], sigma_power=1)
        if k < R.r:
            f.append((v[k] ** p) * back)
        else:
            f.append(back * (R.tprime(k) ** p).inverse())
    return FrobLift(R, f)


def _times_var_power(g: TruncatedSeries, j: int, e: int) -> TruncatedSeries:
    for _ in range(e):
        g = g.times_var(j)
    return g


def change_chart(X, chart: Chart):
    """The same crystal written in the coordinates x of ``chart``."""
    R = X.ring
    back = Substitution(chart.old_coordinates(), R)
    J = _twisted_jacobian(chart)
    conn_t = [smat_map(back.apply, M) for M in X.connection]
    conn = []
    for j in range(R.m):
        acc = smat_zero(R, X.rank, X.rank)
        for k in range(R.m):
            acc = smat_add(acc, smat_scale(conn_t[k], J[k][j]))
        conn.append(acc)
    phi = pulled_back_lift(chart)
    Phi = smat_map(back.apply, frobenius_matrix(X, phi))
    pairing = smat_map(back.apply, X.pairing) if X.pairing is not None else None
    return X.with_data(connection=conn, frobenius=Phi, pairing=pairing)


def vectors_in_chart(chart: Chart, V):
    """Coordinate columns of module elements re-expressed in x."""
    back = Substitution(chart.old_coordinates(), chart.ring)
    return smat_map(back.apply, V)
