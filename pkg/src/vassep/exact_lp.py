"""Exact linear feasibility with a dense two-phase simplex over Fractions.

Only phase one is needed: find ``x >= 0`` with ``A x >= b`` and ``E x = f``.
Bland's rule guarantees termination.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence


def lp_feasible_point(
    A: Sequence[Sequence],
    b: Sequence,
    nvars: int,
    E: Sequence[Sequence] = (),
    f: Sequence = (),
) -> Optional[list]:
    """A nonnegative rational solution of ``A x >= b, E x = f``, or None."""
    rows = []
    rhs = []
    slack_of = []
    for row, bi in zip(A, b):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(bi))
        slack_of.append(True)
    for row, fi in zip(E, f):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(fi))
        slack_of.append(False)
    m = len(rows)
    if m == 0:
        return [Fraction(0)] * nvars
    n_slack = sum(slack_of)
    # columns: x (nvars), surplus (n_slack), artificial (m)
    width = nvars + n_slack + m
    tab = []
    basis = []
    k = 0
    for i in range(m):
        r = rows[i] + [Fraction(0)] * (n_slack + m)
        if slack_of[i]:
            r[nvars + k] = Fraction(-1)
            k += 1
        sgn = -1 if rhs[i] < 0 else 1
        r = [sgn * v for v in r]
        r[nvars + n_slack + i] = Fraction(1)
        tab.append(r + [sgn * rhs[i]])
        basis.append(nvars + n_slack + i)
    # objective: minimise the sum of artificials, i.e. maximise -sum
    obj = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            obj[j] -= tab[i][j]
    for i in range(m):
        obj[nvars + n_slack + i] += 1
    # obj[j] is the reduced cost; negative entries improve
    while True:
        col = next((j for j in range(width) if obj[j] < 0), None)
        if col is None:
            break
        best = None
        for i in range(m):
            if tab[i][col] > 0:
                ratio = tab[i][width] / tab[i][col]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            break  # unbounded cannot happen in phase one
        _pivot(tab, obj, basis, best[1], col)
    if obj[width] != 0:
        return None
    x = [Fraction(0)] * nvars
    for i, bcol in enumerate(basis):
        if bcol < nvars:
            x[bcol] = tab[i][width]
    return x


def _pivot(tab, obj, basis, r, c):
    pv = tab[r][c]
    tab[r] = [v / pv for v in tab[r]]
    for i in range(len(tab)):
        if i != r and tab[i][c] != 0:
            fac = tab[i][c]
            tab[i] = [a - fac * b for a, b in zip(tab[i], tab[r])]
    if obj[c] != 0:
        fac = obj[c]
        obj[:] = [a - fac * b for a, b in zip(obj, tab[r])]
    basis[r] = c
