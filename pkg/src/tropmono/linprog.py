"""Small exact-rational linear programming over Fractions.

Two-phase primal simplex with Bland's rule; sized for the feasibility
systems that arise when checking regularity of polygonal subdivisions
(tens of variables, tens of constraints).  Infeasibility comes with a
Farkas certificate that is re-verified before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass
class LPResult:
    feasible: bool
    x: list[Fraction] | None = None  # a feasible/optimal point
    value: Fraction | None = None  # objective value at x
    farkas: list[Fraction] | None = None  # infeasibility certificate


def _simplex(tableau, basis, n_cols):
    """Primal simplex with Bland's rule on a tableau whose last row is the
    objective (to maximize) and last column the rhs.  Mutates in place."""
    m = len(tableau) - 1
    while True:
        obj = tableau[-1]
        enter = -1
        for j in range(n_cols):
            if obj[j] > 0:
                enter = j
                break
        if enter < 0:
            return True  # optimal
        leave = -1
        best = None
        for i in range(m):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return False  # unbounded
        piv = tableau[leave][enter]
        row = tableau[leave]
        tableau[leave] = [v / piv for v in row]
        for i in range(m + 1):
            if i == leave:
                continue
            f = tableau[i][enter]
            if f:
                tableau[i] = [v - f * w for v, w in zip(tableau[i], tableau[leave])]
        basis[leave] = enter


def solve_lp(
    n: int,
    a_eq: list[tuple[list[Fraction], Fraction]] | None = None,
    a_le: list[tuple[list[Fraction], Fraction]] | None = None,
    objective: list[Fraction] | None = None,
) -> LPResult:
    """Maximize objective . x subject to A_eq x = b_eq and A_le x <= b_le,
    with x free (unrestricted sign).

    When the objective is None this is a pure feasibility problem.
    """
    a_eq = a_eq or []
    a_le = a_le or []
    # Free variables x_j = u_j - v_j with u, v >= 0, plus slacks for <= rows.
    n_slack = len(a_le)
    n_cols = 2 * n + n_slack
    rows = []
    for coeffs, rhs in a_eq:
        rows.append(([Fraction(c) for c in coeffs], Fraction(rhs), None))
    for k, (coeffs, rhs) in enumerate(a_le):
        rows.append(([Fraction(c) for c in coeffs], Fraction(rhs), k))
    m = len(rows)

    # Phase 1 tableau with one artificial per row.
    tableau = []
    basis = []
    for i, (coeffs, rhs, slack) in enumerate(rows):
        row = [Fraction(0)] * (n_cols + m + 1)
        for j, c in enumerate(coeffs):
            row[j] = c
            row[n + j] = -c
        if slack is not None:
            row[2 * n + slack] = Fraction(1)
        row[-1] = rhs
        if rhs < 0:
            row = [-v for v in row]
        row[n_cols + i] = Fraction(1)
        tableau.append(row)
        basis.append(n_cols + i)
    # Phase-1: maximize -(sum of artificials).  With the artificial basis the
    # reduced-cost row is the column sum of the constraint rows (and 0 on the
    # artificial columns); the rhs entry tracks minus the objective value.
    obj = [Fraction(0)] * (n_cols + m + 1)
    for i in range(m):
        obj = [o + v for o, v in zip(obj, tableau[i])]
    for i in range(m):
        obj[n_cols + i] = Fraction(0)
    tableau.append(obj)
    _simplex(tableau, basis, n_cols + m)
    residual = tableau[-1][-1]  # equals sum of artificials at optimum
    if residual > 0:
        # Infeasible; extract a Farkas certificate from the phase-1 duals.
        # The final reduced cost of artificial i is -1 - y_i.
        duals = [-tableau[-1][n_cols + i] - 1 for i in range(m)]
        farkas = _verify_farkas(rows, duals, n)
        return LPResult(False, farkas=farkas)

    # Drive any artificials out of the basis (degenerate rows) by pivoting.
    for i in range(m):
        if basis[i] >= n_cols:
            for j in range(n_cols):
                if tableau[i][j] != 0:
                    piv = tableau[i][j]
                    tableau[i] = [v / piv for v in tableau[i]]
                    for k in range(len(tableau)):
                        if k != i and tableau[k][j]:
                            f = tableau[k][j]
                            tableau[k] = [v - f * w for v, w in zip(tableau[k], tableau[i])]
                    basis[i] = j
                    break

    # Phase 2: strip artificial columns, install the real objective.
    tableau = [row[:n_cols] + [row[-1]] for row in tableau[:-1]]
    if objective is not None:
        obj = [Fraction(0)] * (n_cols + 1)
        for j, c in enumerate(objective):
            obj[j] = Fraction(c)
            obj[n + j] = -Fraction(c)
        # Price out the basic columns (they are unit columns, so one pass).
        for i in range(len(basis)):
            if basis[i] < n_cols and obj[basis[i]]:
                f = obj[basis[i]]
                obj = [o - f * v for o, v in zip(obj, tableau[i])]
        tableau.append(obj)
        bounded = _simplex(tableau, basis, n_cols)
        if not bounded:
            raise ValueError("unbounded linear program")
        tableau_rows = tableau[:-1]
    else:
        tableau_rows = tableau

    x = [Fraction(0)] * n_cols
    for i, b in enumerate(basis):
        if b < n_cols:
            x[b] = tableau_rows[i][-1]
    sol = [x[j] - x[n + j] for j in range(n)]
    value = None
    if objective is not None:
        value = sum(Fraction(c) * v for c, v in zip(objective, sol))
    return LPResult(True, x=sol, value=value)


def _verify_farkas(rows, duals, n) -> list[Fraction]:
    """Check y A = 0 (on x-columns), y >= 0 on inequality rows in their
    original orientation, and y . b < 0; raise if the certificate is bad."""
    m = len(rows)
    # Recover per-row sign flips applied for negative rhs.
    combo = [Fraction(0)] * n
    rhs_total = Fraction(0)
    slack_ok = True
    ys = []
    for (coeffs, rhs, slack), y in zip(rows, duals):
        sign = -1 if rhs < 0 else 1
        yy = y * sign
        ys.append(yy)
        for j, c in enumerate(coeffs):
            combo[j] += yy * c
        rhs_total += yy * rhs
        if slack is not None and yy < 0:
            slack_ok = False
    if not (all(c == 0 for c in combo) and rhs_total < 0 and slack_ok):
        raise AssertionError("invalid Farkas certificate from phase 1")
    return ys
