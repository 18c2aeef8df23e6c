"""Independent reference computations the tests check the library against.

Deliberately naive: the LP below solves the discrete transport problem
directly, and the finite-difference helpers probe functions numerically.
Nothing here shares code with the implementation paths under test.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog


def lp_transport_w1(a, b) -> float:
    """Wasserstein-1 between empirical measures by solving the transport LP."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    na, nb = len(a), len(b)
    cost = np.abs(a[:, None] - b[None, :]).ravel()
    A_eq = np.zeros((na + nb, na * nb))
    b_eq = np.empty(na + nb)
    for i in range(na):
        A_eq[i, i * nb : (i + 1) * nb] = 1.0
        b_eq[i] = 1.0 / na
    for j in range(nb):
        A_eq[na + j, j::nb] = 1.0
        b_eq[na + j] = 1.0 / nb
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0, f"transport LP failed: {res.message}"
    return float(res.fun)


def central_difference(f, x, step=1e-5):
    """Central finite-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g
