"""Derivative-free local search used by the CHSH optimizer."""

from __future__ import annotations

from typing import Callable, List, Sequence, Tuple


def nelder_mead(
    f: Callable[[Sequence[float]], float],
    x0: Sequence[float],
    step: float = 0.5,
    xatol: float = 1e-10,
    fatol: float = 1e-12,
    maxfev: int = 5000,
) -> Tuple[List[float], float, int]:
    """Minimize ``f`` from ``x0`` with the Nelder-Mead simplex method.

    Stops when both the spread of function values across the simplex and the
    distance of every vertex from the best one fall below ``fatol`` and
    ``xatol``, or after ``maxfev`` evaluations.

    Returns
    -------
    (x_best, f_best, n_evaluations)
    """
    n = len(x0)
    simplex = [list(map(float, x0))]
    for i in range(n):
        x = list(simplex[0])
        x[i] += step
        simplex.append(x)
    fs = [f(x) for x in simplex]
    nfev = n + 1

    while nfev < maxfev:
        order = sorted(range(n + 1), key=fs.__getitem__)
        simplex = [simplex[k] for k in order]
        fs = [fs[k] for k in order]
        best = simplex[0]
        if fs[-1] - fs[0] <= fatol and max(abs(v[k] - best[k]) for v in simplex[1:] for k in range(n)) <= xatol:
            break

        centroid = [sum(v[k] for v in simplex[:-1]) / n for k in range(n)]
        worst = simplex[-1]
        xr = [2.0 * c - w for c, w in zip(centroid, worst)]
        fr = f(xr)
        nfev += 1
        if fr < fs[0]:
            xe = [3.0 * c - 2.0 * w for c, w in zip(centroid, worst)]
            fe = f(xe)
            nfev += 1
            if fe < fr:
                simplex[-1], fs[-1] = xe, fe
            else:
                simplex[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = [c + 0.5 * (r - c) for c, r in zip(centroid, xr)]
        else:
            xc = [c + 0.5 * (w - c) for c, w in zip(centroid, worst)]
        fc = f(xc)
        nfev += 1
        if fc < min(fr, fs[-1]):
            simplex[-1], fs[-1] = xc, fc
            continue
        # shrink toward the best vertex
        for k in range(1, n + 1):
            simplex[k] = [b + 0.5 * (v - b) for b, v in zip(best, simplex[k])]
            fs[k] = f(simplex[k])
        nfev += n

    k = min(range(n + 1), key=fs.__getitem__)
    return simplex[k], fs[k], nfev
