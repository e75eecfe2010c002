"""Adaptive Simpson quadrature with recursive interval bisection."""

from __future__ import annotations

from collections.abc import Callable


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-8,
    max_depth: int = 40,
) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``abs_tol``.

    Each half-interval gets half the tolerance; a subinterval is accepted
    when the two-panel refinement agrees with the single panel to within
    15x the local tolerance (the classic Simpson error estimate), with a
    Richardson extrapolation term folded into the result.  Recursion stops
    at ``max_depth`` regardless.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, abs_tol, max_depth)

    def simpson(lo, f_lo, mid, f_mid, hi, f_hi):
        return (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)

    def recurse(lo, f_lo, mid, f_mid, hi, f_hi, whole, tol, depth):
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        f_lmid = f(lmid)
        f_rmid = f(rmid)
        left = simpson(lo, f_lo, lmid, f_lmid, mid, f_mid)
        right = simpson(mid, f_mid, rmid, f_rmid, hi, f_hi)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(lo, f_lo, lmid, f_lmid, mid, f_mid, left, 0.5 * tol, depth - 1) + \
            recurse(mid, f_mid, rmid, f_rmid, hi, f_hi, right, 0.5 * tol, depth - 1)

    mid = 0.5 * (a + b)
    f_a, f_mid, f_b = f(a), f(mid), f(b)
    whole = simpson(a, f_a, mid, f_mid, b, f_b)
    return recurse(a, f_a, mid, f_mid, b, f_b, whole, abs_tol, max_depth)
