"""Bessel function of the first kind (order 1) and adaptive Simpson quadrature.

Both are small enough to keep in-repo, which keeps the runtime dependency
list to numpy.
"""

from __future__ import annotations

import math
from typing import Callable

__all__ = ["adaptive_simpson", "bessel_j1"]

_SERIES_MAX = 12.0


def _j1_series(x: float) -> float:
    # sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
    half = 0.5 * x
    q = -half * half
    term = half
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        total += term
        if abs(term) <= 1e-17 * max(abs(total), 1e-300):
            return total
        if k > 200:
            return total


def _j1_miller(x: float) -> float:
    """Miller's backward recurrence normalised by J0 + 2 sum J_2k = 1."""
    n_start = 2 * ((int(x) + int(15 + math.sqrt(40.0 * x))) // 2)
    j_next = 0.0
    j_cur = 1e-300
    norm = 0.0
    j1 = 0.0
    for n in range(n_start, 0, -1):
        j_prev = 2.0 * n / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds J_{n-1}
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            j1 *= 1e-250
            norm *= 1e-250
        if n - 1 == 1:
            j1 = j_cur
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur  # J_0
    return j1 / norm


def bessel_j1(x: float) -> float:
    """J_1(x) for real ``x``.

    Ascending series for ``|x| <= 12``; backward recurrence beyond, where the
    series loses too many digits to cancellation.
    """
    x = float(x)
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    val = _j1_series(ax) if ax <= _SERIES_MAX else _j1_miller(ax)
    return -val if x < 0 else val


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> float:
    """Integrate ``f`` on ``[a, b]`` by adaptive Simpson with Richardson correction."""
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # explicit stack keeps deep refinements off the Python call stack
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return total
