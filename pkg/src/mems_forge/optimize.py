"""Golden-section search, vectorized over independent problems."""

from __future__ import annotations

import numpy as np

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo, hi, tol: float = 1e-10, shape=(), max_iter: int = 200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    ``f`` receives an array of abscissae of ``shape`` and must return values of
    the same shape, so a whole stack of one-dimensional problems is solved in
    lockstep. The endpoints are compared at the end, so maxima sitting on the
    boundary are returned exactly. Returns ``(x, f(x))``; plain floats when
    ``shape`` is ``()``.
    """
    a = np.broadcast_to(np.asarray(lo, dtype=float), shape).copy()
    b = np.broadcast_to(np.asarray(hi, dtype=float), shape).copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = np.asarray(f(c), dtype=float)
    fd = np.asarray(f(d), dtype=float)
    for _ in range(max_iter):
        if np.all(np.abs(b - a) <= tol):
            break
        left = fc >= fd  # maximum lies in [a, d]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - INV_PHI * (b - a)
        new_d = a + INV_PHI * (b - a)
        # reuse the surviving interior point, evaluate the other
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        f_probe = np.asarray(f(np.where(left, c_next, d_next)), dtype=float)
        fc, fd = np.where(left, f_probe, fd), np.where(left, fc, f_probe)
        c, d = c_next, d_next
    x = 0.5 * (a + b)
    fx = np.asarray(f(x), dtype=float)
    for edge in (np.broadcast_to(np.asarray(lo, float), shape), np.broadcast_to(np.asarray(hi, float), shape)):
        fe = np.asarray(f(edge), dtype=float)
        better = fe > fx
        x = np.where(better, edge, x)
        fx = np.where(better, fe, fx)
    if x.ndim == 0:
        return float(x), float(fx)
    return x, fx
