"""BFGS with a strong-Wolfe line search for ``(value, gradient)`` objectives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class NonFiniteObjectiveError(FloatingPointError):
    """The objective or its gradient returned NaN or infinity."""


@dataclass
class BFGSResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    n_evals: int
    status: str
    trace: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


class _Counted:
    def __init__(self, fun_and_grad):
        self.fg = fun_and_grad
        self.n = 0

    def __call__(self, x):
        self.n += 1
        f, g = self.fg(x)
        f = float(f)
        g = np.asarray(g, dtype=float)
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            raise NonFiniteObjectiveError(
                f"non-finite objective at evaluation {self.n}: f={f}, "
                f"|g|={np.linalg.norm(g) if np.all(np.isfinite(g)) else 'nan'}"
            )
        return f, g


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic matching values and slopes at ``a`` and ``b``."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = math.copysign(math.sqrt(disc), b - a)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


def _line_search(fg, x, f0, g0, p, alpha, c1, c2, max_evals=40):
    """Return ``(alpha, f, g)`` satisfying the strong Wolfe conditions, or None."""
    slope0 = float(g0 @ p)
    evals = 0

    def phi(a):
        nonlocal evals
        evals += 1
        f, g = fg(x + a * p)
        return f, g, float(g @ p)

    def wolfe_ok(a, f, d):
        return f <= f0 + c1 * a * slope0 and abs(d) <= -c2 * slope0

    def zoom(lo, hi):
        (a_lo, f_lo, g_lo, d_lo), (a_hi, f_hi, _, d_hi) = lo, hi
        while evals < max_evals:
            width = a_hi - a_lo
            a = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
            lo_b, hi_b = sorted((a_lo + 0.1 * width, a_hi - 0.1 * width))
            if a is None or not lo_b <= a <= hi_b:
                a = 0.5 * (a_lo + a_hi)
            f, g, d = phi(a)
            if f > f0 + c1 * a * slope0 or f >= f_lo:
                a_hi, f_hi, d_hi = a, f, d
            else:
                if abs(d) <= -c2 * slope0:
                    return a, f, g, d
                if d * (a_hi - a_lo) >= 0:
                    a_hi, f_hi, d_hi = a_lo, f_lo, d_lo
                a_lo, f_lo, g_lo, d_lo = a, f, g, d
            if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_lo)):
                break
        return None

    prev = (0.0, f0, g0, slope0)
    found = None
    for i in range(max_evals):
        f, g, d = phi(alpha)
        cur = (alpha, f, g, d)
        if f > f0 + c1 * alpha * slope0 or (i > 0 and f >= prev[1]):
            found = zoom(prev, cur)
            break
        if abs(d) <= -c2 * slope0:
            found = cur
            break
        if d >= 0:
            found = zoom(cur, prev)
            break
        prev = cur
        alpha *= 2.0
        if evals >= max_evals:
            break
    if found is None:
        return None

    # one cubic refinement from (0, alpha); exact when phi is quadratic
    a, f, g, d = found
    a_c = _cubic_min(0.0, f0, slope0, a, f, d)
    if a_c is not None and a_c > 0 and abs(a_c - a) > 1e-6 * a and evals < max_evals:
        fc, gc, dc = phi(a_c)
        if fc < f and wolfe_ok(a_c, fc, dc):
            return a_c, fc, gc
    return a, f, g


def bfgs_minimize(
    fun_and_grad,
    x0,
    max_iter: int = 200,
    gtol: float = 1e-9,
    c1: float = 1e-4,
    c2: float = 0.9,
    callback=None,
) -> BFGSResult:
    """Minimize a smooth function given a callable returning ``(f, grad)``.

    Stops when the gradient 2-norm drops below ``gtol``, after ``max_iter``
    iterations, or when the line search fails to make progress. The recorded
    ``trace`` holds the objective before the first and after every iteration.
    """
    fg = _Counted(fun_and_grad)
    x = np.array(x0, dtype=float)
    f, g = fg(x)
    trace = [f]
    n = x.size
    H = np.eye(n)
    status = "max_iter"
    it = 0
    while True:
        if np.linalg.norm(g) < gtol:
            status = "converged"
            break
        if it >= max_iter:
            break
        p = -H @ g
        if g @ p >= 0:
            # lost descent; restart from steepest descent
            H = np.eye(n)
            p = -g
        alpha0 = min(1.0, 1.0 / np.linalg.norm(g)) if it == 0 else 1.0
        step = _line_search(fg, x, f, g, p, alpha0, c1, c2)
        if step is None:
            status = "line_search_failed"
            break
        alpha, f_new, g_new = step
        s = alpha * p
        y = g_new - g
        sy = float(s @ y)
        if it == 0 and sy > 0:
            H = (sy / float(y @ y)) * np.eye(n)
        if sy > 1e-300:
            rho = 1.0 / sy
            Hy = H @ y
            H = H + ((sy + y @ Hy) * rho * rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))
        x = x + s
        f, g = f_new, g_new
        it += 1
        trace.append(f)
        if callback is not None:
            callback(x, f)
    return BFGSResult(x=x, fun=f, grad=g, n_iter=it, n_evals=fg.n, status=status, trace=trace)
