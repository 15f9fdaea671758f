"""Independent reference computations.

Nothing here imports the package's closed forms: singular values come from
LAPACK, distances from brute-force searches, ODE profiles from ``solve_ivp``.
Frozen expectations in the tests were produced by these functions.
"""

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.linalg import polar
from scipy.optimize import brentq, minimize_scalar


def svd_pair(A):
    s = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    return float(s[1]), float(s[0])


def polar_rotation(A):
    U, _ = polar(np.asarray(A, dtype=float))
    return U


def rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def _refine_angle(fun, n=720):
    grid = np.linspace(-math.pi, math.pi, n, endpoint=False)
    vals = [fun(t) for t in grid]
    k = int(np.argmin(vals))
    step = 2 * math.pi / n
    res = minimize_scalar(fun, bounds=(grid[k] - step, grid[k] + step), method="bounded",
                          options={"xatol": 1e-13})
    return min(res.fun, vals[k])


def dist_SO2_search(A):
    A = np.asarray(A, dtype=float)
    return math.sqrt(_refine_angle(lambda t: float(np.sum((A - rot(t)) ** 2))))


def dist_CO2_search(A):
    """``min_{lam >= 0, t} |A - lam R(t)|``; for fixed ``t`` the best ``lam`` is ``max(<A, R>/2, 0)``."""
    A = np.asarray(A, dtype=float)

    def fun(t):
        R = rot(t)
        lam = max(float(np.sum(A * R)) / 2.0, 0.0)
        return float(np.sum((A - lam * R) ** 2))

    return math.sqrt(_refine_angle(fun))


def dist_orbit_search(A, s1, s2, n=181):
    """``min_{U, V in SO2} |A - U diag(s1, s2) V|`` over a rotation grid plus local refinement."""
    A = np.asarray(A, dtype=float)
    D = np.diag([s1, s2])

    def fun(uv):
        return float(np.sum((A - rot(uv[0]) @ D @ rot(uv[1])) ** 2))

    ts = np.linspace(-math.pi, math.pi, n, endpoint=False)
    best = min(((fun((u, v)), u, v) for u in ts for v in ts))
    from scipy.optimize import minimize

    res = minimize(fun, x0=[best[1], best[2]], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    return math.sqrt(min(res.fun, best[0]))


def dist_K_search(A):
    """``min_{t in [0, 1/2]} |sigma(A) - (t, 1 - t)|`` with LAPACK singular values (det A >= 0)."""
    s1, s2 = svd_pair(A)
    res = minimize_scalar(lambda t: (s1 - t) ** 2 + (s2 - 1 + t) ** 2, bounds=(0.0, 0.5),
                          method="bounded", options={"xatol": 1e-14})
    return math.sqrt(min(res.fun, s1**2 + (s2 - 1) ** 2, (s1 - 0.5) ** 2 + (s2 - 0.5) ** 2))


def F_search(s):
    """``min (x-1)^2 + (y-1)^2`` over ``x y = s`` by a dense log grid plus refinement."""
    if s == 0:
        return 1.0
    u = np.linspace(min(math.log(s), 0.0) - 1.0, max(math.log(s), 0.0) + 1.0, 20001)
    x = np.exp(u)
    vals = (x - 1) ** 2 + (s / x - 1) ** 2
    k = int(np.argmin(vals))
    res = minimize_scalar(lambda t: (math.exp(t) - 1) ** 2 + (s * math.exp(-t) - 1) ** 2,
                          bounds=(u[max(k - 1, 0)], u[min(k + 1, len(u) - 1)]), method="bounded",
                          options={"xatol": 1e-13})
    return min(res.fun, float(vals[k]))


def reduced_min_grid(f, s, n=200001):
    """Dense-grid value of ``min f(x) + f(s/x)`` for ``s <= 1`` (``x`` in ``[s, 1]``)."""
    u = np.linspace(math.log(s), 0.0, n)
    x = np.exp(u)
    return float(np.min(f(x) + f(s / x)))


def threshold_grid(f, lo=1e-4, hi=1.0, iters=40, tol=1e-10):
    """Bisection on ``s`` for the flip of conformal optimality, using :func:`reduced_min_grid`."""

    def conformal(s):
        return reduced_min_grid(f, s) >= 2 * f(math.sqrt(s)) - tol

    if conformal(lo):
        return None
    a, b = lo, hi
    for _ in range(iters):
        m = math.sqrt(a * b)
        if conformal(m):
            b = m
        else:
            a = m
    return math.sqrt(a * b)


def smoothstep_rate(alpha, t0):
    """``beta`` with ``int_0^1 exp(-beta (3u^2 - 2u^3)) du = (2/alpha - t0)/(1 - t0)`` by Brent."""
    target = (2.0 / alpha - t0) / (1.0 - t0)

    def resid(beta):
        return quad(lambda u: math.exp(-beta * (3 * u * u - 2 * u**3)), 0, 1, epsabs=1e-14)[0] - target

    return brentq(resid, 0.0, 1e4, xtol=1e-15, rtol=1e-15)


def ode_profiles(alpha, t0, beta, r_eval):
    """Integrate ``psi' = (alpha/2) exp(-beta S)`` and ``h' = sqrt(alpha^2 - g^2)/psi`` from ``t0``."""

    def rhs(r, y):
        u = (r - t0) / (1.0 - t0)
        dpsi = 0.5 * alpha * math.exp(-beta * (3 * u * u - 2 * u**3))
        g = dpsi + y[0] / r
        return [dpsi, math.sqrt(max(alpha**2 - g * g, 0.0)) / y[0]]

    sol = solve_ivp(rhs, (t0, 1.0), [0.5 * alpha * t0, 0.0], t_eval=r_eval, rtol=1e-12, atol=1e-14,
                    method="DOP853")
    return sol.y[0], sol.y[1]
