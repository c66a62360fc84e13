"""Bessel functions of the first kind, their zeros, and the spherical j1.

Evaluation uses the ascending power series for ``x <= SERIES_CUTOFF`` and
Miller's backward recurrence (normalised by ``J_0 + 2 sum J_2k = 1``) above
it.  Arguments are restricted to ``0 <= x <= X_MAX`` and orders to
``k <= K_MAX``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SERIES_CUTOFF = 12.0
X_MAX = 100.0
K_MAX = 20
M_MAX = 20
K_EVAL_MAX = 40

_SCAN_STEP = math.pi / 4
_BISECT_TOL = 1e-13


class BesselDomainError(ValueError):
    """Argument or order outside the supported evaluation range."""


@dataclass(frozen=True)
class BesselZero:
    order: int
    index: int
    value: float

    def __float__(self) -> float:
        return self.value


def _check_args(k, x):
    if int(k) != k or k < 0 or k > K_EVAL_MAX:
        raise BesselDomainError(f"order {k!r} outside 0..{K_EVAL_MAX}")
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > X_MAX):
        raise BesselDomainError(f"argument outside [0, {X_MAX}]")
    return int(k), x


def _series(k: int, x: np.ndarray) -> np.ndarray:
    # sum_m (-1)^m (x/2)^(2m+k) / (m! (m+k)!)
    half = x / 2.0
    q = -(half * half)
    term = half**k / math.factorial(k)
    total = term.copy()
    for m in range(1, 80):
        term = term * q / (m * (m + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(k: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence for J_k(x), x > 0, vectorised over x."""
    start = int(max(k, float(np.max(x)))) + 60
    start += start % 2
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    out = np.zeros_like(x)
    for n in range(start, 0, -1):
        jm1 = (2.0 * n / x) * j - jp1
        jp1, j = j, jm1
        # j now holds the unnormalised J_{n-1}
        if n - 1 == k:
            out = j.copy()
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm = norm + 2.0 * j
        big = np.abs(j) > 1e250
        if np.any(big):
            s = np.where(big, 1e-250, 1.0)
            j, jp1, norm, out = j * s, jp1 * s, norm * s, out * s
    norm = norm + j
    return out / norm


def bessel_j(k: int, x):
    """J_k(x) for integer ``0 <= k <= 20`` and ``0 <= x <= 100``.

    Accepts scalars or arrays; absolute error is below 1e-12 on the range.
    """
    k, xa = _check_args(k, x)
    flat = np.atleast_1d(xa).astype(float).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_CUTOFF
    if np.any(small):
        out[small] = _series(k, flat[small])
    if np.any(~small):
        out[~small] = _miller(k, flat[~small])
    out = out.reshape(np.shape(xa))
    return float(out) if np.ndim(xa) == 0 else out


def _bessel_j_signed(k: int, x):
    # J_{-n} = (-1)^n J_n
    if k < 0:
        return (-1) ** (-k) * bessel_j(-k, x)
    return bessel_j(k, x)


def bessel_j_prime(k: int, x):
    """Derivative J_k'(x) via J_k' = (J_{k-1} - J_{k+1}) / 2."""
    k, _ = _check_args(k, x)
    return 0.5 * (_bessel_j_signed(k - 1, x) - _bessel_j_signed(k + 1, x))


def bessel_j_second(k: int, x):
    """Second derivative J_k'' = (J_{k-2} - 2 J_k + J_{k+2}) / 4."""
    k, _ = _check_args(k, x)
    return 0.25 * (_bessel_j_signed(k - 2, x) - 2.0 * bessel_j(k, x) + _bessel_j_signed(k + 2, x))


def _bisect(f, a: float, b: float, tol: float = _BISECT_TOL) -> float:
    fa = f(a)
    if fa == 0.0:
        return a
    while b - a > tol:
        c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0.0:
            return c
        if (fa < 0) == (fc < 0):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


@lru_cache(maxsize=None)
def _zeros_of_order(k: int) -> tuple[float, ...]:
    # J_k > 0 on (0, j_{k,1}) and j_{k,1} > k, so scanning from k is safe.
    a0 = float(k) + 1e-3 if k > 0 else 0.0
    grid = np.append(np.arange(a0, X_MAX, _SCAN_STEP), X_MAX)
    vals = bessel_j(k, grid)
    change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[:M_MAX]
    a, b = grid[change], grid[change + 1]
    fa = vals[change]
    # all brackets bisected together
    while np.any(b - a > _BISECT_TOL):
        c = 0.5 * (a + b)
        fc = bessel_j(k, c)
        left = (fa < 0) == (fc < 0)
        a = np.where(left, c, a)
        fa = np.where(left, fc, fa)
        b = np.where(left, b, c)
    return tuple(float(z) for z in 0.5 * (a + b))


def bessel_zero(k: int, m: int) -> BesselZero:
    """The m-th positive zero of J_k, for ``k <= 20`` and ``1 <= m <= 20``."""
    if int(k) != k or not 0 <= k <= K_MAX or int(m) != m or not 1 <= m <= M_MAX:
        raise BesselDomainError(f"zero table covers k <= {K_MAX}, 1 <= m <= {M_MAX}; got ({k}, {m})")
    zeros = _zeros_of_order(int(k))
    return BesselZero(int(k), int(m), zeros[int(m) - 1])


def spherical_bessel_j1(x):
    """Spherical Bessel j_1(x) = sin x / x^2 - cos x / x, with j_1(0) = 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise BesselDomainError("spherical_bessel_j1 expects x >= 0")
    small = xa < 0.5
    xs = np.where(small, 1.0, xa)
    closed = np.sin(xs) / xs**2 - np.cos(xs) / xs
    # x * sum_n (-x^2/2)^n / (n! (2n+3)!!)
    x2 = xa * xa
    series = np.zeros_like(xa)
    term = xa / 3.0
    for n in range(0, 12):
        series = series + term
        term = term * (-x2 / 2.0) / ((n + 1) * (2 * n + 5))
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def spherical_bessel_j1_prime(x):
    """Derivative j_1'(x) = j_0(x) - 2 j_1(x) / x (limit 1/3 at the origin)."""
    xa = np.asarray(x, dtype=float)
    small = xa < 0.5
    xs = np.where(small, 1.0, xa)
    closed = np.sin(xs) / xs - 2.0 * (np.sin(xs) / xs**3 - np.cos(xs) / xs**2)
    x2 = xa * xa
    # d/dx of the series above
    series = np.zeros_like(xa)
    coef = 1.0 / 3.0
    for n in range(0, 12):
        series = series + coef * (2 * n + 1) * (-x2 / 2.0) ** n
        coef = coef / ((n + 1) * (2 * n + 5))
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def spherical_bessel_j1_second(x):
    """Second derivative of j_1, from the ODE x^2 y'' + 2x y' + (x^2 - 2) y = 0."""
    xa = np.asarray(x, dtype=float)
    small = xa < 0.5
    xs = np.where(small, 1.0, xa)
    y = spherical_bessel_j1(xs)
    yp = spherical_bessel_j1_prime(xs)
    closed = -(2.0 * xs * yp + (xs**2 - 2.0) * y) / xs**2
    x2 = xa * xa
    series = np.zeros_like(xa)
    coef = 1.0 / 3.0
    for n in range(1, 12):
        coef = coef / (n * (2 * n + 3))
        series = series + coef * (2 * n + 1) * (2 * n) * (-0.5) ** n * xa ** (2 * n - 1)
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def spherical_bessel_j1_zero() -> float:
    """First positive zero of j_1, i.e. the root of tan x = x in (pi, 3pi/2)."""
    # x^2 j_1(x) = sin x - x cos x has no pole, unlike tan x - x
    return _bisect(lambda x: math.sin(x) - x * math.cos(x), math.pi, 1.5 * math.pi)
