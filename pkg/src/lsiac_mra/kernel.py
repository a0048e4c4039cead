"""Central B-splines and symmetric SIAC kernels built from them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

log = logging.getLogger(__name__)

MAX_R = 12


def _poly_shift(coeffs: tuple[Fraction, ...], a: Fraction) -> tuple[Fraction, ...]:
    """Coefficients (ascending powers) of q(t) = p(t + a)."""
    out = [Fraction(0)] * len(coeffs)
    for n, c in enumerate(coeffs):
        for k in range(n + 1):
            out[k] += c * comb(n, k) * a ** (n - k)
    return tuple(out)


def _poly_mul_linear(coeffs, c0, c1):
    """(c0 + c1 t) * p(t)."""
    out = [Fraction(0)] * (len(coeffs) + 1)
    for n, c in enumerate(coeffs):
        out[n] += c0 * c
        out[n + 1] += c1 * c
    return out


@lru_cache(maxsize=None)
def bspline_pieces(order: int) -> tuple[tuple[Fraction, ...], ...]:
    """Exact polynomial pieces of the central B-spline of the given order.

    Piece j (ascending-power rational coefficients in t) lives on
    [-order/2 + j, -order/2 + j + 1), j = 0..order-1.  Built from
    B^(n+1) = B^(n) * B^(1), i.e.
    B^(n+1)(t) = [((n+1)/2 + t) B^(n)(t + 1/2) + ((n+1)/2 - t) B^(n)(t - 1/2)] / n.
    """
    if order < 1:
        raise ValueError("B-spline order must be >= 1")
    if order == 1:
        return ((Fraction(1),),)
    prev = bspline_pieces(order - 1)
    n = order - 1
    half = Fraction(1, 2)
    pieces = []
    for j in range(order):
        # on piece j: t in [-order/2 + j, ...); t + 1/2 and t - 1/2 land on prev pieces j and j-1
        acc = [Fraction(0)] * order
        if j < n:
            shifted = _poly_shift(prev[j], half)
            for k, c in enumerate(_poly_mul_linear(shifted, Fraction(order, 2), Fraction(1))):
                acc[k] += c
        if j >= 1:
            shifted = _poly_shift(prev[j - 1], -half)
            for k, c in enumerate(_poly_mul_linear(shifted, Fraction(order, 2), Fraction(-1))):
                acc[k] += c
        pieces.append(tuple(c / n for c in acc))
    return tuple(pieces)


@lru_cache(maxsize=None)
def _float_pieces(order: int) -> np.ndarray:
    pieces = bspline_pieces(order)
    return np.array([[float(c) for c in p] for p in pieces])


def bspline_eval(order: int, t):
    """Central B-spline B^(order)(t); B^(1) is the indicator of [-1/2, 1/2)."""
    t = np.asarray(t, dtype=float)
    coeffs = _float_pieces(order)
    u = t + order / 2.0
    j = np.floor(u).astype(np.int64)
    inside = (j >= 0) & (j < order)
    jc = np.clip(j, 0, order - 1)
    c = coeffs[jc]
    val = np.zeros_like(t)
    for k in range(order - 1, -1, -1):
        val = val * t + c[..., k]
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def bspline_moment(order: int, shift: Fraction, m: int) -> Fraction:
    """Exact  integral of B^(order)(t - shift) t^m dt."""
    pieces = bspline_pieces(order)
    total = Fraction(0)
    for j, piece in enumerate(pieces):
        lo = -Fraction(order, 2) + j
        hi = lo + 1
        # integrand in s = t - shift: B(s) (s + shift)^m
        sm = [Fraction(comb(m, k)) * shift ** (m - k) for k in range(m + 1)]
        prod = [Fraction(0)] * (len(piece) + m)
        for a, ca in enumerate(piece):
            for b, cb in enumerate(sm):
                prod[a + b] += ca * cb
        total += sum(c * (hi ** (n + 1) - lo ** (n + 1)) / (n + 1) for n, c in enumerate(prod))
    return total


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    M = [row[:] + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


@lru_cache(maxsize=None)
def kernel_coefficients_exact(r: int, order: int) -> tuple[Fraction, ...]:
    """Rational coefficients c_gamma, gamma = -r/2..r/2, from the moment conditions."""
    if r < 0 or r % 2 or r > MAX_R:
        raise ValueError(f"r must be even and in 0..{MAX_R}, got {r}")
    gammas = [Fraction(g) for g in range(-r // 2, r // 2 + 1)]
    A = [[bspline_moment(order, g, m) for g in gammas] for m in range(r + 1)]
    b = [Fraction(1)] + [Fraction(0)] * r
    cond = np.linalg.cond(np.array(A, dtype=float))
    if cond > 1e12:
        log.warning("moment system for r=%d, order=%d has condition %.2e", r, order, cond)
    return tuple(_solve_exact(A, b))


def kernel_coefficients(r: int, order: int) -> np.ndarray:
    return np.array([float(c) for c in kernel_coefficients_exact(r, order)])


@dataclass(frozen=True)
class SiacKernel:
    """K_H(t) = (1/H) sum_gamma c_gamma B^(order)(t/H - gamma)."""

    r: int
    order: int
    H: float
    c: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.H <= 0:
            raise ValueError("kernel scaling H must be positive")
        if self.c is None:
            object.__setattr__(self, "c", kernel_coefficients(self.r, self.order))
        c = np.asarray(self.c, dtype=float)
        if c.shape != (self.r + 1,):
            raise ValueError("need r+1 kernel coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def gammas(self) -> np.ndarray:
        return np.arange(-self.r // 2, self.r // 2 + 1)

    @property
    def half_width(self) -> float:
        """Support of K_H is [-half_width, half_width]."""
        return self.H * (self.r + self.order) / 2.0

    def scaled(self, H: float) -> SiacKernel:
        return SiacKernel(self.r, self.order, H, self.c)


def siac_kernel(r: int, order: int, H: float = 1.0) -> SiacKernel:
    return SiacKernel(r, order, H)


def kernel_eval(K: SiacKernel, t):
    t = np.asarray(t, dtype=float)
    s = t / K.H
    val = sum(cg * bspline_eval(K.order, s - g) for cg, g in zip(K.c, K.gammas))
    return val / K.H


def reference_breaks(r: int, order: int) -> np.ndarray:
    """Kernel knots for H = 1: gamma + j - order/2."""
    pts = {g + j - order / 2.0 for g in range(-r // 2, r // 2 + 1) for j in range(order + 1)}
    return np.array(sorted(pts))


def kernel_breaks(K: SiacKernel) -> np.ndarray:
    return K.H * reference_breaks(K.r, K.order)
