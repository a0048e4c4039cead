"""Uniform tensor meshes, orthonormal Legendre bases and modal fields."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DEGREE = 6
MAX_DIM = 3
MAX_GAUSS_POINTS = 64


class NonFiniteError(ValueError):
    """A computation produced or received NaN / inf values."""


@dataclass(frozen=True)
class UniformMesh:
    """N^d equal elements on the box [a, b]^d, periodic."""

    d: int
    N: int
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if not self.b > self.a:
            raise ValueError("domain must have positive length")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def n_elements(self) -> int:
        return self.N**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    def refined(self, factor: int = 2) -> UniformMesh:
        return UniformMesh(self.d, self.N * factor, self.a, self.b)

    def coarsened(self) -> UniformMesh:
        if self.N % 2:
            raise ValueError(f"cannot coarsen a mesh with odd N={self.N}")
        return UniformMesh(self.d, self.N // 2, self.a, self.b)

    def element_centers(self, axis_index: np.ndarray) -> np.ndarray:
        return self.a + (np.asarray(axis_index) + 0.5) * self.h

    def locate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Return (element multi-index, reference coordinates) for points x.

        Points are wrapped periodically; each coordinate belongs to the
        half-open interval [a + i h, a + (i+1) h).
        """
        x = np.asarray(x, dtype=float)
        y = np.mod(x - self.a, self.length)
        idx = np.floor(y / self.h).astype(np.int64)
        idx = np.clip(idx, 0, self.N - 1)
        zeta = 2.0 * (y - (idx + 0.5) * self.h) / self.h
        return idx, zeta


def n_modes(p: int, d: int) -> int:
    return (p + 1) ** d


def multi_indices(p: int, d: int) -> list[tuple[int, ...]]:
    """All multi-indices with entries 0..p, in lexicographic order."""
    return list(itertools.product(range(p + 1), repeat=d))


def mode_index(alpha, p: int) -> int:
    """Lexicographic linearization of a multi-index (first entry slowest)."""
    k = 0
    for a in alpha:
        if not 0 <= a <= p:
            raise ValueError(f"multi-index entry {a} outside 0..{p}")
        k = k * (p + 1) + a
    return k


def mode_multi_index(k: int, p: int, d: int) -> tuple[int, ...]:
    if not 0 <= k < (p + 1) ** d:
        raise ValueError(f"mode index {k} out of range")
    out = []
    for _ in range(d):
        k, r = divmod(k, p + 1)
        out.append(r)
    return tuple(reversed(out))


def legendre_table(p: int, x) -> np.ndarray:
    """Orthonormal Legendre values phi_0..phi_p at x; shape x.shape + (p+1,)."""
    x = np.asarray(x, dtype=float)
    P = np.empty(x.shape + (p + 1,))
    P[..., 0] = 1.0
    if p >= 1:
        P[..., 1] = x
    for k in range(1, p):
        P[..., k + 1] = ((2 * k + 1) * x * P[..., k] - k * P[..., k - 1]) / (k + 1)
    return P * np.sqrt((2 * np.arange(p + 1) + 1) / 2.0)


def legendre_orthonormal_eval(k: int, x: float) -> float:
    """phi_k(x) = sqrt((2k+1)/2) P_k(x) on the reference interval [-1, 1]."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    return float(legendre_table(k, x)[..., k])


@lru_cache(maxsize=None)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes (ascending) and weights on [-1, 1]."""
    if not 1 <= n <= MAX_GAUSS_POINTS:
        raise ValueError(f"unsupported Gauss rule size n={n} (1..{MAX_GAUSS_POINTS})")
    return _gauss(n)


def tensor_basis_values(p: int, zeta: np.ndarray) -> np.ndarray:
    """Tensor basis phi_alpha at reference points zeta[..., d] -> [..., (p+1)^d]."""
    zeta = np.asarray(zeta, dtype=float)
    d = zeta.shape[-1]
    tables = [legendre_table(p, zeta[..., i]) for i in range(d)]
    out = tables[0]
    for t in tables[1:]:
        out = (out[..., :, None] * t[..., None, :]).reshape(out.shape[:-1] + (-1,))
    return out


@dataclass(frozen=True, eq=False)
class ModalField:
    """Piecewise polynomial in the orthonormal Legendre tensor basis.

    ``coeffs[e, k]`` is the coefficient of mode k (lex multi-index) on
    element e (lex element multi-index, first axis slowest).
    """

    mesh: UniformMesh
    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 0 <= self.p <= MAX_DEGREE:
            raise ValueError(f"degree p={self.p} outside 0..{MAX_DEGREE}")
        c = np.array(self.coeffs, dtype=float)
        expected = (self.mesh.n_elements, n_modes(self.p, self.mesh.d))
        if c.size != expected[0] * expected[1]:
            raise ValueError(
                f"coefficient count {c.size} does not match N^d (p+1)^d = "
                f"{expected[0] * expected[1]}"
            )
        c = c.reshape(expected)
        if not np.all(np.isfinite(c)):
            raise NonFiniteError("modal coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def d(self) -> int:
        return self.mesh.d

    @property
    def n_modes(self) -> int:
        return n_modes(self.p, self.mesh.d)

    def tensor(self) -> np.ndarray:
        """Coefficients shaped (N,)*d + (p+1,)*d."""
        return self.coeffs.reshape(self.mesh.shape + (self.p + 1,) * self.d)

    @classmethod
    def from_tensor(cls, mesh: UniformMesh, p: int, arr: np.ndarray) -> ModalField:
        return cls(mesh, p, np.asarray(arr).reshape(mesh.n_elements, -1))

    @classmethod
    def zeros(cls, mesh: UniformMesh, p: int) -> ModalField:
        return cls(mesh, p, np.zeros((mesh.n_elements, n_modes(p, mesh.d))))

    def with_coeffs(self, coeffs: np.ndarray) -> ModalField:
        return ModalField(self.mesh, self.p, coeffs)

    def __add__(self, other: ModalField) -> ModalField:
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: ModalField) -> ModalField:
        self._check_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> ModalField:
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def _check_compatible(self, other: ModalField):
        if self.mesh != other.mesh or self.p != other.p:
            raise ValueError("fields live on different meshes or degrees")

    def l2_norm(self) -> float:
        """Physical-space L2 norm (Jacobian (h/2)^d per element)."""
        return float(np.sqrt((self.mesh.h / 2) ** self.d * np.sum(self.coeffs**2)))


def eval_field(field: ModalField, x) -> np.ndarray | float:
    """Evaluate the piecewise polynomial at physical point(s) x.

    ``x`` has shape (d,) for a single point or (..., d) for a batch; in 1D a
    scalar or plain array of coordinates is also accepted.
    """
    d = field.d
    x = np.asarray(x, dtype=float)
    scalar = False
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.ndim == 1:
        scalar = True
        x = x[None, :]
    if x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}")
    lead = x.shape[:-1]
    pts = x.reshape(-1, d)
    idx, zeta = field.mesh.locate(pts)
    elem = np.ravel_multi_index(tuple(idx.T), field.mesh.shape)
    vals = np.einsum("nk,nk->n", field.coeffs[elem], tensor_basis_values(field.p, zeta))
    vals = vals.reshape(lead)
    return float(vals[0]) if scalar else vals
