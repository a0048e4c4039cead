"""Multiwavelet two-scale transforms between a fine field and coarse field + details.

On a coarse reference element [-1, 1] the fine space is spanned by the
orthonormal functions e_{s,m} = sqrt(2) phi_m(child-local coordinate),
s = 0 (left half), 1 (right half).  The 1D two-scale matrix G = [C; W] is
orthogonal in those coordinates: rows of C are the coarse Legendre modes,
rows of W the mother wavelets psi_k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernel import SiacKernel
from .line_filter import FilterGeometry
from .mesh_basis import MAX_DEGREE, ModalField, gauss_legendre_rule, legendre_table
from .projection import child_tables
from .refine import refine_once


@dataclass(frozen=True, eq=False)
class MultiwaveletBasis:
    """``pieces[k, s, m]``: coefficient of phi_m(child-local) in psi_k on half s."""

    p: int
    pieces: np.ndarray
    d: int = 1

    @property
    def scaling_rows(self) -> np.ndarray:
        return _scaling_rows(self.p)

    @property
    def wavelet_rows(self) -> np.ndarray:
        return self.pieces.reshape(self.p + 1, -1) / math.sqrt(2.0)

    @property
    def two_scale(self) -> np.ndarray:
        return np.vstack([self.scaling_rows, self.wavelet_rows])

    @property
    def detail_types(self) -> list[tuple[int, ...]]:
        """Per-axis factor kinds (0 scaling, 1 wavelet) of each detail block."""
        return list(itertools.product((0, 1), repeat=self.d))[1:]

    @property
    def n_details(self) -> int:
        return (2**self.d - 1) * (self.p + 1) ** self.d

    def psi(self, k: int, zeta) -> np.ndarray:
        """Mother wavelet psi_k on the reference element [-1, 1]."""
        zeta = np.asarray(zeta, dtype=float)
        right = zeta >= 0
        local = np.where(right, 2.0 * zeta - 1.0, 2.0 * zeta + 1.0)
        table = legendre_table(self.p, local)
        vals = np.where(right, table @ self.pieces[k, 1], table @ self.pieces[k, 0])
        return vals

    def detail_function(self, index: int, zeta) -> np.ndarray:
        """d-dimensional detail function ``index`` at reference points zeta[..., d]."""
        zeta = np.asarray(zeta, dtype=float)
        M = (self.p + 1) ** self.d
        t, rest = divmod(index, M)
        kinds = self.detail_types[t]
        modes = np.unravel_index(rest, (self.p + 1,) * self.d)
        out = np.ones(zeta.shape[:-1])
        for ax in range(self.d):
            z = zeta[..., ax]
            if kinds[ax]:
                out = out * self.psi(int(modes[ax]), z)
            else:
                out = out * legendre_table(self.p, z)[..., int(modes[ax])]
        return out


@lru_cache(maxsize=None)
def _scaling_rows(p: int) -> np.ndarray:
    T = child_tables(p)
    C = np.concatenate([T[0], T[1]], axis=1) / math.sqrt(2.0)
    C.setflags(write=False)
    return C


@lru_cache(maxsize=None)
def _wavelet_pieces(p: int) -> np.ndarray:
    # candidates sign(zeta) zeta^k together with the coarse polynomials span the fine space
    n = p + 1
    xg, wg = gauss_legendre_rule(n)
    cand = np.empty((n, 2 * n))
    for s, sign in enumerate((-1.0, 1.0)):
        local = legendre_table(p, xg)
        zeta = 0.5 * (xg + (2 * s - 1))
        for k in range(n):
            # <g, e_{s,m}> = int_half g sqrt(2) phi_m(local) dzeta
            g = sign * zeta**k
            cand[k, s * n : (s + 1) * n] = math.sqrt(2.0) * 0.5 * (wg * g) @ local
    C = _scaling_rows(p)
    W = np.zeros((n, 2 * n))
    for k in range(n):
        v = cand[k].copy()
        for _ in range(2):
            v -= C.T @ (C @ v)
            v -= W[:k].T @ (W[:k] @ v)
        v /= np.linalg.norm(v)
        right = v[n:]
        lead = np.flatnonzero(np.abs(right) > 1e-10)
        if lead.size and right[lead[-1]] < 0:
            v = -v
        W[k] = v
    pieces = (W * math.sqrt(2.0)).reshape(n, 2, n)
    pieces.setflags(write=False)
    return pieces


def build_multiwavelets(p: int, d: int = 1) -> MultiwaveletBasis:
    """Orthonormal basis of the complement of degree-p polynomials in the
    two-piece degree-p space on [-1, 1] (and its tensor details in d dims)."""
    if not 0 <= p <= MAX_DEGREE:
        raise ValueError(f"degree must be in 0..{MAX_DEGREE}, got {p}")
    if d not in (1, 2, 3):
        raise ValueError(f"unsupported dimension {d}")
    return MultiwaveletBasis(p, _wavelet_pieces(p), d)


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    """Coarse field plus details (coarse element, detail index), physically normalized."""

    coarse: ModalField
    details: np.ndarray

    def __post_init__(self):
        c = self.coarse
        expected = (c.mesh.n_elements, (2**c.d - 1) * c.n_modes)
        det = np.array(self.details, dtype=float)
        if det.shape != expected:
            raise ValueError(f"details must have shape {expected}, got {det.shape}")
        det.setflags(write=False)
        object.__setattr__(self, "details", det)

    def __add__(self, other: WaveletDecomposition) -> WaveletDecomposition:
        return WaveletDecomposition(self.coarse + other.coarse, self.details + other.details)

    def __mul__(self, a: float) -> WaveletDecomposition:
        return WaveletDecomposition(self.coarse * a, self.details * a)

    __rmul__ = __mul__


def _apply_axes(arr: np.ndarray, G: np.ndarray, first: int, d: int) -> np.ndarray:
    for ax in range(d):
        arr = np.moveaxis(np.tensordot(arr, G, axes=([first + ax], [1])), -1, first + ax)
    return arr


def decompose(fine: ModalField) -> WaveletDecomposition:
    """Split a field into its coarse projection and multiwavelet details."""
    mesh, p, d = fine.mesh, fine.p, fine.d
    if mesh.N % 2:
        raise ValueError(f"cannot decompose a mesh with odd N={mesh.N}")
    Nc, n = mesh.N // 2, p + 1
    coarse_mesh = mesh.coarsened()
    arr = fine.tensor().reshape(sum(((Nc, 2) for _ in range(d)), ()) + (n,) * d)
    # -> (Nc..., s1, m1, ..., sd, md) -> (Nc..., 2n, ..., 2n)
    perm = [2 * i for i in range(d)] + [ax for i in range(d) for ax in (2 * i + 1, 2 * d + i)]
    arr = arr.transpose(perm).reshape((Nc,) * d + (2 * n,) * d)
    G = build_multiwavelets(p, d).two_scale
    y = _apply_axes(arr, G, d, d) / 2.0 ** (d / 2)

    coarse = ModalField.from_tensor(coarse_mesh, p, y[(Ellipsis,) + (slice(0, n),) * d])
    scale = (coarse_mesh.h / 2.0) ** (d / 2)
    blocks = []
    for kinds in build_multiwavelets(p, d).detail_types:
        sl = tuple(slice(n, 2 * n) if k else slice(0, n) for k in kinds)
        blocks.append(y[(Ellipsis,) + sl].reshape(Nc**d, n**d))
    details = scale * np.concatenate(blocks, axis=1)
    return WaveletDecomposition(coarse, details)


def reconstruct(dec: WaveletDecomposition) -> ModalField:
    """Inverse of :func:`decompose`."""
    coarse = dec.coarse
    p, d, Nc, n = coarse.p, coarse.d, coarse.mesh.N, coarse.p + 1
    basis = build_multiwavelets(p, d)
    if dec.details.shape != (Nc**d, basis.n_details):
        raise ValueError("detail layout does not match the coarse field")
    scale = (coarse.mesh.h / 2.0) ** (d / 2)
    y = np.zeros((Nc,) * d + (2 * n,) * d)
    y[(Ellipsis,) + (slice(0, n),) * d] = coarse.tensor()
    det = dec.details.reshape(Nc**d, len(basis.detail_types), n**d) / scale
    for t, kinds in enumerate(basis.detail_types):
        sl = tuple(slice(n, 2 * n) if k else slice(0, n) for k in kinds)
        y[(Ellipsis,) + sl] = det[:, t].reshape((Nc,) * d + (n,) * d)
    G = basis.two_scale
    arr = _apply_axes(y, G.T, d, d) * 2.0 ** (d / 2)
    arr = arr.reshape((Nc,) * d + sum(((2, n) for _ in range(d)), ()))
    # (Nc..., s1, m1, ..., sd, md) -> (Nc1, s1, ..., Ncd, sd, m1..md)
    perm = [ax for i in range(d) for ax in (i, d + 2 * i)] + [d + 2 * i + 1 for i in range(d)]
    arr = arr.transpose(perm).reshape((2 * Nc,) * d + (n,) * d)
    return ModalField.from_tensor(coarse.mesh.refined(), p, arr)


def enhanced_details(
    coarse: ModalField, K: SiacKernel | None = None, geom: FilterGeometry | None = None
) -> WaveletDecomposition:
    """Details of the filtered-and-refined field: decompose(refine_once(coarse))."""
    return decompose(refine_once(coarse, K, geom))
