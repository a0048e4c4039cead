"""Line SIAC convolution along the mesh diagonal, evaluated exactly.

The kernel is a sum of shifted B-splines and the field is polynomial on each
element, so along the filter line the integrand is a single polynomial
between consecutive kernel knots / element crossings.  Integrating each
such segment with a Gauss rule of sufficient order gives the convolution
exactly (up to rounding).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kernel import SiacKernel, bspline_eval, kernel_eval, reference_breaks
from .mesh_basis import (
    ModalField,
    UniformMesh,
    gauss_legendre_rule,
    tensor_basis_values,
)

BREAK_TOL = 1e-12


@dataclass(frozen=True)
class FilterGeometry:
    """Diagonal filter line: direction (1,..,1)/sqrt(d), scaling H = sqrt(d) h."""

    d: int
    h: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"unsupported dimension {self.d}")
        if self.h <= 0:
            raise ValueError("mesh width must be positive")

    @classmethod
    def for_mesh(cls, mesh: UniformMesh) -> FilterGeometry:
        return cls(mesh.d, mesh.h)

    @property
    def v(self) -> np.ndarray:
        return np.full(self.d, 1.0 / math.sqrt(self.d))

    @property
    def H(self) -> float:
        return math.sqrt(self.d) * self.h


def mra_kernel(p: int, geom: FilterGeometry) -> SiacKernel:
    """The r = 2p, order-1 kernel scaled to the diagonal of the mesh."""
    return SiacKernel(2 * p, 1, geom.H)


def segment_gauss_points(d: int, p: int, order: int) -> int:
    return math.ceil((d * p + order) / 2) + 1


def _check(field: ModalField, geom: FilterGeometry):
    if field.d != geom.d or not math.isclose(field.mesh.h, geom.h, rel_tol=1e-12):
        raise ValueError("filter geometry does not match the field's mesh")


def _breaks_local(zeta: np.ndarray, step: np.ndarray, K: SiacKernel, h: float) -> np.ndarray:
    """Sorted, deduplicated line parameters t of kernel knots and element crossings.

    ``zeta`` is the reference position inside the owning element and
    ``step`` the rate d(zeta_i)/dt along the line.
    """
    lo, hi = -K.half_width, K.half_width
    pts = list(K.H * reference_breaks(K.r, K.order))
    for z, st in zip(zeta, step):
        if st == 0:
            continue
        # zeta_i + st * t = 2k + 1
        ends = sorted((z + st * lo, z + st * hi))
        for k in range(math.floor((ends[0] - 1) / 2), math.ceil((ends[1] - 1) / 2) + 1):
            t = (2 * k + 1 - z) / st
            if lo < t < hi:
                pts.append(t)
    pts.sort()
    tol = BREAK_TOL * K.H
    out = [pts[0]]
    for t in pts[1:]:
        if t - out[-1] > tol:
            out.append(t)
    return np.array(out)


def _local_frame(field: ModalField, geom: FilterGeometry, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (geom.d,):
        raise ValueError(f"point must have {geom.d} coordinates")
    idx, zeta = field.mesh.locate(x)
    step = 2.0 * geom.v / field.mesh.h
    return idx, zeta, step


def segment_breakpoints(field: ModalField, geom: FilterGeometry, K: SiacKernel, x) -> np.ndarray:
    """Line parameters splitting the filter support into polynomial pieces."""
    _check(field, geom)
    _, zeta, step = _local_frame(field, geom, x)
    return _breaks_local(zeta, step, K, field.mesh.h)


def filter_point(field: ModalField, geom: FilterGeometry, K: SiacKernel, x) -> float:
    """Exact value of the line convolution u*(x) = int K_H(t) u_h(x + t v) dt."""
    _check(field, geom)
    idx, zeta, step = _local_frame(field, geom, x)
    breaks = _breaks_local(zeta, step, K, field.mesh.h)
    xg, wg = gauss_legendre_rule(segment_gauss_points(field.d, field.p, K.order))
    coeffs = field.tensor()
    N = field.mesh.N
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        t = mid + half * xg
        off = np.floor((zeta + step * mid + 1.0) / 2.0).astype(np.int64)
        local = zeta[None, :] + step[None, :] * t[:, None] - 2.0 * off[None, :]
        elem = tuple((idx + off) % N)
        u = tensor_basis_values(field.p, local) @ coeffs[elem].reshape(-1)
        total += half * float(np.sum(wg * kernel_eval(K, t) * u))
    return total


# ---------------------------------------------------------------------------
# reference-element functionals (shared by every element of a uniform mesh)


def neighborhood_radius(K: SiacKernel, geom: FilterGeometry) -> int:
    reach = 1.0 + 2.0 * K.half_width / (math.sqrt(geom.d) * geom.h)
    return int(math.floor((reach + 1.0) / 2.0))


def line_functionals(
    p: int, geom: FilterGeometry, K: SiacKernel, zetas: np.ndarray, n_gauss: int | None = None
) -> np.ndarray:
    """Weights W[n, o, alpha] with u*(zeta_n in element b) = sum W u[b + o, alpha].

    ``o`` runs over the (2R+1)^d neighbor offsets in lex order, R from
    :func:`neighborhood_radius`.  Vectorized over the reference points.
    """
    d = geom.d
    zetas = np.atleast_2d(np.asarray(zetas, dtype=float))
    n = zetas.shape[0]
    R = neighborhood_radius(K, geom)
    width = 2 * R + 1
    # everything in the reference-kernel variable s = t / H
    step = 2.0 * K.H * geom.v / geom.h
    lo, hi = -(K.r + K.order) / 2.0, (K.r + K.order) / 2.0
    cands = [np.broadcast_to(reference_breaks(K.r, K.order), (n, len(reference_breaks(K.r, K.order))))]
    for i in range(d):
        k0 = math.floor((-1 + step[i] * lo - 1) / 2) - 1
        k1 = math.ceil((1 + step[i] * hi - 1) / 2) + 1
        ks = np.arange(k0, k1 + 1)
        s = (2 * ks[None, :] + 1 - zetas[:, i : i + 1]) / step[i]
        cands.append(np.clip(s, lo, hi))
    pts = np.sort(np.concatenate(cands, axis=1), axis=1)
    a, b = pts[:, :-1], pts[:, 1:]
    half, mid = 0.5 * (b - a), 0.5 * (b + a)

    ng = segment_gauss_points(d, p, K.order) if n_gauss is None else n_gauss
    xg, wg = gauss_legendre_rule(ng)
    s = mid[..., None] + half[..., None] * xg  # (n, S, G)
    kval = sum(c * bspline_eval(K.order, s - g) for c, g in zip(K.c, K.gammas))
    wk = half[..., None] * wg * kval

    off = np.floor((zetas[:, None, :] + step * mid[..., None] + 1.0) / 2.0).astype(np.int64)
    local = zetas[:, None, None, :] + step * s[..., None] - 2.0 * off[:, :, None, :]
    phi = tensor_basis_values(p, local)  # (n, S, G, M)
    contrib = np.einsum("nsg,nsgm->nsm", wk, phi)

    box = np.zeros(off.shape[:2], dtype=np.int64)
    for i in range(d):
        box = box * width + (off[..., i] + R)
    W = np.zeros((n, width**d, phi.shape[-1]))
    rows = np.broadcast_to(np.arange(n)[:, None], box.shape)
    np.add.at(W, (rows, box), contrib)
    return W


def neighborhood_offsets(R: int, d: int) -> np.ndarray:
    return np.array(list(itertools.product(range(-R, R + 1), repeat=d)), dtype=np.int64)


def apply_functionals(field: ModalField, W: np.ndarray, R: int) -> np.ndarray:
    """Apply per-point functionals to every element: returns (N^d, n)."""
    d = field.d
    U = field.coeffs.reshape(field.mesh.shape + (-1,))
    out = np.zeros(field.mesh.shape + (W.shape[0],))
    for j, o in enumerate(neighborhood_offsets(R, d)):
        block = W[:, j, :]
        if not np.any(block):
            continue
        shifted = np.roll(U, shift=tuple(-o), axis=tuple(range(d)))
        out += shifted @ block.T
    return out.reshape(field.mesh.n_elements, -1)


def filter_reference(field: ModalField, geom: FilterGeometry, K: SiacKernel, zetas) -> np.ndarray:
    """u* at reference position(s) ``zetas`` inside every element: (N^d, n)."""
    _check(field, geom)
    W = line_functionals(field.p, geom, K, zetas)
    return apply_functionals(field, W, neighborhood_radius(K, geom))


# ---------------------------------------------------------------------------
# smoothness regions of the filtered field inside a reference element


class RegionId(NamedTuple):
    """signs[i] = 1 if zeta_i >= 0 side, else 0; ranks[i] = order of zeta_i
    among the coordinates sharing its sign."""

    signs: tuple[int, ...]
    ranks: tuple[int, ...]


def _group_orderings(axes: list[int]):
    return itertools.permutations(axes)


def regions_for_signs(signs: tuple[int, ...]) -> list[RegionId]:
    d = len(signs)
    groups = [[i for i in range(d) if signs[i] == s] for s in (0, 1)]
    out = []
    for perms in itertools.product(*(_group_orderings(g) for g in groups)):
        ranks = [0] * d
        for perm in perms:
            for r, ax in enumerate(perm):
                ranks[ax] = r
        out.append(RegionId(tuple(signs), tuple(ranks)))
    return sorted(out)


def all_regions(d: int) -> list[RegionId]:
    return sorted(
        r for signs in itertools.product((0, 1), repeat=d) for r in regions_for_signs(signs)
    )


def classify_region(zeta) -> RegionId:
    """Smooth region of the filtered field containing reference point ``zeta``.

    Region boundaries are the planes zeta_i = 0 and zeta_i = zeta_j; points on
    a boundary get the lexicographically smallest adjacent region.
    """
    zeta = np.asarray(zeta, dtype=float)
    d = zeta.size
    if d not in (2, 3):
        raise ValueError("regions are defined for d = 2 or 3")
    sign_opts = [(0, 1) if z == 0 else ((1,) if z > 0 else (0,)) for z in zeta]
    best = None
    for signs in itertools.product(*sign_opts):
        for reg in regions_for_signs(signs):
            if _contains(reg, zeta) and (best is None or reg < best):
                best = reg
    return best


def _contains(reg: RegionId, zeta: np.ndarray) -> bool:
    d = len(zeta)
    for i in range(d):
        for j in range(d):
            if i != j and reg.signs[i] == reg.signs[j] and reg.ranks[i] < reg.ranks[j]:
                if zeta[i] > zeta[j]:
                    return False
    return True
