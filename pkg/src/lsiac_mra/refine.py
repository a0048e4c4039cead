"""Filter-then-project transfer of a modal field onto the 2x refined mesh."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernel import SiacKernel
from .line_filter import (
    FilterGeometry,
    RegionId,
    apply_functionals,
    line_functionals,
    mra_kernel,
    neighborhood_offsets,
    neighborhood_radius,
    regions_for_signs,
)
from .mesh_basis import MAX_DEGREE, ModalField, gauss_legendre_rule, tensor_basis_values
from .projection import refine_by_projection


def default_simplex_points(p: int, d: int) -> int:
    # the filtered field has total degree <= d p + 1 on each region; the
    # collapsed map adds up to d - 1 to the degree along the outer axis
    return max(2 * (p + 2), d * p + math.ceil((d + 1) / 2))


@lru_cache(maxsize=None)
def sorted_simplex_rule(g: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on {0 <= y_1 <= ... <= y_g <= 1}."""
    x, w = gauss_legendre_rule(n)
    x01, w01 = 0.5 * (x + 1.0), 0.5 * w
    U = np.array(list(itertools.product(x01, repeat=g)))
    Wt = np.prod(np.array(list(itertools.product(w01, repeat=g))), axis=1)
    Y = np.empty_like(U)
    Y[:, g - 1] = U[:, g - 1]
    for k in range(g - 2, -1, -1):
        Y[:, k] = U[:, k] * Y[:, k + 1]
    jac = np.prod(Y[:, 1:], axis=1) if g > 1 else np.ones(len(U))
    return Y, Wt * jac


def region_rule(region: RegionId, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes (reference coordinates of the coarse element) and
    weights for one smooth region of one child."""
    d = len(region.signs)
    parts = []
    for s in (0, 1):
        axes = [i for i in range(d) if region.signs[i] == s]
        if not axes:
            continue
        order = sorted(axes, key=lambda ax: region.ranks[ax])
        Y, w = sorted_simplex_rule(len(order), n)
        parts.append((order, Y - 1.0 if s == 0 else Y, w))
    nodes, weights = None, None
    for order, Y, w in parts:
        block = np.zeros((len(w), d))
        block[:, order] = Y
        if nodes is None:
            nodes, weights = block, w
        else:
            nodes = (nodes[:, None, :] + block[None, :, :]).reshape(-1, d)
            weights = (weights[:, None] * w[None, :]).reshape(-1)
    return nodes, weights


def children(d: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=d))


def _child_projector(child, nodes, weights, p):
    """Rows: weights * phi_k at the child-local image of the nodes, times 2^d."""
    d = len(child)
    local = 2.0 * nodes + 1.0 - 2.0 * np.asarray(child)
    return (2.0**d) * weights[:, None] * tensor_basis_values(p, local)


def _check_kernel(field: ModalField, K: SiacKernel, geom: FilterGeometry):
    if K.r != 2 * field.p or K.order != 1:
        raise ValueError(
            f"refinement needs the r=2p={2 * field.p}, order-1 kernel; got r={K.r}, order={K.order}"
        )
    if geom.d != field.d or not math.isclose(geom.h, field.mesh.h, rel_tol=1e-12):
        raise ValueError("filter geometry does not match the field's mesh")
    if not math.isclose(K.H, geom.H, rel_tol=1e-12):
        raise ValueError(f"kernel scaling H={K.H} must equal sqrt(d) h = {geom.H}")


def _assemble(field: ModalField, per_child: np.ndarray) -> ModalField:
    """per_child: (N^d, 2^d, M) -> field on the refined mesh."""
    d, N, M = field.d, field.mesh.N, field.n_modes
    arr = per_child.reshape((N,) * d + (2,) * d + (M,))
    perm = [ax for i in range(d) for ax in (i, d + i)] + [2 * d]
    arr = arr.transpose(perm).reshape((2 * N,) * d + (M,))
    return ModalField.from_tensor(field.mesh.refined(), field.p, arr)


def _refine_direct(field: ModalField, K: SiacKernel, geom: FilterGeometry, n_quad: int) -> ModalField:
    d, p = field.d, field.p
    R = neighborhood_radius(K, geom)
    out = np.zeros((field.mesh.n_elements, 2**d, field.n_modes))
    for ci, child in enumerate(children(d)):
        for region in regions_for_signs(child):
            nodes, w = region_rule(region, n_quad)
            values = apply_functionals(field, line_functionals(p, geom, K, nodes), R)
            out[:, ci, :] += values @ _child_projector(child, nodes, w, p)
    return _assemble(field, out)


@dataclass(frozen=True, eq=False)
class TransitionStencil:
    """Per-child linear maps from the neighborhood's modes to the child's modes.

    ``blocks[c, o]`` is the (p+1)^d x (p+1)^d map from the coefficients of
    coarse element b + offset[o] to fine child c of element b.
    """

    d: int
    p: int
    radius: int
    blocks: np.ndarray

    @property
    def offsets(self) -> np.ndarray:
        return neighborhood_offsets(self.radius, self.d)

    def apply(self, field: ModalField) -> ModalField:
        if field.d != self.d or field.p != self.p:
            raise ValueError("stencil built for a different dimension or degree")
        d = self.d
        U = field.coeffs.reshape(field.mesh.shape + (-1,))
        nc, _, M, _ = self.blocks.shape
        out = np.zeros(field.mesh.shape + (nc * M,))
        for j, o in enumerate(self.offsets):
            B = self.blocks[:, j]
            if not np.any(B):
                continue
            shifted = np.roll(U, shift=tuple(-o), axis=tuple(range(d)))
            out += shifted @ B.reshape(nc * M, M).T
        return _assemble(field, out.reshape(field.mesh.n_elements, nc, M))


@lru_cache(maxsize=None)
def _stencil_cached(p: int, d: int, n_quad: int) -> TransitionStencil:
    geom = FilterGeometry(d, 1.0)
    K = mra_kernel(p, geom)
    R = neighborhood_radius(K, geom)
    M = (p + 1) ** d
    blocks = np.zeros((2**d, (2 * R + 1) ** d, M, M))
    for ci, child in enumerate(children(d)):
        for region in regions_for_signs(child):
            nodes, w = region_rule(region, n_quad)
            W = line_functionals(p, geom, K, nodes)
            P = _child_projector(child, nodes, w, p)
            blocks[ci] += (P.T @ W.reshape(len(w), -1)).reshape(M, -1, M).transpose(1, 0, 2)
    blocks.setflags(write=False)
    return TransitionStencil(d, p, R, blocks)


def build_transition_stencil(p: int, d: int, n_quad: int | None = None) -> TransitionStencil:
    """Mesh-independent refinement stencil for degree p in d dimensions.

    Column (o, alpha) of child c's map is the response of child c to a unit
    coefficient alpha in the neighbor at offset o.
    """
    if not 0 <= p <= MAX_DEGREE or d not in (1, 2, 3):
        raise ValueError(f"unsupported (p, d) = ({p}, {d})")
    return _stencil_cached(p, d, default_simplex_points(p, d) if n_quad is None else n_quad)


def refine_once(
    field: ModalField,
    K: SiacKernel | None = None,
    geom: FilterGeometry | None = None,
    mode: str = "stencil",
    n_quad: int | None = None,
) -> ModalField:
    """Filter ``field`` with the diagonal line kernel and L2-project onto the 2N mesh."""
    geom = FilterGeometry.for_mesh(field.mesh) if geom is None else geom
    K = mra_kernel(field.p, geom) if K is None else K
    _check_kernel(field, K, geom)
    n_quad = default_simplex_points(field.p, field.d) if n_quad is None else n_quad
    if mode == "direct":
        return _refine_direct(field, K, geom, n_quad)
    if mode == "stencil":
        return build_transition_stencil(field.p, field.d, n_quad).apply(field)
    raise ValueError(f"unknown refinement mode {mode!r}")


def enhance(field: ModalField, levels: int, strategy: str = "each", mode: str = "stencil") -> ModalField:
    """Refine ``levels`` times; filter at every level ("each") or only the first ("once")."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if strategy not in ("once", "each"):
        raise ValueError(f"unknown strategy {strategy!r}")
    out = refine_once(field, mode=mode)
    for _ in range(levels - 1):
        out = refine_once(out, mode=mode) if strategy == "each" else refine_by_projection(out)
    return out
