"""L2 projection of functions onto modal fields and exact nested transfers."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .mesh_basis import (
    ModalField,
    NonFiniteError,
    UniformMesh,
    gauss_legendre_rule,
    legendre_table,
)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def default_quadrature(p: int) -> int:
    return max(p + 2, 10)


def _axis_rule(mesh: UniformMesh, q: int, breaks: Sequence[float]):
    """Per-element 1D rule in reference coordinates, split at interior breaks.

    Returns (nodes, weights) of shape (N, Q); padded entries carry zero weight.
    """
    xg, wg = gauss_legendre_rule(q)
    N, h = mesh.N, mesh.h
    pieces: list[list[tuple[float, float]]] = []
    for i in range(N):
        lo, hi = mesh.a + i * h, mesh.a + (i + 1) * h
        cuts = sorted(b for b in breaks if lo + 1e-14 * h < b < hi - 1e-14 * h)
        edges = [-1.0] + [2.0 * (b - lo) / h - 1.0 for b in cuts] + [1.0]
        pieces.append(list(zip(edges[:-1], edges[1:])))
    n_sub = max(len(ps) for ps in pieces)
    nodes = np.zeros((N, n_sub * q))
    weights = np.zeros((N, n_sub * q))
    for i, ps in enumerate(pieces):
        for j, (l, r) in enumerate(ps):
            sl = slice(j * q, (j + 1) * q)
            nodes[i, sl] = 0.5 * (r - l) * xg + 0.5 * (r + l)
            weights[i, sl] = 0.5 * (r - l) * wg
    return nodes, weights


def project_function(
    f: Callable[..., np.ndarray],
    mesh: UniformMesh,
    p: int,
    q: int | None = None,
    breaks: Sequence[float] | Sequence[Sequence[float]] | None = None,
) -> ModalField:
    """L2-project ``f(x1, ..., xd)`` (vectorized) onto degree-p modes.

    ``breaks`` lists coordinates (shared by all axes, or one list per axis)
    where f is not smooth; elements containing one strictly inside are
    integrated piecewise.
    """
    q = default_quadrature(p) if q is None else q
    if q < p + 1:
        raise ValueError(f"quadrature size q={q} must be at least p+1={p + 1}")
    d = mesh.d
    if breaks is None:
        axis_breaks = [()] * d
    elif len(breaks) and isinstance(breaks[0], (list, tuple, np.ndarray)):
        axis_breaks = [tuple(b) for b in breaks]
    else:
        axis_breaks = [tuple(breaks)] * d

    rules = [_axis_rule(mesh, q, axis_breaks[i]) for i in range(d)]
    coords = [mesh.element_centers(np.arange(mesh.N))[:, None] + 0.5 * mesh.h * r[0] for r in rules]
    # per-axis (N, Q, p+1) weighted basis
    mats = [r[1][..., None] * legendre_table(p, r[0]) for r in rules]

    e = _LETTERS[:d]
    n = _LETTERS[d : 2 * d]
    m = _LETTERS[2 * d : 3 * d]
    spec = (
        "".join(a + b for a, b in zip(e, n))
        + ","
        + ",".join(a + b + c for a, b, c in zip(e, n, m))
        + "->"
        + e
        + m
    )

    out = np.empty(mesh.shape + (p + 1,) * d)
    # chunk over the first axis to bound memory
    Q = coords[0].shape[1]
    per_row = Q * np.prod([c.size for c in coords[1:]], dtype=np.int64) if d > 1 else Q
    chunk = max(1, int(4_000_000 // max(per_row, 1)))
    for start in range(0, mesh.N, chunk):
        stop = min(mesh.N, start + chunk)
        grids = []
        for ax in range(d):
            c = coords[ax] if ax else coords[0][start:stop]
            shape = [1] * (2 * d)
            shape[2 * ax] = c.shape[0]
            shape[2 * ax + 1] = c.shape[1]
            grids.append(c.reshape(shape))
        vals = np.asarray(f(*grids), dtype=float)
        vals = np.broadcast_to(vals, np.broadcast_shapes(*[g.shape for g in grids]))
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("function returned non-finite values at quadrature nodes")
        out[start:stop] = np.einsum(spec, vals, mats[0][start:stop], *mats[1:], optimize=True)
    return ModalField.from_tensor(mesh, p, out)


@lru_cache(maxsize=None)
def child_tables(p: int) -> np.ndarray:
    """T[s, j, k] = coefficient of child mode k in coarse mode j, s = 0 (left), 1 (right).

    A coarse reference polynomial restricted to child s, re-expressed in the
    child's own reference coordinate.
    """
    xg, wg = gauss_legendre_rule(p + 1)
    child = legendre_table(p, xg)
    T = np.empty((2, p + 1, p + 1))
    for s, shift in enumerate((-1.0, 1.0)):
        parent = legendre_table(p, 0.5 * (xg + shift))
        T[s] = np.einsum("n,nj,nk->jk", wg, parent, child)
    T.setflags(write=False)
    return T


def _refine_axis(arr: np.ndarray, axis: int, d: int, T: np.ndarray) -> np.ndarray:
    x = np.moveaxis(arr, (axis, d + axis), (-2, -1))
    y = np.einsum("...ij,sjk->...isk", x, T)
    y = y.reshape(y.shape[:-3] + (2 * x.shape[-2], x.shape[-1]))
    return np.moveaxis(y, (-2, -1), (axis, d + axis))


def _coarsen_axis(arr: np.ndarray, axis: int, d: int, T: np.ndarray) -> np.ndarray:
    x = np.moveaxis(arr, (axis, d + axis), (-2, -1))
    x = x.reshape(x.shape[:-2] + (x.shape[-2] // 2, 2, x.shape[-1]))
    y = 0.5 * np.einsum("...isk,sjk->...ij", x, T)
    return np.moveaxis(y, (-2, -1), (axis, d + axis))


def refine_by_projection(field: ModalField) -> ModalField:
    """Same piecewise polynomial on the mesh with 2N elements per axis."""
    T = child_tables(field.p)
    arr = field.tensor()
    for ax in range(field.d):
        arr = _refine_axis(arr, ax, field.d, T)
    return ModalField.from_tensor(field.mesh.refined(), field.p, arr)


def coarsen_by_projection(field: ModalField) -> ModalField:
    """L2-orthogonal projection onto the mesh with N/2 elements per axis."""
    coarse = field.mesh.coarsened()
    T = child_tables(field.p)
    arr = field.tensor()
    for ax in range(field.d):
        arr = _coarsen_axis(arr, ax, field.d, T)
    return ModalField.from_tensor(coarse, field.p, arr)
