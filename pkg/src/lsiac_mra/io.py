"""Plain-text field (MFLD v1) and decomposition (MWDC v1) files."""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

import numpy as np

from .mesh_basis import ModalField, UniformMesh, n_modes
from .mra import WaveletDecomposition

FMT = "%.16e"  # 17 significant digits


class FormatError(ValueError):
    pass


def _field_lines(field: ModalField) -> list[str]:
    m = field.mesh
    head = f"MFLD 1 {m.d} {m.N} {field.p} {m.a!r} {m.b!r}"
    return [head] + [FMT % v for v in field.coeffs.reshape(-1)]


def _read_values(lines: Iterator[str], count: int, what: str) -> np.ndarray:
    vals = []
    for _ in range(count):
        line = next(lines, None)
        if line is None:
            raise FormatError(f"{what}: expected {count} values, found {len(vals)}")
        vals.append(float(line))
    return np.array(vals)


def _parse_field(lines: Iterator[str]) -> ModalField:
    head = next(lines, "").split()
    if len(head) != 7 or head[0] != "MFLD" or head[1] != "1":
        raise FormatError(f"not an MFLD v1 header: {' '.join(head)!r}")
    try:
        d, N, p = int(head[2]), int(head[3]), int(head[4])
        a, b = float(head[5]), float(head[6])
    except ValueError as exc:
        raise FormatError(f"bad MFLD header: {exc}") from None
    mesh = UniformMesh(d, N, a, b)
    M = n_modes(p, d)
    vals = _read_values(lines, mesh.n_elements * M, "MFLD")
    return ModalField(mesh, p, vals.reshape(mesh.n_elements, M))


def _content_lines(path: str | Path) -> Iterator[str]:
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield line


def write_field(field: ModalField, path: str | Path) -> None:
    Path(path).write_text("\n".join(_field_lines(field)) + "\n")


def read_field(path: str | Path) -> ModalField:
    lines = _content_lines(path)
    field = _parse_field(lines)
    if next(lines, None) is not None:
        raise FormatError("trailing data after MFLD coefficients")
    return field


def write_decomposition(dec: WaveletDecomposition, path: str | Path) -> None:
    out = ["MWDC 1"] + _field_lines(dec.coarse) + [FMT % v for v in dec.details.reshape(-1)]
    Path(path).write_text("\n".join(out) + "\n")


def read_decomposition(path: str | Path) -> WaveletDecomposition:
    lines = _content_lines(path)
    if next(lines, "") != "MWDC 1":
        raise FormatError("not an MWDC v1 file")
    coarse = _parse_field(lines)
    n_det = (2**coarse.d - 1) * coarse.n_modes
    vals = _read_values(lines, coarse.mesh.n_elements * n_det, "MWDC details")
    if next(lines, None) is not None:
        raise FormatError("trailing data after MWDC details")
    return WaveletDecomposition(coarse, vals.reshape(coarse.mesh.n_elements, n_det))
