import subprocess
import sys

import numpy as np
import pytest

from lsiac_mra.cli import main
from lsiac_mra.io import FormatError, read_decomposition, read_field, write_decomposition, write_field
from lsiac_mra.mesh_basis import ModalField, UniformMesh
from lsiac_mra.mra import decompose, reconstruct


def random_field(rng, d, p, N):
    m = UniformMesh(d, N)
    return ModalField(m, p, rng.standard_normal((m.n_elements, (p + 1) ** d)))


@pytest.mark.parametrize("d,p,N", [(1, 3, 5), (2, 1, 4), (3, 2, 2)])
def test_field_round_trip_is_bitwise(tmp_path, d, p, N):
    F = random_field(np.random.default_rng(d), d, p, N)
    path = tmp_path / "f.mfld"
    write_field(F, path)
    head = path.read_text().splitlines()[0].split()
    assert head[:5] == ["MFLD", "1", str(d), str(N), str(p)]
    G = read_field(path)
    assert np.array_equal(G.coeffs, F.coeffs) and G.mesh == F.mesh and G.p == p


def test_decomposition_round_trip(tmp_path):
    F = random_field(np.random.default_rng(0), 2, 2, 4)
    dec = decompose(F)
    path = tmp_path / "d.mwdc"
    write_decomposition(dec, path)
    assert path.read_text().splitlines()[0] == "MWDC 1"
    back = read_decomposition(path)
    assert np.array_equal(back.details, dec.details)
    assert np.array_equal(back.coarse.coeffs, dec.coarse.coeffs)
    assert np.max(np.abs(reconstruct(back).coeffs - F.coeffs)) < 1e-12


def test_format_errors(tmp_path):
    F = random_field(np.random.default_rng(0), 1, 1, 3)
    path = tmp_path / "f.mfld"
    write_field(F, path)
    lines = path.read_text().splitlines()
    (tmp_path / "short.mfld").write_text("\n".join(lines[:-1]) + "\n")
    (tmp_path / "long.mfld").write_text("\n".join(lines + ["1.0"]) + "\n")
    (tmp_path / "bad.mfld").write_text("MFLD 2 1 3 1 0.0 1.0\n")
    for name in ("short", "long", "bad"):
        with pytest.raises(FormatError):
            read_field(tmp_path / f"{name}.mfld")
    with pytest.raises(FormatError):
        read_decomposition(path)


def run(*argv):
    return main([str(a) for a in argv])


def test_cli_pipeline(tmp_path, capsys):
    f0, f1, f2 = tmp_path / "u0.mfld", tmp_path / "u1.mfld", tmp_path / "u2.mfld"
    assert run("project", "--func", "ic2", "--dim", 2, "--n", 20, "--degree", 1, "--out", f0) == 0
    assert run("refine", "--in", f0, "--levels", 2, "--strategy", "each", "--stencil", "--out", f1) == 0
    assert run("refine", "--in", f0, "--levels", 2, "--strategy", "each", "--out", f2) == 0
    a, b = read_field(f1), read_field(f2)
    assert a.mesh.N == 80 and np.max(np.abs(a.coeffs - b.coeffs)) < 1e-12

    dec, back = tmp_path / "d.mwdc", tmp_path / "back.mfld"
    assert run("mra", "decompose", "--in", f1, "--out", dec) == 0
    assert run("mra", "reconstruct", "--in", dec, "--out", back) == 0
    assert np.max(np.abs(read_field(back).coeffs - a.coeffs)) < 1e-12

    capsys.readouterr()
    assert run("errors", "--in", f1, "--func", "ic2", "--eval-n", 80) == 0
    out = capsys.readouterr().out.split("\n")
    assert out[0].startswith("L2 ") and out[1].startswith("Linf ") and out[2] == "excluded 0 of 6400"

    c = tmp_path / "c.csv"
    assert run("contour", "--in", f1, "--func", "ic2", "--grid", 10, "--out", c) == 0
    assert len(c.read_text().splitlines()) == 101


def test_cli_pollution_errors(tmp_path, capsys):
    f0 = tmp_path / "u0.mfld"
    assert run("project", "--func", "ic4", "--dim", 2, "--n", 70, "--degree", 0, "--out", f0) == 0
    capsys.readouterr()
    assert run("errors", "--in", f0, "--func", "ic4", "--eval-n", 70, "--exclude-pollution",
               "--coarse-n", 70, "--level", 0) == 0
    out = capsys.readouterr().out
    assert f"excluded {70 * 70 - 68 * 68} of 4900" in out


def test_cli_experiment(tmp_path, capsys):
    out, md = tmp_path / "t.csv", tmp_path / "t.md"
    assert run("experiment", "--case", "IC-3D", "--degrees", "0", "--out", out, "--markdown", md) == 0
    assert len(out.read_text().splitlines()) == 4
    text = md.read_text()
    assert "1.48e-01" in text and "4.43e-02" in text


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.mfld"
    bad.write_text("nonsense\n")
    assert run("refine", "--in", bad, "--levels", 1, "--strategy", "once", "--out", tmp_path / "o") == 2
    assert run("refine", "--in", tmp_path / "missing", "--levels", 1, "--strategy", "once",
               "--out", tmp_path / "o") == 2
    with pytest.raises(SystemExit) as exc:
        run("project", "--func", "ic1", "--dim", 3, "--n", 4, "--degree", 1, "--out", tmp_path / "o")
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run("errors", "--in", bad, "--func", "ic4", "--eval-n", 4, "--exclude-pollution")
    assert exc.value.code == 2
    nan = tmp_path / "nan.mfld"
    nan.write_text("MFLD 1 1 2 0 0.0 1.0\nnan\n1.0\n")
    assert run("refine", "--in", nan, "--levels", 1, "--strategy", "once", "--out", tmp_path / "o") == 3


def test_module_entry_point_usage_error():
    r = subprocess.run([sys.executable, "-m", "lsiac_mra", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2 and "usage" in r.stderr
