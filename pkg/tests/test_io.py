import numpy as np
import pytest

from mhdblowup import io, solver
from mhdblowup.solver import Grid2D, InitialDataSpec


def test_snapshot_roundtrip(tmp_path, eos):
    g = Grid2D(12, 20, 1.2, 1.0)
    st = solver.make_initial_data(InitialDataSpec(epsilon=0.1), g, eos)
    st.time = 0.375
    p = tmp_path / "s.bin"
    io.write_snapshot(p, st)
    back = io.read_snapshot(p)
    assert back.time == 0.375
    assert back.grid.nr == 12 and back.grid.nz == 20
    assert back.grid.dr == pytest.approx(g.dr, rel=1e-15) and back.grid.dz == pytest.approx(g.dz, rel=1e-15)
    assert np.array_equal(back.q, st.q)
    raw = p.read_bytes()
    assert raw[:8] == b"MHDBLOW1"
    assert len(raw) == 8 + 16 + 24 + 5 * 12 * 20 * 8
    # first plane value is rho at (z index 0, r index 0)
    assert np.frombuffer(raw, "<f8", count=1, offset=48)[0] == st.q[0, 0, 0]


def test_snapshot_errors(tmp_path, eos):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTMAGIC" + bytes(40))
    with pytest.raises(io.SnapshotFormatError, match="magic"):
        io.read_snapshot(bad)
    st = solver.make_initial_data(InitialDataSpec(epsilon=0.0), Grid2D(4, 4, 1.0, 1.0), eos)
    good = tmp_path / "good.bin"
    io.write_snapshot(good, st)
    good.write_bytes(good.read_bytes()[:-8])
    with pytest.raises(io.SnapshotFormatError, match="expected"):
        io.read_snapshot(good)
    (tmp_path / "short.bin").write_bytes(b"abc")
    with pytest.raises(io.SnapshotFormatError, match="truncated"):
        io.read_snapshot(tmp_path / "short.bin")
