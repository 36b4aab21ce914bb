import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geneo_recon.grid import (
    BadMagicError,
    GridFormatError,
    GridSignal,
    PixelCoord,
    ReliabilityMask,
    SizeMismatchError,
    SparseSampling,
    ValueRangeError,
    load_grid,
    load_sampling,
    mask_of,
    read_grid,
    read_sampling,
    save_grid,
    save_sampling,
    write_grid,
    write_pgm,
    write_sampling,
)
from geneo_recon.sampling import SamplingSpec, sample_uniform
from helpers import random_sampling


def test_grid_rejects_out_of_range_and_nan():
    with pytest.raises(ValueError):
        GridSignal(np.array([[1.5]]))
    with pytest.raises(ValueError):
        GridSignal(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        GridSignal(np.zeros((0, 3)))


def test_grid_is_read_only_copy():
    src = np.zeros((2, 3))
    g = GridSignal(src)
    src[0, 0] = 1.0
    assert g[0, 0] == 0.0
    assert (g.width, g.height) == (3, 2)
    with pytest.raises(ValueError):
        g.values[0, 0] = 1.0


def test_empty_sampling_gives_zero_mask():
    s = SparseSampling(4, 4, [], [], [])
    m = mask_of(s)
    assert m.popcount() == 0
    assert m.bits.shape == (4, 4)


def test_two_samples_set_two_bits():
    s = SparseSampling.from_pairs(4, 4, [((0, 0), 0.2), ((3, 3), 0.9)])
    m = mask_of(s)
    assert m.popcount() == 2
    assert m.bits[0, 0] and m.bits[3, 3]
    assert s.coords == [PixelCoord(0, 0), PixelCoord(3, 3)]


def test_mask_popcount_at_three_percent():
    gt = GridSignal.constant(270, 270, 0.5)
    assert mask_of(sample_uniform(gt, SamplingSpec(3, 0, 1))).popcount() == 2187


@pytest.mark.parametrize(
    "xs, ys",
    [([0, 0], [1, 1]), ([4], [0]), ([-1], [0])],
    ids=["duplicate", "x-out-of-bounds", "negative"],
)
def test_sampling_rejects_bad_coordinates(xs, ys):
    with pytest.raises(ValueError):
        SparseSampling(4, 4, xs, ys, [0.5] * len(xs))


def test_mask_equality():
    a = ReliabilityMask(np.eye(3))
    assert a == ReliabilityMask(np.eye(3, dtype=bool))
    assert a != ReliabilityMask(np.zeros((3, 3)))


def test_grd_one_pixel_is_sixteen_bytes():
    data = write_grid(GridSignal(np.array([[0.5]])))
    assert len(data) == 16
    assert data[:4] == b"GRD1"
    assert read_grid(data) == GridSignal(np.array([[0.5]]))


def test_grd_zeros_roundtrip(tmp_path):
    g = GridSignal.constant(270, 270, 0.0)
    save_grid(tmp_path / "z.grd", g)
    assert load_grid(tmp_path / "z.grd") == g


def test_grd_random_roundtrip_many_seeds():
    for seed in range(100):
        v = np.random.default_rng(seed).random((32, 32)).astype(np.float32).astype(np.float64)
        g = GridSignal(v)
        assert read_grid(write_grid(g)) == g


def test_grd_parse_errors_are_distinct():
    good = write_grid(GridSignal.constant(2, 2, 0.25))
    with pytest.raises(BadMagicError):
        read_grid(b"XXXX" + good[4:])
    with pytest.raises(SizeMismatchError):
        read_grid(good[:-1])
    bad = bytearray(good)
    bad[12:16] = np.array([2.0], dtype="<f4").tobytes()
    with pytest.raises(ValueRangeError):
        read_grid(bytes(bad))
    for exc in (BadMagicError, SizeMismatchError, ValueRangeError):
        assert issubclass(exc, GridFormatError)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float32, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 1, width=32)))
def test_grd_roundtrip_property(v):
    g = GridSignal(v.astype(np.float64))
    assert read_grid(write_grid(g)) == g


def test_smp_roundtrip(tmp_path, rng):
    s = random_sampling(rng, 9, 7, 12)
    save_sampling(tmp_path / "s.smp", s)
    assert load_sampling(tmp_path / "s.smp") == s
    text = write_sampling(s)
    assert text.splitlines()[1] == "x,y,value"


def test_smp_without_size_line_needs_dimensions():
    body = "x,y,value\n1,2,0.5\n"
    with pytest.raises(GridFormatError):
        read_sampling(body)
    s = read_sampling(body, 4, 4)
    assert len(s) == 1 and s.values[0] == 0.5


def test_smp_bad_header():
    with pytest.raises(GridFormatError):
        read_sampling("a,b,c\n", 2, 2)


def test_pgm_header_and_levels():
    g = GridSignal(np.array([[0.0, 1.0], [0.5, 0.25]]))
    data = write_pgm(g)
    header = b"P5\n2 2\n65535\n"
    assert data.startswith(header)
    levels = np.frombuffer(data[len(header):], dtype=">u2")
    assert levels.tolist() == [0, 65535, 32768, 16384]
