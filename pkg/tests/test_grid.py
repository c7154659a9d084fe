import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from weightlab.grid import (
    Cube,
    CubeFamily,
    Family,
    Grid,
    GridError,
    GridFn,
    PrefixTable,
    average,
    enumerate_family,
    family,
    load_csv,
    load_json,
    save_csv,
    save_json,
)


@pytest.mark.parametrize(
    "variant, dim, n, count",
    [
        ("all_intervals", 1, 4, 10),
        ("dyadic_intervals", 1, 4, 7),
        ("dyadic_rectangles", 2, 2, 9),
        ("dyadic_squares", 2, 4, 16 + 4 + 1),
        ("all_rectangles", 2, 4, 100),
        ("all_intervals", 1, 64, 64 * 65 // 2),
        ("dyadic_rectangles", 2, 16, 31 * 31),
    ],
)
def test_family_sizes(variant, dim, n, count):
    fam = family(variant, Grid(dim, n))
    assert len(fam) == count
    assert len(enumerate_family(fam)) == count


def test_enumeration_is_deterministic_and_valid():
    g = Grid(2, 8)
    fam = CubeFamily(Family.DYADIC_RECTANGLES, g)
    first = enumerate_family(fam)
    assert first == enumerate_family(CubeFamily(Family.DYADIC_RECTANGLES, g))
    for c in first:
        c.validate(g)
    assert first[0] == Cube((0, 0), (8, 8))  # coarse to fine
    starts, lengths = fam.arrays
    assert fam.cube(17) == first[17]
    assert starts.shape == lengths.shape == (len(fam), 2)


@pytest.mark.parametrize("bad", [0, 1, 3, 12])
def test_grid_rejects_non_powers_of_two(bad):
    with pytest.raises(GridError):
        Grid(1, bad)


def test_grid_rejects_bad_dimension_and_size():
    with pytest.raises(GridError):
        Grid(3, 4)
    with pytest.raises(GridError):
        Grid(2, 512)
    with pytest.raises(GridError):
        CubeFamily(Family.ALL_RECTANGLES, Grid(2, 128))
    with pytest.raises(GridError):
        CubeFamily(Family.DYADIC_SQUARES, Grid(1, 8))


def test_cube_validation():
    g = Grid(1, 8)
    with pytest.raises(GridError):
        Cube.interval(6, 4).validate(g)
    with pytest.raises(GridError):
        Cube.interval(0, 0).validate(g)
    with pytest.raises(GridError):
        Cube((0, 0), (1, 1)).validate(g)


def test_average_examples():
    g2 = Grid(1, 2)
    assert average(GridFn(g2, [1.0, 4.0]), Cube.interval(0, 2)) == 2.5
    g8 = Grid(1, 8)
    left = GridFn(g8, [1.0] * 4 + [0.0] * 4)
    assert average(left, Cube.interval(0, 8)) == 0.5
    c = GridFn(g8, np.full(8, 3.25))
    assert all(average(c, q) == 3.25 for q in family("all_intervals", g8))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 16, elements=st.floats(-1e6, 1e6)))
def test_averages_match_direct_sums_1d(vals):
    f = GridFn(Grid(1, 16), vals)
    fam = family("all_intervals", f.grid)
    got = f.averages(fam)
    ref = np.array([vals[c.slices()].mean() for c in fam])
    scale = np.abs(vals).max() + 1.0
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12 * scale)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (8, 8), elements=st.floats(0, 1e3)))
def test_averages_match_direct_sums_2d(vals):
    f = GridFn(Grid(2, 8), vals)
    fam = family("all_rectangles", f.grid)
    ref = np.array([vals[c.slices()].mean() for c in fam])
    np.testing.assert_allclose(f.averages(fam), ref, rtol=1e-12, atol=1e-12)


def test_tiny_boxes_after_huge_prefix_keep_relative_accuracy(rng):
    # a box holding 1e-35 of the preceding mass would cancel to zero
    v = np.exp(rng.uniform(-90, 0, 256))
    v[:32] = 1.0
    table = PrefixTable(v)
    starts = rng.integers(32, 255, (500, 1))
    lengths = rng.integers(1, 257 - starts[:, 0]).reshape(-1, 1)
    got = table.box_sums(starts, lengths)
    ref = np.array([v[a : a + n].sum() for a, n in zip(starts[:, 0], lengths[:, 0])])
    np.testing.assert_allclose(got, ref, rtol=1e-13)


def test_gridfn_is_immutable():
    f = GridFn(Grid(1, 4), [1, 2, 3, 4])
    with pytest.raises(ValueError):
        f.values[0] = 9.0


def test_gridfn_rejects_nonfinite_and_wrong_size():
    with pytest.raises(GridError):
        GridFn(Grid(1, 4), [1, 2, np.nan, 4])
    with pytest.raises(GridError):
        GridFn(Grid(1, 4), [1, 2, 3])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, 8, elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_json_round_trip_is_bit_identical(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("rt") / "f.json"
    f = GridFn(Grid(1, 8), vals)
    save_json(f, path)
    back = load_json(path)
    assert back.grid == f.grid
    assert back.values.tobytes() == f.values.tobytes()


def test_csv_round_trip_and_complex_json(tmp_path, rng):
    f = GridFn(Grid(1, 32), rng.standard_normal(32) * 1e-7)
    save_csv(f, tmp_path / "f.csv")
    assert load_csv(tmp_path / "f.csv").values.tobytes() == f.values.tobytes()
    z = GridFn(Grid(2, 4), rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    save_json(z, tmp_path / "z.json")
    assert load_json(tmp_path / "z.json").values.tobytes() == z.values.tobytes()


def test_malformed_inputs_name_line_and_field(tmp_path):
    (tmp_path / "bad.csv").write_text("1.0\n2.0\nabc\n4.0\n")
    with pytest.raises(GridError, match="line 3"):
        load_csv(tmp_path / "bad.csv")
    (tmp_path / "bad.json").write_text('{"dim": 1,\n "n_points": 2,\n "values": [1, }')
    with pytest.raises(GridError, match="line 3"):
        load_json(tmp_path / "bad.json")
    (tmp_path / "missing.json").write_text(json.dumps({"dim": 1, "values": [1, 2]}))
    with pytest.raises(GridError, match="n_points"):
        load_json(tmp_path / "missing.json")
