import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from Errors import EmptyInputError, ParameterError
from ImageTypes import DisparityMap
from VDisparity import build_vdisparity, render_png, to_csv

disparity_grids = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 8)),
                         elements=st.floats(0.0, 1.74, allow_nan=False).map(lambda x: round(x * 4) / 4))


def raw_counts(disp: DisparityMap, d_max: int | None = None) -> np.ndarray:
    return build_vdisparity(disp, d_max, normalize=False).counts


def test_constant_disparity_five():
    disp = DisparityMap.from_values(np.full((4, 6), 5.0))
    counts = raw_counts(disp)
    assert counts.shape == (6, 4)
    assert np.all(counts[5] == 6)
    assert counts[:5].sum() == 0


def test_all_invalid_with_d_max():
    disp = DisparityMap.from_values(np.full((3, 4), np.nan))
    vd = build_vdisparity(disp, d_max=10)
    assert vd.d_bins == 11
    assert not vd.counts.any()


def test_all_invalid_without_d_max():
    with pytest.raises(EmptyInputError):
        build_vdisparity(DisparityMap.from_values(np.full((3, 4), np.nan)))


def test_negative_d_max():
    with pytest.raises(ParameterError):
        build_vdisparity(DisparityMap.from_values(np.ones((2, 2))), d_max=-1)


def test_hand_enumerated_bins_round_half_away():
    # width 3 cannot hold disparity 7.0, so the same rows sit in a wider frame with invalid padding
    values = np.full((3, 9), np.nan)
    values[:, :3] = [[2.4, 2.6, 7.0], [0.0, np.nan, 1.0], [3.5, 3.49, 3.51]]
    counts = raw_counts(DisparityMap.from_values(values))
    assert {d: counts[d, 0] for d in np.flatnonzero(counts[:, 0])} == {2: 1, 3: 1, 7: 1}
    assert {d: counts[d, 1] for d in np.flatnonzero(counts[:, 1])} == {0: 1, 1: 1}
    assert {d: counts[d, 2] for d in np.flatnonzero(counts[:, 2])} == {3: 1, 4: 2}


def test_bins_above_d_max_are_discarded():
    disp = DisparityMap.from_values([[1.0, 2.0, 3.0, 3.0]])
    counts = raw_counts(disp, d_max=2)
    assert counts[:, 0].tolist() == [0, 1, 1]


def test_normalized_divides_by_width():
    disp = DisparityMap.from_values(np.full((2, 8), 1.0))
    assert np.allclose(build_vdisparity(disp).counts[1], 1.0)


@given(disparity_grids, st.data())
@settings(max_examples=60)
def test_row_sums_equal_valid_counts(values, data):
    valid = data.draw(arrays(bool, values.shape))
    disp = DisparityMap(values, valid)
    counts = raw_counts(disp, d_max=2)
    assert np.array_equal(counts.sum(axis=0), valid.sum(axis=1))


@given(disparity_grids, st.randoms(use_true_random=False))
@settings(max_examples=60)
def test_shuffling_columns_within_rows(values, random):
    shuffled = values.copy()
    for row in shuffled:
        order = list(range(row.size))
        random.shuffle(order)
        row[:] = row[order]
    assert np.array_equal(raw_counts(DisparityMap.from_values(values), 2),
                          raw_counts(DisparityMap.from_values(shuffled), 2))


@given(disparity_grids, st.data())
@settings(max_examples=60)
def test_adding_a_valid_pixel_never_lowers_a_bin(values, data):
    valid = np.ones(values.shape, dtype=bool)
    v = data.draw(st.integers(0, values.shape[0] - 1))
    u = data.draw(st.integers(0, values.shape[1] - 1))
    valid[v, u] = False
    fewer = raw_counts(DisparityMap(values, valid), 2)
    more = raw_counts(DisparityMap.from_values(values), 2)
    assert np.all(more >= fewer)
    assert more.sum() == fewer.sum() + 1


def test_csv_and_png_outputs():
    disp = DisparityMap.from_values([[0.0, 1.0], [1.0, 1.0], [np.nan, np.nan]])
    vd = build_vdisparity(disp, normalize=False)
    lines = to_csv(vd).splitlines()
    assert lines == ['1,1', '0,2', '0,0']
    assert render_png(vd).startswith(b'\x89PNG')
    empty = build_vdisparity(DisparityMap.from_values(np.full((2, 2), np.nan)), d_max=1)
    assert to_csv(empty).splitlines() == ['0,0', '0,0']
