import json
import struct

import numpy as np
import pytest

from Errors import FormatError, ShapeError
from ImageTypes import BinaryMask, DisparityMap, Image
from PerspectiveWarp import WarpedImage
from Preprocessing import preprocess_frame
from RoadModel import DPConfig, RoadModel
from Tensor7 import HEADER, LENGTH, PLANE_NAMES, Tensor7, assemble, read_pt7, write_pt7

MODEL = RoadModel(-20.0, 0.25, 80, 0.125, DPConfig())


def warped(pixels, valid=None):
    image = Image(pixels)
    return WarpedImage(image, BinaryMask(np.ones((image.height, image.width), bool) if valid is None else valid))


def test_zero_inputs_give_zero_planes():
    t = assemble(Image(np.zeros((2, 2, 3))), warped(np.zeros((2, 2, 3))),
                 DisparityMap.from_values(np.zeros((2, 2))), MODEL)
    assert t.planes.shape == (7, 2, 2)
    assert not t.planes.any()


def test_plane_placement():
    left = np.zeros((1, 20, 3))
    left[0, 0] = (1, 0, 0)
    right = np.zeros((1, 20, 3))
    right[0, 0] = (0, 1, 0)
    disp = np.full((1, 20), np.nan)
    disp[0, 0] = 12.5
    t = assemble(Image(left), warped(right), DisparityMap.from_values(disp), MODEL)
    assert t.planes[:, 0, 0].tolist() == [1, 0, 0, 0, 1, 0, 12.5]
    assert t.plane('disparity')[0, 1] == 0.0
    assert PLANE_NAMES.index('right_t.g') == 4


def test_invalid_warped_pixels_are_zero(rng):
    valid = np.array([[False, True]])
    image = Image(rng.random((1, 2, 3)) * 0.5 + 0.5)
    t = assemble(Image(np.zeros((1, 2, 3))), WarpedImage(image, BinaryMask(valid)),
                 DisparityMap.from_values(np.zeros((1, 2))), MODEL)
    assert not t.planes[3:6, 0, 0].any()
    assert t.planes[3:6, 0, 1].all()


def test_assemble_rejects_mismatches():
    with pytest.raises(ShapeError):
        assemble(Image(np.zeros((2, 2, 3))), warped(np.zeros((3, 2, 3))),
                 DisparityMap.from_values(np.zeros((2, 2))), MODEL)
    with pytest.raises(FormatError):
        assemble(Image(np.zeros((2, 2))), warped(np.zeros((2, 2, 3))),
                 DisparityMap.from_values(np.zeros((2, 2))), MODEL)


def test_header_of_single_pixel_frame():
    planes = np.arange(7, dtype=np.float32).reshape(7, 1, 1)
    data = write_pt7(Tensor7(planes), MODEL)
    assert data[:4] == b'PT7T'
    assert struct.unpack_from('<5I', data, 4) == (1, 1, 1, 7, 0)
    assert struct.unpack_from('<7f', data, HEADER.size) == tuple(range(7))
    (length,) = struct.unpack_from('<I', data, HEADER.size + 28)
    assert len(data) == 24 + 28 + 4 + length


def test_round_trip_is_bit_exact(rng):
    for _ in range(50):
        height, width = rng.integers(1, 12, size=2)
        planes = rng.standard_normal((7, height, width)).astype(np.float32)
        model = RoadModel(float(rng.normal()), float(rng.random()), int(rng.integers(0, 100)),
                          float(rng.random()), DPConfig(lambda_=float(rng.random()), tau_max=int(rng.integers(0, 9))))
        t, back = read_pt7(write_pt7(Tensor7(planes), model))
        assert t.same_as(Tensor7(planes))
        assert back == model


def test_round_trip_without_fit_settings():
    model = RoadModel(-12.0, 0.2, 60)
    _, back = read_pt7(write_pt7(Tensor7(np.zeros((7, 2, 2))), model))
    assert back == model
    assert back.dp_config is None


def test_truncation_names_the_offset():
    data = write_pt7(Tensor7(np.ones((7, 8, 8))), MODEL)
    with pytest.raises(FormatError) as info:
        read_pt7(data[:-4])
    assert info.value.offset == len(data) - 4
    assert f'offset {len(data) - 4}' in str(info.value)
    with pytest.raises(FormatError):
        read_pt7(data[:HEADER.size + 10])
    with pytest.raises(FormatError):
        read_pt7(data[:10])


def test_bad_magic_version_and_trailing_bytes():
    data = write_pt7(Tensor7(np.ones((7, 2, 2))), MODEL)
    with pytest.raises(FormatError) as info:
        read_pt7(b'XXXX' + data[4:])
    assert info.value.offset == 0
    with pytest.raises(FormatError) as info:
        read_pt7(data[:4] + struct.pack('<I', 2) + data[8:])
    assert info.value.offset == 4
    with pytest.raises(FormatError):
        read_pt7(data + b'\0')


def with_metadata(data: bytes, height: int, width: int, document: bytes) -> bytes:
    start = HEADER.size + 7 * height * width * 4
    return data[:start] + LENGTH.pack(len(document)) + document


def test_metadata_must_be_plain_json(tmp_path):
    data = write_pt7(Tensor7(np.ones((7, 2, 2))), MODEL)
    with pytest.raises(FormatError):
        read_pt7(with_metadata(data, 2, 2, b'{not json'))
    marker = tmp_path / 'marker'
    call = json.dumps({'py/reduce': [{'py/function': 'pathlib.Path.touch'}, {'py/tuple': [str(marker)]}]})
    with pytest.raises(FormatError):
        read_pt7(with_metadata(data, 2, 2, call.encode('utf-8')))
    assert not marker.exists()
    _, model = read_pt7(with_metadata(data, 2, 2, MODEL.to_json().encode('utf-8')))
    assert model == MODEL


def test_tensor_shape_is_checked():
    with pytest.raises(ShapeError):
        Tensor7(np.zeros((6, 2, 2)))


def test_pipeline_frame_keeps_disparity_bits(small_scene):
    frame = preprocess_frame(small_scene.left, small_scene.right, small_scene.disparity)
    t, model = read_pt7(write_pt7(frame.tensor, frame.model))
    expected = frame.disparity.filled(0.0).astype(np.float32)
    assert t.plane('disparity').tobytes() == expected.tobytes()
    assert model == frame.model
    assert t.height == small_scene.left.height - model.v_py
