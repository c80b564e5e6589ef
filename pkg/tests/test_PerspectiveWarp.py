import numpy as np
import pytest

from Errors import ParameterError
from ImageTypes import BinaryMask, DisparityMap, Image, ProbabilityMap
from PerspectiveWarp import WarpedImage, crop_above_horizon, row_shifts, sample_shifted_rows, transform_right_to_left
from RoadModel import RoadModel


def random_image(rng, height=6, width=10):
    return Image(rng.random((height, width, 3)))


def test_zero_shift_is_identity(rng):
    right = random_image(rng)
    # f(v) stays negative on every row, so every shift clamps to 0
    warped = transform_right_to_left(right, RoadModel(-1000.0, 0.001, 5))
    assert np.array_equal(warped.image.pixels, right.pixels)
    assert warped.valid.count == right.height * right.width


def test_integer_shift_is_translation(rng):
    right = random_image(rng)
    warped = transform_right_to_left(right, RoadModel(3.0, 1e-12, 0))
    assert np.array_equal(warped.image.pixels[:, 3:], right.pixels[:, :-3])
    assert not warped.valid.bits[:, :3].any()
    assert warped.valid.bits[:, 3:].all()
    assert not warped.image.pixels[:, :3].any()


def test_half_pixel_shift_interpolates():
    right = Image(np.array([[0.0, 1.0, 0.5, 0.5]]))
    sampled, valid = sample_shifted_rows(right.pixels, np.array([0.5]))
    assert sampled[0, :3, 0].tolist() == [0.5, 0.75, 0.5]
    assert valid[0].tolist() == [True, True, True, False]


def test_rejects_non_road_model(rng):
    with pytest.raises(ParameterError):
        transform_right_to_left(random_image(rng), RoadModel(1.0, 0.0, 0))


def test_shifts_are_zero_above_the_horizon():
    shifts = row_shifts(RoadModel(-2.0, 0.5, 4), 8)
    assert shifts.tolist() == [0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.5]


def test_validity_is_sound(rng):
    right = random_image(rng, 12, 20)
    model = RoadModel(-3.0, 1.3, 2)
    warped = transform_right_to_left(right, model)
    source = np.arange(20)[np.newaxis, :] - row_shifts(model, 12)[:, np.newaxis]
    assert np.all((source >= -1e-9) & (source <= 19 + 1e-9) | ~warped.valid.bits)
    assert not warped.image.pixels[~warped.valid.bits].any()


def test_shift_and_back_reproduces_within_neighbour_difference(rng):
    pixels = rng.random((5, 30, 3))
    shifts = rng.uniform(0.0, 4.0, size=5)
    there, valid_there = sample_shifted_rows(pixels, -shifts)
    back, valid_back = sample_shifted_rows(there, shifts)
    rows = np.arange(5)[:, np.newaxis]
    source = np.clip(np.arange(30)[np.newaxis, :] + shifts[:, np.newaxis], 0, 29)
    both = (valid_back & valid_there[rows, np.floor(source).astype(int)]
            & valid_there[rows, np.ceil(source).astype(int)])
    bound = np.abs(np.diff(pixels, axis=1)).max()
    assert np.all(np.abs(back - pixels)[both] <= bound + 1e-12)


def test_warp_matches_left_on_the_road(planar_scene):
    scene = planar_scene
    warped = transform_right_to_left(scene.right, scene.model)
    road = scene.road_mask.bits & warped.valid.bits
    warped_error = np.abs(warped.image.pixels - scene.left.pixels).mean(axis=2)[road].mean()
    unwarped_error = np.abs(scene.right.pixels - scene.left.pixels).mean(axis=2)[road].mean()
    assert warped_error < 0.02
    assert warped_error * 5 <= unwarped_error


def test_crop_keeps_rows_from_the_horizon(rng):
    image = Image(rng.random((375, 4, 3)))
    cropped = crop_above_horizon(image, 80)
    assert cropped.height == 295
    assert cropped.width == 4
    assert np.array_equal(cropped.pixels[0], image.pixels[80])
    assert crop_above_horizon(image, 0).pixels.tobytes() == image.pixels.tobytes()


def test_crop_all_types(rng):
    mask = BinaryMask(rng.random((10, 6)) > 0.5)
    assert crop_above_horizon(mask, 4).count == int(mask.bits[4:].sum())
    disp = DisparityMap.from_values(np.where(rng.random((10, 6)) > 0.3, 2.0, np.nan))
    cropped = crop_above_horizon(disp, 3)
    assert np.array_equal(cropped.valid, disp.valid[3:])
    probs = crop_above_horizon(ProbabilityMap(rng.random((10, 6))), 9)
    assert probs.height == 1
    warped = crop_above_horizon(WarpedImage(Image(rng.random((10, 6))), mask), 5)
    assert (warped.height, warped.valid.height) == (5, 5)


def test_crop_twice_at_zero_is_idempotent(rng):
    mask = BinaryMask(rng.random((7, 3)) > 0.5)
    once = crop_above_horizon(mask, 0)
    assert np.array_equal(crop_above_horizon(once, 0).bits, mask.bits)


def test_crop_out_of_range(rng):
    image = random_image(rng)
    with pytest.raises(ParameterError):
        crop_above_horizon(image, 6)
    with pytest.raises(ParameterError):
        crop_above_horizon(image, -1)
    with pytest.raises(TypeError):
        crop_above_horizon(image.pixels, 0)
