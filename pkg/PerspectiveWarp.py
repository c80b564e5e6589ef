import functools
import logging
from dataclasses import dataclass

import numpy as np

from Errors import ParameterError, ShapeError
from ImageTypes import BinaryMask, DisparityMap, Image, ProbabilityMap
from RoadModel import RoadModel

logger = logging.getLogger(__name__)

# sub-pixel source positions this close to an integer are treated as that integer
SNAP_EPSILON = 1e-9


@dataclass(frozen=True, eq=False)
class WarpedImage:
    image: Image
    valid: BinaryMask

    def __post_init__(self):
        if (self.image.height, self.image.width) != (self.valid.height, self.valid.width):
            raise ShapeError('warped image and validity mask differ in size')

    @property
    def height(self) -> int:
        return self.image.height

    @property
    def width(self) -> int:
        return self.image.width


def sample_shifted_rows(pixels: np.ndarray, shifts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample every row v of an (H, W, C) array at u + shifts[v] with horizontal linear interpolation.

    Returns the sampled array and a mask that is false where the source lies outside [0, W - 1];
    those samples are 0.
    """
    height, width = pixels.shape[:2]
    source = np.arange(width, dtype=np.float64)[np.newaxis, :] + np.asarray(shifts, dtype=np.float64)[:, np.newaxis]
    nearest = np.rint(source)
    source = np.where(np.abs(source - nearest) < SNAP_EPSILON, nearest, source)
    valid = (source >= 0.0) & (source <= width - 1)

    clipped = np.clip(source, 0.0, width - 1)
    x0 = np.floor(clipped).astype(np.int64)
    x1 = np.minimum(x0 + 1, width - 1)
    frac = (clipped - x0)[:, :, np.newaxis]
    rows = np.arange(height)[:, np.newaxis]
    sampled = (1.0 - frac) * pixels[rows, x0] + frac * pixels[rows, x1]
    sampled[~valid] = 0.0
    return sampled, valid


def row_shifts(model: RoadModel, height: int) -> np.ndarray:
    """f(v) clamped below at 0, so rows above the horizon are not shifted."""
    return np.maximum(model.disparity_at(np.arange(height, dtype=np.float64)), 0.0)


def transform_right_to_left(right: Image, model: RoadModel) -> WarpedImage:
    if not model.alpha1 > 0.0:
        raise ParameterError(f'road model alpha1 must be > 0, got {model.alpha1}')
    sampled, valid = sample_shifted_rows(right.pixels, -row_shifts(model, right.height))
    logger.debug('warped right image, %d of %d pixels valid', int(valid.sum()), valid.size)
    return WarpedImage(Image(np.clip(sampled, 0.0, 1.0)), BinaryMask(valid))


def _check_row(v_py: int, height: int):
    if not 0 <= v_py < height:
        raise ParameterError(f'v_py {v_py} outside [0, {height})')


@functools.singledispatch
def crop_above_horizon(img, v_py: int):
    raise TypeError(f'cannot crop {type(img).__name__}')


@crop_above_horizon.register
def _(img: Image, v_py: int) -> Image:
    _check_row(v_py, img.height)
    return Image(img.pixels[v_py:])


@crop_above_horizon.register
def _(img: DisparityMap, v_py: int) -> DisparityMap:
    _check_row(v_py, img.height)
    return DisparityMap(img.values[v_py:], img.valid[v_py:])


@crop_above_horizon.register
def _(img: BinaryMask, v_py: int) -> BinaryMask:
    _check_row(v_py, img.height)
    return BinaryMask(img.bits[v_py:])


@crop_above_horizon.register
def _(img: ProbabilityMap, v_py: int) -> ProbabilityMap:
    _check_row(v_py, img.height)
    return ProbabilityMap(img.probs[v_py:])


@crop_above_horizon.register
def _(img: WarpedImage, v_py: int) -> WarpedImage:
    return WarpedImage(crop_above_horizon(img.image, v_py), crop_above_horizon(img.valid, v_py))
