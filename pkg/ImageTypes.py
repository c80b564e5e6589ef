from dataclasses import dataclass

import numpy as np

from Errors import GeometryError, ParameterError, ShapeError


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Image:
    """Pixels indexed [v, u, channel], samples normalized to [0, 1]."""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = _frozen_array(self.pixels, np.float64)
        if pixels.ndim == 2:
            pixels = _frozen_array(pixels[:, :, np.newaxis], np.float64)
        if pixels.ndim != 3 or pixels.shape[2] not in (1, 3):
            raise ShapeError(f'image must be HxW, HxWx1 or HxWx3, got shape {pixels.shape}')
        if pixels.size and (not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0):
            raise ParameterError('image samples must lie in [0, 1]')
        object.__setattr__(self, 'pixels', pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True, eq=False)
class DisparityMap:
    """Left-referenced disparity: u_left = u_right + d."""
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values, np.float64)
        valid = _frozen_array(self.valid, bool)
        if values.ndim != 2 or values.shape != valid.shape:
            raise ShapeError(f'disparity {values.shape} and validity mask {valid.shape} must be equal 2-D shapes')
        checked = values[valid]
        if checked.size:
            if not np.all(np.isfinite(checked)) or checked.min() < 0.0:
                raise ParameterError('valid disparities must be finite and non-negative')
            if checked.max() >= values.shape[1]:
                raise GeometryError(f'disparity {checked.max():g} is not smaller than the image width {values.shape[1]}')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'valid', valid)

    @classmethod
    def from_values(cls, values) -> 'DisparityMap':
        """All finite entries valid; NaN marks an invalid pixel."""
        values = np.asarray(values, dtype=np.float64)
        valid = np.isfinite(values)
        return cls(np.where(valid, values, 0.0), valid)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())

    def filled(self, fill: float = 0.0) -> np.ndarray:
        return np.where(self.valid, self.values, fill)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    bits: np.ndarray

    def __post_init__(self):
        bits = _frozen_array(self.bits, bool)
        if bits.ndim != 2:
            raise ShapeError(f'mask must be 2-D, got shape {bits.shape}')
        object.__setattr__(self, 'bits', bits)

    @classmethod
    def full(cls, height: int, width: int, value: bool = True) -> 'BinaryMask':
        return cls(np.full((height, width), value, dtype=bool))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs, np.float64)
        if probs.ndim != 2:
            raise ShapeError(f'probability map must be 2-D, got shape {probs.shape}')
        if probs.size and (not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0):
            raise ParameterError('probabilities must lie in [0, 1]')
        object.__setattr__(self, 'probs', probs)

    @property
    def height(self) -> int:
        return self.probs.shape[0]

    @property
    def width(self) -> int:
        return self.probs.shape[1]
