import logging
import math
from dataclasses import dataclass

import humanfriendly
import numpy as np

from Errors import GeometryError, ParameterError
from ImageTypes import BinaryMask, DisparityMap, Image
from PerspectiveWarp import row_shifts, sample_shifted_rows
from RoadFit import vanishing_row
from RoadModel import RoadModel

logger = logging.getLogger(__name__)

TEXTURE_CELLS = (32.0, 16.0, 8.0)
TEXTURE_PERSISTENCE = 0.5


@dataclass(frozen=True)
class Obstacle:
    """Fronto-parallel rectangle of constant disparity; (u0, v0) is its top-left pixel."""
    u0: int
    v0: int
    width: int
    height: int
    disparity: float


@dataclass(frozen=True)
class SceneParams:
    width: int = 1242
    height: int = 375
    alpha0: float = -20.0
    alpha1: float = 0.25
    texture_seed: int = 0
    obstacles: tuple[Obstacle, ...] = ()
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ParameterError(f'scene {self.width}x{self.height} is too small')
        if not self.alpha1 > 0.0:
            raise ParameterError(f'alpha1 must be > 0, got {self.alpha1}')
        horizon = -self.alpha0 / self.alpha1
        if not 0.0 < horizon < self.height - 1:
            raise ParameterError(f'horizon row {horizon:g} lies outside (0, {self.height - 1})')
        if not 0.0 <= self.noise_sigma <= 0.1:
            raise ParameterError(f'noise_sigma must lie in [0, 0.1], got {self.noise_sigma}')
        for o in self.obstacles:
            if (o.width < 1 or o.height < 1 or o.u0 < 0 or o.v0 < 0
                    or o.u0 + o.width > self.width or o.v0 + o.height > self.height):
                raise ParameterError(f'obstacle {o} does not fit in the {self.width}x{self.height} frame')
            if not 0.0 <= o.disparity < self.width:
                raise ParameterError(f'obstacle disparity {o.disparity} outside [0, {self.width})')


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    left: Image
    right: Image
    disparity: DisparityMap
    road_mask: BinaryMask
    model: RoadModel


def _fade(t):
    return t * t * t * (t * (t * 6 - 15) + 10)


def value_noise(height: int, width: int, cell: float, rng: np.random.Generator) -> np.ndarray:
    """Lattice value noise with quintic fade interpolation, values in [0, 1]."""
    lattice = rng.random((int(np.ceil(height / cell)) + 2, int(np.ceil(width / cell)) + 2))
    y = np.arange(height) / cell
    x = np.arange(width) / cell
    yi = np.floor(y).astype(np.int64)
    xi = np.floor(x).astype(np.int64)
    yf = _fade(y - yi)[:, np.newaxis]
    xf = _fade(x - xi)[np.newaxis, :]

    upper = lattice[yi]
    lower = lattice[yi + 1]
    top = upper[:, xi] + xf * (upper[:, xi + 1] - upper[:, xi])
    bottom = lower[:, xi] + xf * (lower[:, xi + 1] - lower[:, xi])
    return top + yf * (bottom - top)


def texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """Band-limited RGB texture: fixed octaves of value noise, stretched to [0.05, 0.95] per channel."""
    channels = []
    for _ in range(3):
        layered = np.zeros((height, width))
        amplitude = 1.0
        for cell in TEXTURE_CELLS:
            layered += amplitude * value_noise(height, width, cell, rng)
            amplitude *= TEXTURE_PERSISTENCE
        low, high = layered.min(), layered.max()
        stretched = (layered - low) / (high - low) if high > low else np.full_like(layered, 0.5)
        channels.append(0.05 + 0.9 * stretched)
    return np.stack(channels, axis=2)


def generate(params: SceneParams) -> SyntheticScene:
    timer = humanfriendly.Timer()
    rng = np.random.default_rng(params.texture_seed)
    height, width = params.height, params.width
    model = RoadModel(params.alpha0, params.alpha1, vanishing_row(params.alpha0, params.alpha1, height))

    road_disparity = model.disparity_at(np.arange(height, dtype=np.float64))
    for o in params.obstacles:
        base = model.disparity_at(o.v0 + o.height)
        if o.disparity < base:
            raise GeometryError(f'obstacle disparity {o.disparity:g} is below the road disparity {base:g} '
                                f'at its base row {o.v0 + o.height}')

    shifts = row_shifts(model, height)
    margin = math.ceil(max([shifts.max()] + [o.disparity for o in params.obstacles])) + 2
    world = texture(height, width + margin, rng)
    left = world[:, :width].copy()
    right = sample_shifted_rows(world, shifts)[0][:, :width]

    is_road = np.broadcast_to((road_disparity > 0.0)[:, np.newaxis], (height, width)).copy()
    disparity = np.where(is_road, road_disparity[:, np.newaxis], 0.0)
    valid = is_road.copy()

    columns = np.arange(width, dtype=np.float64)
    for o in sorted(params.obstacles, key=lambda obstacle: obstacle.disparity):
        rows = slice(o.v0, o.v0 + o.height)
        surface = texture(o.height, o.width, rng)
        left[rows, o.u0:o.u0 + o.width] = surface

        canvas = np.zeros((o.height, width, 3))
        canvas[:, o.u0:o.u0 + o.width] = surface
        shifted, _ = sample_shifted_rows(canvas, np.full(o.height, float(o.disparity)))
        source = columns + o.disparity
        covered = (source >= o.u0) & (source <= o.u0 + o.width - 1)
        right[rows][:, covered] = shifted[:, covered]

        disparity[rows, o.u0:o.u0 + o.width] = o.disparity
        valid[rows, o.u0:o.u0 + o.width] = True
        is_road[rows, o.u0:o.u0 + o.width] = False

    if params.noise_sigma > 0.0:
        left = left + rng.normal(0.0, params.noise_sigma, left.shape)
        right = right + rng.normal(0.0, params.noise_sigma, right.shape)

    scene = SyntheticScene(left=Image(np.clip(left, 0.0, 1.0)),
                           right=Image(np.clip(right, 0.0, 1.0)),
                           disparity=DisparityMap(disparity, valid),
                           road_mask=BinaryMask(is_road),
                           model=model)
    logger.info('generated %dx%d scene (seed %d, %d obstacles) in %s',
                width, height, params.texture_seed, len(params.obstacles), timer)
    return scene
