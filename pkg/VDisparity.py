import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from Errors import EmptyInputError, ParameterError
from ImageCodec import encode_image_png
from ImageTypes import DisparityMap, Image
from Tools import round_half_away

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VDisparityMap:
    """Row histograms p(d, v); counts is indexed [d, v]."""
    counts: np.ndarray
    normalized: bool

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.float64)
        if counts.ndim != 2:
            raise ParameterError(f'v-disparity counts must be 2-D (d_bins, height), got {counts.shape}')
        if counts.size and counts.min() < 0.0:
            raise ParameterError('v-disparity counts must be non-negative')
        counts.setflags(write=False)
        object.__setattr__(self, 'counts', counts)

    @property
    def d_bins(self) -> int:
        return self.counts.shape[0]

    @property
    def d_max(self) -> int:
        return self.d_bins - 1

    @property
    def height(self) -> int:
        return self.counts.shape[1]

    def scaled(self, factor: float) -> 'VDisparityMap':
        return VDisparityMap(self.counts * factor, self.normalized)


def build_vdisparity(disp: DisparityMap, d_max: int | None = None, normalize: bool = True) -> VDisparityMap:
    if d_max is not None and d_max < 0:
        raise ParameterError(f'd_max must be >= 0, got {d_max}')
    values = disp.values[disp.valid]
    if d_max is None:
        if values.size == 0:
            raise EmptyInputError('disparity map has no valid pixels and no d_max was given')
        d_max = math.ceil(values.max())
    d_bins = int(d_max) + 1

    rows = np.broadcast_to(np.arange(disp.height)[:, np.newaxis], disp.values.shape)[disp.valid]
    bins = round_half_away(values).astype(np.int64)
    kept = bins <= d_max
    if not np.all(kept):
        logger.debug('discarding %d pixels with disparity bin above %d', int(np.sum(~kept)), d_max)
    flat = np.bincount(rows[kept] * d_bins + bins[kept], minlength=disp.height * d_bins)
    counts = flat.reshape(disp.height, d_bins).T.astype(np.float64)
    if normalize:
        counts /= disp.width
    return VDisparityMap(counts, normalize)


def to_csv(vd: VDisparityMap) -> str:
    """One line per image row v, d_bins comma-separated values."""
    buffer = io.StringIO()
    np.savetxt(buffer, vd.counts.T, delimiter=',', fmt='%.10g')
    return buffer.getvalue()


def render_png(vd: VDisparityMap) -> bytes:
    """8-bit rendering, rows = image rows, columns = disparity bins, scaled by 255 / max."""
    peak = vd.counts.max(initial=0.0)
    scaled = vd.counts.T / peak if peak > 0 else np.zeros_like(vd.counts.T)
    return encode_image_png(Image(scaled))
