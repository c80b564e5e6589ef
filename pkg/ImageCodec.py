import io
import logging
import zlib

import numpy as np
import png

from Errors import DecodeError, FormatError, ParameterError
from ImageTypes import BinaryMask, DisparityMap, Image, ProbabilityMap

logger = logging.getLogger(__name__)

DISPARITY_SCALE = 256.0


def _decode(data: bytes) -> tuple[np.ndarray, dict]:
    """Decode PNG bytes to an array of shape (height, width, planes) plus the PNG info."""
    try:
        width, height, rows, info = png.Reader(bytes=bytes(data)).asDirect()
        dtype = np.uint16 if info['bitdepth'] > 8 else np.uint8
        raw = np.vstack([np.asarray(row, dtype=dtype) for row in rows]) if height else np.zeros((0, 0), dtype)
    except (png.Error, zlib.error, EOFError, ValueError) as e:
        raise DecodeError(f'cannot decode PNG: {e}') from e
    return raw.reshape(height, width, info['planes']), info


def _drop_alpha(raw: np.ndarray, info: dict) -> np.ndarray:
    if info.get('alpha'):
        logger.debug('dropping alpha plane')
        return raw[:, :, :-1]
    return raw


def load_disparity_png16(data: bytes) -> DisparityMap:
    raw, info = _decode(data)
    if raw.shape[2] != 1:
        raise FormatError(f'disparity PNG must have one channel, found {raw.shape[2]}')
    if info['bitdepth'] != 16:
        raise FormatError(f'disparity PNG must be 16-bit, found {info["bitdepth"]}-bit')
    raw = raw[:, :, 0]
    return DisparityMap(raw.astype(np.float64) / DISPARITY_SCALE, raw != 0)


def encode_disparity_png16(disparity: DisparityMap) -> bytes:
    raw = np.rint(disparity.filled(0.0) * DISPARITY_SCALE)
    if raw.max(initial=0) > np.iinfo(np.uint16).max:
        raise ParameterError('disparity too large for the 16-bit /256 encoding')
    raw = np.where(disparity.valid, raw, 0).astype(np.uint16)
    if np.any(disparity.valid & (raw == 0)):
        logger.warning('%d valid disparities below 1/256 px encode as invalid',
                       int(np.sum(disparity.valid & (raw == 0))))
    return encode_gray16_png(raw)


def encode_gray16_png(raw: np.ndarray) -> bytes:
    raw = np.asarray(raw, dtype=np.uint16)
    buffer = io.BytesIO()
    png.Writer(raw.shape[1], raw.shape[0], greyscale=True, bitdepth=16).write(buffer, raw.tolist())
    return buffer.getvalue()


def load_image(data: bytes) -> Image:
    raw, info = _decode(data)
    if info['bitdepth'] != 8:
        raise FormatError(f'image PNG must be 8-bit, found {info["bitdepth"]}-bit')
    raw = _drop_alpha(raw, info)
    return Image(raw.astype(np.float64) / 255.0)


def encode_image_png(image: Image) -> bytes:
    raw = np.rint(image.pixels * 255.0).astype(np.uint8)
    buffer = io.BytesIO()
    writer = png.Writer(image.width, image.height, greyscale=image.channels == 1, bitdepth=8)
    writer.write(buffer, raw.reshape(image.height, image.width * image.channels).tolist())
    return buffer.getvalue()


def encode_mask_png(mask: BinaryMask) -> bytes:
    buffer = io.BytesIO()
    png.Writer(mask.width, mask.height, greyscale=True, bitdepth=1).write(buffer, mask.bits.astype(np.uint8).tolist())
    return buffer.getvalue()


def load_mask(data: bytes) -> BinaryMask:
    """Grayscale PNG, any bit depth; true where the sample is above half scale."""
    raw, info = _decode(data)
    raw = _drop_alpha(raw, info)
    if raw.shape[2] != 1:
        raise FormatError(f'mask PNG must be grayscale, found {raw.shape[2]} channels')
    return BinaryMask(raw[:, :, 0].astype(np.float64) / (2 ** info['bitdepth'] - 1) > 0.5)


def load_probability(data: bytes) -> ProbabilityMap:
    raw, info = _decode(data)
    raw = _drop_alpha(raw, info)
    if raw.shape[2] != 1 or info['bitdepth'] not in (8, 16):
        raise FormatError('probability map must be an 8-bit or 16-bit grayscale PNG')
    return ProbabilityMap(raw[:, :, 0].astype(np.float64) / (2 ** info['bitdepth'] - 1))


def load_ground_truth(data: bytes) -> tuple[BinaryMask, BinaryMask | None]:
    """Plain grayscale masks give (road, None); RGB images are read with the KITTI colour rule."""
    raw, info = _decode(data)
    raw = _drop_alpha(raw, info)
    if raw.shape[2] == 3:
        if info['bitdepth'] != 8:
            raise FormatError(f'RGB ground truth must be 8-bit, found {info["bitdepth"]}-bit')
        return kitti_gt_to_masks(Image(raw.astype(np.float64) / 255.0))
    return BinaryMask(raw[:, :, 0].astype(np.float64) / (2 ** info['bitdepth'] - 1) > 0.5), None


def kitti_gt_to_masks(image: Image) -> tuple[BinaryMask, BinaryMask]:
    """KITTI road ground truth: magenta is road, red is non-road, black is not evaluated."""
    if image.channels != 3:
        raise FormatError(f'KITTI ground truth must be RGB, found {image.channels} channels')
    red = image.pixels[:, :, 0] > 127 / 255
    blue = image.pixels[:, :, 2] > 127 / 255
    return BinaryMask(red & blue), BinaryMask(red)
