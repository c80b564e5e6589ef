import logging
import struct
from dataclasses import dataclass

import numpy as np

from Errors import FormatError, ShapeError
from ImageTypes import DisparityMap, Image
from PerspectiveWarp import WarpedImage
from RoadModel import RoadModel

logger = logging.getLogger(__name__)

MAGIC = b'PT7T'
VERSION = 1
CHANNELS = 7
HEADER = struct.Struct('<4sIIIII')
LENGTH = struct.Struct('<I')
PLANE_NAMES = ('left.r', 'left.g', 'left.b', 'right_t.r', 'right_t.g', 'right_t.b', 'disparity')


@dataclass(frozen=True, eq=False)
class Tensor7:
    """Seven float32 planes [L.R, L.G, L.B, Rt.R, Rt.G, Rt.B, D], indexed [channel, v, u]."""
    planes: np.ndarray

    def __post_init__(self):
        planes = np.array(self.planes, dtype=np.float32)
        if planes.ndim != 3 or planes.shape[0] != CHANNELS:
            raise ShapeError(f'tensor must have shape (7, H, W), got {planes.shape}')
        planes.setflags(write=False)
        object.__setattr__(self, 'planes', planes)

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    def plane(self, name: str) -> np.ndarray:
        return self.planes[PLANE_NAMES.index(name)]

    def same_as(self, other: 'Tensor7') -> bool:
        return self.planes.shape == other.planes.shape and self.planes.tobytes() == other.planes.tobytes()


def assemble(left: Image, right_t: WarpedImage, disp: DisparityMap, model: RoadModel) -> Tensor7:
    sizes = {(left.height, left.width), (right_t.height, right_t.width), (disp.height, disp.width)}
    if len(sizes) != 1:
        raise ShapeError(f'inputs must share one size, got {sorted(sizes)}')
    for name, image in (('left', left), ('transformed right', right_t.image)):
        if image.channels != 3:
            raise FormatError(f'{name} image must have 3 channels, found {image.channels}')
    right = np.where(right_t.valid.bits[:, :, np.newaxis], right_t.image.pixels, 0.0)
    planes = np.concatenate([
        np.moveaxis(left.pixels, 2, 0),
        np.moveaxis(right, 2, 0),
        disp.filled(0.0)[np.newaxis],
    ])
    logger.debug('assembled %dx%d frame for v_py=%d', left.width, left.height, model.v_py)
    return Tensor7(planes)


def write_pt7(t: Tensor7, meta: RoadModel) -> bytes:
    header = HEADER.pack(MAGIC, VERSION, t.height, t.width, CHANNELS, 0)
    payload = t.planes.astype('<f4').tobytes(order='C')
    document = meta.to_json().encode('utf-8')
    return header + payload + LENGTH.pack(len(document)) + document


def read_pt7(data: bytes) -> tuple[Tensor7, RoadModel]:
    data = bytes(data)
    if len(data) < HEADER.size:
        raise FormatError(f'truncated header: {len(data)} of {HEADER.size} bytes', offset=len(data))
    magic, version, height, width, channels, _reserved = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f'bad magic {magic!r}', offset=0)
    if version != VERSION:
        raise FormatError(f'unsupported version {version}', offset=4)
    if channels != CHANNELS:
        raise FormatError(f'expected {CHANNELS} channels, found {channels}', offset=16)

    offset = HEADER.size
    payload_size = height * width * CHANNELS * 4
    if len(data) < offset + payload_size:
        raise FormatError(f'truncated payload: need {payload_size} bytes', offset=len(data))
    planes = np.frombuffer(data, dtype='<f4', count=height * width * CHANNELS, offset=offset)
    offset += payload_size

    if len(data) < offset + LENGTH.size:
        raise FormatError('truncated metadata length', offset=len(data))
    (length,) = LENGTH.unpack_from(data, offset)
    offset += LENGTH.size
    if len(data) < offset + length:
        raise FormatError(f'truncated metadata: need {length} bytes', offset=len(data))
    if len(data) > offset + length:
        raise FormatError('trailing bytes after metadata', offset=offset + length)
    try:
        text = data[offset:offset + length].decode('utf-8')
    except UnicodeDecodeError as e:
        raise FormatError(f'metadata is not UTF-8: {e.reason}', offset=offset + e.start) from e
    model = RoadModel.from_json(text)
    return Tensor7(planes.reshape(CHANNELS, height, width)), model
