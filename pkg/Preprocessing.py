import logging
from dataclasses import dataclass

from Errors import ShapeError
from ImageTypes import DisparityMap, Image
from PerspectiveWarp import WarpedImage, crop_above_horizon, transform_right_to_left
from RoadFit import fit_road
from RoadModel import DPConfig, RoadModel
from Tensor7 import Tensor7, assemble

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PreprocessedFrame:
    model: RoadModel
    left: Image
    right_t: WarpedImage
    disparity: DisparityMap
    tensor: Tensor7


def preprocess_frame(left: Image, right: Image, disp: DisparityMap,
                     cfg: DPConfig = DPConfig(), d_max: int | None = None) -> PreprocessedFrame:
    """Road fit, right-to-left transform, crop above the horizon and 7-channel assembly for one stereo frame."""
    sizes = {(left.height, left.width), (right.height, right.width), (disp.height, disp.width)}
    if len(sizes) != 1:
        raise ShapeError(f'left, right and disparity differ in size: {sorted(sizes)}')
    model = fit_road(disp, cfg, d_max)
    warped = transform_right_to_left(right, model)
    if model.v_py == 0:
        logger.info('vanishing row is 0, frame kept uncropped')
    left = crop_above_horizon(left, model.v_py)
    warped = crop_above_horizon(warped, model.v_py)
    disp = crop_above_horizon(disp, model.v_py)
    return PreprocessedFrame(model, left, warped, disp, assemble(left, warped, disp, model))
