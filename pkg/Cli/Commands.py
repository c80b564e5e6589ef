import contextlib
import functools
import logging
import sys
from pathlib import Path

import humanfriendly
import jsonpickle

from Cli.Config import PipelineConfig
from Errors import RoadPrepError
from ImageCodec import (encode_disparity_png16, encode_image_png, encode_mask_png, load_disparity_png16,
                        load_ground_truth, load_image, load_mask, load_probability)
from ImageTypes import BinaryMask
from NetShape import build_pt_resnet_spec, threshold_probability, trace_shapes
from PerspectiveWarp import transform_right_to_left
from Preprocessing import preprocess_frame
from RoadEvaluation import (confusion, fixed_threshold_metrics, report_from_counts, sweep_counts, sweep_csv,
                            thresholds_for)
from RoadFit import fit_road
from RoadModel import RoadModel
from SceneGenerator import SceneParams, generate
from Tensor7 import write_pt7
from Tools import atomic_write
from VDisparity import build_vdisparity, render_png, to_csv

logger = logging.getLogger(__name__)


@contextlib.contextmanager
def stage(name: str):
    timer = humanfriendly.Timer()
    try:
        yield
    except RoadPrepError as e:
        if e.stage is None:
            e.stage = name
        raise
    except OSError as e:
        e.stage = name
        raise
    logger.info('%s finished in %s', name, timer)


def exit_code(command):
    """Turn library and IO errors into the stable exit codes and a one-line log message."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs) -> int:
        try:
            return command(*args, **kwargs)
        except RoadPrepError as e:
            logger.error('error: %s: %s', e.stage or command.__name__, e)
            return e.exit_code
        except OSError as e:
            logger.error('error: %s: %s', getattr(e, 'stage', command.__name__), e)
            return 2
    return wrapper


@exit_code
def cmd_vdisp(disparity_path, out_csv, out_png, config: PipelineConfig) -> int:
    with stage('load'):
        disp = load_disparity_png16(Path(disparity_path).read_bytes())
    with stage('vdisp'):
        vd = build_vdisparity(disp, config.d_max, config.normalize)
    with stage('write'):
        atomic_write(out_csv, to_csv(vd))
        atomic_write(out_png, render_png(vd))
    return 0


@exit_code
def cmd_fit(disparity_path, config: PipelineConfig, out_model_json) -> int:
    with stage('load'):
        disp = load_disparity_png16(Path(disparity_path).read_bytes())
    with stage('fit'):
        model = fit_road(disp, config.dp_config(), config.d_max)
    with stage('write'):
        atomic_write(out_model_json, model.to_json())
    return 0


@exit_code
def cmd_transform(right_path, model_json_path, out_png, out_valid_png) -> int:
    with stage('load'):
        right = load_image(Path(right_path).read_bytes())
        model = RoadModel.from_json(Path(model_json_path).read_text(encoding='utf-8'))
    with stage('transform'):
        warped = transform_right_to_left(right, model)
    with stage('write'):
        atomic_write(out_png, encode_image_png(warped.image))
        atomic_write(out_valid_png, encode_mask_png(warped.valid))
    return 0


@exit_code
def cmd_pipeline(left_path, right_path, disparity_path, config: PipelineConfig, out_dir) -> int:
    out_dir = Path(out_dir)
    with stage('load'):
        left = load_image(Path(left_path).read_bytes())
        right = load_image(Path(right_path).read_bytes())
        disp = load_disparity_png16(Path(disparity_path).read_bytes())
    with stage('pipeline'):
        frame = preprocess_frame(left, right, disp, config.dp_config(), config.d_max)
    with stage('write'):
        atomic_write(out_dir / 'frame.pt7', write_pt7(frame.tensor, frame.model))
        atomic_write(out_dir / 'model.json', frame.model.to_json())
        atomic_write(out_dir / 'left_cropped.png', encode_image_png(frame.left))
        atomic_write(out_dir / 'right_warped.png', encode_image_png(frame.right_t.image))
        atomic_write(out_dir / 'right_valid.png', encode_mask_png(frame.right_t.valid))
    return 0


def load_evaluation_inputs(prob_path, gt_path, valid_path=None):
    prob = load_probability(Path(prob_path).read_bytes())
    gt, valid = load_ground_truth(Path(gt_path).read_bytes())
    if valid_path is not None:
        extra = load_mask(Path(valid_path).read_bytes())
        valid = extra if valid is None else BinaryMask(valid.bits & extra.bits)
    return prob, gt, valid


@exit_code
def cmd_eval(prob_path, gt_path, valid_path, out_json, config: PipelineConfig, out_csv=None, out_mask=None) -> int:
    with stage('load'):
        prob, gt, valid = load_evaluation_inputs(prob_path, gt_path, valid_path)
    with stage('evaluate'):
        thresholds = thresholds_for(config.n_thresholds)
        counts = sweep_counts(prob, gt, valid, thresholds)
        report = report_from_counts(thresholds, counts).to_dict()
        mask = threshold_probability(prob, config.threshold)
        report['at_threshold'] = fixed_threshold_metrics(confusion(mask, gt, valid), config.threshold)
    logger.info('MaxF %.4f AP %.4f at threshold %.4f', report['maxf'], report['ap'], report['threshold_at_maxf'])
    with stage('write'):
        atomic_write(out_json, jsonpickle.encode(report, unpicklable=False, indent=4))
        if out_csv is not None:
            atomic_write(out_csv, sweep_csv(thresholds, counts))
        if out_mask is not None:
            atomic_write(out_mask, encode_mask_png(mask))
    return 0


@exit_code
def cmd_synth(out_dir, params: SceneParams) -> int:
    out_dir = Path(out_dir)
    with stage('synth'):
        scene = generate(params)
    with stage('write'):
        atomic_write(out_dir / 'left.png', encode_image_png(scene.left))
        atomic_write(out_dir / 'right.png', encode_image_png(scene.right))
        atomic_write(out_dir / 'disp.png', encode_disparity_png16(scene.disparity))
        atomic_write(out_dir / 'road_mask.png', encode_mask_png(scene.road_mask))
        atomic_write(out_dir / 'model.json', scene.model.to_json())
    return 0


@exit_code
def cmd_netshape(height: int, width: int, out=None) -> int:
    out = out or sys.stdout
    with stage('netshape'):
        trace = trace_shapes(build_pt_resnet_spec(), (height, width, 7))
    print(trace.to_table(), file=out)
    print(trace.to_json(), file=out)
    return 0
