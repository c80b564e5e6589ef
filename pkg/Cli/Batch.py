import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path

import jsonpickle
from tqdm import tqdm

from Cli.Commands import cmd_pipeline, exit_code, load_evaluation_inputs, stage
from Cli.Config import PipelineConfig
from Errors import ParameterError
from NetShape import threshold_probability
from RoadEvaluation import (accumulate, category_of, confusion, fixed_threshold_metrics, report_from_counts,
                            sweep_counts, sweep_csv, thresholds_for)
from Tools import atomic_write, find_stereo_triples

logger = logging.getLogger(__name__)

URBAN = 'urban'


@exit_code
def run_pipeline_batch(directory, out_dir, config: PipelineConfig) -> int:
    """Run the pipeline on every `<stem>_left/_right/_disp.png` triple; the result is the worst exit code."""
    triples = find_stereo_triples(directory)
    if not triples:
        raise ParameterError(f'no complete stereo triples in {directory}')
    out_dir = Path(out_dir)
    codes = {}
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = {pool.submit(cmd_pipeline, parts['left'], parts['right'], parts['disp'], config, out_dir / stem): stem
                   for stem, parts in triples.items()}
        for future in tqdm(as_completed(futures), total=len(futures), desc='frames', unit='frame'):
            codes[futures[future]] = future.result()
    failed = sorted(stem for stem, code in codes.items() if code)
    if failed:
        logger.warning('%d of %d frames failed: %s', len(failed), len(codes), ', '.join(failed))
    return max(codes.values())


def pair_evaluation_files(prob_dir, gt_dir) -> list[tuple[Path, Path]]:
    """Match `<cat>_<idx>.png` or `<cat>_road_<idx>.png` maps to `<cat>_road_<idx>.png` ground truth."""
    gt_files = {path.name: path for path in Path(gt_dir).glob('*.png')}
    pairs = []
    for prob_path in sorted(Path(prob_dir).glob('*.png')):
        name = prob_path.name
        if '_road_' not in name and '_' in name:
            category, index = name.split('_', 1)
            name = f'{category}_road_{index}'
        if name in gt_files:
            pairs.append((prob_path, gt_files[name]))
        else:
            logger.warning('no ground truth for %s', prob_path.name)
    return pairs


@exit_code
def run_eval_batch(prob_dir, gt_dir, out_json, config: PipelineConfig, out_csv=None) -> int:
    """Pixel-pooled metrics per KITTI category plus the urban total over um, umm and uu."""
    pairs = pair_evaluation_files(prob_dir, gt_dir)
    if not pairs:
        raise ParameterError(f'no probability maps in {prob_dir} match ground truth in {gt_dir}')
    thresholds = thresholds_for(config.n_thresholds)
    per_category: dict[str, list] = {}
    at_threshold: dict[str, list] = {}
    for prob_path, gt_path in tqdm(pairs, desc='frames', unit='frame'):
        with stage(f'load {prob_path.name}'):
            prob, gt, valid = load_evaluation_inputs(prob_path, gt_path)
        with stage(f'evaluate {prob_path.name}'):
            counts = sweep_counts(prob, gt, valid, thresholds)
            fixed = confusion(threshold_probability(prob, config.threshold), gt, valid)
        category = category_of(gt_path.name)
        per_category.setdefault(category, []).append(counts)
        at_threshold.setdefault(category, []).append([fixed])

    pooled = {category: accumulate(frames) for category, frames in per_category.items()}
    fixed_pooled = {category: accumulate(frames)[0] for category, frames in at_threshold.items()}
    urban = [category for category in per_category if category != 'other']
    if urban:
        pooled[URBAN] = accumulate([counts for category in urban for counts in per_category[category]])
        fixed_pooled[URBAN] = accumulate([fixed for category in urban for fixed in at_threshold[category]])[0]

    with stage('evaluate'):
        reports = {category: report_from_counts(thresholds, counts).to_dict() for category, counts in pooled.items()}
        for category, report in reports.items():
            report['at_threshold'] = fixed_threshold_metrics(fixed_pooled[category], config.threshold)
    with stage('write'):
        atomic_write(out_json, jsonpickle.encode(reports, unpicklable=False, indent=4))
        if out_csv is not None and URBAN in pooled:
            atomic_write(out_csv, sweep_csv(thresholds, pooled[URBAN]))
    return 0
