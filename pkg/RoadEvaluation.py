import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import jsonpickle
import numpy as np

from Errors import ParameterError, ShapeError, UndefinedRecallError
from ImageTypes import BinaryMask, ProbabilityMap

logger = logging.getLogger(__name__)

AP_POINTS = 101
DEFAULT_THRESHOLDS = 256
CATEGORIES = ('um', 'umm', 'uu')


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __add__(self, other: 'ConfusionCounts') -> 'ConfusionCounts':
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricReport:
    maxf: float
    ap: float
    pre: float
    rec: float
    fpr: float
    fnr: float
    threshold_at_maxf: float
    n_thresholds: int

    def to_dict(self) -> dict:
        return {
            'maxf': self.maxf,
            'ap': self.ap,
            'pre': self.pre,
            'rec': self.rec,
            'fpr': self.fpr,
            'fnr': self.fnr,
            'threshold_at_maxf': self.threshold_at_maxf,
            'n_thresholds': self.n_thresholds,
            'ap_points': AP_POINTS,
            'ap_definition': '101-point interpolated',
            'evaluation_space': 'perspective',
        }

    def to_json(self) -> str:
        return jsonpickle.encode(self.to_dict(), unpicklable=False, indent=4)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def _check_shapes(*masks):
    shapes = {m.shape for m in masks if m is not None}
    if len(shapes) != 1:
        raise ShapeError(f'evaluation inputs differ in size: {sorted(shapes)}')


def confusion(pred: BinaryMask, gt: BinaryMask, valid: BinaryMask | None = None) -> ConfusionCounts:
    _check_shapes(pred.bits, gt.bits, valid.bits if valid is not None else None)
    keep = valid.bits if valid is not None else np.ones(pred.bits.shape, dtype=bool)
    p = pred.bits[keep]
    g = gt.bits[keep]
    return ConfusionCounts(tp=int(np.sum(p & g)), fp=int(np.sum(p & ~g)),
                           tn=int(np.sum(~p & ~g)), fn=int(np.sum(~p & g)))


def point_metrics(c: ConfusionCounts) -> tuple[float, float, float, float, float]:
    """(pre, rec, fpr, fnr, f1); every 0/0 ratio is 0."""
    pre = _ratio(c.tp, c.tp + c.fp)
    rec = _ratio(c.tp, c.tp + c.fn)
    fpr = _ratio(c.fp, c.fp + c.tn)
    # fn / (tp + fn) written as 1 - rec so the two always sum to one
    fnr = 1.0 - rec if c.tp + c.fn else 0.0
    f1 = 2.0 * pre * rec / (pre + rec) if pre + rec > 0.0 else 0.0
    return pre, rec, fpr, fnr, f1


def thresholds_for(n_thresholds: int) -> np.ndarray:
    if n_thresholds < 2:
        raise ParameterError(f'n_thresholds must be >= 2, got {n_thresholds}')
    return np.arange(n_thresholds) / (n_thresholds - 1)


def sweep_counts(prob: ProbabilityMap, gt: BinaryMask, valid: BinaryMask | None,
                 thresholds: np.ndarray) -> list[ConfusionCounts]:
    """Confusion counts of `prob > t` for every threshold, from one sort per class."""
    _check_shapes(prob.probs, gt.bits, valid.bits if valid is not None else None)
    keep = valid.bits if valid is not None else np.ones(gt.bits.shape, dtype=bool)
    probs = prob.probs[keep]
    truth = gt.bits[keep]
    positives = np.sort(probs[truth])
    negatives = np.sort(probs[~truth])
    tp = positives.size - np.searchsorted(positives, thresholds, side='right')
    fp = negatives.size - np.searchsorted(negatives, thresholds, side='right')
    return [ConfusionCounts(int(a), int(b), int(negatives.size - b), int(positives.size - a))
            for a, b in zip(tp, fp)]


def accumulate(per_frame: list[list[ConfusionCounts]]) -> list[ConfusionCounts]:
    """Pool pixel counts of several frames, threshold by threshold."""
    if not per_frame:
        raise ParameterError('nothing to accumulate')
    return [sum(column[1:], column[0]) for column in zip(*per_frame)]


def average_precision(points: list[tuple[float, float]]) -> float:
    """Mean over recall levels 0.00..1.00 of the best precision reaching that recall (0 if none)."""
    best = []
    for k in range(AP_POINTS):
        level = k / (AP_POINTS - 1)
        reachable = [pre for pre, rec in points if rec >= level]
        best.append(max(reachable) if reachable else 0.0)
    return math.fsum(best) / AP_POINTS


def report_from_counts(thresholds: np.ndarray, counts: list[ConfusionCounts]) -> MetricReport:
    if len(thresholds) != len(counts):
        raise ShapeError(f'{len(thresholds)} thresholds but {len(counts)} confusion points')
    if counts[0].tp + counts[0].fn == 0:
        raise UndefinedRecallError('ground truth has no road pixels inside the evaluated region')
    metrics = [point_metrics(c) for c in counts]
    f1 = [m[4] for m in metrics]
    best = int(np.argmax(f1))
    pre, rec, fpr, fnr, maxf = metrics[best]
    ap = average_precision([(m[0], m[1]) for m in metrics])
    return MetricReport(maxf=maxf, ap=ap, pre=pre, rec=rec, fpr=fpr, fnr=fnr,
                        threshold_at_maxf=float(thresholds[best]), n_thresholds=len(thresholds))


def sweep(prob: ProbabilityMap, gt: BinaryMask, valid: BinaryMask | None = None,
          n_thresholds: int = DEFAULT_THRESHOLDS) -> MetricReport:
    thresholds = thresholds_for(n_thresholds)
    return report_from_counts(thresholds, sweep_counts(prob, gt, valid, thresholds))


def sweep_table(thresholds: np.ndarray, counts: list[ConfusionCounts]) -> list[tuple[float, float, float, float]]:
    rows = []
    for t, c in zip(thresholds, counts):
        pre, rec, _fpr, _fnr, f1 = point_metrics(c)
        rows.append((float(t), pre, rec, f1))
    return rows


def sweep_csv(thresholds: np.ndarray, counts: list[ConfusionCounts]) -> str:
    buffer = io.StringIO()
    np.savetxt(buffer, np.array(sweep_table(thresholds, counts)).reshape(-1, 4),
               delimiter=',', fmt='%.10g', header='t,pre,rec,f1', comments='')
    return buffer.getvalue()


def category_of(name: str) -> str:
    """KITTI road category from a file name such as `umm_000042.png` or `uu_road_000003.png`."""
    stem = Path(name).stem.lower()
    for category in sorted(CATEGORIES, key=len, reverse=True):
        if stem.startswith(category + '_'):
            return category
    return 'other'


def fixed_threshold_metrics(c: ConfusionCounts, threshold: float) -> dict:
    """Metrics of the segmentation mask cut at one preset threshold."""
    pre, rec, fpr, fnr, f1 = point_metrics(c)
    return {'threshold': float(threshold), 'pre': pre, 'rec': rec, 'fpr': fpr, 'fnr': fnr, 'f1': f1,
            'tp': c.tp, 'fp': c.fp, 'tn': c.tn, 'fn': c.fn}
