import dataclasses
import logging
from dataclasses import dataclass

import humanfriendly
import numpy as np

from Errors import DegenerateFitError, EmptyInputError, NonRoadGeometryError, ParameterError
from ImageTypes import DisparityMap
from RoadModel import DPConfig, RoadModel
from Tools import round_half_away
from VDisparity import VDisparityMap, build_vdisparity

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DPEnergyTable:
    """E(d, v) and the jump chosen at every cell, both indexed [d, v]."""
    energies: np.ndarray
    argmin_tau: np.ndarray
    row_direction: int = 1


@dataclass(frozen=True, eq=False)
class RoadPath:
    """One point per disparity bin, listed from d_max down to 0."""
    disparities: np.ndarray
    rows: np.ndarray
    weights: np.ndarray
    energy: float
    refined_rows: np.ndarray | None = None

    def __len__(self):
        return len(self.disparities)

    @property
    def points(self) -> list[tuple[int, int]]:
        return list(zip(self.disparities.tolist(), self.rows.tolist()))

    @property
    def fit_rows(self) -> np.ndarray:
        return self.rows.astype(np.float64) if self.refined_rows is None else self.refined_rows


def _best_predecessor(next_energies: np.ndarray, tau_max: int, step: float, direction: int):
    height = next_energies.size
    best = next_energies.copy()
    best_tau = np.zeros(height, dtype=np.int64)
    for tau in range(1, tau_max + 1):
        candidate = np.full(height, np.inf)
        if direction > 0:
            candidate[:height - tau] = next_energies[tau:] + step * tau
        else:
            candidate[tau:] = next_energies[:height - tau] + step * tau
        # strict comparison keeps the smallest tau on ties
        better = candidate < best
        best[better] = candidate[better]
        best_tau[better] = tau
    return best, best_tau


def dp_solve(vd: VDisparityMap, cfg: DPConfig) -> DPEnergyTable:
    if vd.d_bins == 0 or vd.height == 0:
        raise EmptyInputError('v-disparity map has no bins')
    if vd.height <= cfg.tau_max:
        raise ParameterError(f'tau_max {cfg.tau_max} must be smaller than the v-disparity height {vd.height}')
    if not vd.normalized:
        logger.warning('running DP on an un-normalized v-disparity map; lambda is scaled for normalized maps')

    hist = vd.counts
    energies = np.empty_like(hist)
    argmin_tau = np.zeros(hist.shape, dtype=np.int64)
    energies[-1] = -hist[-1]
    step = cfg.smoothness_sign * cfg.lambda_
    for d in range(vd.d_bins - 2, -1, -1):
        best, best_tau = _best_predecessor(energies[d + 1], cfg.tau_max, step, cfg.row_direction)
        energies[d] = -hist[d] + best
        argmin_tau[d] = best_tau
    return DPEnergyTable(energies, argmin_tau, cfg.row_direction)


def extract_path(table: DPEnergyTable, vd: VDisparityMap) -> RoadPath:
    d_bins = table.energies.shape[0]
    v = int(np.argmin(table.energies[0]))
    energy = float(table.energies[0, v])
    rows = [v]
    for d in range(d_bins - 1):
        v += table.row_direction * int(table.argmin_tau[d, v])
        rows.append(v)
    rows = np.array(rows[::-1], dtype=np.int64)
    disparities = np.arange(d_bins - 1, -1, -1, dtype=np.int64)
    return RoadPath(disparities, rows, vd.counts[disparities, rows].copy(), energy)


def refine_path(path: RoadPath, vd: VDisparityMap, cfg: DPConfig) -> RoadPath:
    """Move every supported point to the weighted centre of its row run in the v-disparity column.

    The run is the contiguous block of cells holding at least half the path cell's value
    (and at least min_support). Unsupported points keep their integer row.
    """
    refined = path.rows.astype(np.float64)
    for i, (d, v, weight) in enumerate(zip(path.disparities, path.rows, path.weights)):
        if weight <= 0.0 or weight < cfg.min_support:
            continue
        column = vd.counts[d]
        floor = max(cfg.min_support, 0.5 * weight)
        lo = hi = v
        while lo > 0 and column[lo - 1] >= floor:
            lo -= 1
        while hi < len(column) - 1 and column[hi + 1] >= floor:
            hi += 1
        run = column[lo:hi + 1]
        refined[i] = float(np.dot(run, np.arange(lo, hi + 1)) / run.sum())
    return dataclasses.replace(path, refined_rows=refined)


def fit_linear(path: RoadPath, cfg: DPConfig) -> tuple[float, float, float]:
    """Weighted least-squares line d = alpha0 + alpha1 * v through the supported path points."""
    supported = (path.weights >= cfg.min_support) & (path.weights > 0.0)
    d = path.disparities[supported].astype(np.float64)
    v = path.fit_rows[supported]
    w = path.weights[supported]
    if d.size < 2:
        raise DegenerateFitError(f'{d.size} supported path point(s); at least 2 are needed')
    if np.unique(v).size < 2:
        raise DegenerateFitError('all supported path points lie on one image row')

    normal = np.array([[w.sum(), np.dot(w, v)],
                       [np.dot(w, v), np.dot(w, v * v)]])
    rhs = np.array([np.dot(w, d), np.dot(w, v * d)])
    try:
        alpha0, alpha1 = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as e:
        raise DegenerateFitError(f'singular normal equations: {e}') from e
    if alpha1 <= 0.0:
        raise NonRoadGeometryError(f'fitted alpha1 = {alpha1:.6g}; road disparity must grow toward the image bottom')
    residuals = d - alpha0 - alpha1 * v
    residual = float(np.sqrt(np.dot(w, residuals * residuals) / w.sum()))
    return float(alpha0), float(alpha1), residual


def vanishing_row(alpha0: float, alpha1: float, height: int) -> int:
    if not alpha1 > 0.0:
        raise ParameterError(f'alpha1 must be > 0, got {alpha1}')
    with np.errstate(over='ignore'):
        row = np.float64(-alpha0) / np.float64(alpha1)
    clamped = int(round_half_away(np.clip(row, 0, height - 1)))
    if clamped != round_half_away(row):
        logger.debug('vanishing row %.6g clamped to %d', row, clamped)
    return clamped


def fit_road(disp: DisparityMap, cfg: DPConfig = DPConfig(), d_max: int | None = None) -> RoadModel:
    timer = humanfriendly.Timer()
    vd = build_vdisparity(disp, d_max, normalize=True)
    table = dp_solve(vd, cfg)
    path = extract_path(table, vd)
    if cfg.refine_rows:
        path = refine_path(path, vd, cfg)
    alpha0, alpha1, residual = fit_linear(path, cfg)
    v_py = vanishing_row(alpha0, alpha1, disp.height)
    logger.info('road model alpha0=%.4f alpha1=%.5f v_py=%d rms=%.4f (%d bins) in %s',
                alpha0, alpha1, v_py, residual, vd.d_bins, timer)
    return RoadModel(alpha0, alpha1, v_py, residual, cfg)
