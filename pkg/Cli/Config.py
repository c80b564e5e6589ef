import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from Errors import FormatError, ParameterError
from RoadModel import DPConfig

logger = logging.getLogger(__name__)

# JSON key -> field name
CONFIG_KEYS = {
    'lambda': 'lambda_',
    'tau_max': 'tau_max',
    'smoothness_sign': 'smoothness_sign',
    'min_support': 'min_support',
    'normalize': 'normalize',
    'd_max': 'd_max',
    'n_thresholds': 'n_thresholds',
    'threshold': 'threshold',
    'row_direction': 'row_direction',
    'refine_rows': 'refine_rows',
    'jobs': 'jobs',
}


@dataclass(frozen=True)
class PipelineConfig:
    lambda_: float = 0.1
    tau_max: int = 5
    smoothness_sign: int = 1
    min_support: float = 0.02
    normalize: bool = True
    d_max: int | None = None
    n_thresholds: int = 256
    threshold: float = 0.9
    row_direction: int = 1
    refine_rows: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.d_max is not None and self.d_max < 0:
            raise ParameterError(f'd_max must be >= 0, got {self.d_max}')
        if self.n_thresholds < 2:
            raise ParameterError(f'n_thresholds must be >= 2, got {self.n_thresholds}')
        if not 0.0 <= self.threshold <= 1.0:
            raise ParameterError(f'threshold must lie in [0, 1], got {self.threshold}')
        if self.jobs < 1:
            raise ParameterError(f'jobs must be >= 1, got {self.jobs}')
        self.dp_config()

    def dp_config(self) -> DPConfig:
        return DPConfig(lambda_=self.lambda_, tau_max=self.tau_max, smoothness_sign=self.smoothness_sign,
                        min_support=self.min_support, row_direction=self.row_direction,
                        refine_rows=self.refine_rows)


def from_dict(data: dict) -> PipelineConfig:
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ParameterError(f'unknown configuration keys: {", ".join(unknown)}')
    try:
        return PipelineConfig(**{CONFIG_KEYS[key]: value for key, value in data.items()})
    except TypeError as e:
        raise ParameterError(f'invalid configuration value: {e}') from e


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    text = Path(path).read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f'configuration {path} is not valid JSON: {e}') from e
    if not isinstance(data, dict):
        raise FormatError(f'configuration {path} must be a JSON object')
    config = from_dict(data)
    logger.debug('loaded configuration %s: %s', path, config)
    return config


def apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    """Flags win over file values; a None flag means "not given"."""
    given = {CONFIG_KEYS[key]: value for key, value in overrides.items() if value is not None}
    return dataclasses.replace(config, **given) if given else config
