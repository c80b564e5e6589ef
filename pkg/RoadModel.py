import json
from dataclasses import dataclass

import jsonpickle

from Errors import FormatError, ParameterError


@dataclass(frozen=True)
class DPConfig:
    lambda_: float = 0.1
    tau_max: int = 5
    smoothness_sign: int = 1
    min_support: float = 0.02
    # +1: the path moves down the image as disparity grows; -1: the literal E(d+1, v - tau) indexing
    row_direction: int = 1
    refine_rows: bool = True

    def __post_init__(self):
        if not self.lambda_ >= 0:
            raise ParameterError(f'lambda must be >= 0, got {self.lambda_}')
        if int(self.tau_max) != self.tau_max or self.tau_max < 0:
            raise ParameterError(f'tau_max must be a non-negative integer, got {self.tau_max}')
        if self.smoothness_sign not in (1, -1):
            raise ParameterError(f'smoothness_sign must be +1 or -1, got {self.smoothness_sign}')
        if not 0.0 <= self.min_support < 1.0:
            raise ParameterError(f'min_support must lie in [0, 1), got {self.min_support}')
        if self.row_direction not in (1, -1):
            raise ParameterError(f'row_direction must be +1 or -1, got {self.row_direction}')


@dataclass(frozen=True)
class RoadModel:
    """Road disparity projection f(v) = alpha0 + alpha1 * v."""
    alpha0: float
    alpha1: float
    v_py: int
    fit_residual: float = 0.0
    dp_config: DPConfig | None = None

    def disparity_at(self, v):
        return self.alpha0 + self.alpha1 * v

    def to_dict(self) -> dict:
        cfg = self.dp_config
        return {
            'alpha0': float(self.alpha0),
            'alpha1': float(self.alpha1),
            'v_py': int(self.v_py),
            'fit_residual': float(self.fit_residual),
            'lambda': float(cfg.lambda_) if cfg else None,
            'tau_max': int(cfg.tau_max) if cfg else None,
            'smoothness_sign': int(cfg.smoothness_sign) if cfg else None,
            'min_support': float(cfg.min_support) if cfg else None,
            'row_direction': int(cfg.row_direction) if cfg else None,
            'refine_rows': bool(cfg.refine_rows) if cfg else None,
        }

    def to_json(self) -> str:
        return jsonpickle.encode(self.to_dict(), unpicklable=False, indent=4)

    @classmethod
    def from_dict(cls, data: dict) -> 'RoadModel':
        try:
            cfg = None
            if data.get('lambda') is not None:
                defaults = DPConfig()
                cfg = DPConfig(lambda_=float(data['lambda']),
                               tau_max=int(data['tau_max']),
                               smoothness_sign=int(data['smoothness_sign']),
                               min_support=float(_or_default(data.get('min_support'), defaults.min_support)),
                               row_direction=int(_or_default(data.get('row_direction'), defaults.row_direction)),
                               refine_rows=bool(_or_default(data.get('refine_rows'), defaults.refine_rows)))
            return cls(float(data['alpha0']), float(data['alpha1']), int(data['v_py']),
                       float(data.get('fit_residual', 0.0)), cfg)
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f'invalid road model document: {e!r}') from e

    @classmethod
    def from_json(cls, text: str) -> 'RoadModel':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f'road model is not valid JSON: {e}') from e
        if not isinstance(data, dict):
            raise FormatError('road model JSON must be an object')
        return cls.from_dict(data)


def _or_default(value, default):
    return default if value is None else value
