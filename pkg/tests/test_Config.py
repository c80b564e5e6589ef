import json

import pytest

from Cli.Config import PipelineConfig, apply_overrides, from_dict, load_config
from Errors import FormatError, ParameterError
from RoadModel import DPConfig


def test_defaults():
    config = load_config(None)
    assert config == PipelineConfig()
    assert config.dp_config() == DPConfig()
    assert (config.n_thresholds, config.threshold, config.normalize, config.d_max) == (256, 0.9, True, None)


def test_file_keys(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'lambda': 0.2, 'tau_max': 8, 'smoothness_sign': -1, 'd_max': 90,
                                'n_thresholds': 101, 'row_direction': -1, 'refine_rows': False}))
    config = load_config(path)
    assert config.dp_config() == DPConfig(lambda_=0.2, tau_max=8, smoothness_sign=-1, row_direction=-1,
                                          refine_rows=False)
    assert (config.d_max, config.n_thresholds) == (90, 101)


def test_bad_files(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{not json')
    with pytest.raises(FormatError):
        load_config(path)
    path.write_text('[1, 2]')
    with pytest.raises(FormatError):
        load_config(path)
    with pytest.raises(OSError):
        load_config(tmp_path / 'missing.json')


def test_invalid_values():
    with pytest.raises(ParameterError):
        from_dict({'lambda': -0.5})
    with pytest.raises(ParameterError):
        from_dict({'threshold': 2.0})
    with pytest.raises(ParameterError):
        from_dict({'speed': 3})
    with pytest.raises(ParameterError):
        from_dict({'n_thresholds': 1})


def test_overrides_ignore_missing_flags():
    config = PipelineConfig(lambda_=0.3, tau_max=4)
    assert apply_overrides(config, {'lambda': None, 'tau_max': None}) is config
    assert apply_overrides(config, {'tau_max': 9, 'jobs': 3}) == PipelineConfig(lambda_=0.3, tau_max=9, jobs=3)
    with pytest.raises(ParameterError):
        apply_overrides(config, {'jobs': 0})


def test_only_json_is_accepted(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('lambda: 0.5\ntau_max: 7\n')
    with pytest.raises(FormatError):
        load_config(path)
    marker = tmp_path / 'marker'
    path.write_text(json.dumps({'py/reduce': [{'py/function': 'pathlib.Path.touch'},
                                              {'py/tuple': [str(marker)]}]}))
    with pytest.raises(ParameterError):
        load_config(path)
    assert not marker.exists()
