import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

import yaml  # type: ignore

from screw_glide.errors import ConfigError

ENERGY_NAMES = ('quadratic_well', 'screw', 'saddle', 'constant')
MODES = ('exact', 'quadratic-model')
REFERENCES = ('inclusion', 'closed-form')
PRESET_NAMES = ('square', 'hexagonal', 'cubic')


@dataclass
class RunConfig:
    initial: dict
    glide: object = 'square'
    angular_tolerance: float = 1e-9
    energy: dict = field(default_factory=lambda: {'name': 'quadratic_well', 'params': {}})
    tau_list: list = field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005])
    h: float = 1e-3
    T: float = 1.5
    mode: str = 'exact'
    seed: int = 0
    output_dir: str = 'results'
    reference: str = 'inclusion'
    quadrature_points: int = 8
    edi_tolerance: float = 1e-5
    sample_count: int = 400
    workers: int = 1
    classify: dict = field(default_factory=lambda: {'radius': 1.0, 'center': [0.0, 0.0], 'points': 360})

    def to_dict(self):
        return asdict(self)


def _number(value, path, positive=False):
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if positive and not number > 0:
        raise ConfigError(path, "must be positive")
    return number


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def _vector(value, path):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(path, "expected a list of numbers")
    return [_number(v, f"{path}[{k}]") for k, v in enumerate(value)]


def _choice(value, path, choices):
    if value not in choices:
        raise ConfigError(path, f"must be one of {', '.join(choices)}; got {value!r}")
    return value


def _parse_glide(value):
    if isinstance(value, str):
        return _choice(value, 'glide', PRESET_NAMES)
    if not isinstance(value, list) or not value:
        raise ConfigError('glide', "expected a preset name or a list of direction vectors")
    return [_vector(v, f"glide[{k}]") for k, v in enumerate(value)]


def _parse_energy(value):
    if not isinstance(value, dict):
        raise ConfigError('energy', "expected a mapping with 'name' and 'params'")
    name = _choice(value.get('name', 'quadratic_well'), 'energy.name', ENERGY_NAMES)
    params = value.get('params') or {}
    if not isinstance(params, dict):
        raise ConfigError('energy.params', "expected a mapping")
    parsed = {}
    for key, item in params.items():
        path = f"energy.params.{key}"
        if isinstance(item, list):
            parsed[key] = _vector(item, path)
        else:
            parsed[key] = _number(item, path, positive=key in ('epsilon', 'confinement_radius'))
    return {'name': name, 'params': parsed}


def _parse_initial(value):
    if not isinstance(value, dict) or 'positions' not in value:
        raise ConfigError('initial.positions', "is required")
    positions = value['positions']
    if not isinstance(positions, list) or not positions:
        raise ConfigError('initial.positions', "expected a non-empty list of points")
    points = [_vector(p, f"initial.positions[{k}]") for k, p in enumerate(positions)]
    if len({len(p) for p in points}) != 1:
        raise ConfigError('initial.positions', "all points must have the same dimension")
    burgers = value.get('burgers')
    if burgers is None:
        burgers = [1] * len(points)
    if not isinstance(burgers, list) or len(burgers) != len(points):
        raise ConfigError('initial.burgers', "expected one entry per position")
    for k, b in enumerate(burgers):
        if b not in (1, -1) or isinstance(b, bool):
            raise ConfigError(f"initial.burgers[{k}]", "must be +1 or -1")
    return {'positions': points, 'burgers': [int(b) for b in burgers]}


def _parse_tau_list(value):
    if not isinstance(value, list) or not value:
        raise ConfigError('tau_list', "must be a non-empty list")
    taus = [_number(t, f"tau_list[{k}]", positive=True) for k, t in enumerate(value)]
    for k in range(1, len(taus)):
        if not taus[k] < taus[k - 1]:
            raise ConfigError(f"tau_list[{k}]", "values must be strictly decreasing")
    return taus


def parse_classify(value):
    if not isinstance(value, dict):
        raise ConfigError('classify', "expected a mapping")
    return {
        'radius': _number(value.get('radius', 1.0), 'classify.radius', positive=True),
        'center': _vector(value.get('center', [0.0, 0.0]), 'classify.center'),
        'points': _integer(value.get('points', 360), 'classify.points', minimum=1),
    }


def parse_config(data):
    """
    Validate a configuration mapping and build a RunConfig.

    Args:
        data (dict): Mapping as read from the YAML file

    Returns:
        RunConfig: Validated configuration

    Raises:
        ConfigError: With the dotted path of the first offending field
    """
    if not isinstance(data, dict):
        raise ConfigError('<root>', "configuration must be a mapping")
    known = set(RunConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown field")
    defaults = RunConfig(initial={})
    get = lambda key: data.get(key, getattr(defaults, key))
    return RunConfig(
        initial=_parse_initial(data.get('initial')),
        glide=_parse_glide(get('glide')),
        angular_tolerance=_number(get('angular_tolerance'), 'angular_tolerance', positive=True),
        energy=_parse_energy(get('energy')),
        tau_list=_parse_tau_list(get('tau_list')),
        h=_number(get('h'), 'h', positive=True),
        T=_number(get('T'), 'T', positive=True),
        mode=_choice(get('mode'), 'mode', MODES),
        seed=_integer(get('seed'), 'seed'),
        output_dir=str(get('output_dir')),
        reference=_choice(get('reference'), 'reference', REFERENCES),
        quadrature_points=_integer(get('quadrature_points'), 'quadrature_points', minimum=1),
        edi_tolerance=_number(get('edi_tolerance'), 'edi_tolerance', positive=True),
        sample_count=_integer(get('sample_count'), 'sample_count', minimum=2),
        workers=_integer(get('workers'), 'workers', minimum=1),
        classify=parse_classify(get('classify')),
    )


def load_config(config_file):
    """
    Load and validate a YAML run configuration.

    Args:
        config_file (str): Path to the YAML file

    Returns:
        RunConfig: Validated configuration
    """
    config_file = os.path.expanduser(config_file)
    try:
        with open(config_file, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError('<root>', f"cannot parse {config_file}: {e}")
    except OSError as e:
        raise OSError(f"Error reading config file {config_file}: {e}") from e
    if data is None:
        raise ConfigError('<root>', f"empty configuration file: {config_file}")
    return parse_config(data)


def write_config(config, config_file):
    with open(os.path.expanduser(config_file), 'w') as f:
        yaml.safe_dump(config.to_dict(), f, sort_keys=False)
    return config_file


def config_hash(config):
    """sha256 of the canonical JSON form of the configuration"""
    payload = json.dumps(config.to_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()
