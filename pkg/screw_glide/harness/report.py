import csv
import json
import logging
import math
import os

from humanize import naturalsize  # type: ignore

from screw_glide import __version__
from screw_glide.harness.config import config_hash

logger = logging.getLogger(__name__)


def _coords_header(dimension):
    return [f"x{k + 1}" for k in range(dimension)]


def mms_rows(run, model):
    """
    Per-step rows of a minimising-movement run.

    Row k describes Z^k together with the step that produced it; the initial
    configuration has an empty direction and zero amplitude.
    """
    header = ['k', 't', 'particle'] + _coords_header(run.initial.dimension) + ['direction', 'alpha', 'energy', 'kinetic']
    rows = []
    for k, Z in enumerate(run.configurations):
        energy = model.value(Z)
        step = run.steps[k - 1] if k > 0 else None
        for i, z in enumerate(Z.positions):
            rows.append([k, k * run.tau, i] + list(z) + [
                step.directions[i] if step else '',
                step.amplitudes[i] if step else 0.0,
                energy,
                step.kinetic if step else 0.0,
            ])
    return header, rows


def inclusion_rows(traj):
    header = ['t', 'particle'] + _coords_header(traj.states[0].dimension) + ['regime', 'active_directions', 'theta']
    rows = []
    for t, Z, regimes in zip(traj.times, traj.states, traj.regimes):
        for i, (z, regime) in enumerate(zip(Z.positions, regimes)):
            active = ';'.join(str(k) for k in regime.active_directions)
            rows.append([t, i] + list(z) + [regime.kind.value, active, regime.theta])
    return header, rows


def classify_rows(scan):
    header = ['angle', 'x1', 'x2', 'kind']
    return header, [[angle, x[0], x[1], kind.value] for angle, x, kind in scan]


def _cell(value):
    if isinstance(value, float):
        return repr(float(value)) if math.isfinite(value) else str(float(value))
    return str(value)


def _report_written(path):
    logger.info("Wrote %s (%s)", path, naturalsize(os.path.getsize(path)))
    return path


def write_csv(path, header, rows):
    """
    Write rows with a header; floats use repr so identical runs give identical bytes.

    Args:
        path (str): Output file
        header (list): Column names
        rows (list): Row values

    Returns:
        str: The path written
    """
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
    except OSError as e:
        raise OSError(f"Error writing {path}: {e}") from e
    return _report_written(path)


def write_json(path, payload, config=None):
    """Write a JSON report stamped with the tool version and, when given, the config hash"""
    document = {'version': __version__}
    if config is not None:
        document['config_hash'] = config_hash(config)
        document['config'] = config.to_dict()
    document.update(payload)
    try:
        with open(path, 'w') as f:
            json.dump(document, f, indent=2, sort_keys=True, default=_json_default)
            f.write('\n')
    except OSError as e:
        raise OSError(f"Error writing {path}: {e}") from e
    return _report_written(path)


def _json_default(value):
    if hasattr(value, 'tolist'):
        return value.tolist()
    if hasattr(value, 'value'):
        return value.value
    raise TypeError(f"cannot serialise {type(value).__name__}")
