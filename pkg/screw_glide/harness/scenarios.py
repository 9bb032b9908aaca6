"""Builders turning a RunConfig into glide systems, energies and initial configurations."""
import logging

import numpy as np

from screw_glide.energy.configuration import Configuration
from screw_glide.energy.models import (
    ConstantEnergy,
    QuadraticWell,
    SaddleEnergy,
    ScrewEnergy,
    ScrewEnergyParams,
    quadratic_well,
)
from screw_glide.errors import ConfigError, ValidationError
from screw_glide.geometry.glide_system import build_glide_system
from screw_glide.inclusion.integrator import quadratic_well_sliding_solution

logger = logging.getLogger(__name__)

SCREW_KEYS = ('epsilon', 'confinement_center', 'confinement_radius', 'confinement_stiffness', 'domain_radius')


def _center(params, key, dimension):
    """Pop a center point from params, defaulting to the origin of R^dimension"""
    center = params.pop(key, None)
    if center is None:
        return np.zeros(dimension)
    try:
        center = np.asarray(center, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"energy.params.{key}", f"expected a point, got {center!r}")
    if center.shape != (dimension,):
        raise ConfigError(f"energy.params.{key}", f"expected {dimension} coordinates, got {center.size}")
    return center


def _quadratic_well(params, dimension):
    return quadratic_well(_center(params, 'center', dimension))


def _screw(params, dimension):
    unknown = set(params) - set(SCREW_KEYS)
    if unknown:
        raise ConfigError(f"energy.params.{sorted(unknown)[0]}", "unknown screw energy parameter")
    params['confinement_center'] = _center(params, 'confinement_center', dimension)
    try:
        return ScrewEnergy(ScrewEnergyParams(**params))
    except ValidationError as e:
        raise ConfigError('energy.params', str(e))


def _saddle(params, dimension):
    if dimension != 2:
        raise ConfigError('energy.name', f"the saddle energy is planar; positions have dimension {dimension}")
    return SaddleEnergy()


def _constant(params, dimension):
    return ConstantEnergy(level=params.pop('level', 0.0))


ENERGY_BUILDERS = {
    'quadratic_well': _quadratic_well,
    'screw': _screw,
    'saddle': _saddle,
    'constant': _constant,
}


def build_model(energy, dimension=2):
    """
    Energy model from the ``energy`` section of a configuration.

    ``lipschitz`` and ``sample_margin`` are accepted for every model and
    override the sampled Lipschitz estimate. Centers default to the origin
    of the configuration's space.
    """
    params = dict(energy.get('params') or {})
    lipschitz = params.pop('lipschitz', None)
    sample_margin = params.pop('sample_margin', 1.0)
    model = ENERGY_BUILDERS[energy['name']](params, dimension)
    if params and energy['name'] != 'screw':
        raise ConfigError(f"energy.params.{sorted(params)[0]}", f"unknown parameter for {energy['name']}")
    model.lipschitz = lipschitz
    model.sample_margin = sample_margin
    return model


def build_glide(config):
    try:
        return build_glide_system(config.glide, angular_tolerance=config.angular_tolerance)
    except ValidationError as e:
        raise ConfigError('glide', str(e))


def build_initial(config):
    return Configuration(config.initial['positions'], config.initial['burgers'])


def build_scenario(config):
    """
    Glide system, energy model and initial configuration of a run.

    Raises:
        ConfigError: If the positions and the glide system live in different dimensions
    """
    sys = build_glide(config)
    Z0 = build_initial(config)
    if Z0.dimension != sys.dimension:
        raise ConfigError('initial.positions',
                          f"points have dimension {Z0.dimension} but the glide system lives in R^{sys.dimension}")
    return sys, build_model(config.energy, Z0.dimension), Z0


def closed_form_reference(config, sys, model):
    """Closed-form solution when one is known for the scenario, otherwise None"""
    square = build_glide_system('square')
    if (isinstance(model, QuadraticWell) and sys.dimension == 2 and sys.size == 4
            and abs(sys.directions - square.directions).max() < 1e-12):
        return quadratic_well_sliding_solution(build_initial(config), model.center)
    return None
