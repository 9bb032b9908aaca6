import numpy as np
import pytest

from screw_glide.energy.fields import ExampleField
from screw_glide.energy.models import QuadraticWell, ScrewEnergy, ScrewEnergyParams
from screw_glide.geometry.glide_system import build_glide_system


@pytest.fixture
def square():
    return build_glide_system('square')


@pytest.fixture
def hexagonal():
    return build_glide_system('hexagonal')


@pytest.fixture
def cubic():
    return build_glide_system('cubic')


@pytest.fixture
def well():
    return QuadraticWell((0.0, 0.0))


@pytest.fixture
def screw():
    return ScrewEnergy(ScrewEnergyParams())


@pytest.fixture
def field():
    return ExampleField()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
