import math

import numpy as np
import pytest

from screw_glide.energy.configuration import Configuration
from screw_glide.energy.fields import ExampleField, SaddleField, example_field, saddle_field
from screw_glide.energy.gradient_check import fd_gradient, gradient_audit
from screw_glide.energy.models import (
    ConstantEnergy,
    QuadraticWell,
    SaddleEnergy,
    ScrewEnergy,
    ScrewEnergyParams,
    dist_to_singular_set,
    quadratic_well,
    screw_energy,
    screw_gradient,
)
from screw_glide.errors import ValidationError


def test_configuration_defaults_to_positive_burgers():
    Z = Configuration([[0.0, 0.0], [1.0, 0.0]])
    assert Z.n == 2
    assert Z.dimension == 2
    assert Z.burgers.tolist() == [1, 1]


@pytest.mark.parametrize('positions, burgers', [
    ([[0.0, 0.0]], [0]),
    ([[0.0, 0.0]], [1, -1]),
    ([[0.0, math.nan]], None),
    ([], None),
    ([[]], None),
])
def test_configuration_rejects_invalid_input(positions, burgers):
    with pytest.raises(ValidationError):
        Configuration(positions, burgers)


def test_configuration_translation():
    Z = Configuration([[0.0, 0.0], [1.0, 2.0]], [1, -1])
    moved = Z.translated((1.0, -1.0))
    np.testing.assert_allclose(moved.positions, [[1.0, -1.0], [2.0, 1.0]])
    assert moved.burgers.tolist() == [1, -1]
    assert Z.to_dict() == {'positions': [[0.0, 0.0], [1.0, 2.0]], 'burgers': [1, -1]}


def test_screw_params_validation():
    with pytest.raises(ValidationError):
        ScrewEnergyParams(epsilon=0.0)
    with pytest.raises(ValidationError):
        ScrewEnergyParams(confinement_radius=-1.0)


def test_single_defect_inside_confinement_has_zero_energy():
    params = ScrewEnergyParams(confinement_stiffness=50.0)
    assert screw_energy(params, Configuration([[0.3, -0.2]])) == 0.0


def test_unit_separation_like_pair_has_vanishing_interaction():
    params = ScrewEnergyParams(epsilon=1e-8)
    Z = Configuration([[-0.5, 0.0], [0.5, 0.0]])
    assert screw_energy(params, Z) == pytest.approx(0.0, abs=1e-12)


def test_opposite_signs_attract_and_like_signs_repel():
    params = ScrewEnergyParams(epsilon=0.05)

    def pair_energy(r, burgers):
        return screw_energy(params, Configuration([[-r / 2, 0.0], [r / 2, 0.0]], burgers))

    radii = [0.1, 0.3, 0.6, 1.0]
    like = [pair_energy(r, [1, 1]) for r in radii]
    opposite = [pair_energy(r, [1, -1]) for r in radii]
    assert all(a > b for a, b in zip(like, like[1:]))
    assert all(a < b for a, b in zip(opposite, opposite[1:]))
    assert opposite[1] == pytest.approx(math.log(0.3 ** 2 + 0.05 ** 2))


def test_repulsive_force_pushes_apart():
    params = ScrewEnergyParams(epsilon=1.0)
    Z = Configuration([[0.0, 0.0], [1.0, 0.0]], [1, 1])
    grad = screw_gradient(params, Z)
    np.testing.assert_allclose(grad[0], [1.0, 0.0])
    np.testing.assert_allclose(-grad[0], [-1.0, 0.0])
    np.testing.assert_allclose(grad[1], [-1.0, 0.0])


def test_symmetric_pair_gradients_are_antisymmetric(screw):
    c = 0.2
    Z = Configuration([[c, c], [-c, -c]])
    grad = screw.gradient(Z)
    np.testing.assert_allclose(grad[0], -grad[1], atol=1e-14)


def test_confinement_pulls_escaped_defect_back():
    params = ScrewEnergyParams(confinement_radius=1.0, confinement_stiffness=10.0)
    grad = screw_gradient(params, Configuration([[1.5, 0.0]]))
    np.testing.assert_allclose(grad[0], [10.0, 0.0])
    assert screw_energy(params, Configuration([[1.5, 0.0]])) == pytest.approx(2.5)


def random_configurations(rng, count, n, spread=0.8):
    burgers = rng.choice([-1, 1], size=n)
    return [Configuration(rng.uniform(-spread, spread, size=(n, 2)), burgers) for _ in range(count)]


@pytest.mark.parametrize('model', [
    ScrewEnergy(ScrewEnergyParams(epsilon=0.1)),
    QuadraticWell((0.3, -0.2)),
    SaddleEnergy(),
    ConstantEnergy(2.0),
], ids=lambda model: model.name)
def test_gradient_audit(model, rng):
    configurations = random_configurations(rng, 50, 3, spread=1.2)
    assert gradient_audit(model, configurations) <= 1e-6


def test_fd_gradient_exact_on_quadratic(well, rng):
    Z = Configuration(rng.normal(size=(4, 2)))
    np.testing.assert_allclose(fd_gradient(well, Z), well.gradient(Z), atol=1e-8)


def test_fd_gradient_of_constant_is_zero():
    Z = Configuration([[0.1, 0.2], [-0.4, 0.7]])
    assert not np.any(fd_gradient(ConstantEnergy(1.5), Z))


def test_fd_gradient_rejects_bad_probe(well):
    with pytest.raises(ValueError):
        fd_gradient(well, Configuration([[0.0, 0.0]]), h=0.0)


def test_well_gradient_vanishes_at_center():
    well = quadratic_well((0.5, -0.5))
    assert isinstance(well, QuadraticWell)
    assert not np.any(well.gradient(Configuration([[0.5, -0.5]])))
    np.testing.assert_allclose(well.forces(Configuration([[1.5, -0.5]])), [[-1.0, 0.0]])


def test_dist_to_singular_set():
    assert dist_to_singular_set(Configuration([[0.0, 0.0]]), 2.0, (0.0, 0.0)) == pytest.approx(2.0)
    assert dist_to_singular_set(Configuration([[1.0, 0.0], [-1.0, 0.0]]), 100.0, (0.0, 0.0)) == pytest.approx(1.0)
    assert dist_to_singular_set(Configuration([[0.0, 1.0]]), 1.0, (0.0, 0.0)) == pytest.approx(0.0, abs=1e-15)
    assert dist_to_singular_set(Configuration([[0.0, 2.0]]), 1.0, (0.0, 0.0)) < 0


def test_near_singular_uses_epsilon():
    model = ScrewEnergy(ScrewEnergyParams(epsilon=0.1, domain_radius=5.0))
    assert model.near_singular(Configuration([[0.0, 0.0], [0.15, 0.0]], [1, -1]))
    assert not model.near_singular(Configuration([[0.0, 0.0], [0.5, 0.0]], [1, -1]))


def test_energy_bounded_below_inside_confinement(rng):
    model = ScrewEnergy(ScrewEnergyParams(epsilon=0.05, confinement_radius=1.0))
    bound = model.lower_bound(4)
    for _ in range(500):
        radius = np.sqrt(rng.uniform(0, 1, size=4))
        angle = rng.uniform(0, 2 * math.pi, size=4)
        positions = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        Z = Configuration(positions, rng.choice([-1, 1], size=4))
        assert model.value(Z) >= bound


def test_interaction_is_translation_invariant_without_confinement(rng):
    params = ScrewEnergyParams(epsilon=0.05, confinement_stiffness=0.0)
    for Z in random_configurations(rng, 20, 3):
        shift = rng.normal(size=2) * 5
        assert screw_energy(params, Z.translated(shift)) == pytest.approx(screw_energy(params, Z), abs=1e-10)


def test_lipschitz_bound_supplied_and_estimated():
    assert QuadraticWell(lipschitz=3.0).lipschitz_bound(Configuration([[5.0, 5.0]])) == 3.0

    well = QuadraticWell()
    reference = Configuration([[0.0, 0.0]])
    bound = well.lipschitz_bound(reference, seed=1, samples=500)
    assert 0.0 < bound <= 1.5 * math.sqrt(2.0)
    assert well.lipschitz_bound(reference, seed=1, samples=500) == bound


def test_describe_reports_parameters(screw):
    description = screw.describe()
    assert description['name'] == 'screw'
    assert description['params']['epsilon'] == 0.05
    assert description['params']['confinement_center'] == [0.0, 0.0]


def test_example_field(field):
    for angle in np.linspace(0, 2 * math.pi, 13):
        F = field.force((math.cos(angle), math.sin(angle)))
        assert F[0] == pytest.approx(2.0)
        assert F[1] == pytest.approx(2.0)
    np.testing.assert_allclose(example_field((0.0, 0.0)), [1.0, 2.0])
    assert field.switching((0.0, 0.0)) == 1.0
    assert field.switching((2.0, 0.0)) == -3.0


def test_fields_act_per_particle():
    Z = Configuration([[0.0, 0.0], [1.0, 1.0]])
    np.testing.assert_allclose(ExampleField().forces(Z), [[1.0, 2.0], [3.0, 2.0]])
    np.testing.assert_allclose(SaddleField().forces(Z), [[0.0, 0.0], [1.0, -1.0]])
    np.testing.assert_allclose(saddle_field((2.0, 3.0)), [2.0, -3.0])
