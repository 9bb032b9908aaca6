"""
Energy landscapes and the common force-provider interface.

Every provider exposes ``forces(Z)``; energies additionally provide
``value`` and ``gradient`` and their forces are -gradient.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass

import numpy as np

from screw_glide.errors import ValidationError

logger = logging.getLogger(__name__)

LIPSCHITZ_SAMPLES = 10_000
LIPSCHITZ_SAFETY = 1.5


class ForceProvider(ABC):
    name = 'force'
    conservative = False

    def __init__(self, lipschitz=None, sample_margin=1.0):
        self.lipschitz = lipschitz
        self.sample_margin = sample_margin
        self._lipschitz_cache = {}

    @abstractmethod
    def forces(self, Z):
        """Force on every particle as an (n, d) array"""

    def near_singular(self, Z):
        return False

    def params(self):
        return {}

    def describe(self):
        return {'name': self.name, 'params': self.params()}

    def lipschitz_bound(self, reference, seed=0, samples=LIPSCHITZ_SAMPLES):
        """
        Upper bound L on the force magnitude near a reference configuration.

        Returns the supplied constant when one was given; otherwise 1.5 times
        the largest |force| over uniform samples in a box of half-width
        ``sample_margin`` around the reference positions.

        Args:
            reference (Configuration): Configuration the box is centred on
            seed (int): RNG seed for the samples
            samples (int): Number of sampled configurations

        Returns:
            float: The bound L
        """
        if self.lipschitz is not None:
            return float(self.lipschitz)
        key = (reference.positions.tobytes(), reference.burgers.tobytes(), seed, samples)
        if key not in self._lipschitz_cache:
            rng = np.random.default_rng(seed)
            offsets = rng.uniform(-self.sample_margin, self.sample_margin,
                                  size=(samples,) + reference.positions.shape)
            largest = float(np.linalg.norm(self.forces(reference)))
            for offset in offsets:
                sample = reference.with_positions(reference.positions + offset)
                largest = max(largest, float(np.linalg.norm(self.forces(sample))))
            self._lipschitz_cache[key] = LIPSCHITZ_SAFETY * largest
            logger.debug("Estimated Lipschitz bound %g for %s", self._lipschitz_cache[key], self.name)
        return self._lipschitz_cache[key]


class EnergyModel(ForceProvider):
    name = 'energy'
    conservative = True

    @abstractmethod
    def value(self, Z):
        """Energy of configuration Z"""

    @abstractmethod
    def gradient(self, Z):
        """Gradient with respect to every position, shape (n, d)"""

    def forces(self, Z):
        return -self.gradient(Z)


@dataclass(frozen=True)
class ScrewEnergyParams:
    epsilon: float = 0.05
    confinement_center: tuple = (0.0, 0.0)
    confinement_radius: float = 1.0
    confinement_stiffness: float = 10.0
    domain_radius: float = math.inf

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if not self.confinement_radius > 0:
            raise ValidationError("confinement_radius must be positive")
        if self.confinement_stiffness < 0:
            raise ValidationError("confinement_stiffness must be nonnegative")
        object.__setattr__(self, 'confinement_center', tuple(float(c) for c in self.confinement_center))


def _confinement(params, positions):
    offsets = positions - np.asarray(params.confinement_center)
    dist = np.linalg.norm(offsets, axis=1)
    excess = np.clip(dist - params.confinement_radius, 0.0, None)
    return offsets, dist, excess


def screw_energy(params, Z):
    """
    Regularised screw-dislocation energy.

    Sum over ordered pairs i != j of -b_i b_j * 1/2 log(|z_i - z_j|^2 + eps^2)
    plus the quadratic hinge confinement kappa * sum max(0, |z_i - c| - R)^2.
    Each unordered pair is counted twice.
    """
    pos, b = Z.positions, Z.burgers
    diff = pos[:, None, :] - pos[None, :, :]
    r2 = np.sum(diff ** 2, axis=-1)
    weights = -np.outer(b, b).astype(float)
    np.fill_diagonal(weights, 0.0)
    interaction = np.sum(weights * 0.5 * np.log(r2 + params.epsilon ** 2))
    _, _, excess = _confinement(params, pos)
    return float(interaction + params.confinement_stiffness * np.sum(excess ** 2))


def screw_gradient(params, Z):
    pos, b = Z.positions, Z.burgers
    diff = pos[:, None, :] - pos[None, :, :]
    r2 = np.sum(diff ** 2, axis=-1)
    weights = -np.outer(b, b).astype(float)
    np.fill_diagonal(weights, 0.0)
    grad = np.sum((2.0 * weights / (r2 + params.epsilon ** 2))[:, :, None] * diff, axis=1)
    offsets, dist, excess = _confinement(params, pos)
    outside = excess > 0
    grad[outside] += (2.0 * params.confinement_stiffness * excess[outside] / dist[outside])[:, None] * offsets[outside]
    return grad


def dist_to_singular_set(Z, domain_radius, center):
    """
    Distance-like margin to the singular set.

    Minimum of the distance of each defect to the circular domain boundary
    (negative outside the domain) and half the smallest pairwise separation.
    """
    pos = getattr(Z, 'positions', Z)
    pos = np.atleast_2d(np.asarray(pos, dtype=float))
    margin = float(np.min(domain_radius - np.linalg.norm(pos - np.asarray(center, dtype=float), axis=1)))
    if len(pos) > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        margin = min(margin, 0.5 * float(dist.min()))
    return margin


class ScrewEnergy(EnergyModel):
    name = 'screw'

    def __init__(self, params=None, lipschitz=None, sample_margin=1.0):
        super().__init__(lipschitz, sample_margin)
        self.p = params or ScrewEnergyParams()

    def value(self, Z):
        return screw_energy(self.p, Z)

    def gradient(self, Z):
        return screw_gradient(self.p, Z)

    def near_singular(self, Z):
        return dist_to_singular_set(Z, self.p.domain_radius, self.p.confinement_center) < self.p.epsilon

    def lower_bound(self, n):
        """Interaction bound valid while every defect stays in the confinement ball"""
        eps, radius = self.p.epsilon, self.p.confinement_radius
        per_pair = max(0.0, -math.log(eps), 0.5 * math.log(4 * radius ** 2 + eps ** 2))
        return -n * (n - 1) * per_pair

    def params(self):
        params = asdict(self.p)
        params['confinement_center'] = list(self.p.confinement_center)
        return params


class QuadraticWell(EnergyModel):
    name = 'quadratic_well'

    def __init__(self, center=(0.0, 0.0), lipschitz=None, sample_margin=1.0):
        super().__init__(lipschitz, sample_margin)
        self.center = np.asarray(center, dtype=float)

    def value(self, Z):
        return float(0.5 * np.sum((Z.positions - self.center) ** 2))

    def gradient(self, Z):
        return Z.positions - self.center

    def params(self):
        return {'center': self.center.tolist()}


def quadratic_well(center):
    return QuadraticWell(center)


class SaddleEnergy(EnergyModel):
    """E(z) = 1/2 (x^2 - y^2) + 1/4 y^4 per particle: saddle at the origin, bounded below"""
    name = 'saddle'

    def value(self, Z):
        x, y = Z.positions[:, 0], Z.positions[:, 1]
        return float(np.sum(0.5 * (x ** 2 - y ** 2) + 0.25 * y ** 4))

    def gradient(self, Z):
        x, y = Z.positions[:, 0], Z.positions[:, 1]
        return np.column_stack([x, -y + y ** 3])


class ConstantEnergy(EnergyModel):
    name = 'constant'

    def __init__(self, level=0.0, lipschitz=None, sample_margin=1.0):
        super().__init__(lipschitz, sample_margin)
        self.level = float(level)

    def value(self, Z):
        return self.level

    def gradient(self, Z):
        return np.zeros_like(Z.positions)

    def params(self):
        return {'level': self.level}
