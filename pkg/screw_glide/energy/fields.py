from abc import abstractmethod

import numpy as np

from screw_glide.energy.models import ForceProvider


class ForceField(ForceProvider):
    """Continuous force field acting on each particle independently; not necessarily a gradient"""
    name = 'field'

    @abstractmethod
    def force(self, x):
        """Force at a single point"""

    def forces(self, Z):
        return np.array([self.force(z) for z in Z.positions])


class ExampleField(ForceField):
    """
    F(x) = (1 + |x|^2, 2).

    F . e1 = F . e2 on the unit circle, F . e2 > F . e1 inside it.
    """
    name = 'example'

    def force(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([1.0 + float(x @ x), 2.0])

    def switching(self, x):
        """F . e2 - F . e1 = 1 - |x|^2"""
        x = np.asarray(x, dtype=float)
        return 1.0 - float(x @ x)


class SaddleField(ForceField):
    name = 'saddle_field'

    def force(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([x[0], -x[1]])


def example_field(x):
    return ExampleField().force(x)


def saddle_field(x):
    return SaddleField().force(x)
