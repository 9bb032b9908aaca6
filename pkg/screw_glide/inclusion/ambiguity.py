import logging
import math
from enum import Enum

import numpy as np

from screw_glide.energy.configuration import Configuration
from screw_glide.errors import NotOnAmbiguitySet
from screw_glide.geometry.glide_system import build_glide_system, dual_norm
from screw_glide.inclusion.integrator import switching_rates

logger = logging.getLogger(__name__)

AMBIGUITY_TOLERANCE = 1e-8


class AmbiguityKind(str, Enum):
    SOURCE = 'source'
    CROSS_SLIP = 'cross_slip'
    FINE_CROSS_SLIP = 'fine_cross_slip'


def classify_ambiguity(field, x, h=1e-6, sys=None, tolerance=AMBIGUITY_TOLERANCE):
    """
    Classify a point of the ambiguity set of a force field.

    Both pure velocities pushing the state onto the switching surface give
    fine cross-slip, both pushing away give a source, anything else is a
    cross-slip.

    Args:
        field (ForceProvider): Force field evaluated at a single particle
        x (array-like): Point on the ambiguity set
        h (float): Finite-difference probe
        sys (GlideSystem, optional): Glide directions, square system by default
        tolerance (float): Relative tie tolerance on sigma

    Returns:
        AmbiguityKind

    Raises:
        NotOnAmbiguitySet: If the two best directions are not tied at x
    """
    sys = sys or build_glide_system('square')
    Z = Configuration([np.asarray(x, dtype=float)])
    xi = field.forces(Z)[0]
    dots = sys.directions @ xi
    p, q = sorted(int(k) for k in np.argsort(-dots, kind='stable')[:2])
    sigma, a_p, a_q = switching_rates(sys, field, Z, 0, p, q, h)
    if abs(sigma) >= tolerance * max(dual_norm(sys, xi), 1e-300):
        raise NotOnAmbiguitySet(f"|sigma|={abs(sigma):g} at {list(Z.positions[0])}")
    if a_p < 0 < a_q:
        return AmbiguityKind.FINE_CROSS_SLIP
    if a_p > 0 > a_q:
        return AmbiguityKind.SOURCE
    return AmbiguityKind.CROSS_SLIP


def scan_circle(field, sys=None, center=(0.0, 0.0), radius=1.0, points=360, h=1e-6):
    """Classify equispaced points of a circular ambiguity set; returns (angle, point, kind) rows"""
    rows = []
    c = np.asarray(center, dtype=float)
    for k in range(points):
        angle = 2 * math.pi * k / points
        x = c + radius * np.array([math.cos(angle), math.sin(angle)])
        rows.append((angle, x, classify_ambiguity(field, x, h, sys)))
    counts = {kind.value: sum(1 for *_, r in rows if r is kind) for kind in AmbiguityKind}
    logger.info("Circle scan: %s", counts)
    return rows
