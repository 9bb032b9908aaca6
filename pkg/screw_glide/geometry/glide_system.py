import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linprog, nnls

from screw_glide.errors import DuplicateDirection, SpanDeficient, ValidationError, ZeroForce

logger = logging.getLogger(__name__)

DEFAULT_ANGULAR_TOLERANCE = 1e-9
DUPLICATE_TOLERANCE = 1e-10

PRESETS = {
    'square': [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)],
    'hexagonal': [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)],
    'cubic': [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0),
              (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, -1.0)],
}


class VelocityKind(str, Enum):
    SINGLETON = 'singleton'
    SEGMENT = 'segment'
    POLYTOPE = 'polytope'


@dataclass(frozen=True, eq=False)
class VelocitySet:
    """
    Convex set of admissible velocities, stored by its extreme points.

    The represented set is the convex hull of ``vertices``; every vertex has
    the form (g . xi) g for a maximizing glide direction g.
    """
    vertices: np.ndarray
    kind: VelocityKind

    def contains(self, v, tol=1e-10):
        """
        Check whether v lies in the convex hull of the vertices.

        Args:
            v (array-like): Candidate velocity
            tol (float): Absolute residual tolerance (scaled by max(1, |v|))

        Returns:
            bool: True if v is a convex combination of the vertices
        """
        v = np.asarray(v, dtype=float)
        k = self.vertices.shape[0]
        lhs = np.vstack([self.vertices.T, np.ones((1, k))])
        rhs = np.append(v, 1.0)
        _, residual = nnls(lhs, rhs)
        return residual <= tol * max(1.0, float(np.linalg.norm(v)))


@dataclass(frozen=True, eq=False)
class GlideSystem:
    """
    Validated, negation-closed set of unit glide directions.

    Immutable after construction; use build_glide_system() to create one.
    In 2-D the directions are sorted counter-clockwise and ``bisectors[i]``
    lies between ``directions[i]`` and ``directions[i + 1]``.
    """
    dimension: int
    directions: np.ndarray
    angular_tolerance: float = DEFAULT_ANGULAR_TOLERANCE
    bisectors: np.ndarray = None
    pair_index: np.ndarray = field(default=None, repr=False)
    pair_inverse: np.ndarray = field(default=None, repr=False)

    @property
    def size(self):
        return self.directions.shape[0]

    def cone_bisectors(self, k):
        """Return the two bisectors spanning the 2-D cone around direction k"""
        if self.dimension != 2:
            raise ValidationError("cone bisectors are only defined in 2-D")
        return self.bisectors[k - 1], self.bisectors[k]

    def in_cone(self, k, x):
        """Strict membership of x in the open cone around direction k"""
        x = np.asarray(x, dtype=float)
        if self.dimension == 2:
            left, right = self.cone_bisectors(k)
            coeffs = np.linalg.solve(np.column_stack([left, right]), x)
            return bool(np.all(coeffs > 0))
        dots = self.directions @ x
        others = np.delete(dots, k)
        return bool(dots[k] > others.max())

    def to_dict(self):
        return {
            'dimension': self.dimension,
            'directions': self.directions.tolist(),
            'angular_tolerance': self.angular_tolerance,
        }


def preset_directions(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"Unknown glide preset '{name}' (choose from {', '.join(sorted(PRESETS))})")


def build_glide_system(directions, dimension=None, angular_tolerance=DEFAULT_ANGULAR_TOLERANCE):
    """
    Validate and normalise a list of glide directions.

    Missing negations are added (with a warning), 2-D systems are sorted
    counter-clockwise and their bisectors and pair inverses precomputed.

    Args:
        directions (list): Nonzero direction vectors, or a preset name
        dimension (int, optional): Space dimension; inferred when omitted
        angular_tolerance (float): Relative band used for maximizer ties

    Returns:
        GlideSystem: The validated system
    """
    if isinstance(directions, str):
        directions = preset_directions(directions)
    arr = np.atleast_2d(np.asarray(directions, dtype=float))
    if arr.size == 0:
        raise ValidationError("glide direction list is empty")
    if dimension is None:
        dimension = arr.shape[1]
    if arr.shape[1] != dimension:
        raise ValidationError(f"directions have dimension {arr.shape[1]}, expected {dimension}")
    if dimension < 2:
        raise ValidationError("glide systems need dimension >= 2")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("glide directions must be finite")

    lengths = np.linalg.norm(arr, axis=1)
    if np.any(lengths == 0):
        raise ValidationError("glide directions must be nonzero")
    unit = arr / lengths[:, None]

    for i in range(len(unit)):
        for j in range(i + 1, len(unit)):
            if np.linalg.norm(unit[i] - unit[j]) < DUPLICATE_TOLERANCE:
                raise DuplicateDirection(f"directions {i} and {j} coincide")

    missing = [-g for g in unit if np.min(np.linalg.norm(unit + g, axis=1)) >= DUPLICATE_TOLERANCE]
    if missing:
        logger.warning("Glide set is not closed under negation; adding %d negated direction(s)", len(missing))
        unit = np.vstack([unit, missing])

    if np.linalg.matrix_rank(unit, tol=1e-10) < dimension:
        raise SpanDeficient(f"glide directions do not span R^{dimension}")

    bisectors = pair_index = pair_inverse = None
    if dimension == 2:
        angles = np.mod(np.arctan2(unit[:, 1], unit[:, 0]), 2 * math.pi)
        angles[angles > 2 * math.pi - 1e-12] = 0.0
        unit = unit[np.argsort(angles, kind='stable')]
        sums = unit + np.roll(unit, -1, axis=0)
        bisectors = sums / np.linalg.norm(sums, axis=1)[:, None]
        pair_index, pair_inverse = _pair_inverses(unit)

    logger.debug("Built glide system with %d directions in R^%d", len(unit), dimension)
    return GlideSystem(
        dimension=dimension,
        directions=unit,
        angular_tolerance=angular_tolerance,
        bisectors=bisectors,
        pair_index=pair_index,
        pair_inverse=pair_inverse,
    )


def _pair_inverses(unit):
    pairs = []
    inverses = []
    for i in range(len(unit)):
        for j in range(i + 1, len(unit)):
            basis = np.column_stack([unit[i], unit[j]])
            if abs(np.linalg.det(basis)) > 1e-12:
                pairs.append((i, j))
                inverses.append(np.linalg.inv(basis))
    return np.array(pairs, dtype=int), np.array(inverses)


def crystalline_norm(sys, x):
    """
    Crystalline norm: least total amplitude of a nonnegative glide combination.

    2-D systems minimise over all direction pairs; higher dimensions solve
    the linear program and polish the value by an exact solve on its support.
    """
    x = np.asarray(x, dtype=float)
    scale = float(np.linalg.norm(x))
    if scale == 0.0:
        return 0.0
    if sys.dimension == 2:
        coeffs = sys.pair_inverse @ x
        feasible = np.all(coeffs >= -1e-12 * scale, axis=1)
        return float(np.min(np.clip(coeffs[feasible], 0.0, None).sum(axis=1)))

    G = sys.directions
    res = linprog(np.ones(sys.size), A_eq=G.T, b_eq=x, bounds=(0, None), method='highs')
    if not res.success:
        raise ValidationError(f"crystalline norm LP failed: {res.message}")
    support = res.x > 1e-9 * scale
    alpha, *_ = np.linalg.lstsq(G[support].T, x, rcond=None)
    if np.all(alpha >= -1e-14) and np.allclose(G[support].T @ alpha, x, rtol=0, atol=1e-13 * scale):
        return float(alpha.sum())
    return float(res.fun)


def dual_norm(sys, x):
    """Dual norm: the largest projection of x onto a glide direction"""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return 0.0
    return float(np.max(sys.directions @ x))


def maximizer_set(sys, xi):
    """
    Indices of the glide directions maximising g . xi.

    Ties are resolved with the relative band ``sys.angular_tolerance``.

    Raises:
        ZeroForce: If xi is the zero vector
    """
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ZeroForce("maximizer set is undefined for a zero force")
    dots = sys.directions @ xi
    top = dots.max()
    return [int(k) for k in np.flatnonzero(dots >= top - sys.angular_tolerance * top)]


def project_glide(sys, xi):
    """
    Multi-valued projection of a force onto the maximizing glide directions.

    Returns:
        VelocitySet: vertices (g . xi) g over the maximizer set
    """
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        return VelocitySet(np.zeros((1, sys.dimension)), VelocityKind.SINGLETON)
    idx = maximizer_set(sys, xi)
    G = sys.directions[idx]
    vertices = (G @ xi)[:, None] * G
    kind = {1: VelocityKind.SINGLETON, 2: VelocityKind.SEGMENT}.get(len(idx), VelocityKind.POLYTOPE)
    return VelocitySet(vertices, kind)


def subdifferential_psi_star(sys, xi):
    """
    Subdifferential of psi*(xi) = 1/2 ||xi||_*^2.

    Equal to the convex hull of the projection vertices; three-way and larger
    ties (possible for d >= 3) return the hull of all maximizer vertices.
    """
    result = project_glide(sys, xi)
    if result.kind is VelocityKind.POLYTOPE:
        logger.debug("psi* subdifferential has %d vertices", len(result.vertices))
    return result
