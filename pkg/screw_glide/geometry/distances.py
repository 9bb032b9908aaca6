import math

import numpy as np

from screw_glide.errors import ShapeMismatch
from screw_glide.geometry.glide_system import crystalline_norm

RAY_TOLERANCE = 1e-10
_EPS = np.finfo(float).eps


def as_positions(X):
    """Positions array (n, d) from a Configuration or an array-like"""
    positions = getattr(X, 'positions', X)
    return np.atleast_2d(np.asarray(positions, dtype=float))


def is_glide_aligned(sys, x, y):
    """
    True if x - y is a real multiple of a glide direction.

    Parallelism is decided by angular distance below 1e-10, widened by a few
    ulps of the operand magnitudes so that (z + a g) - z still counts as
    aligned when a is small.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    delta = x - y
    length = float(np.linalg.norm(delta))
    if length == 0.0:
        return True
    floor = 8 * _EPS * max(float(np.linalg.norm(x)), float(np.linalg.norm(y))) / length
    gap = np.min(np.linalg.norm(sys.directions - delta / length, axis=1))
    return gap < RAY_TOLERANCE + floor


def quasi_distance_d(sys, x, y):
    """|x - y| along a glide direction, +inf otherwise"""
    if not is_glide_aligned(sys, x, y):
        return math.inf
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def metric_dhat(sys, x, y):
    """Crystalline-norm distance ||x - y||"""
    return crystalline_norm(sys, np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


def _check_shapes(X, Y):
    if X.shape != Y.shape:
        raise ShapeMismatch(f"configurations have shapes {X.shape} and {Y.shape}")


def quasi_distance_D(sys, X, Y):
    """Quasi-distance between configurations: sqrt of the sum of squared d"""
    X, Y = as_positions(X), as_positions(Y)
    _check_shapes(X, Y)
    total = 0.0
    for x, y in zip(X, Y):
        d = quasi_distance_d(sys, x, y)
        if math.isinf(d):
            return math.inf
        total += d * d
    return math.sqrt(total)


def metric_Dhat(sys, X, Y):
    """Product metric built from the crystalline norm"""
    X, Y = as_positions(X), as_positions(Y)
    _check_shapes(X, Y)
    return math.sqrt(sum(metric_dhat(sys, x, y) ** 2 for x, y in zip(X, Y)))
