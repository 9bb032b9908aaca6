import numpy as np


def fd_gradient(model, Z, h=1e-5):
    """
    Central-difference gradient of an energy model.

    Args:
        model (EnergyModel): Energy to differentiate
        Z (Configuration): Evaluation point
        h (float): Probe size

    Returns:
        numpy.ndarray: Gradient estimate of shape (n, d)
    """
    if not h > 0:
        raise ValueError("probe size h must be positive")
    base = Z.positions
    grad = np.zeros_like(base)
    for index in np.ndindex(base.shape):
        step = np.zeros_like(base)
        step[index] = h
        upper = model.value(Z.with_positions(base + step))
        lower = model.value(Z.with_positions(base - step))
        grad[index] = (upper - lower) / (2 * h)
    return grad


def gradient_audit(model, configurations, h=1e-5):
    """Largest relative error between analytic and finite-difference gradients"""
    worst = 0.0
    for Z in configurations:
        analytic = model.gradient(Z)
        numeric = fd_gradient(model, Z, h)
        scale = max(1.0, float(np.linalg.norm(analytic)))
        worst = max(worst, float(np.linalg.norm(analytic - numeric)) / scale)
    return worst
