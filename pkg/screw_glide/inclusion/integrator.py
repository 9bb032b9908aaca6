"""
Explicit integrator for the glide differential inclusion z_i' in co P_G(f_i(Z)).

Velocities follow the maximal dissipation rule. On a two-way tie the
switching function sigma = (g' - g'') . f decides between Filippov sliding,
a transversal crossing and a source branch.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from screw_glide.errors import StepTooLarge, ValidationError, ZeroForce
from screw_glide.geometry.glide_system import dual_norm, maximizer_set

logger = logging.getLogger(__name__)

EVENT_RESOLUTION = 1e-3
STABILITY_FACTOR = 10.0
PROJECTION_SWEEPS = 3
PROJECTION_BRACKETS = 8


class RegimeKind(str, Enum):
    REST = 'rest'
    SINGLE = 'single'
    SLIDING = 'sliding'
    CROSSING = 'crossing'
    SOURCE_BRANCH = 'source-branch'


class HaltReason(str, Enum):
    COMPLETED = 'completed'
    SINGULAR_PROXIMITY = 'singular-proximity'
    AMBIGUITY_SOURCE = 'ambiguity-source'


@dataclass(frozen=True)
class VelocityRegime:
    kind: RegimeKind
    active_directions: tuple = ()
    theta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValidationError("theta must lie in [0, 1]")

    @property
    def chosen(self):
        """Direction actually followed by a single, crossing or source-branch regime"""
        if self.kind in (RegimeKind.REST, RegimeKind.SLIDING):
            return None
        if self.kind is RegimeKind.CROSSING and self.theta == 0.0:
            return self.active_directions[1]
        return self.active_directions[0]


@dataclass
class Trajectory:
    times: list
    states: list
    regimes: list
    halt_reason: HaltReason = HaltReason.COMPLETED
    event_times: list = field(default_factory=list)
    h: float = None

    @property
    def end_time(self):
        return self.times[-1]

    def at(self, t):
        """Linear interpolation between samples; clamped to the sampled interval"""
        times = self.times
        if t <= times[0]:
            return self.states[0]
        if t >= times[-1]:
            return self.states[-1]
        k = int(np.searchsorted(times, t, side='right')) - 1
        w = (t - times[k]) / (times[k + 1] - times[k])
        a, b = self.states[k].positions, self.states[k + 1].positions
        return self.states[k].with_positions((1 - w) * a + w * b)

    def __call__(self, t):
        return self.at(t)


def _sigma(sys, model, Z, i, p, q):
    base = Z.positions
    diff = sys.directions[p] - sys.directions[q]

    def sigma(z):
        pos = base.copy()
        pos[i] = z
        return float(diff @ model.forces(Z.with_positions(pos))[i])
    return sigma


def _rate(sigma, z, v, h):
    if not np.any(v):
        return 0.0
    return (sigma(z + h * v) - sigma(z - h * v)) / (2 * h)


def _ranked_pair(sys, xi, ties):
    if len(ties) >= 2:
        if len(ties) > 2:
            logger.warning("%d-way maximizer tie reduced to directions %s", len(ties), ties[:2])
        return ties[0], ties[1]
    dots = sys.directions @ xi
    dots[ties[0]] = -np.inf
    return tuple(sorted((ties[0], int(np.argmax(dots)))))


def switching_rates(sys, model, Z, i, p, q, h):
    """
    sigma(z_i) and its derivatives along the pure velocities of directions p and q.

    Returns:
        tuple: (sigma, a_p, a_q)
    """
    xi = model.forces(Z)[i]
    G = sys.directions
    sigma = _sigma(sys, model, Z, i, p, q)
    z = Z.positions[i]
    v_p, v_q = (G[p] @ xi) * G[p], (G[q] @ xi) * G[q]
    return sigma(z), _rate(sigma, z, v_p, h), _rate(sigma, z, v_q, h)


def select_velocity(sys, model, Z, i, h):
    """
    Velocity of particle i under the maximal dissipation rule.

    Args:
        sys (GlideSystem): Glide directions
        model (ForceProvider): Energy or force field
        Z (Configuration): Current configuration
        i (int): Particle index
        h (float): Step size, also the finite-difference probe

    Returns:
        tuple: (velocity vector, VelocityRegime)
    """
    if not h > 0:
        raise ValidationError("step h must be positive")
    xi = model.forces(Z)[i]
    norm = dual_norm(sys, xi)
    if norm == 0.0:
        return np.zeros(sys.dimension), VelocityRegime(RegimeKind.REST)

    G = sys.directions
    ties = maximizer_set(sys, xi)
    if len(ties) == 1:
        return (G[ties[0]] @ xi) * G[ties[0]], VelocityRegime(RegimeKind.SINGLE, (ties[0],))

    p, q = _ranked_pair(sys, xi, ties)
    v_p, v_q = (G[p] @ xi) * G[p], (G[q] @ xi) * G[q]
    _, a_p, a_q = switching_rates(sys, model, Z, i, p, q, h)
    if a_p < 0 < a_q:
        theta = min(1.0, max(0.0, a_q / (a_q - a_p)))
        return theta * v_p + (1 - theta) * v_q, VelocityRegime(RegimeKind.SLIDING, (p, q), theta)
    if a_p > 0 > a_q:
        logger.warning("particle %d sits on a source point; following direction %d", i, p)
        return v_p, VelocityRegime(RegimeKind.SOURCE_BRANCH, (p, q), 1.0)
    # transversal: follow the side the state is entering
    if a_p + a_q < 0:
        return v_q, VelocityRegime(RegimeKind.CROSSING, (p, q), 0.0)
    return v_p, VelocityRegime(RegimeKind.CROSSING, (p, q), 1.0)


def _switching_line_target(sys, model, Z, i, h):
    """
    Point on sigma = 0 for a particle within one step of an attracting switching line.

    The particle moves along v_q - v_p, the direction in which sigma grows
    at rate a_q - a_p, so the correction never raises the energy to first
    order. Returns None when no correction applies.
    """
    xi = model.forces(Z)[i]
    if dual_norm(sys, xi) == 0.0:
        return None
    ties = maximizer_set(sys, xi)
    if len(ties) >= 2:
        return None
    p, q = _ranked_pair(sys, xi, ties)
    sigma, a_p, a_q = switching_rates(sys, model, Z, i, p, q, h)
    a_cur = a_p if ties[0] == p else a_q
    if not (a_p < 0 < a_q and sigma * a_cur < 0 and abs(sigma) <= abs(a_cur) * h):
        return None

    G = sys.directions
    d = (G[q] @ xi) * G[q] - (G[p] @ xi) * G[p]
    line = _sigma(sys, model, Z, i, p, q)
    z = Z.positions[i]

    def along(s):
        return line(z + s * d)

    reach = -2.0 * sigma / (a_q - a_p)
    for _ in range(PROJECTION_BRACKETS):
        if along(reach) * sigma < 0:
            break
        reach *= 2.0
    else:
        logger.debug("no sign change of sigma near particle %d; leaving it off the switching line", i)
        return None
    lo, hi = sorted((0.0, reach))
    return z + brentq(along, lo, hi, xtol=1e-18) * d


def project_onto_switching_lines(sys, model, Z, h):
    """
    Move particles that are about to slide onto their switching lines.

    All particles are corrected simultaneously from the same configuration;
    a few sweeps absorb the coupling between particles.

    Returns:
        Configuration: Z itself when nothing moved
    """
    for _ in range(PROJECTION_SWEEPS):
        targets = [_switching_line_target(sys, model, Z, i, h) for i in range(Z.n)]
        moved = [i for i, target in enumerate(targets) if target is not None]
        if not moved:
            break
        positions = Z.positions.copy()
        for i in moved:
            positions[i] = targets[i]
        Z = Z.with_positions(positions)
    return Z


def _velocities(sys, model, Z, h):
    pairs = [select_velocity(sys, model, Z, i, h) for i in range(Z.n)]
    return np.array([v for v, _ in pairs]), [r for _, r in pairs]


def _switched(sys, model, Z, regimes):
    forces = model.forces(Z)
    for xi, regime in zip(forces, regimes):
        chosen = regime.chosen
        if chosen is None:
            continue
        try:
            if maximizer_set(sys, xi) != [chosen]:
                return True
        except ZeroForce:
            continue
    return False


def integrate_inclusion(sys, model, Z0, T, h, halt_on_source=False, lipschitz=None, seed=0):
    """
    Explicit Euler with event localisation.

    A step that changes some particle's strict maximizer is bisected until the
    switching time is bracketed within h * 1e-3, and the state advances to
    the right end of the bracket. Before each step, particles within one step
    of an attracting switching line are moved onto it, so every sliding sample
    is an exact tie and its velocity lies in co P_G.

    Raises:
        StepTooLarge: If a particle moves further than 10 L h in one step
    """
    if not h > 0:
        raise ValidationError("step h must be positive")
    if not T > 0:
        raise ValidationError("end time T must be positive")
    bound = STABILITY_FACTOR * (lipschitz or model.lipschitz_bound(Z0, seed=seed)) * h

    traj = Trajectory(times=[0.0], states=[Z0], regimes=[], h=h)
    Z, t = Z0, 0.0
    logger.info("Integrating inclusion: h=%g, T=%g, n=%d", h, T, Z0.n)
    while t < T - 1e-12 * T:
        Z = project_onto_switching_lines(sys, model, Z, h)
        traj.states[-1] = Z
        V, regimes = _velocities(sys, model, Z, h)
        traj.regimes.append(regimes)
        if model.near_singular(Z):
            traj.halt_reason = HaltReason.SINGULAR_PROXIMITY
            logger.warning("Inclusion halted at t=%g: singular proximity", t)
            return traj
        if halt_on_source and any(r.kind is RegimeKind.SOURCE_BRANCH for r in regimes):
            traj.halt_reason = HaltReason.AMBIGUITY_SOURCE
            logger.warning("Inclusion halted at t=%g: source point", t)
            return traj

        step = min(h, T - t)
        largest = float(np.max(np.linalg.norm(step * V, axis=1)))
        if largest > bound:
            raise StepTooLarge(f"displacement {largest:g} exceeds the stability bound {bound:g}",
                               step=len(traj.times) - 1, partial=traj)

        new = Z.with_positions(Z.positions + step * V)
        if _switched(sys, model, new, regimes):
            lo, hi = 0.0, step
            while hi - lo > h * EVENT_RESOLUTION:
                mid = 0.5 * (lo + hi)
                if _switched(sys, model, Z.with_positions(Z.positions + mid * V), regimes):
                    hi = mid
                else:
                    lo = mid
            step = hi
            new = Z.with_positions(Z.positions + step * V)
            traj.event_times.append(t + step)
            logger.debug("switching event at t=%.9g", t + step)

        t = T if T - (t + step) <= 1e-12 * T else t + step
        Z = new
        traj.times.append(t)
        traj.states.append(Z)

    Z = project_onto_switching_lines(sys, model, Z, h)
    traj.states[-1] = Z
    traj.regimes.append(_velocities(sys, model, Z, h)[1])
    logger.info("Inclusion finished: %d samples, %d events", len(traj.times), len(traj.event_times))
    return traj


def quadratic_well_sliding_solution(Z0, center=(0.0, 0.0)):
    """
    Closed-form Filippov solution for the quadratic well with the square glide system.

    Each particle relaxes along its dominant axis, w_k(t) = w_k(0) e^{-t},
    until both offset components have equal magnitude, then slides along the
    diagonal with both components decaying like e^{-t/2}.

    Returns:
        callable: t -> Configuration
    """
    offsets = Z0.positions - np.asarray(center, dtype=float)
    if Z0.dimension != 2:
        raise ValidationError("the closed form is only defined in two dimensions")

    def particle(w, t):
        big, small = (0, 1) if abs(w[0]) >= abs(w[1]) else (1, 0)
        if w[big] == 0.0:
            return w.copy()
        switch = math.log(abs(w[big]) / abs(w[small])) if w[small] != 0.0 else math.inf
        out = w.copy()
        if t <= switch:
            out[big] = w[big] * math.exp(-t)
            return out
        decay = math.exp(-0.5 * (t - switch))
        out[big] = math.copysign(abs(w[small]), w[big]) * decay
        out[small] = w[small] * decay
        return out

    def solution(t):
        return Z0.with_positions(np.array([particle(w, t) for w in offsets]) + np.asarray(center, dtype=float))
    return solution
