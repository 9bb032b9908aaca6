"""
Minimising-movement scheme for the glide quasi-distance D.

Each step minimises Phi(Z, Y, tau) = D(Z, Y)^2 / (2 tau) + E(Y). Because D is
finite only when every particle moves along a single glide direction, the
minimisation is carried out over rays y_i = z_i + alpha_i g_i with
alpha_i in [0, 2 L tau].
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from screw_glide.errors import CombinatorialBlowup, SingularProximity, ValidationError
from screw_glide.geometry.distances import quasi_distance_D
from screw_glide.geometry.glide_system import dual_norm

logger = logging.getLogger(__name__)

MAX_ASSIGNMENTS = 262_144
MAX_SWEEPS = 200
RESTART_TOLERANCE = 1e-10
PHI_TIE = 1e-13


class MmsMode(str, Enum):
    EXACT = 'exact'
    QUADRATIC_MODEL = 'quadratic-model'


@dataclass
class MmsStepRecord:
    directions: list
    amplitudes: list
    phi_value: float
    energy_after: float
    kinetic: float
    restarts_disagree: bool = False

    @property
    def distance(self):
        return math.sqrt(sum(a * a for a in self.amplitudes))


@dataclass
class MmsRun:
    tau: float
    end_time: float
    initial: object
    mode: MmsMode
    lipschitz: float
    configurations: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    @property
    def flagged(self):
        return any(step.restarts_disagree for step in self.steps)

    @property
    def times(self):
        return [k * self.tau for k in range(len(self.configurations))]

    @property
    def final(self):
        return self.configurations[-1]

    def energies(self, model):
        return [model.value(Z) for Z in self.configurations]


def step_count(tau, end_time):
    return max(1, math.ceil(end_time / tau - 1e-9))


def phi(sys, model, X, Y, tau):
    """Phi(X, Y, tau) = D^2(X, Y) / (2 tau) + E(Y); +inf for non-glide displacements"""
    if not tau > 0:
        raise ValidationError("tau must be positive")
    distance = quasi_distance_D(sys, X, Y)
    if math.isinf(distance):
        return math.inf
    return distance ** 2 / (2 * tau) + model.value(Y)


def _polish(slope, x, box):
    """Refine a bounded-Brent minimiser by a root solve of the ray derivative around it"""
    width = 1e-7 * x + 1e-12 * box
    lo, hi = max(0.0, x - width), min(box, x + width)
    if lo < hi and slope(lo) < 0.0 < slope(hi):
        return float(brentq(slope, lo, hi, xtol=1e-18))
    return x


def _line_minimise(f, slope, current, box):
    candidates = [0.0, current, box]
    if box > 0:
        res = minimize_scalar(f, bounds=(0.0, box), method='bounded', options={'xatol': 1e-15})
        candidates.append(_polish(slope, float(res.x), box))
    values = [f(a) for a in candidates]
    best = int(np.argmin(values))
    return candidates[best], values[best]


def _along(problem, alpha, i):
    objective, derivative = problem

    def f(a):
        trial = alpha.copy()
        trial[i] = a
        return objective(trial)

    def slope(a):
        trial = alpha.copy()
        trial[i] = a
        return derivative(trial, i)
    return f, slope


def _coordinate_descent(problem, n, box, start):
    alpha = np.full(n, min(start, box))
    value = problem[0](alpha)
    for _ in range(MAX_SWEEPS):
        previous = alpha.copy()
        for i in range(n):
            f, slope = _along(problem, alpha, i)
            alpha[i], value = _line_minimise(f, slope, alpha[i], box)
        if n == 1 or np.max(np.abs(alpha - previous)) <= 1e-14 * (1.0 + box):
            break
    return alpha, value


def _ray_problem(model, Z, G, tau):
    """Phi restricted to the rays z_i + alpha_i g_i, with its partial derivatives"""
    base = Z.positions

    def objective(alpha):
        Y = Z.with_positions(base + alpha[:, None] * G)
        return float(alpha @ alpha) / (2 * tau) + model.value(Y)

    def derivative(alpha, i):
        Y = Z.with_positions(base + alpha[:, None] * G)
        return alpha[i] / tau + float(G[i] @ model.gradient(Y)[i])
    return objective, derivative


def _exact_minimiser(sys, model, Z, tau, box, lipschitz):
    n, N = Z.n, sys.size
    if N ** n > MAX_ASSIGNMENTS:
        raise CombinatorialBlowup(f"{N}^{n} direction assignments exceed the limit of {MAX_ASSIGNMENTS}")
    starts = [0.0] if n == 1 else [0.0, 0.5 * lipschitz * tau, lipschitz * tau]
    best = None
    for assignment in itertools.product(range(N), repeat=n):
        problem = _ray_problem(model, Z, sys.directions[list(assignment)], tau)
        results = [_coordinate_descent(problem, n, box, start) for start in starts]
        values = [value for _, value in results]
        alpha, value = results[int(np.argmin(values))]
        disagree = max(values) - min(values) > RESTART_TOLERANCE
        if best is None or value < best[2] - PHI_TIE * (1.0 + abs(best[2])):
            best = (list(assignment), alpha, value, disagree)
    return best[0], best[1], best[3]


def _quadratic_model_minimiser(sys, model, Z, tau, box):
    grad = model.gradient(Z)
    directions = []
    alpha = np.zeros(Z.n)
    for i, g_i in enumerate(grad):
        if not np.any(g_i):
            directions.append(0)
            continue
        directions.append(int(np.argmax(sys.directions @ -g_i)))
        alpha[i] = tau * dual_norm(sys, g_i)
    problem = _ray_problem(model, Z, sys.directions[directions], tau)
    limit = max(box, float(alpha.max()))
    for i in range(Z.n):
        f, slope = _along(problem, alpha, i)
        alpha[i], _ = _line_minimise(f, slope, alpha[i], limit)
    return directions, alpha, False


def solve_minimisation(sys, model, Z, tau, mode=MmsMode.EXACT, lipschitz=None, seed=0):
    """
    Minimise Phi(Z, ., tau) over glide rays.

    Args:
        sys (GlideSystem): Glide directions
        model (EnergyModel): Energy
        Z (Configuration): Current configuration
        tau (float): Time step (or De Giorgi sub-step)
        mode (MmsMode): exact enumeration or quadratic-model shortcut
        lipschitz (float, optional): Bound L; estimated from Z when omitted
        seed (int): Seed for the Lipschitz estimate

    Returns:
        tuple: (Configuration, MmsStepRecord)
    """
    if not tau > 0:
        raise ValidationError("tau must be positive")
    mode = MmsMode(mode)
    if lipschitz is None:
        lipschitz = model.lipschitz_bound(Z, seed=seed)
    box = 2.0 * lipschitz * tau
    if mode is MmsMode.EXACT:
        directions, alpha, disagree = _exact_minimiser(sys, model, Z, tau, box, lipschitz)
    else:
        directions, alpha, disagree = _quadratic_model_minimiser(sys, model, Z, tau, box)
    if disagree:
        logger.warning("Inner minimisation restarts disagree by more than %g in Phi", RESTART_TOLERANCE)

    new = Z.with_positions(Z.positions + alpha[:, None] * sys.directions[directions])
    kinetic = float(alpha @ alpha) / (2 * tau)
    energy_after = model.value(new)
    record = MmsStepRecord(
        directions=[int(k) for k in directions],
        amplitudes=[float(a) for a in alpha],
        phi_value=kinetic + energy_after,
        energy_after=energy_after,
        kinetic=kinetic,
        restarts_disagree=disagree,
    )
    if model.near_singular(new):
        raise SingularProximity("configuration reached the singular-set margin", partial=(new, record))
    return new, record


def mms_step(sys, model, Z, tau, mode=MmsMode.EXACT, lipschitz=None, seed=0):
    return solve_minimisation(sys, model, Z, tau, mode, lipschitz, seed)


def run_mms(sys, model, Z0, tau, T, mode=MmsMode.EXACT, seed=0):
    """
    Iterate the scheme ceil(T / tau) times from Z0.

    Raises:
        SingularProximity: With ``step`` set and the partial MmsRun attached
    """
    if not T > 0:
        raise ValidationError("end time T must be positive")
    lipschitz = model.lipschitz_bound(Z0, seed=seed)
    run = MmsRun(tau=tau, end_time=T, initial=Z0, mode=MmsMode(mode), lipschitz=lipschitz,
                 configurations=[Z0])
    total = step_count(tau, T)
    logger.info("MMS run: tau=%g, %d steps, mode=%s, L=%g", tau, total, run.mode.value, lipschitz)
    Z = Z0
    for k in range(total):
        try:
            Z, record = solve_minimisation(sys, model, Z, tau, run.mode, lipschitz)
        except SingularProximity as halt:
            halt.step = k
            halt.partial = run
            logger.warning("MMS halted at step %d: singular proximity", k)
            raise
        run.configurations.append(Z)
        run.steps.append(record)
        logger.debug("step %d: directions=%s alpha=%s phi=%.12g", k, record.directions,
                     record.amplitudes, record.phi_value)
    return run


def piecewise_constant(run, t):
    """Step interpolant: Z^k for t in ((k-1) tau, k tau], Z^0 at t = 0"""
    last = len(run.configurations) - 1
    if t < 0 or t > last * run.tau + 1e-9 * run.tau:
        raise ValidationError(f"t={t} outside [0, {last * run.tau}]")
    k = min(last, max(0, math.ceil(t / run.tau - 1e-9)))
    return run.configurations[k]


def de_giorgi_step(sys, model, Z_k, delta, tau=None, lipschitz=None, seed=0):
    """De Giorgi minimiser for sub-step delta with its step record"""
    if not delta > 0 or (tau is not None and delta > tau * (1 + 1e-12)):
        raise ValidationError("delta must lie in (0, tau]")
    return solve_minimisation(sys, model, Z_k, delta, MmsMode.EXACT, lipschitz, seed)


def de_giorgi_interpolant(sys, model, Z_k, delta, tau=None, lipschitz=None, seed=0):
    return de_giorgi_step(sys, model, Z_k, delta, tau, lipschitz, seed)[0]
