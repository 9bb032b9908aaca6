"""
Convergence studies: minimising movements at several time steps against a reference curve.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from humanize import precisedelta  # type: ignore

from screw_glide.edi.audit import discrete_edi_report
from screw_glide.errors import ConfigError
from screw_glide.geometry.distances import metric_Dhat
from screw_glide.harness.scenarios import build_scenario, closed_form_reference
from screw_glide.inclusion.integrator import integrate_inclusion
from screw_glide.mms.scheme import piecewise_constant, run_mms

logger = logging.getLogger(__name__)


def sample_times(T, count):
    return [float(t) for t in np.linspace(0.0, T, count)]


def sup_distance(sys, a, b, times):
    """
    Largest Dhat distance between two paths over the sample times.

    Args:
        sys (GlideSystem): Glide directions defining Dhat
        a (callable): t -> Configuration
        b (callable): t -> Configuration
        times (list): Sample times

    Returns:
        float: max_t Dhat(a(t), b(t))
    """
    return max(metric_Dhat(sys, a(t), b(t)) for t in times)


def observed_order(taus, distances):
    """Mean of log(sup_k / sup_k+1) / log(tau_k / tau_k+1); None when undefined"""
    orders = [
        math.log(distances[k] / distances[k + 1]) / math.log(taus[k] / taus[k + 1])
        for k in range(len(taus) - 1)
        if distances[k] > 0 and distances[k + 1] > 0
    ]
    return float(np.mean(orders)) if orders else None


@dataclass
class TauResult:
    tau: float
    sup_distance: float
    edi: object
    run: object


@dataclass
class ConvergenceReport:
    taus: list
    sup_distances: list
    observed_order: float
    edi_reports: list
    reference: str
    sample_times: list
    runs: list = field(default_factory=list, repr=False)
    reference_path: object = field(default=None, repr=False)

    @property
    def monotone(self):
        return all(b < a for a, b in zip(self.sup_distances, self.sup_distances[1:]))

    @property
    def edi_passed(self):
        return all(report.passed for report in self.edi_reports)

    def to_dict(self):
        return {
            'taus': self.taus,
            'sup_distances': self.sup_distances,
            'observed_order': self.observed_order,
            'monotone': self.monotone,
            'reference': self.reference,
            'edi': [report.to_dict() for report in self.edi_reports],
        }


def reference_path(config, sys, model, Z0):
    """
    Reference curve for a study and its label.

    The closed form is used when requested; otherwise the inclusion integrator
    runs at h = min(config.h, min(tau_list) / 10).
    """
    if config.reference == 'closed-form':
        closed = closed_form_reference(config, sys, model)
        if closed is None:
            raise ConfigError('reference', "no closed-form solution is known for this scenario")
        return closed, 'closed-form'
    h = min(config.h, min(config.tau_list) / 10.0)
    traj = integrate_inclusion(sys, model, Z0, config.T, h, seed=config.seed)
    return traj, 'inclusion'


def _study_tau(config, tau, reference=None):
    sys, model, Z0 = build_scenario(config)
    if reference is None:
        reference, _ = reference_path(config, sys, model, Z0)
    run = run_mms(sys, model, Z0, tau, config.T, config.mode, seed=config.seed)
    distance = sup_distance(sys, lambda t: piecewise_constant(run, t), reference,
                            sample_times(config.T, config.sample_count))
    edi = discrete_edi_report(sys, model, run, config.quadrature_points, config.edi_tolerance)
    logger.info("tau=%g: sup distance %.6g, EDI residual %.3g", tau, distance, edi.residual)
    return TauResult(tau, distance, edi, run)


def convergence_study(config):
    """
    Run the scheme for every tau in the ladder and compare against the reference.

    With ``config.workers > 1`` the per-tau runs go to a process pool; each
    worker rebuilds the scenario from the configuration.

    Returns:
        ConvergenceReport
    """
    if not config.tau_list:
        raise ConfigError('tau_list', "must be a non-empty list")
    start_time = time.time()
    sys, model, Z0 = build_scenario(config)
    reference, label = reference_path(config, sys, model, Z0)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_study_tau, config, tau) for tau in config.tau_list]
            results = [f.result() for f in futures]
    else:
        results = [_study_tau(config, tau, reference) for tau in config.tau_list]

    distances = [r.sup_distance for r in results]
    report = ConvergenceReport(
        taus=list(config.tau_list),
        sup_distances=distances,
        observed_order=observed_order(config.tau_list, distances),
        edi_reports=[r.edi for r in results],
        reference=label,
        sample_times=sample_times(config.T, config.sample_count),
        runs=[r.run for r in results],
        reference_path=reference,
    )
    logger.info("Convergence study finished in %s (order %s)",
                precisedelta(time.time() - start_time), report.observed_order)
    return report
