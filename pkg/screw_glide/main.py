import argparse
import logging
import os
import sys
import time

import numpy as np
from humanize import precisedelta  # type: ignore

from screw_glide import __version__
from screw_glide.edi.audit import discrete_edi_report
from screw_glide.energy.fields import ExampleField
from screw_glide.errors import ConfigError, SingularProximity, SolverHalt, ValidationError
from screw_glide.geometry.distances import metric_dhat, quasi_distance_d
from screw_glide.geometry.glide_system import (build_glide_system, crystalline_norm, dual_norm,
                                               maximizer_set, project_glide)
from screw_glide.harness.config import load_config, parse_classify
from screw_glide.harness.plotting import render_svg
from screw_glide.harness.report import classify_rows, inclusion_rows, mms_rows, write_csv, write_json
from screw_glide.harness.scenarios import build_glide, build_scenario
from screw_glide.harness.study import convergence_study
from screw_glide.inclusion.ambiguity import AmbiguityKind, scan_circle
from screw_glide.inclusion.integrator import HaltReason, integrate_inclusion
from screw_glide.mms.scheme import run_mms

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_HALT = 3
EXIT_AUDIT = 4

logger = logging.getLogger(__name__)


class Console:
    """Progress lines for the user; silenced by --quiet"""

    def __init__(self, quiet=False):
        self.quiet = quiet

    def __call__(self, message):
        if not self.quiet:
            print(message)


def _load(args, required=True):
    if not args.config:
        if required:
            raise ConfigError('--config', "a configuration file is required for this command")
        return None
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out:
        config.output_dir = args.out
    os.makedirs(config.output_dir, exist_ok=True)
    return config


def _out(config, name):
    return os.path.join(config.output_dir, name)


def _positions(states):
    return np.array([Z.positions for Z in states])


def _write_mms(config, model, run, say):
    csv_path = _out(config, f"mms_tau_{run.tau:g}.csv")
    write_csv(csv_path, *mms_rows(run, model))
    say(f"  tau={run.tau:g}: {len(run.steps)} steps, final energy {model.value(run.final):.6g} -> {csv_path}")
    return {
        'tau': run.tau,
        'steps': len(run.steps),
        'lipschitz': run.lipschitz,
        'flagged': run.flagged,
        'energies': run.energies(model),
        'final': run.final.to_dict(),
    }


def cmd_simulate_mms(args, say):
    config = _load(args)
    sys_, model, Z0 = build_scenario(config)
    taus = [args.tau] if args.tau else config.tau_list
    say(f"Running minimising movements for tau in {taus}...")
    summaries, paths, code = [], {}, EXIT_OK
    for tau in taus:
        try:
            run = run_mms(sys_, model, Z0, tau, config.T, config.mode, seed=config.seed)
        except SingularProximity as halt:
            say(f"Halted at step {halt.step}: {halt}")
            run, code = halt.partial, EXIT_HALT
        summaries.append(_write_mms(config, model, run, say))
        paths[f"tau={tau:g}"] = _positions(run.configurations)
        if code:
            break
    write_json(_out(config, 'simulate-mms.json'), {
        'command': 'simulate-mms', 'glide': sys_.to_dict(), 'energy': model.describe(),
        'runs': summaries, 'halted': code == EXIT_HALT,
    }, config)
    render_svg(_out(config, 'simulate-mms.svg'), sys_, paths)
    return code


def cmd_simulate_inclusion(args, say):
    config = _load(args)
    sys_, model, Z0 = build_scenario(config)
    h = args.h or config.h
    say(f"Integrating the glide inclusion with h={h:g} up to T={config.T:g}...")
    try:
        traj = integrate_inclusion(sys_, model, Z0, config.T, h, halt_on_source=args.halt_on_source,
                                   seed=config.seed)
    except SolverHalt as halt:
        say(f"Integration stopped: {halt}")
        traj = halt.partial
        traj.halt_reason = None
        code = EXIT_HALT
    else:
        code = EXIT_OK if traj.halt_reason is not HaltReason.SINGULAR_PROXIMITY else EXIT_HALT
    write_csv(_out(config, 'inclusion.csv'), *inclusion_rows(traj))
    halt = traj.halt_reason.value if traj.halt_reason else 'step-too-large'
    write_json(_out(config, 'simulate-inclusion.json'), {
        'command': 'simulate-inclusion', 'h': h, 'halt_reason': halt, 'event_times': traj.event_times,
        'samples': len(traj.times), 'final': traj.states[-1].to_dict(),
    }, config)
    kinds = [[r.kind.value for r in regimes] for regimes in traj.regimes]
    render_svg(_out(config, 'simulate-inclusion.svg'), sys_,
               {'inclusion': (_positions(traj.states), kinds)}, annotations={'halt': halt})
    say(f"{len(traj.times)} samples, {len(traj.event_times)} switching events, halt reason: {halt}")
    return code


def cmd_converge(args, say):
    config = _load(args)
    say(f"Convergence study over tau in {config.tau_list} against the {config.reference} reference...")
    report = convergence_study(config)
    write_csv(_out(config, 'converge.csv'), ['tau', 'sup_distance', 'edi_residual', 'edi_passed'],
              [[tau, d, e.residual, e.passed] for tau, d, e in
               zip(report.taus, report.sup_distances, report.edi_reports)])
    write_json(_out(config, 'converge.json'), dict(command='converge', **report.to_dict()), config)
    reference = report.reference_path
    paths = {'reference': _positions([reference(t) for t in report.sample_times])}
    finest = report.runs[-1]
    paths[f"mms tau={finest.tau:g}"] = _positions(finest.configurations)
    render_svg(_out(config, 'converge.svg'), build_glide(config), paths,
               annotations={'order': report.observed_order})
    for tau, d in zip(report.taus, report.sup_distances):
        say(f"  tau={tau:g}: sup distance {d:.6g}")
    say(f"Observed order: {report.observed_order}")
    return EXIT_OK if report.edi_passed else EXIT_AUDIT


def cmd_edi_check(args, say):
    config = _load(args)
    sys_, model, Z0 = build_scenario(config)
    reports = []
    for tau in config.tau_list:
        run = run_mms(sys_, model, Z0, tau, config.T, config.mode, seed=config.seed)
        report = discrete_edi_report(sys_, model, run, config.quadrature_points, config.edi_tolerance)
        reports.append(report)
        status = 'ok' if report.passed else 'FAILED'
        say(f"  tau={tau:g}: residual {report.residual:.3g} "
            f"(drop {report.energy_drop:.6g}, continuum {report.continuum_residual:.3g}) {status}")
    passed = all(r.passed for r in reports)
    write_json(_out(config, 'edi-check.json'), {
        'command': 'edi-check', 'passed': passed, 'reports': [r.to_dict() for r in reports],
    }, config)
    return EXIT_OK if passed else EXIT_AUDIT


def cmd_classify(args, say):
    config = _load(args, required=False)
    settings = config.classify if config else parse_classify({})
    out_dir = config.output_dir if config else (args.out or '.')
    sys_ = build_glide(config) if config else build_glide_system('square')
    if sys_.dimension != 2:
        raise ConfigError('glide', f"the example field is planar; the glide system lives in R^{sys_.dimension}")
    os.makedirs(out_dir, exist_ok=True)
    scan = scan_circle(ExampleField(), sys_, settings['center'], settings['radius'], settings['points'])
    write_csv(os.path.join(out_dir, 'classify.csv'), *classify_rows(scan))
    counts = {kind.value: sum(1 for *_, k in scan if k is kind) for kind in AmbiguityKind}
    write_json(os.path.join(out_dir, 'classify.json'), {'command': 'classify', 'counts': counts, **settings}, config)
    points = {kind.value: [x for _, x, k in scan if k is kind] for kind in AmbiguityKind}
    render_svg(os.path.join(out_dir, 'classify.svg'), sys_, {},
               circles=[(settings['center'], settings['radius'])], points=points)
    for kind, count in counts.items():
        say(f"  {kind}: {count}")
    return EXIT_OK


def cmd_norms(args, say):
    config = _load(args, required=False)
    sys_ = build_glide(config) if config else build_glide_system(args.glide)
    x = np.asarray(args.vector, dtype=float)
    if x.shape != (sys_.dimension,):
        raise ValidationError(f"--vector needs {sys_.dimension} components")
    print(f"crystalline norm: {crystalline_norm(sys_, x):.12g}")
    print(f"dual norm:        {dual_norm(sys_, x):.12g}")
    if np.any(x):
        print(f"maximizers:       {maximizer_set(sys_, x)}")
    print(f"projection:       {project_glide(sys_, x).vertices.tolist()}")
    if args.to:
        y = np.asarray(args.to, dtype=float)
        print(f"d(x, y):          {quasi_distance_d(sys_, x, y):.12g}")
        print(f"dhat(x, y):       {metric_dhat(sys_, x, y):.12g}")
    return EXIT_OK


COMMANDS = {
    'simulate-mms': cmd_simulate_mms,
    'simulate-inclusion': cmd_simulate_inclusion,
    'converge': cmd_converge,
    'edi-check': cmd_edi_check,
    'classify': cmd_classify,
    'norms': cmd_norms,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Path to the YAML run configuration')
    common.add_argument('--out', help='Output directory (overrides output_dir)')
    common.add_argument('--seed', type=int, help='Seed for the Lipschitz sampling (overrides seed)')
    common.add_argument('-v', '--verbose', action='store_true', help='Log progress at INFO level')
    common.add_argument('-q', '--quiet', action='store_true', help='Only print warnings and errors')

    parser = argparse.ArgumentParser(description='Glide-constrained screw dislocation dynamics')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    mms = sub.add_parser('simulate-mms', parents=[common], help='Run the minimising-movement scheme')
    mms.add_argument('--tau', type=float, help='Single time step instead of tau_list')
    inc = sub.add_parser('simulate-inclusion', parents=[common], help='Integrate the differential inclusion')
    inc.add_argument('--h', type=float, help='Step size instead of h from the configuration')
    inc.add_argument('--halt-on-source', action='store_true', help='Stop at source points instead of branching')
    sub.add_parser('converge', parents=[common], help='Convergence study over tau_list')
    sub.add_parser('edi-check', parents=[common], help='Audit the discrete energy-dissipation identity')
    sub.add_parser('classify', parents=[common], help='Classify the ambiguity circle of the example field')
    norms = sub.add_parser('norms', parents=[common], help='Geometry queries for a single vector')
    norms.add_argument('--glide', default='square', help='Preset glide system when no config is given')
    norms.add_argument('--vector', type=float, nargs='+', required=True, help='Vector components')
    norms.add_argument('--to', type=float, nargs='+', help='Second point for d and dhat')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    say = Console(args.quiet)
    start_time = time.time()
    try:
        code = COMMANDS[args.command](args, say)
    except ValidationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverHalt as e:
        print(f"Solver halted: {e}", file=sys.stderr)
        return EXIT_HALT
    say(f"Finished {args.command} in {precisedelta(time.time() - start_time, minimum_unit='milliseconds')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
