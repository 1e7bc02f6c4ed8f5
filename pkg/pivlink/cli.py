"""
Command-line interface

Subcommands::

    pivlink simulate --paper-defaults --seed 7 --out sim/
    pivlink link --config sim/link.toml --out run1/ --fdr 0.10
    pivlink evaluate --links run1/links.csv --truth sim/truth.csv
    pivlink distort --in sim/ --out sim04/ --level 0.04
    pivlink independence --n-a 200 --k 10 190 --out grid.csv
    pivlink replicate --paper-defaults --n-rep 20 --out reps.csv
    pivlink ladder --paper-defaults --levels 0 0.04 0.08 --out ladder.csv

Exit status is 0 on success, 2 for configuration errors, 3 for data errors and
1 for any other failure.
"""
import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import LinkConfig
from .constants import N_SIM, POSTERIOR_Z0, V0, V1, XI, Z0, Z1
from .evaluate import confusion, format_report, report_frame, simplistic_link
from .exceptions import ConfigurationError, DataError
from .independence import export_grid
from .inference.posterior import (read_links, sample_posterior, select_by_fdr,
                                  select_by_threshold)
from .inference.stem import StemConfig, export_trace, fit
from .ingest import read_tables
from .simulate.distortion import distortion_level, inject_distortion
from .simulate.experiments import (DISTORTION_LEVELS, METHODS,
                                   ExperimentConfig, distortion_ladder,
                                   export_results, f1_loss, replicate,
                                   summarize)
from .simulate.scenario import (ScenarioConfig, generate_scenario, read_truth,
                                write_scenario)
from .utils import write_csv_atomic

logger = logging.getLogger(__name__)


def _digest(path):
    sha = hashlib.sha256()
    try:
        with open(path, 'rb') as f:
            for block in iter(lambda: f.read(1 << 16), b''):
                sha.update(block)
    except OSError as e:
        raise DataError('could not read {}: {}'.format(path, e))
    return sha.hexdigest()


def write_manifest(path, manifest):
    """Write a run manifest as JSON, replacing any existing file"""
    tmp_path = path + '.tmp'
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(tmp_path, 'w') as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        os.replace(tmp_path, path)
    except OSError as e:
        raise DataError('could not write {}: {}'.format(path, e))
    return path


def command_link(args):
    config = LinkConfig.from_file(args.config).with_overrides(
        seed=args.seed, threshold=args.threshold, fdr=args.fdr)
    if args.all_stable:
        config = config.all_stable()
    out = {name: os.path.join(args.out, name)
           for name in ('links.csv', 'trace.csv', 'posterior_hist.csv',
                        'manifest.json')}
    manifest = {
        'tool': 'pivlink', 'version': __version__,
        'config': config.as_dict(), 'seed': config.stem.seed,
        'all_stable': bool(args.all_stable), 'threads': args.threads,
        'inputs': {os.fspath(p): _digest(p)
                   for p in (args.config, config.path_a, config.path_b)},
        'outputs': {name: path for name, path in out.items()
                    if name != 'manifest.json'},
    }
    write_manifest(out['manifest.json'], manifest)

    a, b, specs, _ = read_tables(config)
    theta_hat, trace = fit(a, b, specs, config.stem)
    export_trace(trace, out['trace.csv'])
    posterior = sample_posterior(a, b, specs, theta_hat, config.n_sim,
                                 config.posterior_z0, config.stem.seed,
                                 n_chains=config.chains, n_jobs=args.threads)
    posterior.export_histogram(out['posterior_hist.csv'])
    if config.fdr is not None:
        links = select_by_fdr(posterior, config.fdr)
    else:
        links = select_by_threshold(posterior, config.xi)
    links.to_csv(out['links.csv'])

    manifest['result'] = {'threshold_used': links.threshold_used,
                          'estimated_fdr': links.estimated_fdr,
                          'n_links': len(links), 'gamma': theta_hat.gamma,
                          'swapped': trace.swapped}
    write_manifest(out['manifest.json'], manifest)
    print('%d links (threshold %s, estimated FDR %.4f)'
          % (len(links), links.threshold_used, links.estimated_fdr))
    return 0


_SCENARIO_FLAGS = [('n_a', '--n-a'), ('n_b', '--n-b'),
                   ('n_links', '--n-links'), ('piv_supports', '--supports'),
                   ('mistake_rate', '--mistake-rate'),
                   ('missing_rate', '--missing-rate'),
                   ('unstable_index', '--unstable-index'),
                   ('hazard', '--hazard')]


def scenario_config(args):
    """
    Scenario design from the command-line options: the default design with
    --paper-defaults, otherwise --n-a, --n-b, --n-links and --supports are
    required. Any other option given overrides the design.
    """
    if args.paper_defaults:
        base = ScenarioConfig.paper_defaults(args.seed)
        fields = {name: getattr(base, name) for name, _ in _SCENARIO_FLAGS}
    else:
        absent = [flag for name, flag in _SCENARIO_FLAGS[:4]
                  if getattr(args, name) is None]
        if absent:
            raise ConfigurationError('the design needs --paper-defaults or %s'
                                     % ', '.join(absent))
        fields = {}
    for name, _ in _SCENARIO_FLAGS:
        value = getattr(args, name)
        if value is None:
            continue
        if name in ('mistake_rate', 'missing_rate') and len(value) == 1:
            value = value[0]
        fields[name] = value
    return ScenarioConfig(seed=args.seed, **fields)


def command_simulate(args):
    cfg = scenario_config(args)
    a, b, truth = generate_scenario(cfg)
    paths = write_scenario(args.out, a, b, truth, cfg)
    print('wrote %s' % ', '.join(sorted(paths.values())))
    return 0


def command_evaluate(args):
    if not (args.links or args.simplistic):
        raise ConfigurationError('evaluate needs --links or --simplistic')
    truth = read_truth(args.truth)
    if args.simplistic:
        config = LinkConfig.from_file(args.simplistic)
        a, b, _, _ = read_tables(config)
        est = simplistic_link(a, b)
    else:
        est = read_links(args.links)
    counts = confusion(est, truth)
    if args.out:
        write_csv_atomic(report_frame(counts), args.out)
    print(format_report(counts))
    return 0


def command_distort(args):
    config_path = os.path.join(args.input, 'link.toml')
    config = LinkConfig.from_file(config_path)
    if config.merge_groups:
        raise ConfigurationError('distort reads files without merging PIVs; '
                                 'remove [merge] from %s' % config_path)
    a, b, _, supports = read_tables(config)
    truth = read_truth(os.path.join(args.input, 'truth.csv'))
    before = distortion_level(a, b, truth)
    a, b = inject_distortion(a, b, truth, args.level, args.seed)
    after = distortion_level(a, b, truth)
    with open(config_path) as f:
        config_text = f.read()
    write_scenario(args.out, a, b, truth, supports=supports,
                   config_text=config_text,
                   time_column=config.time_column or 't')
    print('distortion level %.4f -> %.4f' % (before, after))
    return 0


def command_independence(args):
    c_values = args.c if args.c else list(range(0, 21))
    n_b_values = args.n_b if args.n_b else list(range(args.n_a, 10 * args.n_a + 1,
                                                      args.n_a))
    for k in args.k:
        path = args.out if len(args.k) == 1 else '%s_k%d%s' % (
            os.path.splitext(args.out)[0], k, os.path.splitext(args.out)[1])
        ratios = export_grid(path, args.n_a, k, c_values, n_b_values,
                             args.overlap_success)
        print('k=%d: ratios in [%.4f, %.4f], written to %s'
              % (k, np.min(ratios), np.max(ratios), path))
    return 0


def experiment_config(args):
    stem = StemConfig(v0=args.v0, v1=args.v1, z0=args.z0, z1=args.z1)
    return ExperimentConfig(scenario_config(args), stem, args.n_sim,
                            args.posterior_z0, args.threshold, args.chains,
                            args.threads)


def command_replicate(args):
    results = replicate(args.n_rep, experiment_config(args), args.methods)
    export_results(results, args.out)
    summary = summarize(results)
    if args.summary:
        export_results(summary, args.summary)
    print(summary[['method', 'n', 'tp_mean', 'fp_mean', 'fdr_mean',
                   'sensitivity_mean', 'f1_mean']].to_string(
                       index=False, float_format='%.3f'))
    return 0


def command_ladder(args):
    ladder = distortion_ladder(args.levels, experiment_config(args))
    export_results(ladder, args.out)
    for method, loss in f1_loss(ladder).items():
        print('%s: F1 drops by %.3f' % (method, loss))
    return 0


def add_design_arguments(parser):
    """Scenario options shared by simulate, replicate and ladder"""
    parser.add_argument('--paper-defaults', action='store_true',
                        help='start from 800 and 1000 records, 500 links '
                        'and five PIVs, the last unstable')
    parser.add_argument('--n-a', type=int, help='records in file A')
    parser.add_argument('--n-b', type=int, help='records in file B')
    parser.add_argument('--n-links', type=int,
                        help='individuals registered in both files')
    parser.add_argument('--supports', dest='piv_supports', type=int,
                        nargs='+', help='support size of each PIV')
    parser.add_argument('--mistake-rate', type=float, nargs='+',
                        help='one rate for all PIVs or one per PIV')
    parser.add_argument('--missing-rate', type=float, nargs='+',
                        help='one rate for all PIVs or one per PIV')
    parser.add_argument('--unstable-index', type=int,
                        help='0-based index of the unstable PIV')
    parser.add_argument('--hazard', type=float,
                        help='hazard of the unstable PIV per unit time')
    parser.add_argument('--seed', type=int, default=0)


def add_experiment_arguments(parser):
    parser.add_argument('--v0', type=int, default=V0,
                        help='StEM burn-in iterations')
    parser.add_argument('--v1', type=int, default=V1,
                        help='StEM kept iterations')
    parser.add_argument('--z0', type=int, default=Z0,
                        help='Gibbs burn-in sweeps per iteration')
    parser.add_argument('--z1', type=int, default=Z1,
                        help='Gibbs kept sweeps per iteration')
    parser.add_argument('--n-sim', type=int, default=N_SIM,
                        help='kept posterior samples')
    parser.add_argument('--posterior-z0', type=int, default=POSTERIOR_Z0,
                        help='burn-in of the posterior chains')
    parser.add_argument('--threshold', type=float, default=XI,
                        help='link pairs with probability above this')
    parser.add_argument('--chains', type=int, default=1,
                        help='posterior chains')
    parser.add_argument('--threads', type=int, default=1,
                        help='worker threads for posterior chains')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='pivlink', description='Record linkage of two files by stochastic '
        'EM on partially identifying variables')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log progress (-vv for debugging output)')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='log warnings and errors only')
    subparsers = parser.add_subparsers(dest='command', required=True)

    link = subparsers.add_parser('link', help='estimate the model and select '
                                 'links')
    link.add_argument('--config', required=True, help='TOML run configuration')
    link.add_argument('--out', required=True, help='output directory')
    selection = link.add_mutually_exclusive_group()
    selection.add_argument('--threshold', type=float,
                           help='link pairs with probability above this')
    selection.add_argument('--fdr', type=float,
                           help='target estimated false discovery rate')
    link.add_argument('--seed', type=int, help='override the configured seed')
    link.add_argument('--threads', type=int, default=1,
                      help='worker threads for posterior chains')
    link.add_argument('--all-stable', action='store_true',
                      help='treat every PIV as stable')
    link.set_defaults(func=command_link)

    simulate = subparsers.add_parser('simulate', help='write a synthetic pair '
                                     'of files with known links')
    add_design_arguments(simulate)
    simulate.add_argument('--out', required=True, help='output directory')
    simulate.set_defaults(func=command_simulate)

    replication = subparsers.add_parser(
        'replicate', help='score the model, its all-stable ablation and the '
        'exact-match baseline on simulated replications')
    add_design_arguments(replication)
    add_experiment_arguments(replication)
    replication.add_argument('--n-rep', type=int, default=20,
                             help='number of replications')
    replication.add_argument('--methods', nargs='+', choices=METHODS,
                             default=list(METHODS))
    replication.add_argument('--out', required=True, help='results CSV')
    replication.add_argument('--summary', help='per-method summary CSV')
    replication.set_defaults(func=command_replicate)

    ladder = subparsers.add_parser('ladder', help='score the model and the '
                                   'exact-match baseline under increasing '
                                   'injected distortion')
    add_design_arguments(ladder)
    add_experiment_arguments(ladder)
    ladder.add_argument('--levels', type=float, nargs='+',
                        default=list(DISTORTION_LEVELS))
    ladder.add_argument('--out', required=True, help='results CSV')
    ladder.set_defaults(func=command_ladder)

    evaluate = subparsers.add_parser('evaluate', help='score links against '
                                     'the true links')
    evaluate.add_argument('--truth', required=True, help='truth CSV')
    est = evaluate.add_mutually_exclusive_group()
    est.add_argument('--links', help='links CSV')
    est.add_argument('--simplistic', metavar='CONFIG',
                     help='score the exact-match baseline on the files of '
                     'this configuration')
    evaluate.add_argument('--out', help='write the report as CSV')
    evaluate.set_defaults(func=command_evaluate)

    distort = subparsers.add_parser('distort', help='inject registration '
                                    'errors into a scenario')
    distort.add_argument('--in', dest='input', required=True,
                         help='scenario directory (A.csv, B.csv, truth.csv, '
                         'link.toml)')
    distort.add_argument('--out', required=True, help='output directory')
    distort.add_argument('--level', type=float, required=True,
                         help='distortion level to add, in [0, 0.5]')
    distort.add_argument('--seed', type=int, default=0)
    distort.set_defaults(func=command_distort)

    independence = subparsers.add_parser('independence', help='capture-ratio '
                                         'grid of the row-sum independence '
                                         'analysis')
    independence.add_argument('--n-a', type=int, default=200)
    independence.add_argument('--k', type=int, nargs='+', default=[10, 190])
    independence.add_argument('--c', type=int, nargs='+')
    independence.add_argument('--n-b', type=int, nargs='+')
    independence.add_argument('--overlap-success', type=float, default=0.5)
    independence.add_argument('--out', required=True, help='grid CSV')
    independence.set_defaults(func=command_independence)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quiet:
        level = logging.WARNING
    else:
        level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose,
                                                                   2)]
    logging.basicConfig(
        level=level,
        format='%(asctime)s [%(levelname)s] %(name)s: %(message)s')
    try:
        return args.func(args)
    except ConfigurationError as e:
        logger.error('configuration error: %s', e)
        return 2
    except DataError as e:
        logger.error('data error: %s', e)
        return 3
    except Exception as e:
        logger.debug('internal failure', exc_info=True)
        logger.error('internal failure: %s', e)
        return 1


if __name__ == '__main__':
    sys.exit(main())
