"""Command-line interface: ``twrelay {bench,solve,bound,check}``.

Settings are read from an optional JSON file (``--config``) and then
overridden by flags.  Exit status is 0 on success, 1 for configuration
errors and 2 when a numerical failure occurred.
"""
import argparse
import dataclasses
import json
import logging
import sys

import numpy as np

from .balance import BisectionConfig, balance
from .bench import ExperimentSpec, noise_levels, run_experiment, spec_as_dict, summary_path
from .bound import upper_bound, whiten
from .channel import SystemConfig, generate_channels
from .checks import run_all
from .errors import InvalidParameterError, RelayError
from .forms import build_quadratic_problem
from .lm import ArmijoParams, LMConfig

log = logging.getLogger('twrelay')

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class ConfigError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _build(cls, data, section):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be an object")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"section {section!r}: {exc}") from exc


def load_config(path):
    """Read an `ExperimentSpec` from a JSON file."""
    try:
        with open(path, encoding='utf-8') as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return spec_from_dict(data)


def spec_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    lm = data.pop('lm', None)
    if isinstance(lm, dict) and isinstance(lm.get('armijo'), dict):
        lm = dict(lm, armijo=_build(ArmijoParams, lm['armijo'], 'lm.armijo'))
    bisect = data.pop('bisect', None)
    if isinstance(bisect, dict) and 'snr_breakpoints' in bisect:
        bisect = dict(bisect, snr_breakpoints=tuple(tuple(p) for p in bisect['snr_breakpoints']))
    system = _build(SystemConfig, data.pop('system', None), 'system')
    try:
        return ExperimentSpec(system=system, lm=_build(LMConfig, lm, 'lm'),
                              bisect=_build(BisectionConfig, bisect, 'bisect'), **data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(spec, args):
    """Flags win over file values."""
    system = spec.system
    sys_changes = {k: v for k, v in (('M', args.pairs), ('N_R', args.antennas),
                                     ('seed', args.seed), ('P', args.power)) if v is not None}
    if sys_changes:
        system = system.with_(**sys_changes)
    lm = spec.lm
    if args.nmax is not None:
        lm = dataclasses.replace(lm, N_max=args.nmax)
    bisect = spec.bisect
    if args.eps_bisect is not None:
        bisect = dataclasses.replace(bisect, eps_bisect=args.eps_bisect)
    changes = dict(system=system, lm=lm, bisect=bisect)
    for name, value in (('trials', args.trials), ('snr_list_db', args.snr),
                        ('snr_mac_db', args.snr_mac), ('out_path', args.out),
                        ('threads', args.threads)):
        if value is not None:
            changes[name] = value
    if args.no_timing:
        changes['record_timing'] = False
    fields = spec_as_dict(spec)
    fields.update(changes)
    return ExperimentSpec(**{k: fields[k] for k in ExperimentSpec.__dataclass_fields__})


def _instance(spec):
    sigma2, sigmaR2 = noise_levels(spec.system.P, spec.snr_list_db[0], spec.snr_mac_db)
    cfg = spec.system.with_(sigma2=sigma2, sigmaR2=sigmaR2)
    ch = generate_channels(cfg)
    return cfg, ch, build_quadratic_problem(ch, cfg)


def cmd_bench(spec, args):
    if spec.out_path is None:
        raise ConfigError("bench needs an output path (--out or out_path in the config)")
    records, summary = run_experiment(spec)
    for row in summary:
        print(f"SNR {row.snr_db:5.1f} dB: median rate {row.median_rate_ratio_percent:6.2f}% "
              f"of bound, mean LM iterations {row.mean_lm_iterations:7.1f}, "
              f"degraded {row.degraded}")
    print(f"wrote {len(records)} records to {spec.out_path} and {summary_path(spec.out_path)}")
    return EXIT_NUMERICAL if any(r.degraded_flag for r in records) else EXIT_OK


def cmd_solve(spec, args):
    cfg, ch, qp = _instance(spec)
    report = balance(qp, spec.lm, spec.bisect, channels=ch)
    out = dict(report.summary(), snr_db=spec.snr_list_db[0], seed=cfg.seed,
               sinrs=report.sinrs.tolist())
    if args.show_precoder:
        out['Omega_real'] = np.real(report.Omega).tolist()
        out['Omega_imag'] = np.imag(report.Omega).tolist()
    print(json.dumps(out, indent=2))
    return EXIT_NUMERICAL if report.degraded else EXIT_OK


def cmd_bound(spec, args):
    _, _, qp = _instance(spec)
    result = upper_bound(whiten(qp))
    print(json.dumps({'gamma_bar': result.gamma_bar, 'j_star': result.j_star,
                      'per_user_max': result.per_user_max.tolist()}, indent=2))
    return EXIT_OK


def cmd_check(spec, args):
    results = run_all(args.scale)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def make_parser():
    parser = argparse.ArgumentParser(prog='twrelay', description=__doc__.splitlines()[0])
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON experiment file')
    common.add_argument('--trials', type=int)
    common.add_argument('--snr', type=_floats, help='comma-separated P/sigma2 values in dB')
    common.add_argument('--snr-mac', type=float, help='P/sigmaR2 in dB')
    common.add_argument('--pairs', type=int, help='user pairs M')
    common.add_argument('--antennas', type=int, help='relay antennas N_R')
    common.add_argument('--power', type=float, help='relay power budget P')
    common.add_argument('--seed', type=int, help='base seed')
    common.add_argument('--out', help='results CSV path')
    common.add_argument('--threads', type=int)
    common.add_argument('--eps-bisect', type=float)
    common.add_argument('--nmax', type=int, help='LM iteration cap')
    common.add_argument('--no-timing', action='store_true',
                        help='write zero wall times so output is reproducible byte for byte')

    sub.add_parser('bench', parents=[common], help='Monte-Carlo SNR sweep')
    solve = sub.add_parser('solve', parents=[common], help='balance one instance')
    solve.add_argument('--show-precoder', action='store_true')
    sub.add_parser('bound', parents=[common], help='minimax bound of one instance')
    check = sub.add_parser('check', parents=[common], help='randomized property checks')
    check.add_argument('--scale', type=float, default=1.0,
                       help='fraction of the full instance counts to run')
    return parser


COMMANDS = {'bench': cmd_bench, 'solve': cmd_solve, 'bound': cmd_bound, 'check': cmd_check}


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        spec = load_config(args.config) if args.config else ExperimentSpec()
        spec = apply_overrides(spec, args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](spec, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RelayError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
