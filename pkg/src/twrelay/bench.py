"""Monte-Carlo benchmark over peak-power-to-noise ratios.

For every SNR point and trial a channel is drawn with
``seed = base_seed + trial``, the problem is balanced, and one
`TrialRecord` is produced.  Records are written as CSV together with a
per-SNR summary file next to it.
"""
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, field, fields
import math
import os
from pathlib import Path

import numpy as np

from .balance import BisectionConfig, balance, min_rate
from .channel import SystemConfig, generate_channels
from .errors import InvalidParameterError, RelayError
from .forms import build_quadratic_problem
from .lm import LMConfig

__all__ = ['ExperimentSpec', 'TrialRecord', 'SummaryRow', 'noise_levels',
           'run_trial', 'run_experiment', 'summarize', 'write_csv',
           'read_records', 'read_summary', 'summary_path', 'CSV_HEADER']

CSV_HEADER = ['snr_db', 'trial', 'seed', 'min_sinr', 'gamma_bar', 'min_rate',
              'rate_ratio_percent', 'lm_iterations', 'mean_linesearch',
              'wall_time_ms', 'degraded']
SUMMARY_HEADER = ['snr_db', 'trials', 'mean_rate_ratio_percent',
                  'median_rate_ratio_percent', 'mean_lm_iterations',
                  'mean_linesearch', 'mean_wall_time_ms',
                  'mean_bisection_steps', 'degraded']


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark sweep.

    ``system.seed`` is the base seed; ``system.sigma2`` and
    ``system.sigmaR2`` are overwritten from the SNR settings.  With
    ``record_timing=False`` the wall-time columns are written as zero so
    that repeated runs produce identical files.
    """
    trials: int = 100
    snr_list_db: tuple = (0.0, 10.0, 20.0, 30.0)
    snr_mac_db: float = 10.0
    system: SystemConfig = field(default_factory=SystemConfig)
    lm: LMConfig = field(default_factory=LMConfig)
    bisect: BisectionConfig = field(default_factory=BisectionConfig)
    out_path: str = None
    threads: int = 1
    record_timing: bool = True

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidParameterError(f"trials must be a positive integer, got {self.trials}")
        snrs = tuple(float(s) for s in self.snr_list_db)
        if not snrs:
            raise InvalidParameterError("snr_list_db must not be empty")
        if not all(math.isfinite(s) for s in snrs + (float(self.snr_mac_db),)):
            raise InvalidParameterError("SNR values must be finite")
        if self.threads < 1:
            raise InvalidParameterError(f"threads must be at least 1, got {self.threads}")
        object.__setattr__(self, 'snr_list_db', snrs)


@dataclass
class TrialRecord:
    snr_db: float
    trial_index: int
    seed: int
    min_sinr: float
    gamma_bar: float
    min_rate: float
    rate_ratio_percent: float
    lm_iterations: int
    mean_linesearch: float
    wall_time_ms: float
    degraded_flag: bool
    bisection_steps: int = 0


@dataclass
class SummaryRow:
    snr_db: float
    trials: int
    mean_rate_ratio_percent: float
    median_rate_ratio_percent: float
    mean_lm_iterations: float
    mean_linesearch: float
    mean_wall_time_ms: float
    mean_bisection_steps: float
    degraded: int


def noise_levels(P, snr_db, snr_mac_db):
    """``(sigma2, sigmaR2)`` from the downlink SNR and the MAC-phase SNR."""
    return P / 10 ** (snr_db / 10), P / 10 ** (snr_mac_db / 10)


def run_trial(spec, snr_db, trial):
    """Balance one channel draw and return its `TrialRecord`."""
    sigma2, sigmaR2 = noise_levels(spec.system.P, snr_db, spec.snr_mac_db)
    seed = spec.system.seed + trial
    cfg = spec.system.with_(sigma2=sigma2, sigmaR2=sigmaR2, seed=seed)
    try:
        ch = generate_channels(cfg)
        report = balance(build_quadratic_problem(ch, cfg), spec.lm, spec.bisect, channels=ch)
    except RelayError:
        nan = float('nan')
        return TrialRecord(snr_db, trial, seed, nan, nan, nan, nan, 0, nan, 0.0, True)
    bound_rate = min_rate(report.gamma_bar)
    ratio = 100.0 * report.min_rate / bound_rate if bound_rate > 0 else 100.0
    return TrialRecord(
        snr_db=snr_db,
        trial_index=trial,
        seed=seed,
        min_sinr=report.min_sinr,
        gamma_bar=report.gamma_bar,
        min_rate=report.min_rate,
        rate_ratio_percent=ratio,
        lm_iterations=report.iterations,
        mean_linesearch=report.linesearch_per_step,
        wall_time_ms=1e3 * report.wall_time if spec.record_timing else 0.0,
        degraded_flag=report.degraded,
        bisection_steps=len(report.steps),
    )


def _run_task(args):
    return run_trial(*args)


def _mean(values):
    values = [v for v in values if not math.isnan(v)]
    return float(np.mean(values)) if values else float('nan')


def summarize(records):
    """Per-SNR means and medians, in ascending SNR order."""
    rows = []
    for snr in sorted({r.snr_db for r in records}):
        group = [r for r in records if r.snr_db == snr]
        ratios = [r.rate_ratio_percent for r in group if not math.isnan(r.rate_ratio_percent)]
        rows.append(SummaryRow(
            snr_db=snr,
            trials=len(group),
            mean_rate_ratio_percent=_mean(ratios),
            median_rate_ratio_percent=float(np.median(ratios)) if ratios else float('nan'),
            mean_lm_iterations=_mean([r.lm_iterations for r in group]),
            mean_linesearch=_mean([r.mean_linesearch for r in group]),
            mean_wall_time_ms=_mean([r.wall_time_ms for r in group]),
            mean_bisection_steps=_mean([r.bisection_steps for r in group]),
            degraded=sum(bool(r.degraded_flag) for r in group),
        ))
    return rows


def summary_path(path):
    return Path(path).with_suffix('.summary.csv')


def _check_writable(path):
    for target in (Path(path), summary_path(path)):
        try:
            with open(target, 'a', encoding='utf-8'):
                pass
        except OSError as exc:
            raise OSError(f"cannot write results to {target}: {exc.strerror}") from exc


def run_experiment(spec):
    """Run the full sweep; writes CSV files when ``spec.out_path`` is set.

    Returns ``(records, summary)``; records are sorted by (SNR, trial)
    regardless of the number of worker processes.
    """
    if spec.out_path is not None:
        _check_writable(spec.out_path)
    tasks = [(spec, snr, trial) for snr in spec.snr_list_db for trial in range(spec.trials)]
    if spec.threads > 1:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=lambda r: (r.snr_db, r.trial_index))
    summary = summarize(records)
    if spec.out_path is not None:
        write_csv(records, summary, spec.out_path)
    return records, summary


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return '1' if value else '0'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.10g}"


def write_csv(records, summary, path):
    """Write records to ``path`` and the summary to ``<stem>.summary.csv``."""
    if not records:
        raise ValueError("no records to write")
    rows = [[r.snr_db, r.trial_index, r.seed, r.min_sinr, r.gamma_bar, r.min_rate,
             r.rate_ratio_percent, r.lm_iterations, r.mean_linesearch,
             r.wall_time_ms, r.degraded_flag] for r in records]
    _write_rows(path, CSV_HEADER, rows)
    srows = [[getattr(s, f.name) for f in fields(SummaryRow)] for s in summary]
    _write_rows(summary_path(path), SUMMARY_HEADER, srows)


def _write_rows(path, header, rows):
    try:
        with open(path, 'w', encoding='utf-8', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_records(path):
    """Parse a records CSV written by `write_csv`."""
    with open(path, encoding='utf-8', newline='') as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [TrialRecord(
            snr_db=float(row['snr_db']),
            trial_index=int(row['trial']),
            seed=int(row['seed']),
            min_sinr=float(row['min_sinr']),
            gamma_bar=float(row['gamma_bar']),
            min_rate=float(row['min_rate']),
            rate_ratio_percent=float(row['rate_ratio_percent']),
            lm_iterations=int(row['lm_iterations']),
            mean_linesearch=float(row['mean_linesearch']),
            wall_time_ms=float(row['wall_time_ms']),
            degraded_flag=row['degraded'] == '1',
        ) for row in reader]


def read_summary(path):
    with open(path, encoding='utf-8', newline='') as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            values = {}
            for f in fields(SummaryRow):
                cast = int if f.type in (int, 'int') else float
                values[f.name] = cast(row[f.name])
            out.append(SummaryRow(**values))
        return out


def spec_as_dict(spec):
    """JSON-friendly view of an `ExperimentSpec`."""
    d = asdict(spec)
    d['bisect']['snr_breakpoints'] = [list(p) for p in spec.bisect.snr_breakpoints]
    d['snr_list_db'] = list(spec.snr_list_db)
    return d


def default_threads():
    return max(1, min(8, os.cpu_count() or 1))
