"""Scenario orchestration, Monte Carlo sweeps and the command line interface.

One time instant runs: channel evolution, gated outer beamformer per cell,
inner beamformer per cell, energy-efficient powers per cell (Gauss-Seidel in
cell order), receive-filter training per user, metrics.

Use
---

    from robustia.config import NetworkConfig
    from robustia.simulation import run_scenario, SweepSpec, sweep
    records = run_scenario(NetworkConfig(T=5))
    t = sweep(SweepSpec('transmit_power_dbm', [30, 38, 46], drops=20))

or from the shell

    robustia simulate --config network.cfg --out run.csv
    robustia sweep --config network.cfg --axis error_std --values 0,0.1,0.2 --drops 100 --out sweep.csv

"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import astropy.units as u
import numpy as np
from astropy import log
from astropy.table import Table

from . import conf
from .channel_model import doppler_alpha, draw_channels, evolve
from .config import NetworkConfig, dbm_to_watt, load_config
from .ee_power import PowerModel, RateContext, cell_power, energy_efficient_powers
from .exceptions import (ConfigParseError, ConfigValidationError, InfeasibleSLNRError,
                         InvariantError, RobustIAError)
from .inner_beamformer import CellGrams, beamforming_directions, lif, slnr, solve_inner
from .linalg_helpers import minor_subspace, random_orthonormal, subspace_distance
from .outer_beamformer import CGGMOptions, SMGateState, interference_covariance, sm_update
from .receive_tracker import (NetworkBeamformers, ia_residual, received_covariance, track,
                              training_samples)
from .statistics_helpers import binomial_fraction_uncertainty, mean_and_standard_error, \
    paired_difference
from .table_helpers import export

__all__ = ['BASELINES', 'World', 'MetricsRecord', 'run_instant', 'run_scenario', 'SweepSpec',
           'sweep', 'compare_baselines', 'ee_convergence', 'main']

BASELINES = ('none', 'nonrobust', 'oracle')

RATE_UNIT = u.bit / u.s / u.Hz
EE_UNIT = RATE_UNIT / u.W


class World(object):
    """Persistent state of one simulated network.

    Parameters
    ----------
    cfg : NetworkConfig
    baseline : str
        'none' (robust pipeline), 'nonrobust' (delta_e forced to 0 in the
        beamformer design) or 'oracle' (direct eigendecompositions instead
        of the trackers).
    debug : bool, optional
        Re-check result invariants after every instant; defaults to
        ``robustia.conf.debug_checks``.

    """

    def __init__(self, cfg, baseline='none', debug=None):
        if baseline not in BASELINES:
            raise ValueError('unknown baseline {}, expected one of {}'.format(baseline, BASELINES))
        self.cfg = cfg
        self.baseline = baseline
        self.debug = conf.debug_checks if debug is None else debug
        self.rng = np.random.default_rng(cfg.seed)
        self.alpha = doppler_alpha(cfg.v, cfg.f_c, cfg.Omega)
        self.channels = draw_channels(cfg, self.rng)
        self.outer = [random_orthonormal(self.rng, cfg.M, cfg.m_b) for b in range(cfg.B)]
        self.receivers = [[random_orthonormal(self.rng, cfg.N, cfg.d) for k in range(cfg.K)]
                          for b in range(cfg.B)]
        self.gates = [SMGateState(cfg.gate_eta, cfg.gate_threshold) for b in range(cfg.B)]
        self.power_model = PowerModel.from_config(cfg)
        self.cggm_options = CGGMOptions.from_config(cfg)
        self.t = 0

    @property
    def design_delta_e(self):
        """Error level assumed by the beamformer design."""
        return 0. if self.baseline == 'nonrobust' else self.cfg.delta_e

    def __repr__(self):
        return '<World t={} baseline={} {!r}>'.format(self.t, self.baseline, self.cfg)


class MetricsRecord(object):
    """Observables of one time instant.

    Per-cell arrays have shape (B,), per-user arrays (B, K).

    Attributes
    ----------
    t, seed : int
    rate, ee, total_power : ndarray (B,)
        bits/s/Hz, bits/s/Hz/W and W.
    q_traces : list of ndarray
        Dinkelbach EE values per iteration for every cell.
    slnr, power, lif_iui, lif_ici, ia_residual, u_subspace_dist : ndarray (B, K)
    desired_full_rank : ndarray (B, K) of bool
    f_subspace_dist : ndarray (B,)
    gate_updated, feasible, budget_limited : ndarray (B,) of bool

    """

    def __init__(self, **fields):
        for name, value in fields.items():
            setattr(self, name, value)

    @property
    def q_trace_length(self):
        return np.array([len(trace) for trace in self.q_traces])

    def __repr__(self):
        return '<MetricsRecord t={} seed={} mean rate={:.4g}>'.format(self.t, self.seed,
                                                                     np.mean(self.rate))


def _outer_step(world):
    cfg = world.cfg
    H_hat = world.channels.estimate
    covariances = []
    updated = np.zeros(cfg.B, dtype=bool)
    for b in range(cfg.B):
        others = [bp for bp in range(cfg.B) if bp != b]
        Phi = interference_covariance(H_hat[others, :, b], world.design_delta_e,
                                      cfg.phi_error_coefficient)
        if world.baseline == 'oracle':
            world.outer[b] = minor_subspace(Phi, cfg.m_b)
            updated[b] = True
        else:
            world.outer[b], updated[b] = sm_update(Phi, world.gates[b], world.cggm_options,
                                                   F0=world.outer[b])
        covariances.append(Phi)
    return covariances, updated


def _inner_step(world):
    cfg = world.cfg
    directions = []
    floors = np.zeros((cfg.B, cfg.K))
    start = np.zeros((cfg.B, cfg.K))
    feasible = np.ones(cfg.B, dtype=bool)
    budget_limited = np.zeros(cfg.B, dtype=bool)
    for b in range(cfg.B):
        grams = CellGrams.from_channels(world.channels, b, world.design_delta_e)
        try:
            solution = solve_inner(world.outer[b], grams, cfg.gamma_bar, cfg.delta2, cfg.P_T, cfg.d,
                                   cfg.power_constraint, cfg.slnr_tol, cfg.multiplier_max_sweeps)
        except InfeasibleSLNRError as error:
            log.warning('cell {} at t={}: {}; using equal-power fallback'.format(b, world.t, error))
            directions.append(beamforming_directions(cfg.delta2 * np.ones(cfg.K), world.outer[b],
                                                     grams, cfg.delta2, cfg.d))
            start[b] = cfg.P_T / cfg.K
            feasible[b] = False
            continue
        directions.append(solution.directions)
        floors[b] = solution.powers
        start[b] = solution.powers
        budget_limited[b] = solution.budget_limited
    return directions, floors, start, feasible, budget_limited


def _power_step(world, directions, floors, start):
    cfg = world.cfg
    powers = start.copy()
    results = []
    for b in range(cfg.B):
        context = RateContext.from_network(b, world.channels, world.outer, directions, powers,
                                           cfg.delta2, kind='estimate', delta_e=world.design_delta_e)
        result = energy_efficient_powers(floors[b], context, world.power_model, cfg.P_T, cfg.zeta,
                                         cfg.L_max, cfg.dinkelbach_tol)
        powers[b] = result.powers
        results.append(result)
    return powers, results


def _receive_step(world, beamformers):
    cfg = world.cfg
    for b in range(cfg.B):
        for k in range(cfg.K):
            if world.baseline == 'oracle':
                Q = received_covariance(b, k, world.channels, beamformers, cfg.delta2,
                                        cfg.training_mode)
                world.receivers[b][k] = minor_subspace(Q, cfg.d)
                continue
            if cfg.carry_receiver:
                U0 = world.receivers[b][k]
            else:
                U0 = random_orthonormal(world.rng, cfg.N, cfg.d)
            X = training_samples(b, k, world.channels, beamformers, cfg.delta2, world.rng,
                                 cfg.T_train, cfg.training_mode)
            world.receivers[b][k] = track(U0, X.T, cfg.alpha0, step_norm=cfg.step_norm,
                                            decay=cfg.step_decay).U


def _metrics(world, covariances, beamformers, ee_results, updated, feasible, budget_limited):
    cfg = world.cfg
    B, K = cfg.B, cfg.K
    powers = beamformers.powers
    rate = np.zeros(B)
    total_power = np.zeros(B)
    user_slnr = np.zeros((B, K))
    iui = np.zeros((B, K))
    ici = np.zeros((B, K))
    f_dist = np.zeros(B)
    u_dist = np.zeros((B, K))
    for b in range(B):
        context = RateContext.from_network(b, world.channels, beamformers.outer,
                                           beamformers.directions, powers, cfg.delta2)
        rate[b] = context.rate(powers[b])
        total_power[b] = cell_power(powers[b], world.power_model)
        grams = CellGrams.from_channels(world.channels, b, cfg.delta_e)
        for k in range(K):
            user_slnr[b, k] = slnr(k, beamformers.directions[b], powers[b], beamformers.outer[b],
                                   grams, cfg.delta2)
            iui[b, k], ici[b, k] = lif(k, beamformers.directions[b], powers[b], beamformers.outer[b],
                                       grams)
            Q = received_covariance(b, k, world.channels, beamformers, cfg.delta2, cfg.training_mode)
            u_dist[b, k] = subspace_distance(world.receivers[b][k], minor_subspace(Q, cfg.d))
        f_dist[b] = subspace_distance(world.outer[b], minor_subspace(covariances[b], cfg.m_b))
    residual, full_rank = ia_residual(world.receivers, world.channels, beamformers)
    return MetricsRecord(
        t=world.t, seed=cfg.seed, rate=rate, ee=rate / total_power, total_power=total_power,
        q_traces=[result.q_trace for result in ee_results], slnr=user_slnr, power=powers.copy(),
        lif_iui=iui, lif_ici=ici, ia_residual=residual, desired_full_rank=full_rank,
        f_subspace_dist=f_dist, u_subspace_dist=u_dist, gate_updated=updated, feasible=feasible,
        budget_limited=budget_limited)


def _check_invariants(world, record, beamformers, floors):
    cfg = world.cfg
    numeric = [record.rate, record.ee, record.slnr, record.power, record.lif_iui, record.lif_ici,
               record.ia_residual, record.f_subspace_dist, record.u_subspace_dist]
    if not all(np.all(np.isfinite(values)) for values in numeric):
        raise InvariantError('non-finite metrics at t={}'.format(record.t))
    recomputed = record.rate / np.array([cell_power(p, world.power_model) for p in record.power])
    if np.any(np.abs(recomputed - record.ee) > 1e-12 * np.maximum(1., np.abs(record.ee))):
        raise InvariantError('EE differs from rate / total power')
    for F in beamformers.outer:
        if np.linalg.norm(F.conj().T @ F - np.eye(cfg.m_b)) > 1e-10:
            raise InvariantError('outer beamformer lost orthonormality')
    for row in world.receivers:
        for U in row:
            if np.linalg.norm(U.conj().T @ U - np.eye(cfg.d)) > 1e-8:
                raise InvariantError('receive filter lost orthonormality')
    slack = 1e-9 * max(1., cfg.P_T)
    if np.any(record.power < floors - slack) or np.any(record.power.sum(axis=1) > cfg.P_T + slack):
        raise InvariantError('powers violate floors or budget')


def run_instant(world):
    """Advance the world by one time instant and return its MetricsRecord."""
    cfg = world.cfg
    if world.t > 0:
        world.channels = evolve(world.channels, world.alpha, world.rng)
    covariances, updated = _outer_step(world)
    directions, floors, start, feasible, budget_limited = _inner_step(world)
    powers, ee_results = _power_step(world, directions, floors, start)
    beamformers = NetworkBeamformers(list(world.outer), directions, powers)
    _receive_step(world, beamformers)
    record = _metrics(world, covariances, beamformers, ee_results, updated, feasible,
                      budget_limited)
    if world.debug:
        _check_invariants(world, record, beamformers, floors)
    log.debug('t={} rate={} ee={}'.format(world.t, record.rate, record.ee))
    world.t += 1
    return record


def run_scenario(cfg, baseline='none', verbose=False, debug=None):
    """Run cfg.T instants from a fresh world seeded with cfg.seed."""
    world = World(cfg, baseline, debug)
    records = []
    for t in range(cfg.T):
        records.append(run_instant(world))
        if verbose:
            log.info('seed {} instant {}/{}: mean rate {:.4f} bit/s/Hz, mean EE {:.4f} bit/s/Hz/W'.format(
                cfg.seed, t + 1, cfg.T, np.mean(records[-1].rate), np.mean(records[-1].ee)))
    return records


class SweepSpec(object):
    """Parameter sweep description.

    Parameters
    ----------
    axis : str
        'transmit_power_dbm', 'error_std' or 'velocity_kmh'.
    values : sequence of float
    drops : int, optional
        Monte Carlo drops per value, defaults to ``robustia.conf.monte_carlo_drops``.
    base : NetworkConfig, optional

    """

    AXES = ('transmit_power_dbm', 'error_std', 'velocity_kmh')

    def __init__(self, axis, values, drops=None, base=None):
        if axis not in self.AXES:
            raise ValueError('unknown sweep axis {}, expected one of {}'.format(axis, self.AXES))
        if len(values) == 0:
            raise ValueError('sweep needs at least one value')
        self.axis = axis
        self.values = [float(value) for value in values]
        self.drops = conf.monte_carlo_drops if drops is None else int(drops)
        if self.drops < 1:
            raise ValueError('drops must be >= 1')
        self.base = NetworkConfig() if base is None else base

    def drop_seeds(self):
        """Independent seeds per drop, shared across axis values."""
        children = np.random.SeedSequence(self.base.seed).spawn(self.drops)
        return [int(child.generate_state(1)[0]) for child in children]

    def config_for(self, value, seed):
        if self.axis == 'transmit_power_dbm':
            return self.base.replace(P_T=dbm_to_watt(value), seed=seed)
        if self.axis == 'error_std':
            return self.base.replace(delta_e=value, seed=seed)
        return self.base.replace(v=(value * u.km / u.h).to_value(u.m / u.s), seed=seed)

    def __repr__(self):
        return '<SweepSpec axis={} values={} drops={}>'.format(self.axis, self.values, self.drops)


def _summarize_drop(job):
    """Run one drop; module level so that it can be sent to worker processes."""
    index, drop, cfg, baseline = job
    try:
        records = run_scenario(cfg, baseline)
    except RobustIAError as error:
        return dict(index=index, drop=drop, error=str(error))
    return dict(index=index, drop=drop, error=None,
                rate=float(np.mean([record.rate for record in records])),
                ee=float(np.mean([record.ee for record in records])),
                infeasible=bool(not np.any([record.feasible for record in records])),
                gate_updates=float(np.mean([record.gate_updated for record in records])))


def _run_jobs(jobs, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_summarize_drop, jobs))
    else:
        summaries = [_summarize_drop(job) for job in jobs]
    return sorted(summaries, key=lambda summary: (summary['index'], summary['drop']))


def sweep(spec, baseline='none', workers=1, verbose=False):
    """Monte Carlo sweep of mean per-cell rate and EE over one axis.

    Returns
    -------
    t : astropy.table.Table
        One row per axis value with mean and standard error over drops of
        rate and EE, the number of drops used, failed and infeasible, and
        the fraction of gated outer-beamformer updates.

    """
    seeds = spec.drop_seeds()
    jobs = [(index, drop, spec.config_for(value, seed), baseline)
            for index, value in enumerate(spec.values) for drop, seed in enumerate(seeds)]
    summaries = _run_jobs(jobs, workers)

    rows = []
    for index, value in enumerate(spec.values):
        mine = [summary for summary in summaries if summary['index'] == index]
        good = [summary for summary in mine if summary['error'] is None]
        for summary in mine:
            if summary['error'] is not None:
                log.warning('{}={} drop {} failed: {}'.format(spec.axis, value, summary['drop'],
                                                              summary['error']))
        rate_mean, rate_sem = mean_and_standard_error([summary['rate'] for summary in good])
        ee_mean, ee_sem = mean_and_standard_error([summary['ee'] for summary in good])
        gate_fraction = np.mean([summary['gate_updates'] for summary in good]) if good else np.nan
        rows.append((value, rate_mean, rate_sem, ee_mean, ee_sem, len(good), len(mine) - len(good),
                     sum(summary['infeasible'] for summary in good), gate_fraction))
        if verbose:
            log.info('{}={}: rate {:.4f} +- {:.4f}, EE {:.4f} +- {:.4f}'.format(
                spec.axis, value, rate_mean, rate_sem, ee_mean, ee_sem))

    t = Table(rows=rows, names=(spec.axis, 'rate_mean', 'rate_sem', 'ee_mean', 'ee_sem', 'drops',
                                'failed_drops', 'infeasible_drops', 'gate_update_fraction'),
              dtype=(float, float, float, float, float, int, int, int, float))
    for name in ('rate_mean', 'rate_sem'):
        t[name].unit = RATE_UNIT
    for name in ('ee_mean', 'ee_sem'):
        t[name].unit = EE_UNIT
    for name in t.colnames:
        if t[name].dtype.kind == 'f':
            t[name].format = '.{}g'.format(conf.significant_digits)
    return t


def compare_baselines(cfg, drops=None, baseline='nonrobust', workers=1):
    """Paired comparison of the robust pipeline with a baseline.

    Both pipelines see the same channel draws in every drop.

    Returns
    -------
    t : astropy.table.Table
        Per-drop mean EE of both pipelines.
    summary : dict
        ``win_fraction`` with ``win_fraction_lower`` and
        ``win_fraction_upper`` (1-sigma binomial uncertainties) of drops
        in which the robust EE is at least the baseline EE, and the paired
        mean EE difference ``ee_gain`` with its standard error.

    """
    spec = SweepSpec('error_std', [cfg.delta_e], drops, cfg)
    seeds = spec.drop_seeds()
    jobs = []
    for drop, seed in enumerate(seeds):
        jobs.append((0, drop, cfg.replace(seed=seed), 'none'))
        jobs.append((1, drop, cfg.replace(seed=seed), baseline))
    summaries = _run_jobs(jobs, workers)
    robust = {s['drop']: s for s in summaries if s['index'] == 0 and s['error'] is None}
    other = {s['drop']: s for s in summaries if s['index'] == 1 and s['error'] is None}
    paired = sorted(set(robust) & set(other))

    t = Table([paired, [seeds[drop] for drop in paired], [robust[drop]['ee'] for drop in paired],
               [other[drop]['ee'] for drop in paired]],
              names=('drop', 'seed', 'ee_robust', 'ee_{}'.format(baseline)),
              dtype=(int, int, float, float))
    wins = int(np.sum(t['ee_robust'] >= t['ee_{}'.format(baseline)]))
    fraction, lower, upper = binomial_fraction_uncertainty(wins, len(paired))
    gain, gain_sem = paired_difference(t['ee_robust'], t['ee_{}'.format(baseline)])
    summary = dict(baseline=baseline, drops=len(paired), wins=wins, win_fraction=fraction,
                   win_fraction_lower=lower, win_fraction_upper=upper, ee_gain=gain,
                   ee_gain_sem=gain_sem)
    return t, summary


def ee_convergence(cfg, baseline='none'):
    """Dinkelbach EE traces of every cell at the first instant of cfg."""
    record = run_instant(World(cfg, baseline))
    return record.q_traces


def _parse_values(text):
    try:
        return [float(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma-separated numbers, got {!r}'.format(text))


def _load(path):
    return load_config(path) if path is not None else NetworkConfig()


def main(args=None):
    """Command line entry point; returns the process exit code."""
    parser = argparse.ArgumentParser(
        prog='robustia',
        description='Robust interference-alignment transceiver simulation for multi-cell MIMO networks.')
    parser.add_argument('-v', '--verbose', action='store_true', help='Log progress.')
    commands = parser.add_subparsers(dest='command')

    simulate = commands.add_parser('simulate', help='Run one scenario and export per-user metrics.')
    simulate.add_argument('--config', help='Network configuration file (defaults if omitted).')
    simulate.add_argument('--seed', type=int, help='Override the configured seed.')
    simulate.add_argument('--out', help='Output file (stdout if omitted).')
    simulate.add_argument('--format', choices=('csv', 'json'), default='csv')
    simulate.add_argument('--baseline', choices=BASELINES, default='none')

    sweep_parser = commands.add_parser('sweep', help='Monte Carlo sweep over one parameter.')
    sweep_parser.add_argument('--config')
    sweep_parser.add_argument('--axis', choices=SweepSpec.AXES, required=True)
    sweep_parser.add_argument('--values', type=_parse_values, required=True)
    sweep_parser.add_argument('--drops', type=int, default=None)
    sweep_parser.add_argument('--out')
    sweep_parser.add_argument('--baseline', choices=BASELINES, default='none')
    sweep_parser.add_argument('--workers', type=int, default=1)
    sweep_parser.add_argument('--plot', help='Write a figure of the sweep to this file.')

    convergence = commands.add_parser('convergence', help='EE per Dinkelbach iteration at one instant.')
    convergence.add_argument('--config')
    convergence.add_argument('--seed', type=int)
    convergence.add_argument('--plot')

    compare = commands.add_parser('compare', help='Paired EE comparison against a baseline.')
    compare.add_argument('--config')
    compare.add_argument('--drops', type=int, default=None)
    compare.add_argument('--baseline', choices=('nonrobust', 'oracle'), default='nonrobust')
    compare.add_argument('--workers', type=int, default=1)

    res = parser.parse_args(args)
    if res.command is None:
        parser.print_help()
        return 2
    if res.verbose:
        log.setLevel('INFO')

    try:
        cfg = _load(res.config)
        if getattr(res, 'seed', None) is not None:
            cfg = cfg.replace(seed=res.seed)
    except (ConfigParseError, ConfigValidationError) as error:
        log.error('invalid configuration: {}'.format(error))
        return 2
    except OSError as error:
        log.error('cannot read configuration: {}'.format(error))
        return 2

    if res.command == 'simulate':
        records = run_scenario(cfg, res.baseline, verbose=res.verbose)
        export(records, res.format, res.out if res.out is not None else sys.stdout)
        if not any(np.any(record.feasible) for record in records):
            log.error('SLNR targets infeasible in every cell and instant')
            return 3
        return 0

    if res.command == 'sweep':
        try:
            spec = SweepSpec(res.axis, res.values, res.drops, cfg)
        except ValueError as error:
            log.error(str(error))
            return 2
        t = sweep(spec, res.baseline, res.workers, verbose=res.verbose)
        t.write(res.out if res.out is not None else sys.stdout, format='ascii.csv',
                **({'overwrite': True} if res.out is not None else {}))
        if res.plot:
            from .plotting_helpers import plot_sweep
            plot_sweep(t, spec.axis, res.plot)
        if np.all(t['infeasible_drops'] == t['drops']):
            log.error('SLNR targets infeasible in all drops')
            return 3
        return 0

    if res.command == 'convergence':
        traces = ee_convergence(cfg)
        for cell, trace in enumerate(traces):
            print('cell {}: {}'.format(cell, ' '.join('{:.6g}'.format(q) for q in trace)))
        if res.plot:
            from .plotting_helpers import plot_convergence
            plot_convergence(traces, res.plot)
        return 0

    t, summary = compare_baselines(cfg, res.drops, res.baseline, res.workers)
    print('robust EE >= {} EE in {} of {} drops: {:.3f} (-{:.3f} +{:.3f})'.format(
        res.baseline, summary['wins'], summary['drops'], summary['win_fraction'],
        summary['win_fraction_lower'], summary['win_fraction_upper']))
    print('mean EE gain: {:.4g} +- {:.2g} bit/s/Hz/W'.format(summary['ee_gain'], summary['ee_gain_sem']))
    return 0


if __name__ == '__main__':
    sys.exit(main())
