"""Helper functions for plotting sweep and convergence results

Use
---

    from robustia.plotting_helpers import plot_sweep
    plot_sweep(sweep_table, 'transmit_power_dbm', 'power_sweep.pdf')

"""
import os

import numpy as np
import pylab as pl

__all__ = ['plot_sweep', 'plot_convergence']

AXIS_LABELS = {
    'transmit_power_dbm': 'Transmit power constraint (dBm)',
    'error_std': 'Channel error standard deviation',
    'velocity_kmh': 'User velocity (km/h)',
}


def _save(fig, path):
    out_dir = os.path.dirname(path)
    if out_dir and not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    fig.savefig(path, transparent=True, bbox_inches='tight', pad_inches=0.05)
    pl.close(fig)


def plot_sweep(t, axis, path, columns=('rate', 'ee')):
    """Plot mean per-cell rate and EE with standard errors versus the sweep axis.

    Parameters
    ----------
    t : astropy.table.Table
        Output of `robustia.simulation.sweep`.
    axis : str
        Name of the swept column.
    path : str
        Output figure file; the format follows the extension.
    columns : sequence of str
        Quantity prefixes, each plotted in its own panel from the
        ``<prefix>_mean`` and ``<prefix>_sem`` columns.

    """
    fig, axes = pl.subplots(1, len(columns), figsize=(6 * len(columns), 5), facecolor='w',
                            edgecolor='k', squeeze=False)
    x = np.array(t[axis], dtype=float)
    for ax, prefix in zip(axes[0], columns):
        mean = np.array(t['{}_mean'.format(prefix)], dtype=float)
        sem = np.nan_to_num(np.array(t['{}_sem'.format(prefix)], dtype=float))
        ax.errorbar(x, mean, yerr=sem, fmt='ko-', capsize=3)
        ax.set_xlabel(AXIS_LABELS.get(axis, axis))
        unit = t['{}_mean'.format(prefix)].unit
        ax.set_ylabel('{} ({})'.format(prefix, unit) if unit is not None else prefix)
        ax.grid(True, ls=':')
    _save(fig, path)


def plot_convergence(traces, path):
    """Energy efficiency per Dinkelbach iteration, one line per cell.

    :param traces: sequence of 1D arrays of Q values
    :param path: output figure file
    """
    fig = pl.figure(figsize=(6, 5), facecolor='w', edgecolor='k')
    for cell, trace in enumerate(traces):
        pl.plot(np.arange(len(trace)), trace, 'o-', label='cell {}'.format(cell))
    pl.xlabel('Iteration')
    pl.ylabel('Energy efficiency (bit/s/Hz/W)')
    pl.legend(loc='lower right')
    _save(fig, path)
