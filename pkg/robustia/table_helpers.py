"""Helper functions that turn simulation records into astropy tables

Use
---

    from robustia.table_helpers import export, records_to_table
    export(records, 'csv', 'run.csv')
    t = records_to_table(records)

"""

import json

import numpy as np
from astropy.table import Table

from . import conf

__all__ = ['RECORD_COLUMNS', 'records_to_table', 'table_rows', 'export']

# column name, dtype
RECORD_COLUMNS = [
    ('t', int),
    ('cell', int),
    ('rate_bps_hz', float),
    ('ee_bps_hz_per_w', float),
    ('user', int),
    ('slnr', float),
    ('power_w', float),
    ('lif_iui', float),
    ('lif_ici', float),
    ('ia_residual', float),
    ('f_subspace_dist', float),
    ('u_subspace_dist', float),
    ('gate_updated', int),
    ('seed', int),
]


def records_to_table(records):
    """One row per (record, cell, user), columns in export order."""
    rows = []
    for record in records:
        B, K = record.power.shape
        for b in range(B):
            for k in range(K):
                rows.append((record.t, b, record.rate[b], record.ee[b], k, record.slnr[b, k],
                             record.power[b, k], record.lif_iui[b, k], record.lif_ici[b, k],
                             record.ia_residual[b, k], record.f_subspace_dist[b],
                             record.u_subspace_dist[b, k], int(record.gate_updated[b]), record.seed))
    names = [name for name, _ in RECORD_COLUMNS]
    dtypes = [dtype for _, dtype in RECORD_COLUMNS]
    if rows:
        t = Table(rows=rows, names=names, dtype=dtypes)
    else:
        t = Table(names=names, dtype=dtypes)
    _set_formats(t)
    return t


def _set_formats(t):
    for name in t.colnames:
        if t[name].dtype.kind == 'f':
            t[name].format = '.{}g'.format(conf.significant_digits)


def _rounded(value):
    if isinstance(value, (float, np.floating)):
        return float(format(value, '.{}g'.format(conf.significant_digits)))
    if isinstance(value, (np.integer, np.bool_)):
        return int(value)
    return value


def table_rows(t):
    """List of dicts with values rounded to the export precision."""
    return [{name: _rounded(row[name]) for name in t.colnames} for row in t]


def export(records, format, path):
    """Write records as CSV or JSON.

    :param records: sequence of MetricsRecord
    :param format: 'csv' or 'json'
    :param path: output file name or writable file object
    """
    t = records_to_table(records)
    if format == 'csv':
        options = {'overwrite': True} if isinstance(path, str) else {}
        t.write(path, format='ascii.csv', **options)
    elif format == 'json':
        rows = table_rows(t)
        if isinstance(path, str):
            with open(path, 'w') as json_file:
                json.dump(rows, json_file, indent=1)
        else:
            json.dump(rows, path, indent=1)
    else:
        raise ValueError('unsupported export format {}'.format(format))
