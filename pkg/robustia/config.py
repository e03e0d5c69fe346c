"""Network configuration: defaults, validation and flat key-value files.

All fields are stored in SI base units (W, m/s, Hz, s). Values read from a
file may carry a unit, e.g. ``P_T = 42 dBm`` or ``v = 5 km/h``, and are
converted with astropy.units on load.

Use
---

    from robustia.config import load_config, save_config
    cfg = load_config('network.cfg')
    cfg_low_power = cfg.replace(P_T=1.)
    save_config(cfg_low_power, 'low_power.cfg')

"""

import configparser
import re
from collections import OrderedDict

import astropy.units as u
import numpy as np

from .exceptions import ConfigParseError, ConfigValidationError

__all__ = ['NetworkConfig', 'load_config', 'save_config', 'parse_config', 'dbm_to_watt']

SECTION = 'network'


def dbm_to_watt(dbm):
    """Convert a power level in dBm to watts."""
    return (dbm * u.dB(u.mW)).physical.to_value(u.W)


# name: (default, type, physical unit of the stored value or None)
DEFAULTS = OrderedDict([
    ('B', (3, int, None)),
    ('K', (4, int, None)),
    ('M', (8, int, None)),
    ('N', (2, int, None)),
    ('d', (1, int, None)),
    ('m_b', (None, int, None)),
    ('P_T', (dbm_to_watt(42.), float, u.W)),
    ('gamma_bar', (0.1, float, None)),
    ('delta2', (1., float, u.W)),
    ('delta_e', (0.05, float, None)),
    ('rho', (0.39, float, None)),
    ('P_c', (dbm_to_watt(30.), float, u.W)),
    ('P_o', (dbm_to_watt(40.), float, u.W)),
    ('v', ((5. * u.km / u.h).to_value(u.m / u.s), float, u.m / u.s)),
    ('f_c', (2e9, float, u.Hz)),
    ('Omega', (66.7e-6, float, u.s)),
    ('T', (10, int, None)),
    ('T_train', (500, int, None)),
    ('L_max', (20, int, None)),
    ('zeta', (1e-2, float, None)),
    ('dinkelbach_tol', (1e-6, float, None)),
    ('slnr_tol', (1e-4, float, None)),
    ('multiplier_max_sweeps', (100, int, None)),
    ('cggm_max_iter', (200, int, None)),
    ('cggm_tol', (1e-6, float, None)),
    ('cggm_grad_tol', (1e-3, float, None)),
    ('armijo_kappa', (0.1, float, None)),
    ('armijo_nu', (2., float, None)),
    ('armijo_tau0', (1., float, None)),
    ('gate_eta', (0.05, float, None)),
    ('gate_threshold', (None, float, None)),
    ('alpha0', (-0.1, float, None)),
    ('step_norm', ('x2', str, None)),
    ('step_decay', (0., float, None)),
    ('training_mode', ('interference_only', str, None)),
    ('carry_receiver', (True, bool, None)),
    ('error_normalization', ('gram_identity', str, None)),
    ('phi_error_coefficient', ('term_count', str, None)),
    ('power_constraint', ('slnr', str, None)),
    ('seed', (0, int, None)),
])

CHOICES = {
    'step_norm': ('x2', 'x1'),
    'training_mode': ('interference_only', 'full'),
    'error_normalization': ('gram_identity', 'per_entry'),
    'phi_error_coefficient': ('term_count', 'printed'),
    'power_constraint': ('slnr', 'sinr'),
}

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')
_AUTO = ('auto', 'none', '')


class NetworkConfig(object):
    """All constants of one simulated scenario.

    Keyword arguments override the defaults listed in ``DEFAULTS``;
    ``m_b=None`` resolves to ``K * d``.
    """

    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(DEFAULTS)
        if unknown:
            raise TypeError('unknown NetworkConfig fields: {}'.format(', '.join(sorted(unknown))))
        for name, (default, kind, _) in DEFAULTS.items():
            value = kwargs.get(name, default)
            if value is not None:
                value = kind(value)
            setattr(self, name, value)
        if self.m_b is None:
            self.m_b = self.K * self.d
        self.validate()

    def validate(self):
        """Raise ConfigValidationError naming the first violated invariant."""
        checks = [
            ('B, K, M, N, d >= 1', min(self.B, self.K, self.M, self.N, self.d) >= 1),
            ('N >= d', self.N >= self.d),
            ('m_b >= K*d', self.m_b >= self.K * self.d),
            ('m_b <= M', self.m_b <= self.M),
            ('powers >= 0', min(self.P_T, self.P_c, self.P_o) >= 0),
            ('delta2 >= 0', self.delta2 >= 0),
            ('delta_e >= 0', self.delta_e >= 0),
            ('rho >= 0', self.rho >= 0),
            ('gamma_bar > 0', self.gamma_bar > 0),
            ('v, f_c, Omega >= 0', min(self.v, self.f_c, self.Omega) >= 0),
            ('T >= 1', self.T >= 1),
            ('T_train >= 0', self.T_train >= 0),
            ('L_max >= 1', self.L_max >= 1),
            ('zeta > 0', self.zeta > 0),
            ('alpha0 < 0', self.alpha0 < 0),
            ('step_decay >= 0', self.step_decay >= 0),
            ('0 < armijo_kappa < 0.5', 0 < self.armijo_kappa < 0.5),
            ('armijo_nu > 1', self.armijo_nu > 1),
            ('armijo_tau0 > 0', self.armijo_tau0 > 0),
            ('gate_eta >= 0', self.gate_eta >= 0),
            ('gate_threshold >= 0', self.gate_threshold is None or self.gate_threshold >= 0),
            ('cggm_max_iter >= 1', self.cggm_max_iter >= 1),
            ('multiplier_max_sweeps >= 1', self.multiplier_max_sweeps >= 1),
        ]
        for name, options in CHOICES.items():
            checks.append(('{} in {}'.format(name, options), getattr(self, name) in options))
        for invariant, holds in checks:
            if not holds:
                raise ConfigValidationError(invariant)
        numbers = [value for name, value in self.as_dict().items()
                   if isinstance(value, float) and name != 'gate_threshold']
        if not np.all(np.isfinite(numbers)):
            raise ConfigValidationError('all fields finite')

    def as_dict(self):
        return OrderedDict((name, getattr(self, name)) for name in DEFAULTS)

    def replace(self, **changes):
        """Return a copy with some fields changed."""
        values = self.as_dict()
        values.update(changes)
        return NetworkConfig(**values)

    def __eq__(self, other):
        if not isinstance(other, NetworkConfig):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __repr__(self):
        return '<NetworkConfig B={0.B} K={0.K} M={0.M} N={0.N} d={0.d} m_b={0.m_b} seed={0.seed}>'.format(self)


def _parse_value(name, text, lineno):
    default, kind, unit = DEFAULTS[name]
    text = text.strip()
    try:
        if name in ('m_b', 'gate_threshold') and text.lower() in _AUTO:
            return None
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is str:
            return text
        if kind is int:
            return int(text)
        if unit is not None:
            match = re.match(r'^(\S+)\s*dBm$', text)
            if match:
                return dbm_to_watt(float(match.group(1)))
            quantity = u.Quantity(text)
            if quantity.unit == u.dimensionless_unscaled:
                return float(quantity.value)
            return float(quantity.to_value(unit))
        return float(text)
    except (ValueError, TypeError, u.UnitsError) as error:
        raise ConfigParseError('cannot parse value {!r} for {}: {}'.format(text, name, error),
                               lineno=lineno, key=name)


def _find_line(lines, key):
    pattern = re.compile(r'^\s*{}\s*[=:]'.format(re.escape(key)))
    for index, line in enumerate(lines):
        if pattern.match(line):
            return index + 1
    return None


def parse_config(text):
    """Parse flat key-value configuration text into a NetworkConfig."""
    lines = text.splitlines()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'),
                                       strict=True)
    parser.optionxform = str
    try:
        parser.read_string('[{}]\n{}'.format(SECTION, text))
    except configparser.DuplicateOptionError as error:
        raise ConfigParseError('duplicate key', lineno=error.lineno - 1, key=error.option)
    except configparser.ParsingError as error:
        lineno, line = error.errors[0]
        raise ConfigParseError('cannot parse {}'.format(line.strip()), lineno=lineno - 1)
    except configparser.Error as error:
        raise ConfigParseError(str(error))

    if parser.sections() != [SECTION]:
        raise ConfigParseError('section headers are not supported', key=parser.sections()[-1])

    values = {}
    for key, text_value in parser.items(SECTION):
        lineno = _find_line(lines, key)
        if key not in DEFAULTS:
            raise ConfigParseError('unknown key {!r}'.format(key), lineno=lineno, key=key)
        values[key] = _parse_value(key, text_value, lineno)
    return NetworkConfig(**values)


def load_config(path):
    """Read, parse and validate a configuration file.

    An empty file yields the default scenario.
    """
    with open(path) as config_file:
        return parse_config(config_file.read())


def _format_value(value):
    if value is None:
        return 'auto'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_config(cfg, path):
    """Write cfg as SI-valued key-value text readable by `load_config`."""
    with open(path, 'w') as config_file:
        config_file.write('# robustia network configuration (SI units)\n')
        for name, value in cfg.as_dict().items():
            config_file.write('{} = {}\n'.format(name, _format_value(value)))
