# -*- coding: utf-8 -*-
# Copyright (c) 2021 The sandwich authors
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.
"""
Experiment configuration: a sectioned ``key = value`` file in SI units.

Values are validated when they are loaded; every error names the offending
``[section] key``. The built-in ``paper`` profile carries the published
force-sensor and cavity parameters together with fixture values for what was
never published (loop gains, toy sandwich powers).
"""
import configparser
import os

from sandwich import logger
from sandwich import optics
from sandwich.errors import ConfigurationException, InvalidParameterException
from sandwich.loop import LoopConfig, Noise, filter_block
from sandwich.mechanics import TorsionalPendulum

log = logger.getLogger(__name__)


def _number(value):
    return float(value)


def _positive(value):
    value = float(value)
    if not value > 0:
        raise ValueError("must be positive")
    return value


def _nonnegative(value):
    value = float(value)
    if not value >= 0:
        raise ValueError("must be non-negative")
    return value


def _nonzero(value):
    value = float(value)
    if value == 0 or value != value:
        raise ValueError("must be finite and nonzero")
    return value


def _transmissivity(value):
    value = float(value)
    if not 0 < value <= 1:
        raise ValueError("must lie in (0, 1]")
    return value


def _sign(value):
    value = int(value)
    if value not in (-1, 1):
        raise ValueError("must be -1 or +1")
    return value


def _orientation(value):
    try:
        return optics.Orientation.parse(value)
    except InvalidParameterException as e:
        raise ValueError(str(e))


def _count(minimum):
    def parse(value):
        value = int(value)
        if value < minimum:
            raise ValueError("must be an integer >= %d" % minimum)
        return value
    return parse


def _list_of(parse):
    def parse_list(value):
        items = [item.strip() for item in value.split(',') if item.strip()]
        if not items:
            raise ValueError("must be a comma separated list")
        return [parse(item) for item in items]
    return parse_list


_CAVITY_KEYS = {
    'length': _positive,
    'fixed_radius': _positive,
    'finesse': _positive,
    'power': _nonnegative,
}

SCHEMA = {
    'cavity': dict(_CAVITY_KEYS, **{
        'levitated_radius': _positive,
        'center_distance': _positive,
        'transmissivity': _transmissivity,
        'sigma_transmissivity': _nonnegative,
        'sigma_center_distance': _nonnegative,
        'power_fluctuation': _nonnegative,
        'orientation': _orientation,
    }),
    'sandwich': dict([('upper_' + k, v) for k, v in _CAVITY_KEYS.items()] +
                     [('lower_' + k, v) for k, v in _CAVITY_KEYS.items()], **{
        'mass': _positive,
        'curvature': _positive,
        'gravity': _positive,
        'k_opt_upper': _number,
        'k_opt_lower': _number,
    }),
    'pendulum': {
        'moment_of_inertia': _positive,
        'lever_arm': _positive,
        'natural_frequency': _positive,
        'sigma_natural_frequency': _nonnegative,
        'quality_factor': _positive,
        'mass': _positive,
    },
    'loop': {
        'sensor_gain': _nonzero,
        'filter_gain': _nonzero,
        'actuator_gain': _nonzero,
        'feedback_sign': _sign,
        'injection_amplitude': _nonnegative,
        'frequencies': _list_of(_positive),
        'force_noise_asd': _nonnegative,
        'seismic_amplitude': _nonnegative,
        'seismic_frequency': _positive,
        'phase_noise': _nonnegative,
        'refine_points': _count(0),
    },
    'simulation': {
        'dt': _nonnegative,
        'settle': _nonnegative,
        'cycles': _count(5),
        'seed': _count(0),
    },
    'sweep': {
        'powers': _list_of(_nonnegative),
        'repeats': _count(1),
    },
}

PAPER_PROFILE = """
[cavity]
length = 0.1411
fixed_radius = 0.075
levitated_radius = 0.075
finesse = 880
power = 29.7
transmissivity = 0.0005
sigma_transmissivity = 0.0001
sigma_center_distance = 0.0008
power_fluctuation = 0.18
orientation = upper

[sandwich]
mass = 1e-6
curvature = 0.075
gravity = 9.80665
k_opt_upper = 0.5
k_opt_lower = 0.5
upper_length = 0.1411
upper_fixed_radius = 0.075
upper_finesse = 880
upper_power = 200
lower_length = 0.05
lower_fixed_radius = 0.075
lower_finesse = 880

[pendulum]
moment_of_inertia = 7.2e-6
lever_arm = 0.085
natural_frequency = 0.0322
sigma_natural_frequency = 0.0011
quality_factor = 100
mass = 0.0088

[loop]
sensor_gain = 1000
filter_gain = 0.05
actuator_gain = 1e-5
feedback_sign = -1
injection_amplitude = 3e-4
frequencies = 0.020, 0.0233, 0.0272, 0.0318, 0.0370, 0.0432, 0.0504, 0.0588, 0.0686, 0.080
force_noise_asd = 0
seismic_amplitude = 0
phase_noise = 0
refine_points = 16

[simulation]
dt = 0
settle = 0
cycles = 10
seed = 1

[sweep]
powers = 0, 6, 12, 18, 24, 30
repeats = 1
"""

PROFILES = {'paper': PAPER_PROFILE}


class ExperimentConfig(object):
    ''' Validated experiment configuration.

    Sources are layered: a built-in profile, then a configuration file, then
    single-key overrides, each replacing the keys it sets.
    '''

    try_paths = ('sandwich.ini', '~/.sandwich.ini')

    def __init__(self):
        self._values = {section: {} for section in SCHEMA}

    @classmethod
    def from_profile(cls, name):
        if name not in PROFILES:
            raise ConfigurationException("unknown profile '%s' (known: %s)" % (name, ', '.join(sorted(PROFILES))))
        config = cls()
        config.update_from_string(PROFILES[name], "<profile %s>" % name)
        return config

    @classmethod
    def read(cls, path, profile=None):
        config = cls.from_profile(profile) if profile else cls()
        config.update_from_file(path)
        return config

    @classmethod
    def get_external_config(cls, profile='paper'):
        '''
        Configuration from $SANDWICH_CONFIG or the first existing file of
        ``try_paths``, layered over ``profile``.
        '''
        paths = cls.try_paths
        if os.environ.get('SANDWICH_CONFIG'):
            paths = (os.environ['SANDWICH_CONFIG'],) + paths
        for path in paths:
            path = os.path.expanduser(path)
            if os.path.exists(path):
                log.debug("Using configuration file %s", path)
                return cls.read(path, profile)
        log.debug("No configuration file found, using profile %s", profile)
        return cls.from_profile(profile)

    def update_from_file(self, path):
        if not os.path.exists(path):
            raise ConfigurationException("configuration file %s does not exist" % path)
        with open(path) as f:
            self.update_from_string(f.read(), path)

    def update_from_string(self, text, source="<string>"):
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text, source)
        except configparser.Error as e:
            raise ConfigurationException("%s: %s" % (source, e))
        for section in parser.sections():
            for key, value in parser.items(section):
                self.set(section, key, value)

    def set(self, section, key, value):
        ''' Validate and store one value; raises ConfigurationException naming ``[section] key``. '''
        if section not in SCHEMA:
            raise ConfigurationException("[%s]: unknown section" % section)
        if key not in SCHEMA[section]:
            raise ConfigurationException("[%s] %s: unknown key" % (section, key))
        try:
            parsed = SCHEMA[section][key](str(value))
        except ValueError as e:
            raise ConfigurationException("[%s] %s: invalid value %r (%s)" % (section, key, value, e))
        log.debug("[%s] %s = %r", section, key, parsed)
        self._values[section][key] = parsed

    def get(self, section, key, default=None):
        return self._values[section].get(key, default)

    def has_section(self, section):
        return bool(self._values.get(section))

    def require(self, section, *keys):
        if not self.has_section(section):
            raise ConfigurationException("[%s]: section missing" % section)
        missing = [key for key in keys if key not in self._values[section]]
        if missing:
            raise ConfigurationException("[%s] %s: required key missing" % (section, ', '.join(missing)))

    def _build(self, section, build):
        try:
            return build()
        except InvalidParameterException as e:
            raise ConfigurationException("[%s]: %s" % (section, e))

    def cavity(self, power=None):
        '''
        The single-cavity setup. ``center_distance`` (short branch), when set,
        takes precedence over ``length``.
        '''
        self.require('cavity', 'fixed_radius', 'levitated_radius', 'finesse')
        get = lambda key, default=None: self.get('cavity', key, default)
        if get('center_distance') is None and get('length') is None:
            raise ConfigurationException("[cavity] length, center_distance: one of them is required")

        def build():
            length = get('length')
            if get('center_distance') is not None:
                length = optics.cavity_length(get('center_distance'), get('fixed_radius'), get('levitated_radius'))
                log.debug("[cavity] center_distance %g m gives length %g m", get('center_distance'), length)
            return optics.Cavity(
                length, get('finesse'), get('power', 0.0) if power is None else power,
                optics.Mirror(get('fixed_radius'), get('transmissivity', 0.0)),
                get('levitated_radius'), get('orientation', optics.Orientation.UPPER))
        return self._build('cavity', build)

    def _sandwich_cavity(self, prefix, curvature, power, orientation):
        get = lambda key: self.get('sandwich', prefix + key)
        return optics.Cavity(get('length'), get('finesse'), power,
                             optics.Mirror(get('fixed_radius')), curvature, orientation)

    def sandwich(self):
        ''' The levitated-mirror configuration; without ``lower_power`` the lower cavity carries the weight. '''
        self.require('sandwich', 'mass', 'curvature', 'k_opt_upper', 'k_opt_lower',
                     'upper_length', 'upper_fixed_radius', 'upper_finesse', 'upper_power',
                     'lower_length', 'lower_fixed_radius', 'lower_finesse')
        get = lambda key, default=None: self.get('sandwich', key, default)
        gravity = get('gravity', optics.STANDARD_GRAVITY)
        lower_power = get('lower_power')
        if lower_power is None:
            lower_power = optics.levitation_power(get('mass'), gravity)

        def build():
            upper = self._sandwich_cavity('upper_', get('curvature'), get('upper_power'), optics.Orientation.UPPER)
            lower = self._sandwich_cavity('lower_', get('curvature'), lower_power, optics.Orientation.LOWER)
            return optics.SandwichConfig(upper, lower, get('mass'), get('curvature'),
                                         get('k_opt_upper'), get('k_opt_lower'), gravity)
        return self._build('sandwich', build)

    def pendulum(self):
        self.require('pendulum', 'moment_of_inertia', 'lever_arm', 'natural_frequency', 'quality_factor')
        get = lambda key, default=None: self.get('pendulum', key, default)
        return self._build('pendulum', lambda: TorsionalPendulum(
            get('moment_of_inertia'), get('lever_arm'), get('natural_frequency'),
            get('quality_factor'), get('mass')))

    def sigma_natural_frequency(self):
        return self.get('pendulum', 'sigma_natural_frequency', 0.0)

    def loop(self, k_ext=0.0):
        self.require('loop', 'sensor_gain', 'filter_gain', 'actuator_gain')
        get = lambda key, default=None: self.get('loop', key, default)
        pendulum = self.pendulum()
        return self._build('loop', lambda: LoopConfig(
            pendulum, get('sensor_gain'), filter_block(get('filter_gain')), get('actuator_gain'),
            k_ext, get('feedback_sign', -1)))

    def noise(self):
        return Noise(self.get('loop', 'force_noise_asd', 0.0),
                     self.get('loop', 'seismic_amplitude', 0.0),
                     self.get('loop', 'seismic_frequency'))

    def frequencies(self):
        self.require('loop', 'frequencies')
        return tuple(self.get('loop', 'frequencies'))

    def injection_amplitude(self):
        self.require('loop', 'injection_amplitude')
        return self.get('loop', 'injection_amplitude')

    def phase_noise(self):
        return self.get('loop', 'phase_noise', 0.0)

    def simulation(self):
        ''' dt and settle of 0 (or absent) mean automatic and come back as None. '''
        get = lambda key, default=None: self.get('simulation', key, default)
        return {
            'dt': get('dt') or None,
            'settle': get('settle') or None,
            'cycles': get('cycles', 10),
            'seed': get('seed'),
        }

    def powers(self):
        self.require('sweep', 'powers')
        return tuple(self.get('sweep', 'powers'))

    def repeats(self):
        return self.get('sweep', 'repeats', 1)

    def transmissivity(self):
        return self.get('cavity', 'transmissivity', 1.0), self.get('cavity', 'sigma_transmissivity', 0.0)

    def sigma_center_distance(self):
        return self.get('cavity', 'sigma_center_distance', 0.0)

    def power_fluctuation(self):
        return self.get('cavity', 'power_fluctuation', 0.0)

    def refine_points(self):
        return self.get('loop', 'refine_points', 0)
