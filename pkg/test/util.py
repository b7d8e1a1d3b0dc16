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
import math
import os

import numpy as np

from sandwich.estimation import FrequencyResponse, ResponsePoint
from sandwich.loop import LoopConfig, filter_block
from sandwich.mechanics import TorsionalPendulum
from sandwich.optics import Cavity, Mirror, Orientation

# Force sensor and cavity of the published setup.
MOMENT_OF_INERTIA = 7.2e-6
LEVER_ARM = 0.085
NATURAL_FREQUENCY = 0.0322
SIGMA_NATURAL_FREQUENCY = 0.0011
CAVITY_LENGTH = 0.1411
RADIUS = 0.075
FINESSE = 880.0
CENTER_DISTANCE = 0.0089
SIGMA_CENTER_DISTANCE = 0.0008

# Loop fixture gains: S C A = 5e-4 puts the unity gain near 0.27 Hz.
SENSOR_GAIN = 1e3
FILTER_GAIN = 0.05
ACTUATOR_GAIN = 1e-5

PAPER_FREQUENCIES = (0.020, 0.0233, 0.0272, 0.0318, 0.0370, 0.0432, 0.0504, 0.0588, 0.0686, 0.080)


def config_path(name):
    return os.path.abspath(os.path.join(os.path.dirname(__file__), 'testconfig', name))


def paper_pendulum(quality_factor=100.0, natural_frequency=NATURAL_FREQUENCY):
    return TorsionalPendulum(MOMENT_OF_INERTIA, LEVER_ARM, natural_frequency, quality_factor, 0.0088)


def paper_cavity(power=29.7):
    return Cavity(CAVITY_LENGTH, FINESSE, power, Mirror(RADIUS, 5e-4), RADIUS, Orientation.UPPER)


def fixture_loop(pendulum=None, k_ext=0.0, feedback=True):
    return LoopConfig(pendulum or paper_pendulum(), SENSOR_GAIN, filter_block(FILTER_GAIN), ACTUATOR_GAIN,
                      k_ext=k_ext, feedback=feedback)


def synthetic_response(frequencies, response, phase_noise_deg=0.0, rng=None):
    ''' FrequencyResponse from a callable of omega, with optional gaussian phase noise. '''
    frequencies = np.asarray(frequencies, dtype=float)
    values = response(2.0 * math.pi * frequencies)
    if phase_noise_deg:
        values = values * np.exp(1j * np.radians(rng.normal(0.0, phase_noise_deg, len(values))))
    return FrequencyResponse(tuple(ResponsePoint(f, complex(v)) for f, v in zip(frequencies, values)))


def single_bin_amplitude(values, times, frequency):
    ''' Amplitude of the sinusoid at ``frequency`` in a whole-cycle record. '''
    return 2.0 * abs(np.sum(values * np.exp(-2j * math.pi * frequency * times))) / len(values)


def assertComplexClose(expected, actual, rel_magnitude, abs_phase_deg, fail):
    ''' Compare magnitude relatively and phase absolutely; ``fail`` is TestCase.fail. '''
    ratio = complex(actual) / complex(expected)
    if abs(abs(ratio) - 1.0) > rel_magnitude:
        fail("magnitude of %r differs from %r by %.3g (limit %.3g)" % (actual, expected, abs(ratio) - 1.0, rel_magnitude))
    phase = math.degrees(math.atan2(ratio.imag, ratio.real))
    if abs(phase) > abs_phase_deg:
        fail("phase of %r differs from %r by %.3g deg (limit %.3g)" % (actual, expected, phase, abs_phase_deg))
