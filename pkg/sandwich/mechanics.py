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
The torsional pendulum used as a transversal force sensor.

Displacements are those of the beam spot on the pendulum mirror, a lever arm
L away from the suspension point, so a force F at the spot produces the
torque L F and the compliance carries a factor L^2/I.
"""
from __future__ import division

import logging
import math
from dataclasses import dataclass

import numpy as np

from sandwich.errors import AntiSpringException, InvalidParameterException

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorsionalPendulum(object):
    ''' Force sensor parameters.

    :param moment_of_inertia: I (kg m^2)
    :param lever_arm: L, suspension point to beam spot (m)
    :param natural_frequency: f0 (Hz)
    :param quality_factor: Q of the torsional mode
    :param mass: informational only (kg)
    '''
    moment_of_inertia: float
    lever_arm: float
    natural_frequency: float
    quality_factor: float
    mass: float = None

    def __post_init__(self):
        for name in ('moment_of_inertia', 'lever_arm', 'natural_frequency', 'quality_factor'):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidParameterException("%s must be positive, got %r" % (name, value))

    @property
    def omega0(self):
        return TWO_PI * self.natural_frequency

    @property
    def compliance_scale(self):
        ''' L^2 / I '''
        return self.lever_arm ** 2 / self.moment_of_inertia

    @property
    def critical_spring(self):
        ''' The k_ext at which the total restoring force vanishes (negative). '''
        return -self.omega0 ** 2 / self.compliance_scale


@dataclass(frozen=True)
class SpringEstimate(object):
    k_ext: float
    sigma_k: float = 0.0

    def __post_init__(self):
        if not self.sigma_k >= 0:
            raise InvalidParameterException("sigma_k must be non-negative, got %r" % self.sigma_k)

    @property
    def interval(self):
        return self.k_ext - self.sigma_k, self.k_ext + self.sigma_k


def _compliance(scale, omega_res, quality_factor, omega):
    omega = np.asarray(omega, dtype=float)
    return scale / (-omega ** 2 + omega_res ** 2 + 1j * omega * omega_res / quality_factor)


def pendulum_tf(pendulum, omega):
    '''H = (L^2/I) / (-w^2 + w0^2 + i w w0 / Q), in m/N.'''
    if np.any(np.asarray(omega) < 0):
        raise InvalidParameterException("omega must be non-negative")
    return _compliance(pendulum.compliance_scale, pendulum.omega0, pendulum.quality_factor, omega)


def effective_omega_squared(pendulum, k_ext):
    return pendulum.omega0 ** 2 + k_ext * pendulum.compliance_scale


def _effective_omega(pendulum, k_ext):
    omega_sq = effective_omega_squared(pendulum, k_ext)
    if not omega_sq > 0:
        raise AntiSpringException("k_ext = %g N/m overcomes the pendulum restoring force "
                                  "(critical spring %g N/m)" % (k_ext, pendulum.critical_spring))
    return math.sqrt(omega_sq)


def effective_tf(pendulum, k_ext, omega):
    '''
    H' : the pendulum compliance with w0 replaced by w_eff in both the stiffness
    and the damping term.
    '''
    if np.any(np.asarray(omega) < 0):
        raise InvalidParameterException("omega must be non-negative")
    if k_ext == 0:
        return pendulum_tf(pendulum, omega)
    omega_eff = _effective_omega(pendulum, k_ext)
    return _compliance(pendulum.compliance_scale, omega_eff, pendulum.quality_factor, omega)


def spring_from_shift(moment_of_inertia, lever_arm, f0, f_eff):
    '''
    k_ext = (2 pi)^2 I / L^2 (f_eff^2 - f0^2); negative for an anti-restoring force.
    '''
    for name, value in (('moment_of_inertia', moment_of_inertia), ('lever_arm', lever_arm),
                        ('f0', f0), ('f_eff', f_eff)):
        if not value > 0:
            raise InvalidParameterException("%s must be positive, got %r" % (name, value))
    return TWO_PI ** 2 * moment_of_inertia / lever_arm ** 2 * (f_eff ** 2 - f0 ** 2)


def effective_frequency(pendulum, k_ext):
    ''' Resonance (Hz) of the pendulum with the extra spring k_ext. '''
    return _effective_omega(pendulum, k_ext) / TWO_PI


def spring_uncertainty(moment_of_inertia, lever_arm, f0, sigma_f0, f_eff, sigma_f_eff):
    '''
    First-order propagation of independent frequency uncertainties through
    spring_from_shift.

    :returns: SpringEstimate with k_ext and sigma_k (N/m)
    '''
    if sigma_f0 < 0 or sigma_f_eff < 0:
        raise InvalidParameterException("frequency uncertainties must be non-negative")
    k = spring_from_shift(moment_of_inertia, lever_arm, f0, f_eff)
    scale = TWO_PI ** 2 * moment_of_inertia / lever_arm ** 2
    sigma = scale * math.hypot(2.0 * f_eff * sigma_f_eff, 2.0 * f0 * sigma_f0)
    return SpringEstimate(k, sigma)


def predicted_frequency_band(pendulum, band, sigma_f0=0.0):
    '''
    Range of f_eff reachable from a spring band, widened by the uncertainty of f0.

    :param band: (k_low, k_high) in N/m
    :param sigma_f0: standard uncertainty of the natural frequency (Hz)
    '''
    k_low, k_high = band
    f0 = pendulum.natural_frequency
    shift = pendulum.compliance_scale / TWO_PI ** 2
    low_sq = max(f0 - sigma_f0, 0.0) ** 2 + k_low * shift
    high_sq = (f0 + sigma_f0) ** 2 + k_high * shift
    if not low_sq > 0:
        raise AntiSpringException("band lower edge %g N/m leaves no resonance" % k_low)
    return math.sqrt(low_sq), math.sqrt(high_sq)
