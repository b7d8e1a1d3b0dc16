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
Cavity geometry, radiation-pressure spring constants and the stability matrix
of the sandwich configuration.

Sign conventions: time-harmonic factor e^{+iωt}; a spring constant is positive
when the force restores the displacement.
"""
from __future__ import division

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from sandwich.errors import (
    DegenerateConcentricException,
    InvalidParameterException,
    SingularGeometryException)

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299792458.0
STANDARD_GRAVITY = 9.80665

SHORT_BRANCH = "short"
LONG_BRANCH = "long"
CONCENTRIC = "concentric"


def _require_positive(name, value):
    if not value > 0:
        raise InvalidParameterException("%s must be positive, got %r" % (name, value))


def _require_nonnegative(name, value):
    if not value >= 0:
        raise InvalidParameterException("%s must be non-negative, got %r" % (name, value))


class Orientation(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self):
        ''' Sign of the horizontal spring: restoring above the mirror, anti-restoring below. '''
        return 1.0 if self is Orientation.UPPER else -1.0

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidParameterException("orientation must be 'upper' or 'lower', got %r" % value)


@dataclass(frozen=True)
class Mirror(object):
    radius_of_curvature: float
    power_transmissivity: float = 0.0

    def __post_init__(self):
        _require_positive("radius_of_curvature", self.radius_of_curvature)
        if not 0.0 <= self.power_transmissivity <= 1.0:
            raise InvalidParameterException("power_transmissivity must be in [0, 1], got %r"
                                            % self.power_transmissivity)


@dataclass(frozen=True)
class Cavity(object):
    ''' One Fabry-Perot cavity formed by a fixed mirror and the levitated mirror.

    :param length: mirror separation l (m)
    :param finesse: cavity finesse F
    :param power: intracavity power P (W)
    :param fixed_mirror: the fixed mirror, radius R_J
    :param levitated_curvature: radius R of the levitated mirror (m)
    :param orientation: which side of the levitated mirror the cavity sits on
    '''
    length: float
    finesse: float
    power: float
    fixed_mirror: Mirror
    levitated_curvature: float
    orientation: Orientation = Orientation.UPPER

    def __post_init__(self):
        _require_positive("length", self.length)
        _require_positive("finesse", self.finesse)
        _require_nonnegative("power", self.power)
        _require_positive("levitated_curvature", self.levitated_curvature)
        object.__setattr__(self, 'orientation', Orientation.parse(self.orientation))

    @property
    def g_factor(self):
        return g_factor(self)

    @property
    def center_distance(self):
        return center_distance(self.length, self.fixed_mirror.radius_of_curvature,
                               self.levitated_curvature)

    @property
    def branch(self):
        return center_distance_branch(self.length, self.fixed_mirror.radius_of_curvature,
                                      self.levitated_curvature)

    def with_power(self, power):
        return Cavity(self.length, self.finesse, power, self.fixed_mirror,
                      self.levitated_curvature, self.orientation)


@dataclass(frozen=True)
class SandwichConfig(object):
    upper: Cavity
    lower: Cavity
    mass: float
    curvature: float
    k_opt_upper: float
    k_opt_lower: float
    gravity: float = STANDARD_GRAVITY

    def __post_init__(self):
        _require_positive("mass", self.mass)
        _require_positive("curvature", self.curvature)
        _require_positive("gravity", self.gravity)
        if self.upper.orientation is not Orientation.UPPER:
            raise InvalidParameterException("upper cavity must have upper orientation")
        if self.lower.orientation is not Orientation.LOWER:
            raise InvalidParameterException("lower cavity must have lower orientation")


@dataclass(frozen=True)
class StabilityMatrix(object):
    ''' Diagonal linear response matrix K in the (x, z, beta) basis. '''
    k_x: float
    k_z: float
    k_beta: float

    def diagonal(self):
        return {'x': self.k_x, 'z': self.k_z, 'beta': self.k_beta}


@dataclass(frozen=True)
class StabilityVerdict(object):
    stable: bool
    margins: dict
    failing: tuple

    def __bool__(self):
        return self.stable


def g_factor(cavity):
    '''G = (1 - l/R_J)(1 - l/R); symmetric in the two radii.'''
    _require_positive("length", cavity.length)
    r_fixed = cavity.fixed_mirror.radius_of_curvature
    r_lev = cavity.levitated_curvature
    _require_positive("fixed mirror radius", r_fixed)
    _require_positive("levitated mirror radius", r_lev)
    return (1.0 - cavity.length / r_fixed) * (1.0 - cavity.length / r_lev)


def center_distance(length, r_fixed, r_lev):
    '''
    Distance between the two centers of curvature on the cavity axis.

    :param length: mirror separation (m)
    :param r_fixed: radius of curvature of the fixed mirror (m)
    :param r_lev: radius of curvature of the levitated mirror (m)
    :returns: a = |l - R_fixed - R_lev| (m)
    '''
    _require_positive("length", length)
    _require_positive("r_fixed", r_fixed)
    _require_positive("r_lev", r_lev)
    return abs(length - r_fixed - r_lev)


def center_distance_branch(length, r_fixed, r_lev):
    a = center_distance(length, r_fixed, r_lev)
    if a == 0.0:
        return CONCENTRIC
    return SHORT_BRANCH if length < r_fixed + r_lev else LONG_BRANCH


def cavity_length(a, r_fixed, r_lev, branch=SHORT_BRANCH):
    ''' Mirror separation that produces a center distance ``a`` on the given branch. '''
    _require_nonnegative("a", a)
    _require_positive("r_fixed", r_fixed)
    _require_positive("r_lev", r_lev)
    if branch == SHORT_BRANCH:
        if a >= r_fixed + r_lev:
            raise InvalidParameterException("center distance %g m is not reachable on the short branch" % a)
        return r_fixed + r_lev - a
    elif branch == LONG_BRANCH:
        return r_fixed + r_lev + a
    raise InvalidParameterException("unknown branch %r" % branch)


def damping_time(cavity):
    '''tau = pi l / (F c (1 - G)), the delay that turns the spring into K(1 - i w tau).'''
    g = g_factor(cavity)
    if g > 1.0:
        log.warning("G = %.6g > 1: cavity geometry is not a stable resonator", g)
    one_minus_g = 1.0 - g
    if abs(one_minus_g) <= 1e-15:
        raise SingularGeometryException("G = 1: damping term of the horizontal spring is singular")
    return math.pi * cavity.length / (cavity.finesse * SPEED_OF_LIGHT * one_minus_g)


def horizontal_spring(cavity, omega=0.0):
    '''
    Complex horizontal spring constant K^hor = k^hor + i w gamma^hor of one cavity.

    :param cavity: the cavity
    :type cavity: Cavity
    :param omega: angular frequency (rad/s); scalar or array
    :returns: +-(1/a)(2P/c)[1 - i w tau], + for the upper cavity (N/m)
    '''
    a = cavity.center_distance
    if a <= 1e-12 * (cavity.fixed_mirror.radius_of_curvature + cavity.levitated_curvature):
        raise DegenerateConcentricException("concentric cavity (a = 0): horizontal spring is undefined")
    tau = damping_time(cavity)
    k = cavity.orientation.sign * 2.0 * cavity.power / (a * SPEED_OF_LIGHT)
    return k * (1.0 - 1j * np.asarray(omega) * tau)


def rotational_spring(mass, gravity, curvature):
    ''' Gravitational restoring torque constant m g R (N m/rad). '''
    _require_nonnegative("mass", mass)
    _require_positive("gravity", gravity)
    _require_positive("curvature", curvature)
    return mass * gravity * curvature


def stability_matrix(config):
    k_x = (horizontal_spring(config.lower, 0.0).real + horizontal_spring(config.upper, 0.0).real)
    k_z = config.k_opt_lower + config.k_opt_upper
    k_beta = rotational_spring(config.mass, config.gravity, config.curvature)
    log.debug("stability matrix diag: k_x=%g k_z=%g k_beta=%g", k_x, k_z, k_beta)
    return StabilityMatrix(float(k_x), float(k_z), float(k_beta))


def is_stable(matrix):
    ''' Strictly positive restoring constants on every axis; a zero margin is unstable. '''
    margins = matrix.diagonal()
    failing = tuple(axis for axis in ('x', 'z', 'beta') if not margins[axis] > 0)
    return StabilityVerdict(stable=not failing, margins=margins, failing=failing)


def predicted_spring_band(a, sigma_a, power, sigma_power):
    '''
    Interval of k^hor compatible with a +- sigma_a and P +- sigma_P.

    k^hor grows with P and falls with a, so the endpoint values bound it exactly.
    '''
    _require_positive("a", a)
    _require_nonnegative("sigma_a", sigma_a)
    _require_nonnegative("sigma_power", sigma_power)
    if not a - sigma_a > 0:
        raise InvalidParameterException("a - sigma_a must be positive (a=%g, sigma_a=%g)" % (a, sigma_a))
    low_power = max(power - sigma_power, 0.0)
    low = 2.0 * low_power / ((a + sigma_a) * SPEED_OF_LIGHT)
    high = 2.0 * (power + sigma_power) / ((a - sigma_a) * SPEED_OF_LIGHT)
    return low, high


def levitation_power(mass, gravity=STANDARD_GRAVITY):
    ''' Intracavity power whose radiation pressure 2P/c carries the weight m g. '''
    _require_nonnegative("mass", mass)
    return mass * gravity * SPEED_OF_LIGHT / 2.0


def critical_center_distance(upper_power, lower_power, lower_distance):
    ''' Largest a_U that keeps k_x positive against the lower cavity. '''
    _require_nonnegative("upper_power", upper_power)
    _require_nonnegative("lower_power", lower_power)
    _require_positive("lower_distance", lower_distance)
    if lower_power == 0:
        return math.inf
    return lower_distance * upper_power / lower_power
