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


class SandwichException(Exception):
    """
    Common base class for all sandwich exceptions.
    """
    pass


class FatalException(SandwichException):
    """
    FatalException indicates that the inputs themselves are wrong; rerunning with
    the same parameters would fail the same way.
    """
    pass


class PhysicsException(SandwichException):
    """
    PhysicsException indicates that the inputs are well formed but describe a
    system that cannot be evaluated or measured (unstable, singular, diverging).
    """
    pass


class InvalidParameterException(FatalException):
    def __init__(self, msg):
        super(InvalidParameterException, self).__init__(msg)


class ConfigurationException(FatalException):
    def __init__(self, msg):
        super(ConfigurationException, self).__init__(msg)


class StepSizeException(ConfigurationException):
    def __init__(self, msg):
        super(StepSizeException, self).__init__(msg)


class SingularGeometryException(PhysicsException):
    def __init__(self, msg):
        super(SingularGeometryException, self).__init__(msg)


class DegenerateConcentricException(PhysicsException):
    def __init__(self, msg):
        super(DegenerateConcentricException, self).__init__(msg)


class AntiSpringException(PhysicsException):
    """
    The external spring is more negative than the pendulum restoring force can hold.
    """
    def __init__(self, msg):
        super(AntiSpringException, self).__init__(msg)


class LoopSingularityException(PhysicsException):
    def __init__(self, msg):
        super(LoopSingularityException, self).__init__(msg)


class DivergenceException(PhysicsException):
    def __init__(self, msg, time=None):
        super(DivergenceException, self).__init__(msg)
        self.time = time


class NoResonanceException(PhysicsException):
    def __init__(self, msg):
        super(NoResonanceException, self).__init__(msg)


class InsufficientRepeatsException(PhysicsException):
    def __init__(self, msg):
        super(InsufficientRepeatsException, self).__init__(msg)


class MeasurementException(PhysicsException):
    """
    Note: raised when the swept-sine data are too weak or too short to be trusted.
    """
    def __init__(self, msg):
        super(MeasurementException, self).__init__(msg)
