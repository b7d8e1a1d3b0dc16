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
The virtual experiment: swept-sine measurements of the force sensor with the
laser off and on, resonance fits, the spring constant derived from the
frequency shift, and the sweep over intracavity powers.
"""
from __future__ import division

from dataclasses import dataclass

import numpy as np

from sandwich import estimation
from sandwich import logger
from sandwich import mechanics
from sandwich import optics
from sandwich.errors import InvalidParameterException, MeasurementException
from sandwich.loop import Drive, Noise, integrate_dynamics, measure_sweep, seed_sequence, settling_time

log = logger.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MeasurementResult(object):
    ''' Everything one laser-off / laser-on measurement produced. '''
    power: float
    k_injected: float
    off_responses: tuple
    on_responses: tuple
    off_fits: tuple
    on_fits: tuple
    natural_frequency: tuple
    effective_frequency: tuple
    spring: mechanics.SpringEstimate
    power_estimate: estimation.PowerEstimate
    band: tuple
    monitor: object = None
    frequency_band: tuple = None

    @property
    def power_point(self):
        return estimation.PowerPoint(self.power_estimate.power, self.power_estimate.sigma_power, self.spring)

    @property
    def consistent(self):
        low, high = self.spring.interval
        return low <= self.band[1] and high >= self.band[0]


class VirtualExperiment(object):
    '''
    Runs the measurement protocol on the simulated force sensor.

    **Example:**

    >>> from sandwich.config import ExperimentConfig
    >>> experiment = VirtualExperiment.from_config(ExperimentConfig.from_profile('paper'))
    >>> result = experiment.measure(29.7)
    >>> result.spring.k_ext

    .. note:: Every random stream is spawned from ``seed``; equal seeds give
              bit-identical results, also with ``jobs`` > 1.

    Each sweep runs the configured frequencies first. With ``refine_points``
    it then measures that many more points across the phase flip, so the fit
    sees the resonance linewidth and not only the two points around it.
    '''

    def __init__(self, cavity, loop, frequencies, injection_amplitude, noise=None, cycles=10,
                 settle=None, dt=None, phase_noise=0.0, repeats=1, transmissivity=5e-4,
                 sigma_transmissivity=0.0, sigma_center_distance=0.0, power_fluctuation=0.0,
                 seed=None, jobs=1, refine_points=0, sigma_natural_frequency=0.0):
        '''
        :param cavity: the cavity whose horizontal spring acts on the pendulum mirror
        :type cavity: optics.Cavity
        :param loop: the force-sensor loop without extra spring
        :type loop: loop.LoopConfig
        :param frequencies: injection frequencies (Hz)
        :param injection_amplitude: reference amplitude (V)
        :param repeats: number of off/on measurements per power
        :param transmissivity: power transmissivity T of the pendulum mirror
        :param power_fluctuation: relative RMS of the transmitted power
        :param refine_points: extra points per sweep around the phase flip, 0 for none
        :param sigma_natural_frequency: uncertainty of the nominal f0, widens the predicted f_eff band
        '''
        self.cavity = cavity
        self.loop = loop.with_spring(0.0)
        self.frequencies = tuple(sorted(frequencies))
        self.injection_amplitude = injection_amplitude
        self.refine_points = refine_points
        self.sigma_natural_frequency = sigma_natural_frequency
        self.noise = noise or Noise()
        self.cycles = cycles
        self.settle = settle
        self.dt = dt
        self.phase_noise = phase_noise
        self.repeats = repeats
        self.transmissivity = transmissivity
        self.sigma_transmissivity = sigma_transmissivity
        self.sigma_center_distance = sigma_center_distance
        self.power_fluctuation = power_fluctuation
        self.seed = seed
        self.jobs = jobs

    @classmethod
    def from_config(cls, config, seed=None, jobs=1):
        ''' Build from an :class:`sandwich.config.ExperimentConfig`; ``seed`` overrides the configured one. '''
        sim = config.simulation()
        return cls(config.cavity(), config.loop(), config.frequencies(), config.injection_amplitude(),
                   noise=config.noise(), cycles=sim['cycles'], settle=sim['settle'], dt=sim['dt'],
                   phase_noise=config.phase_noise(), repeats=config.repeats(),
                   transmissivity=config.transmissivity()[0],
                   sigma_transmissivity=config.transmissivity()[1],
                   sigma_center_distance=config.sigma_center_distance(),
                   power_fluctuation=config.power_fluctuation(),
                   seed=sim['seed'] if seed is None else seed, jobs=jobs,
                   refine_points=config.refine_points(),
                   sigma_natural_frequency=config.sigma_natural_frequency())

    def _measure(self, loop, frequencies, seed, power, repeat):
        return measure_sweep(loop, frequencies, self.injection_amplitude, self.noise,
                             cycles=self.cycles, settle=self.settle, dt=self.dt, seed=seed,
                             phase_noise=self.phase_noise, jobs=self.jobs, power=power,
                             repeat=repeat)

    def _sweep(self, loop, seed, power, repeat, label):
        coarse_seed, fine_seed = seed_sequence(seed).spawn(2)
        response = self._measure(loop, self.frequencies, coarse_seed, power, repeat)
        confident = int(np.sum(response.confidence))
        if confident < estimation.MIN_FIT_POINTS:
            raise MeasurementException("%s sweep %d at %g W: only %d confident points"
                                       % (label, repeat, power, confident))
        if self.refine_points:
            fine = estimation.refine_frequencies(response, self.refine_points, compensation=loop.controller)
            log.info("%s sweep %d at %g W: %d more points in %.4g..%.4g Hz",
                     label, repeat, power, len(fine), fine[0], fine[-1])
            extra = self._measure(loop, fine, fine_seed, power, repeat)
            points = sorted(response.points + extra.points, key=lambda p: p.frequency)
            response = estimation.FrequencyResponse(points, power=power, repeat=repeat)
        fit = estimation.fit_resonance(response, compensation=loop.controller)
        return response, fit

    def _frequency(self, fits, label, power):
        if len(fits) >= 2:
            return estimation.aggregate_repeats(fits)
        fit = fits[0]
        if not fit.usable:
            reason = "did not converge" if not fit.converged else "does not sample the linewidth"
            raise MeasurementException("%s resonance fit at %g W %s (f = %.6g Hz, Q = %.4g)"
                                       % (label, power, reason, fit.frequency, fit.quality_factor))
        return fit.frequency, fit.sigma_frequency

    def _monitor(self, loop, seed):
        f_first = self.frequencies[0]
        settle = self.settle if self.settle is not None else settling_time(loop)
        return integrate_dynamics(loop, Drive(self.injection_amplitude, f_first), self.noise,
                                  settle + self.cycles / f_first, self.dt, seed)

    def measure(self, power, seed=None):
        '''
        Measure the pendulum resonance with the laser off and with the cavity
        at intracavity power ``power`` (W), and derive the extra spring.

        At zero power the laser-on measurement is the laser-off one.

        :returns: MeasurementResult
        '''
        seed = self.seed if seed is None else seed
        cavity = self.cavity.with_power(power)
        k_ext = float(np.real(optics.horizontal_spring(cavity)))
        loop_on = self.loop.with_spring(k_ext)
        log.info("measuring at %g W (k_ext = %.4g N/m, %d repeats)", power, k_ext, self.repeats)

        streams = seed_sequence(seed).spawn(2 * self.repeats + 1)
        off, on = [], []
        for repeat in range(self.repeats):
            off.append(self._sweep(self.loop, streams[2 * repeat], power, repeat, 'laser-off'))
            if power == 0:
                on.append(off[-1])
            else:
                on.append(self._sweep(loop_on, streams[2 * repeat + 1], power, repeat, 'laser-on'))
        off_fits = tuple(fit for _, fit in off)
        on_fits = tuple(fit for _, fit in on)
        f0, sigma_f0 = self._frequency(off_fits, 'laser-off', power)
        f_eff, sigma_f_eff = self._frequency(on_fits, 'laser-on', power)

        pendulum = self.loop.pendulum
        spring = mechanics.spring_uncertainty(pendulum.moment_of_inertia, pendulum.lever_arm,
                                              f0, sigma_f0, f_eff, sigma_f_eff)
        if power == 0:
            spring = mechanics.SpringEstimate(0.0, spring.sigma_k)

        monitor = self._monitor(loop_on, streams[-1])
        start = len(monitor) - int(round(self.cycles / self.frequencies[0] * monitor.sample_rate))
        swing = monitor.x[max(start, 0):]
        transmitted = estimation.transmitted_power_series(power, self.transmissivity,
                                                          self.power_fluctuation, swing)
        power_estimate = estimation.intracavity_power(float(np.mean(transmitted)), self.transmissivity,
                                                      self.sigma_transmissivity, samples=transmitted)
        band = optics.predicted_spring_band(cavity.center_distance, self.sigma_center_distance,
                                            power_estimate.power, power_estimate.sigma_power)
        frequency_band = mechanics.predicted_frequency_band(pendulum, band, self.sigma_natural_frequency)
        log.info("k = %.4g +- %.2g N/m, predicted [%.4g, %.4g] N/m",
                 spring.k_ext, spring.sigma_k, band[0], band[1])
        return MeasurementResult(power, k_ext,
                                 tuple(r for r, _ in off), tuple(r for r, _ in on),
                                 off_fits, on_fits, (f0, sigma_f0), (f_eff, sigma_f_eff),
                                 spring, power_estimate, band, monitor, frequency_band)

    def sweep(self, powers, seed=None):
        '''
        Measure at every power and compare the springs with the predicted
        bands; the powers must include 0.

        :returns: (list of MeasurementResult, SweepReport)
        '''
        powers = list(powers)
        if len(powers) < 2 or 0 not in powers:
            raise InvalidParameterException("a power sweep needs at least 2 powers including 0")
        seed = self.seed if seed is None else seed
        streams = seed_sequence(seed).spawn(len(powers))
        results = [self.measure(p, s) for p, s in zip(powers, streams)]
        report = estimation.power_sweep_analysis([r.power_point for r in results],
                                                 [r.band for r in results],
                                                 self.cavity.center_distance)
        log.info("sweep slope %.4g +- %.2g N/(m W), analytic %.4g", report.slope, report.sigma_slope,
                 report.analytic_slope)
        return results, report
