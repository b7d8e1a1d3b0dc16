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
import unittest

import numpy as np

from sandwich import loop
from sandwich import mechanics
from sandwich.errors import InvalidParameterException, MeasurementException, StepSizeException
from sandwich.loop import Drive, Noise, TimeSeries, estimate_oltf, integrate_dynamics, measure_sweep

from util import assertComplexClose, fixture_loop, paper_pendulum, single_bin_amplitude, PAPER_FREQUENCIES

TWO_PI = 2 * math.pi


def whole_cycle_step(frequency, dt_max=0.01):
    return 1.0 / (frequency * math.ceil(1.0 / (frequency * dt_max)))


class IntegrateDynamicsTest(unittest.TestCase):
    def test_undamped_energy_is_conserved(self):
        pendulum = paper_pendulum(quality_factor=1e12, natural_frequency=0.5)
        ts = integrate_dynamics(fixture_loop(pendulum, feedback=False), Drive(), duration=200.0,
                                initial_state=(1e-6, 0.0))
        omega0 = pendulum.omega0
        energy = 0.5 * ts.v ** 2 + 0.5 * omega0 ** 2 * ts.x ** 2
        self.assertLess(np.max(np.abs(energy / energy[0] - 1.0)), 1e-6)
        self.assertAlmostEqual(ts.sample_rate, 100 * 4.82, places=9)

    def test_step_size_limit(self):
        self.assertRaises(StepSizeException, integrate_dynamics, fixture_loop(), Drive(), duration=10.0, dt=0.011)

    def test_duration_must_be_positive(self):
        self.assertRaises(InvalidParameterException, integrate_dynamics, fixture_loop(), Drive(), duration=0.0)

    def test_low_frequency_force_response(self):
        pendulum = paper_pendulum(quality_factor=1.0)
        f, dt = 0.004, 0.01
        per_cycle = int(round(1.0 / (f * dt)))
        ts = integrate_dynamics(fixture_loop(pendulum, feedback=False), Drive(force_amplitude=1e-9, force_frequency=f),
                                duration=300.0 + 4 / f, dt=dt)
        window = slice(len(ts) - 4 * per_cycle, len(ts))
        amplitude = single_bin_amplitude(ts.x[window], ts.t[window], f)
        expected = abs(mechanics.pendulum_tf(pendulum, TWO_PI * f)) * 1e-9
        self.assertLess(abs(amplitude / expected - 1.0), 1e-3)

    def test_channels(self):
        fixture = fixture_loop()
        ts = integrate_dynamics(fixture, Drive(3e-4, 0.05), duration=100.0, dt=0.01)
        self.assertEqual(len(ts.s_a), len(ts.x))
        np.testing.assert_allclose(ts.s_b, 3e-4 * np.sin(TWO_PI * 0.05 * ts.t) - ts.s_a, atol=1e-15)

    def test_control_reduces_noise_driven_motion(self):
        pendulum = paper_pendulum()
        noise = Noise(force_asd=1e-10)
        rms = []
        for feedback in (True, False):
            ts = integrate_dynamics(fixture_loop(pendulum, feedback=feedback), Drive(), noise,
                                    duration=3000.0, dt=0.01, seed=3)
            rms.append(np.std(ts.x[50000:]))
        self.assertLess(rms[0] / rms[1], 1.0)

    def test_same_seed_same_record(self):
        noise = Noise(force_asd=1e-10, seismic_amplitude=1e-10, seismic_frequency=0.2)
        a = integrate_dynamics(fixture_loop(), Drive(), noise, duration=50.0, dt=0.01, seed=7)
        b = integrate_dynamics(fixture_loop(), Drive(), noise, duration=50.0, dt=0.01, seed=7)
        c = integrate_dynamics(fixture_loop(), Drive(), noise, duration=50.0, dt=0.01, seed=8)
        np.testing.assert_array_equal(a.x, b.x)
        self.assertFalse(np.array_equal(a.x, c.x))


class SuppressionIdentityTest(unittest.TestCase):
    def test_narrowband_suppression(self):
        pendulum = paper_pendulum(quality_factor=2.0)
        controlled, uncontrolled = fixture_loop(pendulum), fixture_loop(pendulum, feedback=False)
        settle = max(loop.settling_time(controlled), loop.settling_time(uncontrolled))
        for f in (0.02, 0.05, 0.1):
            dt = whole_cycle_step(f)
            per_cycle = int(round(1.0 / (f * dt)))
            rms = []
            for config in (controlled, uncontrolled):
                ts = integrate_dynamics(config, Drive(force_amplitude=1e-9, force_frequency=f),
                                        duration=settle + 10 / f, dt=dt)
                rms.append(np.sqrt(np.mean(ts.x[-10 * per_cycle:] ** 2)))
            expected = abs(loop.closed_loop_suppression(controlled, TWO_PI * f))
            self.assertLess(abs(rms[0] / rms[1] / expected - 1.0), 0.05)


class EstimateOltfTest(unittest.TestCase):
    def _series(self, s_a, s_b, rate=10.0):
        return TimeSeries(rate, np.asarray(s_a), np.asarray(s_b), np.zeros(len(s_a)))

    def test_identical_channels(self):
        t = np.arange(1000) / 10.0
        signal = np.sin(TWO_PI * 0.1 * t + 0.3)
        estimate = estimate_oltf(self._series(signal, signal), 0.1)
        self.assertAlmostEqual(estimate.value, 1.0, places=12)
        self.assertTrue(estimate.confident)

    def test_pure_noise_is_not_confident(self):
        rng = np.random.default_rng(11)
        estimate = estimate_oltf(self._series(rng.normal(size=2000), rng.normal(size=2000)), 0.1)
        self.assertFalse(estimate.confident)

    def test_zero_signal(self):
        estimate = estimate_oltf(self._series(np.zeros(1000), np.zeros(1000)), 0.1)
        self.assertFalse(estimate.confident)
        self.assertTrue(np.isnan(estimate.value))

    def test_too_few_cycles(self):
        t = np.arange(300) / 10.0
        signal = np.sin(TWO_PI * 0.1 * t)
        self.assertRaises(MeasurementException, estimate_oltf, self._series(signal, signal), 0.1)

    def test_unresolvable_frequency(self):
        signal = np.zeros(1000)
        self.assertRaises(InvalidParameterException, estimate_oltf, self._series(signal, signal), 6.0)

    def test_channel_lengths_must_match(self):
        self.assertRaises(InvalidParameterException, TimeSeries, 10.0, np.zeros(3), np.zeros(4), np.zeros(3))

    def test_simulated_loop_matches_open_loop(self):
        fixture = fixture_loop()
        response = measure_sweep(fixture, [0.05], 3e-4)
        point = response.points[0]
        self.assertTrue(point.confident)
        assertComplexClose(loop.open_loop(fixture, TWO_PI * 0.05), point.value, 0.005, 0.5, self.fail)


class MeasureSweepTest(unittest.TestCase):
    def test_empty_sweep(self):
        self.assertEqual(len(measure_sweep(fixture_loop(), [], 3e-4)), 0)

    def test_phase_flip_through_resonance(self):
        fixture = fixture_loop()
        response = measure_sweep(fixture, PAPER_FREQUENCIES, 3e-4)
        self.assertTrue(response.confidence.all())
        plant = response.values / fixture.controller.response(TWO_PI * response.frequencies)
        phase = np.degrees(np.unwrap(np.angle(plant)))
        self.assertGreater(phase[0], -10.0)
        self.assertLess(phase[-1], -170.0)
        for point in response:
            assertComplexClose(loop.open_loop(fixture, TWO_PI * point.frequency), point.value, 0.005, 0.5, self.fail)

    def test_repeated_frequencies_are_independent(self):
        response = measure_sweep(fixture_loop(), [0.06, 0.05, 0.05], 3e-4, Noise(force_asd=1e-11), seed=5)
        self.assertEqual(list(response.frequencies), [0.05, 0.05, 0.06])
        self.assertNotEqual(response.values[0], response.values[1])

    def test_parallel_sweep_is_reproducible(self):
        noise = Noise(force_asd=1e-11)
        serial = measure_sweep(fixture_loop(), [0.05, 0.06], 3e-4, noise, seed=2)
        parallel = measure_sweep(fixture_loop(), [0.05, 0.06], 3e-4, noise, seed=2, jobs=2)
        np.testing.assert_array_equal(serial.values, parallel.values)

    def test_zero_injection_flags_every_point(self):
        response = measure_sweep(fixture_loop(), [0.05, 0.06], 0.0)
        self.assertFalse(response.confidence.any())

    def test_too_few_cycles(self):
        self.assertRaises(InvalidParameterException, measure_sweep, fixture_loop(), [0.05], 3e-4, cycles=4)
