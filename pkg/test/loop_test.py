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
from mock import patch

from sandwich import loop
from sandwich import mechanics
from sandwich.errors import InvalidParameterException, LoopSingularityException
from sandwich.loop import LtiBlock, filter_block, filter_tf

from util import fixture_loop, paper_pendulum

TWO_PI = 2 * math.pi


class FilterTest(unittest.TestCase):
    def test_dc_gain_is_exact(self):
        self.assertEqual(filter_tf(0.05, 0.0), 0.05)
        self.assertEqual(np.angle(filter_tf(0.05, 0.0)), 0.0)

    def test_zero_corner(self):
        value = filter_tf(1.0, TWO_PI * 0.0476)
        self.assertAlmostEqual(abs(value), 1.414, places=3)
        self.assertAlmostEqual(math.degrees(np.angle(value)), 43.6, places=1)

    def test_pole_corner(self):
        pole = LtiBlock(1.0, (), (4.82,))
        self.assertAlmostEqual(math.degrees(np.angle(pole.response(TWO_PI * 4.82))), -45.0, places=12)

    def test_high_frequency_phase(self):
        self.assertAlmostEqual(math.degrees(np.angle(filter_tf(1.0, TWO_PI * 1e6))), -90.0, places=2)


class LtiBlockTest(unittest.TestCase):
    def test_corners_must_be_positive(self):
        self.assertRaises(InvalidParameterException, LtiBlock, 1.0, (0.0,))
        self.assertRaises(InvalidParameterException, LtiBlock, 1.0, (), (-1.0,))
        self.assertRaises(InvalidParameterException, LtiBlock, 1.0, (), (), ((1.0, 0.0),))

    def test_composition_multiplies_responses(self):
        a = LtiBlock(2.0, (0.1,), (3.0,))
        b = filter_block(0.5)
        omega = TWO_PI * np.geomspace(1e-3, 1e2, 50)
        np.testing.assert_allclose((a * b).response(omega), a.response(omega) * b.response(omega), rtol=1e-13)
        self.assertEqual((a * b).label, 'custom')
        np.testing.assert_allclose((b * 3.0).response(omega), 3.0 * b.response(omega), rtol=1e-14)

    def test_state_space_matches_response(self):
        block = filter_block(0.05) * LtiBlock(1.0, (), (), ((0.5, 3.0),))
        a, b, c, d = block.to_state_space()
        for f in (1e-3, 0.0476, 0.5, 4.0, 30.0):
            s = 1j * TWO_PI * f
            value = c.dot(np.linalg.solve(s * np.eye(a.shape[0]) - a, b))[0, 0] + d
            self.assertAlmostEqual(abs(value / block.response(TWO_PI * f) - 1.0), 0.0, places=9)

    def test_transfer_function_matches_response(self):
        block = filter_block(0.05) * loop.pendulum_block(paper_pendulum())
        tf = block.to_transfer_function()
        for f in (1e-3, 0.0322, 0.5, 4.0):
            value = complex(tf(1j * TWO_PI * f))
            self.assertAlmostEqual(abs(value / block.response(TWO_PI * f) - 1.0), 0.0, places=9)

    def test_improper_block_has_no_state_space(self):
        self.assertRaises(InvalidParameterException, LtiBlock(1.0, (1.0, 2.0), (3.0,)).to_state_space)

    def test_pendulum_block(self):
        p = paper_pendulum()
        omega = TWO_PI * np.geomspace(1e-3, 1.0, 40)
        np.testing.assert_allclose(loop.pendulum_block(p).response(omega), mechanics.pendulum_tf(p, omega), rtol=1e-12)
        np.testing.assert_allclose(loop.pendulum_block(p, 2e-5).response(omega),
                                   mechanics.effective_tf(p, 2e-5, omega), rtol=1e-12)
        self.assertEqual(loop.pendulum_block(p).label, 'H')
        self.assertEqual(loop.pendulum_block(p, 2e-5).label, "H'")


class OpenLoopTest(unittest.TestCase):
    def test_dc_composition(self):
        unity = loop.LoopConfig(paper_pendulum(), 1.0, filter_block(1.0), 1.0)
        self.assertAlmostEqual(loop.open_loop(unity, 0.0).real, 2.451e4, delta=0.001e4)
        fixture = fixture_loop()
        self.assertAlmostEqual(loop.open_loop(fixture, 0.0), mechanics.pendulum_tf(fixture.pendulum, 0.0) * 1e3 * 0.05 * 1e-5)

    def test_open_loop_with_spring(self):
        fixture = fixture_loop(k_ext=2e-5)
        omega = TWO_PI * 0.04
        expected = mechanics.effective_tf(fixture.pendulum, 2e-5, omega) * fixture.controller.response(omega)
        self.assertAlmostEqual(abs(loop.open_loop(fixture, omega) / expected - 1.0), 0.0, places=12)

    def test_gains_must_be_nonzero(self):
        self.assertRaises(InvalidParameterException, loop.LoopConfig, paper_pendulum(), 0.0, filter_block(1.0), 1.0)
        self.assertRaises(InvalidParameterException, loop.LoopConfig, paper_pendulum(), 1.0, filter_block(1.0), float('inf'))
        self.assertRaises(InvalidParameterException, loop.LoopConfig, paper_pendulum(), 1.0, filter_block(1.0), 1.0,
                          feedback_sign=0)


class SuppressionTest(unittest.TestCase):
    @patch('sandwich.loop.open_loop')
    def test_no_gain_no_suppression(self, open_loop):
        open_loop.return_value = 0.0
        self.assertEqual(loop.closed_loop_suppression(fixture_loop(), 1.0), 1.0)

    @patch('sandwich.loop.open_loop')
    def test_high_gain_limit(self, open_loop):
        open_loop.return_value = 1e6 + 0j
        self.assertAlmostEqual(abs(loop.closed_loop_suppression(fixture_loop(), 1.0)) * 1e6, 1.0, places=5)

    @patch('sandwich.loop.open_loop')
    def test_marginal_loop_is_rejected(self, open_loop):
        open_loop.return_value = -1.0 + 1e-15
        self.assertRaises(LoopSingularityException, loop.closed_loop_suppression, fixture_loop(), 1.0)

    def test_positive_feedback_sign(self):
        fixture = loop.LoopConfig(paper_pendulum(), 1e3, filter_block(0.05), 1e-5, feedback_sign=1)
        omega = TWO_PI * 0.1
        g = loop.open_loop(fixture, omega)
        self.assertAlmostEqual(loop.closed_loop_suppression(fixture, omega), 1.0 / (1.0 - g))

    def test_open_loop_config_has_no_suppression(self):
        self.assertEqual(loop.closed_loop_suppression(fixture_loop(feedback=False), 0.3), 1.0)


class MarginsTest(unittest.TestCase):
    def test_fixture_margins(self):
        margins = loop.loop_margins(fixture_loop())
        self.assertAlmostEqual(margins.unity_gain_frequency, 0.27, delta=0.02)
        self.assertAlmostEqual(abs(loop.open_loop(fixture_loop(), TWO_PI * margins.unity_gain_frequency)), 1.0, places=3)
        self.assertGreater(margins.phase_margin, 60.0)
        self.assertLess(margins.phase_margin, 85.0)
        self.assertGreater(margins.gain_margin, 10.0)
        self.assertAlmostEqual(margins.gain_margin_frequency, 4.0, delta=0.5)

    def test_margins_without_unity_gain(self):
        weak = loop.LoopConfig(paper_pendulum(), 1e3, filter_block(0.05), 1e-9)
        margins = loop.loop_margins(weak)
        self.assertIsNone(margins.unity_gain_frequency)
        self.assertIsNone(margins.phase_margin)
        self.assertAlmostEqual(margins.gain_margin_frequency, loop.loop_margins(fixture_loop()).gain_margin_frequency,
                               places=6)
        self.assertGreater(margins.gain_margin, 1e4)

    def test_settling_time(self):
        settle = loop.settling_time(fixture_loop())
        self.assertGreater(settle, 0.0)
        self.assertLess(settle, 1e3)

    def test_unstable_loop_never_settles(self):
        positive = loop.LoopConfig(paper_pendulum(), 1e3, filter_block(0.05), 1e-5, feedback_sign=1)
        self.assertRaises(LoopSingularityException, loop.settling_time, positive)


class ClosedLoopSystemTest(unittest.TestCase):
    def _transfer(self, system, f):
        a, b, c, d = system
        s = 1j * TWO_PI * f
        return c.dot(np.linalg.solve(s * np.eye(a.shape[0]) - a, b)) + d

    def test_layout(self):
        fixture = fixture_loop()
        a, b, c, d = loop.closed_loop_system(fixture)
        self.assertEqual((a.shape, b.shape, c.shape, d.shape), ((4, 4), (4, 2), (4, 4), (4, 2)))
        beta = fixture.pendulum.compliance_scale
        np.testing.assert_allclose(b, [[0, 0], [beta * 1e-5, beta], [0, 0], [0, 0]], rtol=1e-12)
        np.testing.assert_array_equal(c[2:], [[1, 0, 0, 0], [0, 1, 0, 0]])
        np.testing.assert_array_equal(d, [[0, 0], [1, 0], [0, 0], [0, 0]])

    def test_open_configuration_measures_open_loop(self):
        fixture = fixture_loop(feedback=False)
        system = loop.closed_loop_system(fixture)
        for f in (0.01, 0.0322, 0.27, 4.0):
            y = self._transfer(system, f)
            self.assertAlmostEqual(abs(y[0, 0] / loop.open_loop(fixture, TWO_PI * f) - 1.0), 0.0, places=9)
            self.assertAlmostEqual(abs(y[1, 0] - 1.0), 0.0, places=12)

    def test_feedback_suppresses_reference(self):
        fixture = fixture_loop(k_ext=2e-5)
        system = loop.closed_loop_system(fixture)
        for f in (0.01, 0.0401, 0.27, 4.0):
            omega = TWO_PI * f
            y = self._transfer(system, f)
            self.assertAlmostEqual(abs(y[0, 0] / y[1, 0] / loop.open_loop(fixture, omega) - 1.0), 0.0, places=9)
            self.assertAlmostEqual(abs(y[1, 0] / loop.closed_loop_suppression(fixture, omega) - 1.0), 0.0, places=9)
