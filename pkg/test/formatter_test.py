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
import json
import unittest

import numpy as np

from sandwich import formatter
from sandwich.estimation import (
    FitResult,
    FrequencyResponse,
    PowerPoint,
    ResponsePoint,
    SweepReport)
from sandwich.loop import LoopMargins, TimeSeries
from sandwich.mechanics import SpringEstimate
from sandwich.optics import StabilityMatrix, is_stable


class ResponseFormatTest(unittest.TestCase):
    response = FrequencyResponse((ResponsePoint(0.02, 10 + 0j), ResponsePoint(0.05, -0.1j, False)), power=6.0)

    def test_csv(self):
        lines = list(formatter.format_response(self.response))
        self.assertEqual(lines[0], "f_Hz,re_G,im_G,mag_dB,phase_deg,confidence")
        self.assertEqual(lines[1], "0.02,10,0,20,0,1")
        self.assertEqual(lines[2].split(',')[3:], ['-20', '-90', '0'])

    def test_full_precision(self):
        point = ResponsePoint(0.1, complex(1.0 / 3.0, 0.0))
        line = list(formatter.format_response(FrequencyResponse((point,))))[1]
        self.assertEqual(float(line.split(',')[1]), 1.0 / 3.0)

    def test_json(self):
        lines = [json.loads(line) for line in formatter.format_response(self.response, json_output=True)]
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[1]['im_G'], -0.1)
        self.assertFalse(lines[1]['confident'])
        self.assertEqual(lines[0]['power_W'], 6.0)


class BodeFormatTest(unittest.TestCase):
    def test_units_in_header(self):
        lines = list(formatter.format_bode('H', [0.01], [2e-3 + 0j]))
        self.assertEqual(lines[0], "f_Hz,re_H_mpN,im_H_mpN,mag_dB,phase_deg")
        self.assertEqual(list(formatter.format_bode('A', [], []))[0], "f_Hz,re_A_NpV,im_A_NpV,mag_dB,phase_deg")

    def test_zero_magnitude(self):
        line = list(formatter.format_bode('F', [1.0], [0j]))[1]
        self.assertEqual(line.split(',')[3], '-inf')


class StabilityFormatTest(unittest.TestCase):
    def test_stable(self):
        matrix = StabilityMatrix(1e-5, 1.0, 2e-7)
        lines = list(formatter.format_stability(matrix, is_stable(matrix)))
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[0].startswith("k_x"))
        self.assertEqual(lines[-1], "stable")

    def test_unstable(self):
        matrix = StabilityMatrix(-1e-5, 0.0, 2e-7)
        lines = list(formatter.format_stability(matrix, is_stable(matrix)))
        self.assertEqual(lines[-1], "unstable: x, z")

    def test_csv(self):
        matrix = StabilityMatrix(-1e-5, 1.0, 2e-7)
        lines = list(formatter.format_stability(matrix, is_stable(matrix), csv=True))
        self.assertEqual(lines[0], "k_x_Npm,k_z_Npm,k_beta_Nmprad,stable_x,stable_z,stable_beta")
        self.assertEqual(lines[1], "-1.0000000000000001e-05,1,1.9999999999999999e-07,0,1,1")
        self.assertEqual(len(lines), 2)

    def test_csv_with_center_distance(self):
        matrix = StabilityMatrix(1e-5, 1.0, 2e-7)
        lines = list(formatter.format_stability(matrix, is_stable(matrix), csv=True, center_distance=(0.0089, 0.25)))
        self.assertTrue(lines[0].endswith(",stable_beta,a_U_m,a_U_critical_m"))
        self.assertEqual([float(v) for v in lines[1].split(',')[-2:]], [0.0089, 0.25])

    def test_text_with_center_distance(self):
        matrix = StabilityMatrix(1e-5, 1.0, 2e-7)
        lines = list(formatter.format_stability(matrix, is_stable(matrix), center_distance=(0.0089, 0.0136)))
        self.assertEqual(lines[-2], "a_U     = 0.0089 m (critical 0.0136 m)")
        self.assertEqual(lines[-1], "stable")

    def test_json(self):
        matrix = StabilityMatrix(-1e-5, 1.0, 2e-7)
        data = json.loads(next(formatter.format_stability(matrix, is_stable(matrix), json_output=True,
                                                          center_distance=(0.0089, 0.0136))))
        self.assertEqual(data['failing'], ['x'])
        self.assertFalse(data['stable'])
        self.assertEqual(data['k_beta_Nmprad'], 2e-7)
        self.assertEqual(data['a_U_critical_m'], 0.0136)


class MarginsFormatTest(unittest.TestCase):
    def test_csv(self):
        margins = LoopMargins(0.27, 72.5, 4.1, 35.0)
        lines = list(formatter.format_margins(margins, csv=True))
        self.assertEqual(lines, ["f_ugf_Hz,phase_margin_deg,f_gm_Hz,gain_margin",
                                 "0.27000000000000002,72.5,4.0999999999999996,35"])

    def test_missing_margins(self):
        lines = list(formatter.format_margins(LoopMargins(gain_margin_frequency=4.1, gain_margin=1e5)))
        self.assertEqual(lines[0], "f_ugf_Hz         = none")
        self.assertEqual(lines[3], "gain_margin      = 1e+05")
        self.assertEqual(list(formatter.format_margins(LoopMargins(), csv=True))[1], ",,,")


class ReportFormatTest(unittest.TestCase):
    report = SweepReport(
        points=(PowerPoint(0.0, 0.0, SpringEstimate(0.0, 1e-7)), PowerPoint(30.0, 6.0, SpringEstimate(9e-5, 1e-7))),
        bands=((0.0, 0.0), (1.8e-5, 3.3e-5)),
        consistent_points=(True, False),
        slope=3e-6, sigma_slope=1e-8, analytic_slope=7.5e-7)

    def test_csv(self):
        lines = list(formatter.format_report(self.report))
        self.assertEqual(lines[0], "P_W,sigma_P_W,k_Npm,sigma_k_Npm,band_lo_Npm,band_hi_Npm,consistent")
        self.assertEqual(lines[1].split(',')[-1], '1')
        self.assertEqual(lines[2].split(',')[-1], '0')

    def test_summary(self):
        lines = list(formatter.format_sweep(self.report))
        self.assertTrue(lines[-2].startswith("OK: 0 W"))
        self.assertTrue(lines[-1].startswith("ERROR: 30 W"))
        self.assertIn("reason: outside", lines[-1])

    def test_json(self):
        data = json.loads(next(formatter.format_sweep(self.report, json_output=True)))
        self.assertFalse(data['consistent'])
        self.assertEqual([p['consistent'] for p in data['points']], [True, False])


class FitFormatTest(unittest.TestCase):
    def test_rows(self):
        fit = FitResult(0.0322, 1e-5, 100.0, 2.0, 1003.0, 3.0)
        lines = list(formatter.format_fits([('off', fit, 0.0, 0), ('on', fit, 6.0, 1)]))
        self.assertEqual(len(lines), 3)
        self.assertEqual(lines[1].split(',')[:3], ['off', '0', '0'])
        self.assertEqual(float(lines[1].split(',')[3]), 0.0322)
        self.assertEqual(lines[2].split(',')[-1], '1')

    def test_unresolved_fit(self):
        fit = FitResult(0.0322, 1e-9, 1e6, 2.0, 1003.0, 3.0, resolved=False)
        lines = list(formatter.format_fits([('off', fit, 0.0, 0)]))
        self.assertTrue(lines[0].endswith(',converged,resolved'))
        self.assertEqual(lines[1].split(',')[-2:], ['1', '0'])


class TimeSeriesFormatTest(unittest.TestCase):
    def test_rows(self):
        ts = TimeSeries(10.0, np.zeros(3), np.ones(3), np.zeros(3))
        lines = list(formatter.format_timeseries(ts))
        self.assertEqual(lines[0], "t_s,s_a_V,s_b_V,x_m")
        self.assertEqual(lines[2], "0.10000000000000001,0,1,0")
