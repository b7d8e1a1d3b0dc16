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
from __future__ import division

import json
import math

import numpy as np

BLOCK_UNITS = {
    'H': 'mpN',
    'Hp': 'mpN',
    'S': 'Vpm',
    'F': '1',
    'A': 'NpV',
    'G': '1',
    'Gp': '1',
}

AXIS_UNITS = {'x': 'Npm', 'z': 'Npm', 'beta': 'Nmprad'}


def _g(value):
    return '%.17g' % value


def _row(values):
    return ",".join(_g(v) if isinstance(v, (float, np.floating)) else str(v) for v in values)


def _polar(value):
    magnitude = abs(value)
    mag_db = 20.0 * math.log10(magnitude) if magnitude > 0 else -math.inf
    return mag_db, math.degrees(math.atan2(value.imag, value.real))


def format_timeseries(ts):
    yield "t_s,s_a_V,s_b_V,x_m"
    for row in zip(ts.t, ts.s_a, ts.s_b, ts.x):
        yield _row([float(v) for v in row])


def format_response(response, json_output=False):
    if json_output:
        for p in response:
            yield json.dumps({'f_Hz': p.frequency, 're_G': p.value.real, 'im_G': p.value.imag,
                              'confident': p.confident, 'power_W': response.power,
                              'repeat': response.repeat})
        return
    yield "f_Hz,re_G,im_G,mag_dB,phase_deg,confidence"
    for p in response:
        value = complex(p.value)
        yield _row([float(p.frequency), value.real, value.imag] + list(_polar(value)) + [int(p.confident)])


def format_bode(block, frequencies, values):
    unit = BLOCK_UNITS[block]
    yield "f_Hz,re_%s_%s,im_%s_%s,mag_dB,phase_deg" % (block, unit, block, unit)
    for f, value in zip(frequencies, values):
        value = complex(value)
        yield _row([float(f), value.real, value.imag] + list(_polar(value)))


def format_stability(matrix, verdict, json_output=False, csv=False, center_distance=None):
    ''' center_distance: optional (a_U, critical a_U) in m '''
    diagonal = matrix.diagonal()
    if json_output:
        data = {'stable': verdict.stable, 'failing': list(verdict.failing)}
        data.update(('k_%s_%s' % (axis, AXIS_UNITS[axis]), value) for axis, value in diagonal.items())
        if center_distance is not None:
            data.update(a_U_m=center_distance[0], a_U_critical_m=center_distance[1])
        yield json.dumps(data)
    elif csv:
        header = ['k_%s_%s' % (axis, AXIS_UNITS[axis]) for axis in diagonal]
        header += ['stable_%s' % axis for axis in diagonal]
        row = [float(value) for value in diagonal.values()]
        row += [int(axis not in verdict.failing) for axis in diagonal]
        if center_distance is not None:
            header += ['a_U_m', 'a_U_critical_m']
            row += [float(a) for a in center_distance]
        yield ",".join(header)
        yield _row(row)
    else:
        for axis, value in diagonal.items():
            yield "k_%-5s = %+.4g %s" % (axis, value, AXIS_UNITS[axis])
        if center_distance is not None:
            yield "a_U     = %.4g m (critical %.4g m)" % tuple(center_distance)
        if verdict.stable:
            yield "stable"
        else:
            yield "unstable: %s" % ", ".join(verdict.failing)


def format_margins(margins, csv=False):
    fields = (('f_ugf_Hz', margins.unity_gain_frequency), ('phase_margin_deg', margins.phase_margin),
              ('f_gm_Hz', margins.gain_margin_frequency), ('gain_margin', margins.gain_margin))
    if csv:
        yield ",".join(name for name, _ in fields)
        yield ",".join('' if value is None else _g(value) for _, value in fields)
        return
    for name, value in fields:
        yield "%-16s = %s" % (name, 'none' if value is None else '%.4g' % value)


def format_fits(rows):
    ''' rows: (sweep label, FitResult, power W, repeat) '''
    yield "sweep,repeat,P_W,f_Hz,sigma_f_Hz,Q,sigma_Q,gain_pkg,sigma_gain_pkg,phase_offset_rad,residual_rad,converged,resolved"
    for label, fit, power, repeat in rows:
        yield _row([label, repeat, float(power), fit.frequency, fit.sigma_frequency,
                    fit.quality_factor, fit.sigma_quality_factor, fit.gain, fit.sigma_gain,
                    fit.phase_offset, fit.residual, int(fit.converged), int(fit.resolved)])


def format_report(report):
    yield "P_W,sigma_P_W,k_Npm,sigma_k_Npm,band_lo_Npm,band_hi_Npm,consistent"
    for point, band, flag in zip(report.points, report.bands, report.consistent_points):
        yield _row([float(point.power), float(point.sigma_power), float(point.spring.k_ext),
                    float(point.spring.sigma_k), float(band[0]), float(band[1]), int(flag)])


def format_measurement(result, json_output=False):
    f0, sigma_f0 = result.natural_frequency
    f_eff, sigma_f_eff = result.effective_frequency
    if json_output:
        yield json.dumps({'P_W': result.power_estimate.power, 'sigma_P_W': result.power_estimate.sigma_power,
                          'f0_Hz': f0, 'sigma_f0_Hz': sigma_f0, 'f_eff_Hz': f_eff,
                          'sigma_f_eff_Hz': sigma_f_eff, 'k_Npm': result.spring.k_ext,
                          'sigma_k_Npm': result.spring.sigma_k, 'k_injected_Npm': result.k_injected,
                          'band_Npm': list(result.band), 'consistent': result.consistent,
                          'f_eff_band_Hz': list(result.frequency_band) if result.frequency_band else None})
        return
    yield "P     = %.4g +- %.2g W" % (result.power_estimate.power, result.power_estimate.sigma_power)
    yield "f0    = %.6g +- %.2g Hz" % (f0, sigma_f0)
    yield "f_eff = %.6g +- %.2g Hz" % (f_eff, sigma_f_eff)
    yield "k     = %.6g +- %.2g N/m (injected %.6g N/m)" % (result.spring.k_ext, result.spring.sigma_k,
                                                           result.k_injected)
    yield "band  = [%.4g, %.4g] N/m" % tuple(result.band)
    if result.frequency_band:
        yield "f_band = [%.6g, %.6g] Hz" % tuple(result.frequency_band)
    if result.consistent:
        yield "OK: measured spring overlaps the predicted band"
    else:
        yield "ERROR: measured spring is outside the predicted band"


def format_sweep(report, json_output=False):
    if json_output:
        yield json.dumps({'slope_NpmW': report.slope, 'sigma_slope_NpmW': report.sigma_slope,
                          'analytic_slope_NpmW': report.analytic_slope,
                          'relative_residual': report.relative_residual,
                          'consistent': report.consistent,
                          'points': [{'P_W': p.power, 'k_Npm': p.spring.k_ext, 'consistent': flag}
                                     for p, flag in zip(report.points, report.consistent_points)]})
        return
    yield "slope          = %.6g +- %.2g N/(m W)" % (report.slope, report.sigma_slope)
    if report.analytic_slope:
        yield "analytic slope = %.6g N/(m W) (deviation %.2e)" % (report.analytic_slope, report.slope_deviation)
    yield "fit residual   = %.2e" % report.relative_residual
    for point, band, flag in zip(report.points, report.bands, report.consistent_points):
        if flag:
            yield "OK: %.4g W k = %.4g +- %.2g N/m" % (point.power, point.spring.k_ext, point.spring.sigma_k)
        else:
            yield "ERROR: %.4g W k = %.4g +- %.2g N/m (reason: outside [%.4g, %.4g])" % (
                point.power, point.spring.k_ext, point.spring.sigma_k, band[0], band[1])
