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
From frequency responses to physics numbers: resonance fits, repeat
aggregation, intracavity power and the linear power-sweep comparison.
"""
from __future__ import division

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy import stats

from sandwich.errors import (
    InsufficientRepeatsException,
    InvalidParameterException,
    MeasurementException,
    NoResonanceException)
from sandwich.mechanics import SpringEstimate
from sandwich.optics import SPEED_OF_LIGHT

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

MIN_FIT_POINTS = 5
# a resonance turns the phase by 180 deg; require at least half of that in band
MIN_PHASE_SPAN = math.pi / 2
GRID_FREQUENCIES = 200
GRID_QUALITY_FACTORS = np.logspace(0, 4, 41)
MAX_ITERATIONS = 100
# a fitted linewidth counts as sampled with this many points within this many linewidths
MIN_RESOLVING_POINTS = 3
RESOLVING_LINEWIDTHS = 5.0
ONE_SIGMA = stats.norm.cdf(1.0)


@dataclass(frozen=True)
class ResponsePoint(object):
    frequency: float
    value: complex
    confident: bool = True


@dataclass(frozen=True)
class FrequencyResponse(object):
    ''' Sampled complex response with per-point confidence.

    Frequencies never decrease; a repeated frequency is an independent
    measurement at the same point.
    '''
    points: tuple = ()
    power: float = None
    repeat: int = 0
    label: str = None

    def __post_init__(self):
        object.__setattr__(self, 'points', tuple(self.points))
        freqs = [p.frequency for p in self.points]
        if any(b < a for a, b in zip(freqs, freqs[1:])):
            raise InvalidParameterException("response frequencies must be non-decreasing")
        if any(not f > 0 for f in freqs):
            raise InvalidParameterException("response frequencies must be positive")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def frequencies(self):
        return np.array([p.frequency for p in self.points], dtype=float)

    @property
    def values(self):
        return np.array([p.value for p in self.points], dtype=complex)

    @property
    def confidence(self):
        return np.array([p.confident for p in self.points], dtype=bool)

    def confident(self):
        ''' The response restricted to confident points with finite values. '''
        kept = [p for p in self.points if p.confident and np.isfinite(p.value)]
        return FrequencyResponse(tuple(kept), self.power, self.repeat, self.label)


@dataclass(frozen=True)
class FitResult(object):
    frequency: float
    sigma_frequency: float
    quality_factor: float
    sigma_quality_factor: float
    gain: float
    sigma_gain: float
    phase_offset: float = 0.0
    residual: float = 0.0
    converged: bool = True
    resolved: bool = True

    @property
    def usable(self):
        ''' Converged, and the sweep sampled the fitted linewidth. '''
        return self.converged and self.resolved


@dataclass(frozen=True)
class PowerEstimate(object):
    power: float
    sigma_power: float = 0.0


@dataclass(frozen=True)
class PowerPoint(object):
    power: float
    sigma_power: float
    spring: SpringEstimate

    def __post_init__(self):
        if not self.power >= 0:
            raise InvalidParameterException("intracavity power must be non-negative, got %r" % self.power)


@dataclass(frozen=True)
class SweepReport(object):
    points: tuple
    bands: tuple
    consistent_points: tuple
    slope: float
    sigma_slope: float
    analytic_slope: float = None
    relative_residual: float = 0.0

    @property
    def consistent(self):
        return bool(self.consistent_points) and all(self.consistent_points)

    @property
    def slope_deviation(self):
        ''' |slope / analytic - 1|, None without an analytic slope. '''
        if not self.analytic_slope:
            return None
        return abs(self.slope / self.analytic_slope - 1.0)


def resonance_model(frequency, f_eff, quality_factor):
    ''' 1 / (w_eff^2 - w^2 + i w w_eff / Q): H' up to the factor L^2/I. '''
    omega = TWO_PI * np.asarray(frequency, dtype=float)
    omega_eff = TWO_PI * f_eff
    return 1.0 / (omega_eff ** 2 - omega ** 2 + 1j * omega * omega_eff / quality_factor)


def _wrap(phase):
    return np.angle(np.exp(1j * phase))


def _initial_guess(freqs, phase):
    f_grid = np.geomspace(freqs.min(), freqs.max(), GRID_FREQUENCIES)
    model = np.angle(resonance_model(freqs[None, None, :], f_grid[:, None, None],
                                     GRID_QUALITY_FACTORS[None, :, None]))
    diff = phase[None, None, :] - model
    offset = np.angle(np.sum(np.exp(1j * diff), axis=-1))
    cost = np.sum(_wrap(diff - offset[..., None]) ** 2, axis=-1)
    i, j = np.unravel_index(np.argmin(cost), cost.shape)
    return f_grid[i], GRID_QUALITY_FACTORS[j], offset[i, j]


def _compensated(fr, compensation):
    values = fr.values
    if compensation is not None:
        values = values / compensation.response(TWO_PI * fr.frequencies)
    return values


def phase_flip(fr, compensation=None):
    '''
    Locate the resonance on a coarse sweep: the frequency where the phase has
    turned by half of its total turn across the band, interpolated in log
    frequency between the two bracketing points.

    :returns: (frequency, f_low, f_high) with f_low < frequency <= f_high
    '''
    used = fr.confident()
    if len(used) < 2:
        raise MeasurementException("%d confident points, need at least 2 to locate a resonance" % len(used))
    freqs = used.frequencies
    steps = _wrap(np.diff(np.angle(_compensated(used, compensation))))
    turn = np.concatenate(([0.0], np.cumsum(steps)))
    total = turn[-1]
    if abs(total) < MIN_PHASE_SPAN:
        raise NoResonanceException("phase turns by only %.1f deg between %.4g and %.4g Hz"
                                   % (math.degrees(abs(total)), freqs.min(), freqs.max()))
    i = int(np.argmax((turn - total / 2.0) * np.sign(total) >= 0))
    f_low, f_high = freqs[i - 1], freqs[i]
    fraction = (total / 2.0 - turn[i - 1]) / (turn[i] - turn[i - 1])
    return float(f_low * (f_high / f_low) ** fraction), float(f_low), float(f_high)


def refine_frequencies(fr, points, compensation=None):
    '''
    ``points`` log-spaced frequencies across the bracket of the phase flip of
    a coarse sweep, widened to half a bracket on either side of the flip.
    '''
    if points < 1:
        raise InvalidParameterException("at least 1 refinement point is required, got %d" % points)
    center, f_low, f_high = phase_flip(fr, compensation)
    half = 0.5 * math.log(f_high / f_low)
    low = min(f_low, center * math.exp(-half))
    high = max(f_high, center * math.exp(half))
    log.debug("phase flip near %.6g Hz, refining %.6g..%.6g Hz with %d points", center, low, high, points)
    return tuple(float(f) for f in np.geomspace(low, high, points + 2)[1:-1])


def fit_resonance(fr, compensation=None, max_iterations=MAX_ITERATIONS):
    '''
    Fit resonance frequency and Q to the phase of a response, then the overall
    gain to its log-magnitude with the resonance frozen.

    The phase fit carries a constant phase offset as a nuisance parameter, so
    the frequency and Q do not change when the whole response is multiplied
    by a complex constant. Standard uncertainties come from the Jacobian,
    scaled by the residual variance and widened with the Student t quantile
    of the remaining degrees of freedom.

    A fit whose linewidth f/Q has fewer than 3 measured points within 5
    linewidths of the resonance is returned with ``resolved`` False: the
    sweep cannot constrain it and its uncertainties are meaningless.

    :param fr: measured response; only confident points are used
    :type fr: FrequencyResponse
    :param compensation: known part of the loop, divided out before fitting;
        anything with ``response(omega)``, typically ``LoopConfig.controller``
    :returns: FitResult; with the compensation S F A, ``gain`` estimates L^2/I
    '''
    used = fr.confident()
    if len(used) < MIN_FIT_POINTS:
        raise MeasurementException("%d confident points, need at least %d for a resonance fit"
                                   % (len(used), MIN_FIT_POINTS))
    freqs = used.frequencies
    values = _compensated(used, compensation)
    phase = np.angle(values)
    unwrapped = np.unwrap(phase)
    if np.ptp(unwrapped) < MIN_PHASE_SPAN:
        raise NoResonanceException("phase turns by only %.1f deg between %.4g and %.4g Hz"
                                   % (math.degrees(np.ptp(unwrapped)), freqs.min(), freqs.max()))

    f_start, q_start, offset_start = _initial_guess(freqs, phase)
    log.debug("resonance grid start: f = %.6g Hz, Q = %.4g, offset %.3g rad", f_start, q_start, offset_start)

    def residuals(params):
        f_eff, q = np.exp(params[:2])
        return _wrap(phase - np.angle(resonance_model(freqs, f_eff, q)) - params[2])

    start = np.array([math.log(f_start), math.log(q_start), offset_start])
    result = optimize.least_squares(residuals, start, method='lm', xtol=1e-9,
                                    max_nfev=max_iterations * (len(start) + 1))
    converged = bool(result.success and result.status > 0)
    if not converged:
        log.warning("resonance fit did not converge: %s", result.message)
    f_eff, q = np.exp(result.x[:2])
    dof = max(len(freqs) - len(start), 1)
    variance = 2.0 * result.cost / dof
    covariance = variance * np.linalg.pinv(result.jac.T.dot(result.jac))
    widening = stats.t.ppf(ONE_SIGMA, dof)
    sigma_f = widening * f_eff * math.sqrt(max(covariance[0, 0], 0.0))
    sigma_q = widening * q * math.sqrt(max(covariance[1, 1], 0.0))

    sampled = int(np.sum(np.abs(freqs - f_eff) <= RESOLVING_LINEWIDTHS * f_eff / q))
    resolved = sampled >= MIN_RESOLVING_POINTS
    if not resolved:
        log.warning("linewidth %.3g Hz at %.6g Hz is sampled by %d points only", f_eff / q, f_eff, sampled)

    log_ratio = np.log(np.abs(values)) - np.log(np.abs(resonance_model(freqs, f_eff, q)))
    gain = math.exp(np.mean(log_ratio))
    sigma_gain = gain * np.std(log_ratio, ddof=1) / math.sqrt(len(log_ratio))
    residual = math.sqrt(np.mean(result.fun ** 2))
    log.debug("fit: f = %.6g +- %.2g Hz, Q = %.4g +- %.2g, gain %.4g", f_eff, sigma_f, q, sigma_q, gain)
    return FitResult(float(f_eff), float(sigma_f), float(q), float(sigma_q), gain, float(sigma_gain),
                     float(_wrap(result.x[2])), residual, converged, resolved)


def aggregate_repeats(fits):
    ''' Mean and sample standard deviation of the usable resonance frequencies. '''
    freqs = [fit.frequency for fit in fits if fit.usable]
    if len(freqs) < 2:
        raise InsufficientRepeatsException("%d usable fits, need at least 2" % len(freqs))
    freqs = np.sort(freqs)
    return float(np.mean(freqs)), float(np.std(freqs, ddof=1))


def intracavity_power(transmitted, transmissivity, sigma_transmissivity=0.0, samples=None):
    '''
    Intracavity power from the power transmitted through the pendulum mirror.

    :param transmitted: mean transmitted power (W)
    :param transmissivity: power transmissivity T, 0 < T <= 1
    :param sigma_transmissivity: standard uncertainty of T
    :param samples: optional transmitted power record (W); its spread adds to sigma
    :returns: PowerEstimate
    '''
    if not 0 < transmissivity <= 1:
        raise InvalidParameterException("transmissivity must lie in (0, 1], got %r" % transmissivity)
    if transmitted < 0 or sigma_transmissivity < 0:
        raise InvalidParameterException("transmitted power and sigma_T must be non-negative")
    power = transmitted / transmissivity
    sigma = power * sigma_transmissivity / transmissivity
    if samples is not None and len(samples) > 1:
        sigma = math.hypot(sigma, np.std(samples) / transmissivity)
    return PowerEstimate(power, sigma)


def transmitted_power_series(power, transmissivity, fluctuation, x):
    ''' Transmitted power following the pendulum swing x with relative RMS ``fluctuation``. '''
    x = np.asarray(x, dtype=float)
    mean = power * transmissivity
    spread = np.std(x)
    if not fluctuation or spread == 0:
        return np.full(x.shape, mean)
    return mean * (1.0 + fluctuation * (x - np.mean(x)) / spread)


def _overlaps(low, high, band, atol):
    return low - atol <= band[1] and high + atol >= band[0]


def power_sweep_analysis(points, bands, center_distance=None, atol=1e-12):
    '''
    Compare measured springs against the predicted bands and fit
    k - k(0) = s P through the zero-power point.

    :param points: PowerPoint per intracavity power, including P = 0
    :param bands: predicted (low, high) spring band per point (N/m)
    :param center_distance: a of the cavity, for the analytic slope 2/(a c)
    :param atol: absolute tolerance on interval overlap (N/m)
    :returns: SweepReport
    '''
    points = tuple(points)
    bands = tuple(tuple(b) for b in bands)
    if len(points) < 2:
        raise InvalidParameterException("a power sweep needs at least 2 points, got %d" % len(points))
    if len(bands) != len(points):
        raise InvalidParameterException("one predicted band per point is required")
    zero = [p.spring.k_ext for p in points if p.power == 0]
    if not zero:
        raise InvalidParameterException("a power sweep needs a zero-power reference point")

    powers = np.array([p.power for p in points])
    springs = np.array([p.spring.k_ext for p in points]) - np.mean(zero)
    sigmas = np.array([p.spring.sigma_k for p in points])
    weights = 1.0 / sigmas if np.all(sigmas > 0) else np.ones_like(sigmas)
    design = (powers * weights)[:, None]
    solution, _, _, _ = np.linalg.lstsq(design, springs * weights, rcond=None)
    slope = float(solution[0])
    fitted = slope * powers
    norm = np.dot(design[:, 0], design[:, 0])
    if np.all(sigmas > 0):
        sigma_slope = math.sqrt(1.0 / norm)
    else:
        dof = max(len(points) - 1, 1)
        sigma_slope = math.sqrt(np.sum((springs - fitted) ** 2) / dof / norm)
    scale = np.linalg.norm(springs)
    relative_residual = float(np.linalg.norm(springs - fitted) / scale) if scale > 0 else 0.0

    flags = tuple(bool(_overlaps(*p.spring.interval, band=b, atol=atol)) for p, b in zip(points, bands))
    for point, flag in zip(points, flags):
        if not flag:
            log.warning("spring %.4g +- %.2g N/m at %.4g W is outside the predicted band",
                        point.spring.k_ext, point.spring.sigma_k, point.power)
    analytic = 2.0 / (center_distance * SPEED_OF_LIGHT) if center_distance else None
    return SweepReport(points, bands, flags, slope, sigma_slope, analytic, relative_residual)
