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
The force-sensor feedback loop: transfer-function blocks, open/closed loop
algebra, time-domain simulation and the swept-sine measurement of the open
loop transfer function by reference injection.

The reference r is injected at the actuator input. The signal coming back
from the pendulum through sensor and filter is s_a = S F x; the signal going
forth to the actuator is s_b = r + sigma s_a with sigma = -1 for negative
feedback. Hence s_a / s_b = G = H S F A and the loop suppresses disturbances
by 1 / (1 - sigma G).
"""
from __future__ import division

import concurrent.futures
import dataclasses
import math
from dataclasses import dataclass

import control
import numpy as np
from scipy import signal

from sandwich import logger
from sandwich import mechanics
from sandwich.errors import (
    InvalidParameterException,
    LoopSingularityException,
    MeasurementException,
    PhysicsException,
    StepSizeException)
from sandwich.estimation import FrequencyResponse, ResponsePoint
from sandwich.integrator import propagate, rk4_step_matrices

log = logger.getLogger(__name__)

TWO_PI = 2.0 * math.pi

FILTER_ZERO_HZ = 0.0476
FILTER_POLES_HZ = (3.39, 4.82)

# |1 - sigma G| below this is a marginal loop.
SINGULARITY_THRESHOLD = 1e-12
MIN_SNR = 3.0
MIN_CYCLES = 5
NOISE_BINS = 4


@dataclass(frozen=True)
class LtiBlock(object):
    '''
    Rational transfer function written with first-order corners and
    second-order resonances::

        gain * prod(1 + i w/wz) / prod(1 + i w/wp) / prod(1 - w^2/wr^2 + i w/(wr Q))

    Corner and resonance frequencies are in Hz. At w = 0 the block evaluates to
    ``gain`` exactly.
    '''
    gain: float = 1.0
    zeros: tuple = ()
    poles: tuple = ()
    resonances: tuple = ()
    label: str = 'custom'

    def __post_init__(self):
        object.__setattr__(self, 'zeros', tuple(float(z) for z in self.zeros))
        object.__setattr__(self, 'poles', tuple(float(p) for p in self.poles))
        object.__setattr__(self, 'resonances', tuple((float(f), float(q)) for f, q in self.resonances))
        for corner in self.zeros + self.poles:
            if not corner > 0:
                raise InvalidParameterException("corner frequencies must be positive, got %r" % corner)
        for f, q in self.resonances:
            if not (f > 0 and q > 0):
                raise InvalidParameterException("resonance (%r Hz, Q=%r) must be positive" % (f, q))
        if not np.isfinite(self.gain):
            raise InvalidParameterException("gain must be finite")

    def response(self, omega):
        omega = np.asarray(omega, dtype=float)
        value = self.gain * np.ones_like(omega, dtype=complex)
        for z in self.zeros:
            value = value * (1.0 + 1j * omega / (TWO_PI * z))
        for p in self.poles:
            value = value / (1.0 + 1j * omega / (TWO_PI * p))
        for f, q in self.resonances:
            w_r = TWO_PI * f
            value = value / (1.0 - (omega / w_r) ** 2 + 1j * omega / (w_r * q))
        return value

    __call__ = response

    @property
    def corner_frequencies(self):
        return self.zeros + self.poles + tuple(f for f, _ in self.resonances)

    @property
    def order(self):
        return len(self.poles) + 2 * len(self.resonances)

    def polynomials(self):
        ''' Numerator and denominator coefficients in s, highest power first. '''
        num = np.array([self.gain])
        den = np.array([1.0])
        for z in self.zeros:
            num = np.polymul(num, [1.0 / (TWO_PI * z), 1.0])
        for p in self.poles:
            den = np.polymul(den, [1.0 / (TWO_PI * p), 1.0])
        for f, q in self.resonances:
            w_r = TWO_PI * f
            den = np.polymul(den, [1.0 / w_r ** 2, 1.0 / (w_r * q), 1.0])
        return num, den

    def to_state_space(self):
        if len(self.zeros) > self.order:
            raise InvalidParameterException("block %s is improper and has no state-space form" % self.label)
        num, den = self.polynomials()
        a, b, c, d = signal.tf2ss(num, den)
        return a, b.reshape(-1, 1), c.reshape(1, -1), float(np.squeeze(d))

    def to_transfer_function(self):
        return control.tf(*self.polynomials())

    def __mul__(self, other):
        if not isinstance(other, LtiBlock):
            return LtiBlock(self.gain * other, self.zeros, self.poles, self.resonances, self.label)
        return LtiBlock(self.gain * other.gain,
                        self.zeros + other.zeros,
                        self.poles + other.poles,
                        self.resonances + other.resonances,
                        'custom')

    __rmul__ = __mul__


def filter_block(gain):
    ''' The servo filter: one zero at 47.6 mHz, poles at 3.39 Hz and 4.82 Hz. '''
    return LtiBlock(gain, (FILTER_ZERO_HZ,), FILTER_POLES_HZ, (), 'F')


def filter_tf(gain, omega):
    return filter_block(gain).response(omega)


def pendulum_block(pendulum, k_ext=0.0):
    ''' H (or H' when k_ext != 0) as a block with unit-normalised resonance. '''
    f_eff = mechanics.effective_frequency(pendulum, k_ext)
    omega_eff = TWO_PI * f_eff
    return LtiBlock(pendulum.compliance_scale / omega_eff ** 2, (), (),
                    ((f_eff, pendulum.quality_factor),),
                    'H' if k_ext == 0 else "H'")


@dataclass(frozen=True)
class LoopConfig(object):
    ''' The feedback loop of the force sensor.

    :param pendulum: the torsional pendulum
    :param sensor_gain: S (V/m)
    :param filter: F, usually :func:`filter_block`
    :param actuator_gain: A (N/V)
    :param k_ext: extra spring on the pendulum (N/m); turns H into H'
    :param feedback_sign: sign at the summing junction, -1 for negative feedback
    :param feedback: False opens the loop (the filter is still observed)
    '''
    pendulum: mechanics.TorsionalPendulum
    sensor_gain: float
    filter: LtiBlock
    actuator_gain: float
    k_ext: float = 0.0
    feedback_sign: int = -1
    feedback: bool = True

    def __post_init__(self):
        for name in ('sensor_gain', 'actuator_gain'):
            value = getattr(self, name)
            if not (np.isfinite(value) and value != 0):
                raise InvalidParameterException("%s must be finite and nonzero, got %r" % (name, value))
        if not (np.isfinite(self.filter.gain) and self.filter.gain != 0):
            raise InvalidParameterException("filter gain must be finite and nonzero")
        if self.feedback_sign not in (-1, 1):
            raise InvalidParameterException("feedback_sign must be -1 or +1, got %r" % self.feedback_sign)

    @property
    def sigma(self):
        return self.feedback_sign if self.feedback else 0

    @property
    def plant(self):
        return pendulum_block(self.pendulum, self.k_ext)

    @property
    def controller(self):
        ''' S F A, the part of the loop that is known and compensated in fits. '''
        block = self.filter * (self.sensor_gain * self.actuator_gain)
        return dataclasses.replace(block, label='custom')

    @property
    def effective_frequency(self):
        return mechanics.effective_frequency(self.pendulum, self.k_ext)

    def with_spring(self, k_ext):
        return dataclasses.replace(self, k_ext=k_ext)


def open_loop(loop, omega):
    ''' G = H S F A, or G' = H' S F A when the loop carries k_ext. '''
    plant = mechanics.effective_tf(loop.pendulum, loop.k_ext, omega)
    return plant * loop.sensor_gain * loop.filter.response(omega) * loop.actuator_gain


def closed_loop_suppression(loop, omega):
    ''' 1 / (1 - sigma G): residual fraction of an external force disturbance. '''
    g = open_loop(loop, omega)
    denominator = 1.0 - loop.sigma * g
    if np.any(np.abs(denominator) < SINGULARITY_THRESHOLD):
        raise LoopSingularityException("|1 - sigma G| vanishes: the loop is marginal")
    return 1.0 / denominator


@dataclass(frozen=True)
class LoopMargins(object):
    unity_gain_frequency: float = None
    phase_margin: float = None
    gain_margin_frequency: float = None
    gain_margin: float = None


def _finite(value, scale=1.0):
    value = float(value)
    return value * scale if math.isfinite(value) else None


def loop_margins(loop):
    '''
    Unity-gain frequency, phase margin (deg) and gain margin of -sigma G, the
    loop gain written as for negative feedback. Frequencies are in Hz; a
    margin without a crossing is None.

    With several crossings python-control reports the smallest margins.
    '''
    gain = -loop.feedback_sign * loop.plant.to_transfer_function() * loop.controller.to_transfer_function()
    gm, pm, _, w_pc, w_gc, _ = control.stability_margins(gain)
    return LoopMargins(unity_gain_frequency=_finite(w_gc, 1.0 / TWO_PI),
                       phase_margin=_finite(pm) if math.isfinite(float(w_gc)) else None,
                       gain_margin_frequency=_finite(w_pc, 1.0 / TWO_PI),
                       gain_margin=_finite(gm) if math.isfinite(float(w_pc)) else None)


def _summing_junction(sigma):
    inputs = ['r']
    if sigma:
        inputs.append('s_a' if sigma > 0 else '-s_a')
    return control.summing_junction(inputs=inputs, output='s_b', name='junction')


def closed_loop_system(loop):
    '''
    State-space form of the loop with state [x, v, z...], inputs [r, dF] and
    outputs [s_a, s_b, x, v].

    The pendulum is driven by the actuator (A s_b) and the force disturbance
    dF; the sensor chain S F reads x; the junction forms s_b = r + sigma s_a.
    '''
    omega_eff = TWO_PI * loop.effective_frequency
    beta = loop.pendulum.compliance_scale
    pendulum = control.ss([[0.0, 1.0], [-omega_eff ** 2, -omega_eff / loop.pendulum.quality_factor]],
                          [[0.0, 0.0], [beta * loop.actuator_gain, beta]],
                          np.eye(2), np.zeros((2, 2)),
                          inputs=['s_b', 'dF'], outputs=['x', 'v'], name='pendulum')
    a_f, b_f, c_f, d_f = loop.filter.to_state_space()
    sensor = control.ss(a_f, b_f * loop.sensor_gain, c_f, [[d_f * loop.sensor_gain]],
                        inputs=['x'], outputs=['s_a'], name='sensor')
    system = control.interconnect([pendulum, sensor, _summing_junction(loop.sigma)],
                                  inplist=['r', 'dF'], outlist=['s_a', 's_b', 'x', 'v'])
    return tuple(np.asarray(m, dtype=float) for m in (system.A, system.B, system.C, system.D))


def settling_time(loop, tolerance=1e-9):
    ''' Time for the slowest closed-loop mode to decay by ``tolerance``. '''
    a = closed_loop_system(loop)[0]
    rate = float(np.min(-np.linalg.eigvals(a).real))
    if not rate > 0:
        raise LoopSingularityException("closed loop has a non-decaying mode (rate %g 1/s)" % rate)
    return math.log(1.0 / tolerance) / rate


@dataclass(frozen=True)
class Drive(object):
    ''' Deterministic excitation: reference injection (V) and a sinusoidal force (N). '''
    injection_amplitude: float = 0.0
    injection_frequency: float = None
    force_amplitude: float = 0.0
    force_frequency: float = None

    def frequencies(self):
        return tuple(f for f in (self.injection_frequency, self.force_frequency) if f)


@dataclass(frozen=True)
class Noise(object):
    ''' White force noise (N/sqrt(Hz), one-sided) and a seismic force line (N, Hz). '''
    force_asd: float = 0.0
    seismic_amplitude: float = 0.0
    seismic_frequency: float = None

    def frequencies(self):
        return (self.seismic_frequency,) if self.seismic_frequency and self.seismic_amplitude else ()


@dataclass(frozen=True, eq=False)
class TimeSeries(object):
    sample_rate: float
    s_a: np.ndarray
    s_b: np.ndarray
    x: np.ndarray
    v: np.ndarray = None
    t0: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise InvalidParameterException("sample_rate must be positive")
        lengths = set(len(ch) for ch in (self.s_a, self.s_b, self.x) + ((self.v,) if self.v is not None else ()))
        if len(lengths) != 1:
            raise InvalidParameterException("channels must have equal lengths, got %s" % sorted(lengths))

    def __len__(self):
        return len(self.x)

    @property
    def t(self):
        return self.t0 + np.arange(len(self)) / self.sample_rate


def seed_sequence(seed):
    ''' A numpy SeedSequence from an int, None or an existing SeedSequence. '''
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def highest_corner(loop, extra=()):
    corners = loop.filter.corner_frequencies + (loop.effective_frequency,) + tuple(extra)
    return max(corners)


def default_time_step(loop, extra=()):
    return 1.0 / (100.0 * highest_corner(loop, extra))


def _inputs(drive, noise, times, phase):
    u = np.zeros((len(times), 2))
    if drive.injection_amplitude and drive.injection_frequency:
        u[:, 0] = drive.injection_amplitude * np.sin(TWO_PI * drive.injection_frequency * times)
    if drive.force_amplitude and drive.force_frequency:
        u[:, 1] += drive.force_amplitude * np.sin(TWO_PI * drive.force_frequency * times)
    if noise.seismic_amplitude and noise.seismic_frequency:
        u[:, 1] += noise.seismic_amplitude * np.sin(TWO_PI * noise.seismic_frequency * times + phase)
    return u


def integrate_dynamics(loop, drive, noise=None, duration=None, dt=None, seed=None, initial_state=None):
    '''
    Simulate the loop with fixed-step RK4.

    :param loop: the loop
    :type loop: LoopConfig
    :param drive: injection and deterministic force
    :type drive: Drive
    :param noise: force noise; white noise is held constant over each step
    :type noise: Noise
    :param duration: simulated time (s)
    :param dt: step (s); defaults to 1/(100 x highest corner in the loop)
    :param seed: int or numpy SeedSequence driving every random draw
    :param initial_state: (x0, v0) of the pendulum, filter starts at rest
    :returns: TimeSeries with s_a, s_b, x and v
    '''
    noise = noise or Noise()
    extra = drive.frequencies() + noise.frequencies()
    limit = 1.0 / (20.0 * highest_corner(loop, extra))
    if dt is None:
        dt = default_time_step(loop, extra)
    if not 0 < dt < limit:
        raise StepSizeException("dt = %g s must be below 1/(20 x highest corner) = %g s" % (dt, limit))
    if duration is None or not duration > 0:
        raise InvalidParameterException("duration must be positive")
    steps = max(int(round(duration / dt)), 1)

    a, b, c, d = closed_loop_system(loop)
    phi, g0, gm, g1 = rk4_step_matrices(a, b, dt)
    rng = np.random.default_rng(seed)
    seismic_phase = rng.uniform(0.0, TWO_PI)

    times = np.arange(steps + 1) * dt
    u = _inputs(drive, noise, times, seismic_phase)
    u_mid = _inputs(drive, noise, times[:-1] + 0.5 * dt, seismic_phase)
    u_start, u_end = u[:-1].copy(), u[1:].copy()
    if noise.force_asd:
        white = rng.normal(0.0, noise.force_asd * math.sqrt(0.5 / dt), steps)
        for inp in (u_start, u_mid, u_end):
            inp[:, 1] += white
        u[:-1, 1] += white

    w = u_start.dot(g0.T) + u_mid.dot(gm.T) + u_end.dot(g1.T)
    q0 = np.zeros(a.shape[0])
    if initial_state is not None:
        q0[0], q0[1] = initial_state
    log.debug("integrating %d steps of %.4g s (limit %.4g s)", steps, dt, limit)
    states = propagate(phi, w, q0, dt)
    y = states.dot(c.T) + u.dot(d.T)
    return TimeSeries(1.0 / dt, y[:, 0], y[:, 1], y[:, 2], y[:, 3])


@dataclass(frozen=True)
class OltfEstimate(object):
    frequency: float
    value: complex
    snr: float
    confident: bool


def _bin(values, times, frequency):
    return np.sum(values * np.exp(-1j * TWO_PI * frequency * times))


def _snr(values, times, frequency, span):
    peak = abs(_bin(values, times, frequency))
    neighbours = [frequency + m / span for m in range(-NOISE_BINS, NOISE_BINS + 1)
                  if m and frequency + m / span > 0]
    noise = math.sqrt(np.mean([abs(_bin(values, times, f)) ** 2 for f in neighbours]))
    if noise == 0:
        return math.inf if peak > 0 else 0.0
    return peak / noise


def estimate_oltf(ts, f_inj, settle=0.0, min_cycles=MIN_CYCLES):
    '''
    Single-bin demodulation of s_a and s_b over the trailing whole number of
    injection cycles after ``settle`` seconds; G = S_a / S_b.

    A signal-to-noise ratio below 3 in either channel (neighbouring bins of
    the same window as the noise floor) marks the estimate as not confident.
    '''
    if not f_inj > 0:
        raise InvalidParameterException("injection frequency must be positive")
    if f_inj >= ts.sample_rate / 2:
        raise InvalidParameterException("injection frequency %g Hz is not resolvable at %g Hz"
                                        % (f_inj, ts.sample_rate))
    start = int(math.ceil(settle * ts.sample_rate - 1e-9))
    per_cycle = ts.sample_rate / f_inj
    available = len(ts) - start
    cycles = int(math.floor(available / per_cycle + 1e-9))
    if cycles < min_cycles:
        raise MeasurementException("only %d injection cycles after settling, need %d" % (cycles, min_cycles))
    window = int(round(cycles * per_cycle))
    sl = slice(len(ts) - window, len(ts))
    times = ts.t[sl]
    span = window / ts.sample_rate

    back = _bin(ts.s_a[sl], times, f_inj)
    forth = _bin(ts.s_b[sl], times, f_inj)
    snr = min(_snr(ts.s_a[sl], times, f_inj, span), _snr(ts.s_b[sl], times, f_inj, span))
    value = back / forth if forth != 0 else complex(np.nan, np.nan)
    confident = bool(snr >= MIN_SNR and np.isfinite(value))
    if not confident:
        log.warning("low-confidence OLTF estimate at %.4g Hz (SNR %.3g)", f_inj, snr)
    return OltfEstimate(f_inj, complex(value), float(snr), confident)


def _measure_point(task):
    loop, frequency, amplitude, noise, cycles, settle, dt_max, seed, phase_noise = task
    sim_seed, read_seed = seed.spawn(2)
    per_cycle = int(math.ceil(1.0 / (frequency * dt_max) - 1e-9))
    dt = 1.0 / (frequency * per_cycle)
    settle_steps = int(math.ceil(settle / dt))
    steps = settle_steps + cycles * per_cycle
    try:
        ts = integrate_dynamics(loop, Drive(amplitude, frequency), noise, steps * dt, dt, sim_seed)
        estimate = estimate_oltf(ts, frequency, settle=settle_steps * dt)
    except PhysicsException as e:
        log.warning("measurement at %.4g Hz failed: %s", frequency, e)
        return ResponsePoint(frequency, complex(np.nan, np.nan), False)
    value = estimate.value
    if phase_noise:
        value *= np.exp(1j * np.radians(np.random.default_rng(read_seed).normal(0.0, phase_noise)))
    log.debug("G(%.4g Hz) = %.6g %+.6gj (SNR %.3g)", frequency, value.real, value.imag, estimate.snr)
    return ResponsePoint(frequency, complex(value), estimate.confident)


def measure_sweep(loop, frequencies, injection_amplitude, noise=None, cycles=10, settle=None,
                  dt=None, seed=None, phase_noise=0.0, jobs=1, power=None, repeat=0):
    '''
    Swept-sine measurement of the open loop transfer function: one simulated
    run per frequency, each demodulated with :func:`estimate_oltf`.

    Frequencies are measured in increasing order; repeated entries are
    independent runs with their own random streams.

    :param settle: discarded start of each run (s); defaults to the loop settling time
    :param phase_noise: standard deviation of read-out phase noise (deg)
    :param jobs: number of worker processes
    :returns: FrequencyResponse
    '''
    frequencies = sorted(float(f) for f in frequencies)
    if not frequencies:
        return FrequencyResponse((), power=power, repeat=repeat)
    if cycles < MIN_CYCLES:
        raise InvalidParameterException("at least %d cycles per point are required" % MIN_CYCLES)
    noise = noise or Noise()
    if settle is None:
        settle = settling_time(loop)
    dt_max = dt or default_time_step(loop, tuple(frequencies) + noise.frequencies())
    seeds = seed_sequence(seed).spawn(len(frequencies))
    tasks = [(loop, f, injection_amplitude, noise, cycles, settle, dt_max, s, phase_noise)
             for f, s in zip(frequencies, seeds)]
    log.info("sweeping %d frequencies (k_ext = %g N/m, settle %.3g s)", len(tasks), loop.k_ext, settle)
    if jobs and jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_measure_point, tasks))
    else:
        points = [_measure_point(task) for task in tasks]
    return FrequencyResponse(tuple(points), power=power, repeat=repeat)
