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
Fixed-step 4th order Runge-Kutta integration of linear time-invariant systems

    dq/dt = A q + B u(t)

One RK4 step is linear in the state and in the input sampled at the start,
the middle and the end of the step:

    q[n+1] = Phi q[n] + G0 u(t_n) + Gm u(t_n + h/2) + G1 u(t_n + h)

so the step matrices are computed once and the recursion is propagated in
the eigenbasis of Phi with scipy.signal.lfilter.
"""
from __future__ import division

import numpy as np
from scipy import linalg
from scipy import signal

from sandwich import logger
from sandwich.errors import DivergenceException

log = logger.getLogger(__name__)

# Eigenvector bases worse than this fall back to the plain recursion.
MAX_MODAL_CONDITION = 1e8


def rk4_step(a, b, h, q, u_start, u_mid, u_end):
    '''
    One classical RK4 step of dq/dt = A q + B u. ``q`` and the inputs may be
    matrices; columns are stepped independently.
    '''
    k1 = a.dot(q) + b.dot(u_start)
    k2 = a.dot(q + 0.5 * h * k1) + b.dot(u_mid)
    k3 = a.dot(q + 0.5 * h * k2) + b.dot(u_mid)
    k4 = a.dot(q + h * k3) + b.dot(u_end)
    return q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step_matrices(a, b, h):
    ''' Returns (Phi, G0, Gm, G1) for a step of length h. '''
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    n, m = b.shape
    eye_n, eye_m = np.eye(n), np.eye(m)
    zero_q, zero_u = np.zeros((n, m)), np.zeros((m, n))
    phi = rk4_step(a, b, h, eye_n, zero_u, zero_u, zero_u)
    g0 = rk4_step(a, b, h, zero_q, eye_m, 0 * eye_m, 0 * eye_m)
    gm = rk4_step(a, b, h, zero_q, 0 * eye_m, eye_m, 0 * eye_m)
    g1 = rk4_step(a, b, h, zero_q, 0 * eye_m, 0 * eye_m, eye_m)
    return phi, g0, gm, g1


def _propagate_loop(phi, w, q0):
    states = np.empty((w.shape[0] + 1, q0.size))
    states[0] = q0
    for i in range(w.shape[0]):
        states[i + 1] = phi.dot(states[i]) + w[i]
    return states


def _propagate_modal(phi, w, q0):
    eigvals, vectors = linalg.eig(phi)
    if np.linalg.cond(vectors) > MAX_MODAL_CONDITION:
        return None
    inverse = linalg.inv(vectors)
    drive = w.dot(inverse.T)
    xi0 = inverse.dot(q0)
    modes = np.empty((w.shape[0] + 1, q0.size), dtype=complex)
    modes[0] = xi0
    for j, lam in enumerate(eigvals):
        modes[1:, j], _ = signal.lfilter([1.0], [1.0, -lam], drive[:, j], zi=[lam * xi0[j]])
    return modes.dot(vectors.T).real


def propagate(phi, w, q0, dt=None):
    '''
    Run q[n+1] = Phi q[n] + w[n] from q[0] = q0.

    :param phi: step matrix (n x n)
    :param w: per-step forcing, shape (steps, n)
    :param q0: initial state
    :param dt: step length, used only to time-stamp a divergence
    :returns: states, shape (steps + 1, n)
    '''
    q0 = np.asarray(q0, dtype=float)
    w = np.asarray(w, dtype=float).reshape(-1, q0.size)
    with np.errstate(over='ignore', invalid='ignore'):
        states = _propagate_modal(phi, w, q0)
        if states is None:
            log.debug("ill-conditioned eigenbasis, propagating step by step")
            states = _propagate_loop(phi, w, q0)

    finite = np.isfinite(states).all(axis=1)
    if not finite.all():
        index = int(np.argmin(finite))
        time = index * dt if dt is not None else None
        raise DivergenceException("simulated state became non-finite at sample %d (t = %s s)"
                                  % (index, "%.6g" % time if time is not None else "?"), time)
    return states
