"""Adaptive Dormand-Prince 8(5,3) integration of the spectral ODE.

State ``y = (u, u', v, v')`` with

    u'' = (q(x) - lam) u
    v'' = (q(x) - lam) v + kappa * u

``kappa = 0`` propagates two independent solutions (the fundamental matrix);
``kappa = 1`` propagates an eigenfunction together with a chain partner.
"""
from __future__ import annotations

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

_A = np.ascontiguousarray(_dop.A[:_dop.N_STAGES, :_dop.N_STAGES], dtype=np.float64)
_B = np.ascontiguousarray(_dop.B, dtype=np.float64)
_C = np.ascontiguousarray(_dop.C[:_dop.N_STAGES], dtype=np.float64)
_E3 = np.ascontiguousarray(_dop.E3, dtype=np.float64)
_E5 = np.ascontiguousarray(_dop.E5, dtype=np.float64)
_NS = _dop.N_STAGES

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
MAX_STEPS = 1_000_000

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_UNDERFLOW = 2


@njit(cache=True)
def _q_at(coef, K, x):
    z = np.exp(2j * np.pi * x)
    w = np.conj(z)
    # Horner in z for k >= 0 and in 1/z for k < 0
    pos = 0j
    for k in range(K, -1, -1):
        pos = pos * z + coef[K + k]
    neg = 0j
    for k in range(K, 0, -1):
        neg = neg * w + coef[K - k]
    return pos + neg * w


@njit(cache=True)
def _rhs(coef, K, lam, kappa, x, y, out):
    g = _q_at(coef, K, x) - lam
    out[0] = y[1]
    out[1] = g * y[0]
    out[2] = y[3]
    out[3] = g * y[2] + kappa * y[0]


@njit(cache=True)
def _norm(err, y, ynew, atol, rtol):
    s = 0.0
    for i in range(y.shape[0]):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        s += (abs(err[i]) / sc) ** 2
    return s


@njit(cache=True)
def propagate(coef, K, lam, kappa, y0, x_out, tol, h0, A, B, C, E3, E5):
    """Integrate from 0 through the increasing points ``x_out`` (last must be 1).

    Returns ``(states, n_steps, status)`` with ``states[i]`` the state at
    ``x_out[i]``; steps are clipped so that every output point is a step end.
    """
    n = y0.shape[0]
    ns = B.shape[0]
    states = np.empty((x_out.shape[0], n), dtype=np.complex128)
    Kst = np.empty((ns + 1, n), dtype=np.complex128)
    y = y0.copy()
    f = np.empty(n, dtype=np.complex128)
    ytmp = np.empty(n, dtype=np.complex128)
    ynew = np.empty(n, dtype=np.complex128)
    fnew = np.empty(n, dtype=np.complex128)
    err5 = np.empty(n, dtype=np.complex128)
    err3 = np.empty(n, dtype=np.complex128)
    _rhs(coef, K, lam, kappa, 0.0, y, f)
    x = 0.0
    h = h0
    steps = 0
    iout = 0
    atol = tol
    rtol = tol
    while iout < x_out.shape[0]:
        target = x_out[iout]
        if x >= target:
            for i in range(n):
                states[iout, i] = y[i]
            iout += 1
            continue
        if steps >= MAX_STEPS:
            return states, steps, STATUS_MAX_STEPS
        hstep = h
        clipped = False
        if x + hstep >= target:
            hstep = target - x
            clipped = True
        if hstep < 1e-14:
            return states, steps, STATUS_UNDERFLOW
        # stages
        for i in range(n):
            Kst[0, i] = f[i]
        for s in range(1, ns):
            for i in range(n):
                acc = 0j
                for j in range(s):
                    acc += A[s, j] * Kst[j, i]
                ytmp[i] = y[i] + hstep * acc
            _rhs(coef, K, lam, kappa, x + C[s] * hstep, ytmp, Kst[s])
        for i in range(n):
            acc = 0j
            for j in range(ns):
                acc += B[j] * Kst[j, i]
            ynew[i] = y[i] + hstep * acc
        _rhs(coef, K, lam, kappa, x + hstep, ynew, fnew)
        for i in range(n):
            Kst[ns, i] = fnew[i]
            a5 = 0j
            a3 = 0j
            for j in range(ns + 1):
                a5 += E5[j] * Kst[j, i]
                a3 += E3[j] * Kst[j, i]
            err5[i] = a5
            err3[i] = a3
        e5 = _norm(err5, y, ynew, atol, rtol)
        e3 = _norm(err3, y, ynew, atol, rtol)
        if e5 == 0.0 and e3 == 0.0:
            enorm = 0.0
        else:
            enorm = hstep * e5 / np.sqrt((e5 + 0.01 * e3) * n)
        steps += 1
        if enorm < 1.0:
            if enorm == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * enorm ** (-1.0 / 8.0))
            x = target if clipped else x + hstep
            for i in range(n):
                y[i] = ynew[i]
                f[i] = fnew[i]
            # a clipped step says nothing about the natural step length
            if not clipped or factor < 1.0:
                h = hstep * factor
        else:
            h = hstep * max(MIN_FACTOR, SAFETY * enorm ** (-1.0 / 8.0))
    return states, steps, STATUS_OK


def initial_step(lam: complex, qmax: float) -> float:
    return 0.05 / (1.0 + np.sqrt(abs(lam) + qmax))


def run(coef: np.ndarray, lam: complex, y0: np.ndarray, x_out: np.ndarray, tol: float,
        kappa: complex = 0.0):
    K = (coef.shape[0] - 1) // 2
    h0 = initial_step(lam, float(np.sum(np.abs(coef))))
    return propagate(np.ascontiguousarray(coef, dtype=np.complex128), K, complex(lam), complex(kappa),
                     np.ascontiguousarray(y0, dtype=np.complex128),
                     np.ascontiguousarray(x_out, dtype=np.float64), float(tol), h0,
                     _A, _B, _C, _E3, _E5)
