# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cycle loops for the uniaxial damage model.

Must stay operation-for-operation identical to ``_pykernels.py`` so that both
backends return bit-identical results.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs, floor

cnp.import_array()

cdef enum:
    OK = 0
    FAIL_D = 1
    FAIL_KAPPA = 2
    FAIL_OMEGA = 3

cdef struct Params:
    double lam
    double mu
    double g
    double K
    double C0
    double C1
    double alpha
    double beta
    double n
    int n_int        # n as integer when integral, else -1
    int kappa_form   # 0 threshold, 1 tangent, 2 literal
    int clamp
    # derived constants, computed once per call
    double ag
    double e_mod
    double inv_emod
    double two_lm
    double four_ab
    double c
    double gc
    double coef
    double inv_K


cdef Params _unpack(tuple p, int kappa_form, bint clamp):
    cdef Params q
    q.lam = p[0]
    q.mu = p[1]
    q.g = p[2]
    q.K = p[3]
    q.C0 = p[4]
    q.C1 = p[5]
    q.alpha = p[6]
    q.beta = p[7]
    q.n = p[8]
    if q.n == floor(q.n) and q.n >= 0 and q.n < 1000:
        q.n_int = <int>q.n
    else:
        q.n_int = -1
    q.kappa_form = kappa_form
    q.clamp = clamp
    q.ag = fabs(q.g)
    q.e_mod = q.lam + 2.0 * q.mu
    q.inv_emod = 1.0 / q.e_mod
    q.two_lm = 2.0 * (q.lam + q.mu)
    q.four_ab = 4.0 * (q.alpha + q.beta)
    q.c = q.g / (2.0 * q.C1)
    q.gc = q.g * q.c
    q.coef = q.ag / (2.0 * q.C1)
    q.inv_K = 1.0 / q.K
    return q


cdef inline double _ipow(double x, int k) nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r = r * x
        x = x * x
        k = k >> 1
    return r


cdef inline double _rate(Params* q, double w, double s, int* status) nogil:
    # d(omega)/d(sbar) at (sbar, omega); sets status on tangent singularity
    cdef double lw = q.lam + q.alpha * w
    cdef double lw2 = 2.0 * lw * lw
    cdef double stiff = q.two_lm + q.four_ab * w
    cdef double d = q.e_mod * stiff - lw2
    cdef double e2, e1, f, kap, x, y, ratio
    if d <= 0.0:
        status[0] = FAIL_D
        return 0.0
    e2 = (lw * s + q.ag * w * q.e_mod) / d
    e1 = -(s + 2.0 * lw * e2) * q.inv_emod
    f = q.ag * e2 - (q.C0 + 2.0 * q.C1 * w)
    if q.kappa_form == 0:
        kap = q.e_mod * stiff - q.alpha * q.c * (2.0 * e2 + e1) - q.gc - lw2
    elif q.kappa_form == 1:
        kap = q.e_mod * (stiff - q.alpha * q.c * (2.0 * e2 + e1) - q.gc) - lw2
    else:
        kap = q.e_mod * q.two_lm + q.four_ab * w - q.alpha * q.c * (2.0 * e2 + e1) - q.gc - lw2
    if kap <= 0.0:
        status[0] = FAIL_KAPPA
        return 0.0
    if q.clamp and f <= 0.0:
        return 0.0
    x = fabs(f) * q.inv_K
    if q.n_int >= 0:
        y = _ipow(x, q.n_int)
    else:
        y = pow(x, q.n)
    ratio = lw / kap
    if ratio <= 0.0:
        return 0.0
    return q.coef * y * ratio


cdef double _ramp(Params* q, double w, double s0, double s1, int substeps,
                  int scheme, double omega_crit, int* status) nogil:
    # integrate omega along a monotone stress ramp; unloading accrues nothing
    cdef double h = (s1 - s0) / substeps
    cdef double s = s0
    cdef double k1, k2, k3, k4
    cdef int i
    status[0] = OK
    if h <= 0.0:
        return w
    for i in range(substeps):
        k1 = _rate(q, w, s, status)
        if status[0] != OK:
            return w
        if scheme == 1:
            k2 = _rate(q, w + 0.5 * h * k1, s + 0.5 * h, status)
            if status[0] != OK:
                return w
            k3 = _rate(q, w + 0.5 * h * k2, s + 0.5 * h, status)
            if status[0] != OK:
                return w
            k4 = _rate(q, w + h * k3, s + h, status)
            if status[0] != OK:
                return w
            w = w + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        else:
            w = w + h * k1
        s = s0 + (i + 1) * h
        if w >= omega_crit:
            status[0] = FAIL_OMEGA
            return w
    _rate(q, w, s1, status)
    return w


def integrate_ramp(tuple params, double omega, double s_start, double s_end,
                   int substeps, int scheme, int kappa_form, bint clamp,
                   double omega_crit):
    """Advance damage along one stress ramp. Returns ``(omega, status)``."""
    cdef Params q = _unpack(params, kappa_form, clamp)
    cdef int status = OK
    with nogil:
        omega = _ramp(&q, omega, s_start, s_end, substeps, scheme, omega_crit, &status)
    return omega, status


def run_cycles(tuple params, double omega, double s_lo, double s_hi,
               int substeps, long long max_cycles, int scheme, int kappa_form,
               bint clamp, double omega_crit):
    """Repeat s_lo -> s_hi -> s_lo cycles until failure or ``max_cycles``.

    Returns ``(completed, omega, status)``; a failing cycle is not counted.
    """
    cdef Params q = _unpack(params, kappa_form, clamp)
    cdef int status = OK
    cdef long long done = 0
    with nogil:
        while done < max_cycles:
            omega = _ramp(&q, omega, s_lo, s_hi, substeps, scheme, omega_crit, &status)
            if status != OK:
                break
            done += 1
    return done, omega, status


def run_cycles_history(tuple params, double omega, double s_lo, double s_hi,
                       int substeps, long long max_cycles, int scheme,
                       int kappa_form, bint clamp, double omega_crit):
    """Like :func:`run_cycles` but also returns omega after every completed cycle."""
    cdef Params q = _unpack(params, kappa_form, clamp)
    cdef int status = OK
    cdef long long done = 0
    cdef long long cap = max_cycles if max_cycles < 1024 else 1024
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hist = np.empty(cap, dtype=np.float64)
    cdef double[::1] view = hist
    while done < max_cycles:
        if done == cap:
            cap = cap * 2 if cap * 2 < max_cycles else max_cycles
            hist = np.resize(hist, cap)
            view = hist
        with nogil:
            while done < cap:
                omega = _ramp(&q, omega, s_lo, s_hi, substeps, scheme, omega_crit, &status)
                if status != OK:
                    break
                view[done] = omega
                done += 1
        if status != OK:
            break
    return done, omega, status, hist[:done].copy()


def run_checkpoints(tuple params, double omega, double s_lo, double s_hi,
                    int substeps, cnp.int64_t[::1] marks, int scheme,
                    int kappa_form, bint clamp, double omega_crit):
    """Run up to ``max(marks)`` cycles and record omega at each mark.

    ``marks`` must be non-decreasing. Returns ``(omegas, completed, status)``.
    """
    cdef Params q = _unpack(params, kappa_form, clamp)
    cdef int status = OK
    cdef Py_ssize_t m = marks.shape[0]
    cdef Py_ssize_t j = 0
    cdef long long done = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(m, np.nan)
    cdef double[::1] view = out
    with nogil:
        while j < m:
            while done < marks[j]:
                omega = _ramp(&q, omega, s_lo, s_hi, substeps, scheme, omega_crit, &status)
                if status != OK:
                    break
                done += 1
            if status != OK:
                break
            view[j] = omega
            j += 1
    return out, done, status
