"""Pure-Python twin of ``_ckernels.pyx``.

Every arithmetic step mirrors the compiled kernel in the same order, so the two
backends agree bit for bit. Slow: fine for tests and short runs only.
"""

import math

import numpy as np

OK = 0
FAIL_D = 1
FAIL_KAPPA = 2
FAIL_OMEGA = 3


class _Params:
    __slots__ = ("lam", "mu", "g", "K", "C0", "C1", "alpha", "beta", "n",
                 "n_int", "kappa_form", "clamp", "ag", "e_mod", "inv_emod",
                 "two_lm", "four_ab", "c", "gc", "coef", "inv_K")

    def __init__(self, p, kappa_form, clamp):
        (self.lam, self.mu, self.g, self.K, self.C0, self.C1,
         self.alpha, self.beta, self.n) = (float(v) for v in p)
        n = self.n
        self.n_int = int(n) if (n == math.floor(n) and 0 <= n < 1000) else -1
        self.kappa_form = int(kappa_form)
        self.clamp = bool(clamp)
        self.ag = abs(self.g)
        self.e_mod = self.lam + 2.0 * self.mu
        self.inv_emod = 1.0 / self.e_mod
        self.two_lm = 2.0 * (self.lam + self.mu)
        self.four_ab = 4.0 * (self.alpha + self.beta)
        self.c = self.g / (2.0 * self.C1)
        self.gc = self.g * self.c
        self.coef = self.ag / (2.0 * self.C1)
        self.inv_K = 1.0 / self.K


def _ipow(x, k):
    r = 1.0
    while k > 0:
        if k & 1:
            r = r * x
        x = x * x
        k = k >> 1
    return r


def _rate(q, w, s):
    lw = q.lam + q.alpha * w
    lw2 = 2.0 * lw * lw
    stiff = q.two_lm + q.four_ab * w
    d = q.e_mod * stiff - lw2
    if d <= 0.0:
        return 0.0, FAIL_D
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
        return 0.0, FAIL_KAPPA
    if q.clamp and f <= 0.0:
        return 0.0, OK
    x = abs(f) * q.inv_K
    if q.n_int >= 0:
        y = _ipow(x, q.n_int)
    else:
        y = math.pow(x, q.n)
    ratio = lw / kap
    if ratio <= 0.0:
        return 0.0, OK
    return q.coef * y * ratio, OK


def _ramp(q, w, s0, s1, substeps, scheme, omega_crit):
    h = (s1 - s0) / substeps
    s = s0
    if h <= 0.0:
        return w, OK
    for i in range(substeps):
        k1, st = _rate(q, w, s)
        if st != OK:
            return w, st
        if scheme == 1:
            k2, st = _rate(q, w + 0.5 * h * k1, s + 0.5 * h)
            if st != OK:
                return w, st
            k3, st = _rate(q, w + 0.5 * h * k2, s + 0.5 * h)
            if st != OK:
                return w, st
            k4, st = _rate(q, w + h * k3, s + h)
            if st != OK:
                return w, st
            w = w + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        else:
            w = w + h * k1
        s = s0 + (i + 1) * h
        if w >= omega_crit:
            return w, FAIL_OMEGA
    _, st = _rate(q, w, s1)
    return w, st


def integrate_ramp(params, omega, s_start, s_end, substeps, scheme,
                   kappa_form, clamp, omega_crit):
    q = _Params(params, kappa_form, clamp)
    return _ramp(q, float(omega), float(s_start), float(s_end), int(substeps),
                 int(scheme), float(omega_crit))


def run_cycles(params, omega, s_lo, s_hi, substeps, max_cycles, scheme,
               kappa_form, clamp, omega_crit):
    q = _Params(params, kappa_form, clamp)
    omega, s_lo, s_hi, omega_crit = float(omega), float(s_lo), float(s_hi), float(omega_crit)
    done = 0
    status = OK
    while done < max_cycles:
        omega, status = _ramp(q, omega, s_lo, s_hi, substeps, scheme, omega_crit)
        if status != OK:
            break
        done += 1
    return done, omega, status


def run_cycles_history(params, omega, s_lo, s_hi, substeps, max_cycles, scheme,
                       kappa_form, clamp, omega_crit):
    q = _Params(params, kappa_form, clamp)
    omega, s_lo, s_hi, omega_crit = float(omega), float(s_lo), float(s_hi), float(omega_crit)
    hist = []
    status = OK
    while len(hist) < max_cycles:
        omega, status = _ramp(q, omega, s_lo, s_hi, substeps, scheme, omega_crit)
        if status != OK:
            break
        hist.append(omega)
    return len(hist), omega, status, np.asarray(hist, dtype=np.float64)


def run_checkpoints(params, omega, s_lo, s_hi, substeps, marks, scheme,
                    kappa_form, clamp, omega_crit):
    q = _Params(params, kappa_form, clamp)
    omega, s_lo, s_hi, omega_crit = float(omega), float(s_lo), float(s_hi), float(omega_crit)
    out = np.full(len(marks), np.nan)
    done = 0
    status = OK
    for j, mark in enumerate(marks):
        while done < mark:
            omega, status = _ramp(q, omega, s_lo, s_hi, substeps, scheme, omega_crit)
            if status != OK:
                break
            done += 1
        if status != OK:
            break
        out[j] = omega
    return out, done, status
