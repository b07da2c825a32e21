# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch evaluation of the closed-form sum rate.

Numerically equivalent to _ratecore_py.sum_rate_batch (same formulas, same
clamping); exists because PSO evaluates this expression millions of times.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, log2

cnp.import_array()


def sum_rate_batch(double[:, ::1] theta,
                   double complex[:, ::1] steer,
                   double complex[:, ::1] los,
                   double[::1] delta,
                   double[::1] ric_user,
                   double ric_bs,
                   double m_ant,
                   double alpha,
                   double p_tx,
                   double noise_w):
    cdef Py_ssize_t L = theta.shape[0]
    cdef Py_ssize_t N = theta.shape[1]
    cdef Py_ssize_t K = steer.shape[0]

    out_arr = np.empty(L, dtype=np.float64)
    cdef double[::1] out = out_arr
    psi_re_arr = np.empty(K, dtype=np.float64)
    psi_im_arr = np.empty(K, dtype=np.float64)
    gam_arr = np.empty(K, dtype=np.float64)
    e2_arr = np.empty(K, dtype=np.float64)
    e4_arr = np.empty(K, dtype=np.float64)
    sig_arr = np.empty(K, dtype=np.float64)
    er_arr = np.empty(N, dtype=np.float64)
    ei_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] psi_re = psi_re_arr
    cdef double[::1] psi_im = psi_im_arr
    cdef double[::1] gam = gam_arr
    cdef double[::1] e2 = e2_arr
    cdef double[::1] e4 = e4_arr
    cdef double[::1] sig = sig_arr
    cdef double[::1] er = er_arr
    cdef double[::1] ei = ei_arr

    cdef double M = m_ant
    cdef double G = ric_bs
    cdef double a2p = alpha * alpha * p_tx
    cdef double dac_fac = alpha * (1.0 - alpha) * M

    cdef Py_ssize_t l, n, c, k, i
    cdef double pr, pi, sr, si, g, R, d, x4, xv, v2, e2sum, noise
    cdef double rk, ri, dk, di, gk, gi, tr, ti, lr, li, cross, los2
    cdef double common, iki, ex, isum, xsum, dacq, denom, rsum

    for l in range(L):
        for n in range(N):
            er[n] = cos(theta[l, n])
            ei[n] = -sin(theta[l, n])
        e2sum = 0.0
        for c in range(K):
            pr = 0.0
            pi = 0.0
            for n in range(N):
                sr = steer[c, n].real
                si = steer[c, n].imag
                pr += sr * er[n] - si * ei[n]
                pi += sr * ei[n] + si * er[n]
            psi_re[c] = pr
            psi_im[c] = pi
            g = pr * pr + pi * pi
            gam[c] = g
            R = ric_user[c]
            d = delta[c]
            e2[c] = d * (G * R * g + N * (G + R + 1.0))
            e4[c] = d * d * ((G * R * g) * (G * R * g)
                             + 4.0 * G * R * N * g * (G + R + 1.0)
                             + 8.0 * G * R * g
                             + 2.0 * N * N * (G + R + 1.0) * (G + R + 1.0)
                             + 2.0 * N * (2.0 * (G + R) + 1.0))
            x4 = R * R * g * g + 4.0 * R * N * g + 2.0 * N * N
            xv = R * g * (N * (R + 1.0) + 2.0) + N * (N * (R + 1.0) + 1.0)
            v2 = N * N * (R + 1.0) * (R + 1.0) + N * (2.0 * R + 1.0)
            sig[c] = M * d * d * (M * G * G * x4 + 2.0 * (M + 1.0) * G * xv + (M + 1.0) * v2)
            if sig[c] < 0.0:
                sig[c] = 0.0
            e2sum += e2[c]
        noise = M * e2sum

        rsum = 0.0
        for k in range(K):
            rk = ric_user[k]
            dk = delta[k]
            gk = gam[k]
            isum = 0.0
            xsum = 0.0
            for i in range(K):
                if i == k:
                    continue
                ri = ric_user[i]
                di = delta[i]
                gi = gam[i]
                # psi_k * conj(psi_i)
                tr = psi_re[k] * psi_re[i] + psi_im[k] * psi_im[i]
                ti = psi_im[k] * psi_re[i] - psi_re[k] * psi_im[i]
                lr = los[k, i].real
                li = los[k, i].imag
                cross = tr * lr - ti * li
                los2 = lr * lr + li * li
                common = (M * G * G * rk * ri * gk * gi
                          + G * rk * gk * (G * M * N + N * ri + N + 2.0 * M)
                          + G * ri * gi * (G * M * N + N * rk + N + 2.0 * M)
                          + N * N * (M * G * G + G * (rk + ri + 2.0) + (rk + 1.0) * (ri + 1.0))
                          + M * N * (2.0 * G + rk + ri + 1.0)
                          + M * rk * ri * los2)
                iki = M * dk * di * (common + 2.0 * G * M * rk * ri * cross)
                if iki < 0.0:
                    iki = 0.0
                isum += iki
                ex = dk * di * (G * G * (rk * gk + N) * (ri * gi + N)
                                + G * N * (rk * gk + N) * (ri + 1.0)
                                + G * N * (ri * gi + N) * (rk + 1.0)
                                + N * N * (rk + 1.0) * (ri + 1.0)
                                + rk * ri * los2
                                + N * (rk + ri + 1.0)
                                + 2.0 * G * (rk * ri * cross + rk * gk + ri * gi + N))
                if ex < 0.0:
                    ex = 0.0
                xsum += ex
            dacq = dac_fac * (e4[k] + xsum)
            denom = a2p * isum + p_tx * dacq + noise_w * noise
            rsum += log2(1.0 + a2p * sig[k] / denom)
        out[l] = rsum
    return out_arr
