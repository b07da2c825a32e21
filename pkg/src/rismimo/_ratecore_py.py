"""Pure-numpy evaluation of the closed-form rate expressions.

This is the fallback for the compiled kernel and the single source of truth
for the per-term breakdown.  All expressions are exact expectations over the
Rician fading (verified against brute-force Monte Carlo at the 0.2% level);
arguments are plain arrays so the compiled twin can share the signature.

Shapes: theta (L, N); steer (K, N) with steer[c, n] the unit-modulus LoS
geometry factor so that psi_c = sum_n steer[c, n] * exp(-j theta_n);
los (K, K) with los[k, i] the LoS inner product hbar_k^H hbar_i.
"""
from __future__ import annotations

import numpy as np


def _batch_terms(theta, steer, los, delta, ric_user, ric_bs, m_ant, alpha, p_tx, noise_w):
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    K, N = steer.shape
    M = float(m_ant)
    G = float(ric_bs)
    R = np.asarray(ric_user, dtype=float)
    d = np.asarray(delta, dtype=float)

    psi = np.exp(-1j * theta) @ steer.T                       # (L, K)
    gam = np.abs(psi) ** 2

    # second/fourth moments of one entry of the effective channel f_k
    e2 = d * (G * R * gam + N * (G + R + 1.0))
    e4 = d ** 2 * ((G * R * gam) ** 2
                   + 4.0 * G * R * N * gam * (G + R + 1.0)
                   + 8.0 * G * R * gam
                   + 2.0 * N ** 2 * (G + R + 1.0) ** 2
                   + 2.0 * N * (2.0 * (G + R) + 1.0))

    # E{||f_k||^4}
    x4 = R ** 2 * gam ** 2 + 4.0 * R * N * gam + 2.0 * N ** 2
    xv = R * gam * (N * (R + 1.0) + 2.0) + N * (N * (R + 1.0) + 1.0)
    v2 = N ** 2 * (R + 1.0) ** 2 + N * (2.0 * R + 1.0)
    signal = M * d ** 2 * (M * G ** 2 * x4 + 2.0 * (M + 1.0) * G * xv + (M + 1.0) * v2)
    n_clamped = int((signal < 0.0).sum())
    signal = np.maximum(signal, 0.0)

    # pairwise quantities: cross[l,k,i] = Re{psi_k psi_i^* los[k,i]}
    cross = np.einsum("lk,li,ki->lki", psi, psi.conj(), los).real
    los2 = np.abs(los) ** 2
    gk = gam[:, :, None]
    gi = gam[:, None, :]
    rk = R[:, None]
    ri = R[None, :]
    dk = d[:, None]
    di = d[None, :]

    # E{|f_k^H f_i|^2}
    interference = M * dk * di * (
        M * G ** 2 * rk * ri * gk * gi
        + G * rk * gk * (G * M * N + N * ri + N + 2.0 * M)
        + G * ri * gi * (G * M * N + N * rk + N + 2.0 * M)
        + N ** 2 * (M * G ** 2 + G * (rk + ri + 2.0) + (rk + 1.0) * (ri + 1.0))
        + M * N * (2.0 * G + rk + ri + 1.0)
        + M * rk * ri * los2
        + 2.0 * G * M * rk * ri * cross)
    idx = np.arange(K)
    interference[:, idx, idx] = 0.0
    n_clamped += int((interference < 0.0).sum())
    interference = np.maximum(interference, 0.0)

    # E{|f_km|^2 |f_im|^2}: entries with the same antenna index share one
    # scattering column, so this is not the product of the second moments
    e2x = dk * di * (
        G ** 2 * (rk * gk + N) * (ri * gi + N)
        + G * N * (rk * gk + N) * (ri + 1.0)
        + G * N * (ri * gi + N) * (rk + 1.0)
        + N ** 2 * (rk + 1.0) * (ri + 1.0)
        + rk * ri * los2
        + N * (rk + ri + 1.0)
        + 2.0 * G * (rk * ri * cross + rk * gk + ri * gi + N))
    e2x[:, idx, idx] = 0.0
    n_clamped += int((e2x < 0.0).sum())
    e2x = np.maximum(e2x, 0.0)

    dac_raw = M * (e4 + e2x.sum(axis=2))
    dac = alpha * (1.0 - alpha) * dac_raw
    noise = M * e2.sum(axis=1)
    return signal, interference, dac, noise, dac_raw, n_clamped


def rate_terms(theta, steer, los, delta, ric_user, ric_bs, m_ant, alpha, p_tx, noise_w):
    """Full per-user breakdown for a batch of phase vectors.

    Returns a dict with 'signal' (L,K), 'interference' (L,K,K) zero-diagonal,
    'dac' (L,K), 'noise' (L,), 'sinr' (L,K), 'rates' (L,K), 'sum_rate' (L,),
    plus 'dac_raw' (the quadratic form without the alpha(1-alpha) scale),
    'denominator' and the clamp diagnostic 'n_clamped'.
    """
    signal, interference, dac, noise, dac_raw, n_clamped = _batch_terms(
        theta, steer, los, delta, ric_user, ric_bs, m_ant, alpha, p_tx, noise_w)
    a2p = alpha ** 2 * p_tx
    denom = a2p * interference.sum(axis=2) + p_tx * dac + noise_w * noise[:, None]
    with np.errstate(divide="ignore"):
        sinr = np.where(denom > 0.0, a2p * signal / np.where(denom > 0.0, denom, 1.0), np.inf)
    rates = np.log2(1.0 + sinr)
    L = rates.shape[0]
    return dict(signal=signal, interference=interference, dac=dac, noise=noise,
                sinr=sinr, rates=rates, sum_rate=rates.sum(axis=1), denominator=denom,
                dac_raw=dac_raw, n_clamped=np.full(L, n_clamped))


def sum_rate_batch(theta, steer, los, delta, ric_user, ric_bs, m_ant, alpha, p_tx, noise_w):
    """Sum achievable rate for each row of a (L, N) batch of phase vectors."""
    signal, interference, dac, noise, _, _ = _batch_terms(
        theta, steer, los, delta, ric_user, ric_bs, m_ant, alpha, p_tx, noise_w)
    a2p = alpha ** 2 * p_tx
    denom = a2p * interference.sum(axis=2) + p_tx * dac + noise_w * noise[:, None]
    return np.log2(1.0 + a2p * signal / denom).sum(axis=1)
